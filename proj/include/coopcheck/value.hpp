#pragma once

#include <string>

#include "coopcheck/model.hpp"

namespace coopcheck {

// Runtime value: a 64-bit integer, a boolean, or an object reference.
// References carry the object id; -1 is Void.
struct Value {
  ValueKind kind = ValueKind::ref_v;
  long long ival = 0;
  bool bval = false;
  int oid = -1;

  static Value make_int(long long v) {
    Value out;
    out.kind = ValueKind::int_v;
    out.ival = v;
    return out;
  }
  static Value make_bool(bool v) {
    Value out;
    out.kind = ValueKind::bool_v;
    out.bval = v;
    return out;
  }
  static Value make_ref(int oid) {
    Value out;
    out.kind = ValueKind::ref_v;
    out.oid = oid;
    return out;
  }
  static Value make_void() { return make_ref(-1); }

  static Value default_for(const TypeRef& type) {
    switch (type.kind) {
      case ValueKind::int_v: return make_int(0);
      case ValueKind::bool_v: return make_bool(false);
      case ValueKind::ref_v: break;
    }
    return make_void();
  }

  bool is_void() const { return kind == ValueKind::ref_v && oid < 0; }

  bool operator==(const Value& other) const {
    if (kind != other.kind) return false;
    switch (kind) {
      case ValueKind::int_v: return ival == other.ival;
      case ValueKind::bool_v: return bval == other.bval;
      case ValueKind::ref_v: return oid == other.oid;
    }
    return false;
  }
  bool operator!=(const Value& other) const { return !(*this == other); }
};

std::string to_string(const Value& v);

}  // namespace coopcheck

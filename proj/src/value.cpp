#include "coopcheck/value.hpp"

namespace coopcheck {

std::string to_string(const Value& v) {
  switch (v.kind) {
    case ValueKind::int_v: return std::to_string(v.ival);
    case ValueKind::bool_v: return v.bval ? "True" : "False";
    case ValueKind::ref_v: break;
  }
  return v.is_void() ? "Void" : "obj" + std::to_string(v.oid);
}

}  // namespace coopcheck

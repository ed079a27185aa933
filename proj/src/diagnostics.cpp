#include "coopcheck/diagnostics.hpp"

#include <sstream>

namespace coopcheck {

const char* to_string(DiagKind kind) {
  switch (kind) {
    case DiagKind::lex_error: return "lex error";
    case DiagKind::parse_error: return "parse error";
    case DiagKind::unsupported_feature: return "unsupported feature";
    case DiagKind::duplicate_class: return "duplicate class";
    case DiagKind::unknown_type: return "unknown type";
    case DiagKind::type_mismatch: return "type mismatch";
    case DiagKind::non_controlled_separate_target:
      return "non-controlled separate target";
    case DiagKind::lowering_error: return "lowering error";
    case DiagKind::warning: return "warning";
  }
  return "diagnostic";
}

std::string Diagnostic::render() const {
  std::ostringstream os;
  if (!loc.file.empty()) os << loc.file << ":";
  if (loc.line > 0) {
    os << loc.line << ":" << loc.column << ": ";
  } else if (!loc.file.empty()) {
    os << " ";
  }
  os << to_string(kind) << ": " << message;
  return os.str();
}

}  // namespace coopcheck

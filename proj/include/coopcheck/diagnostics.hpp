#pragma once

#include <exception>
#include <string>
#include <vector>

namespace coopcheck {

struct SourceLoc {
  std::string file;
  int line = 0;
  int column = 0;
};

enum class DiagKind {
  lex_error,
  parse_error,
  unsupported_feature,
  duplicate_class,
  unknown_type,
  type_mismatch,
  non_controlled_separate_target,
  lowering_error,
  warning,
};

const char* to_string(DiagKind kind);

struct Diagnostic {
  DiagKind kind = DiagKind::parse_error;
  SourceLoc loc;
  std::string message;

  bool is_error() const { return kind != DiagKind::warning; }
  std::string render() const;
};

// Thrown by the lexer/parser/lowering on the first error per input unit;
// parse_program catches per file and aggregates.
class CompileError : public std::exception {
 public:
  explicit CompileError(Diagnostic diag)
      : diag_(std::move(diag)), rendered_(diag_.render()) {}

  const Diagnostic& diag() const { return diag_; }
  const char* what() const noexcept override { return rendered_.c_str(); }

 private:
  Diagnostic diag_;
  std::string rendered_;
};

}  // namespace coopcheck

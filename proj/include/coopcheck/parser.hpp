#pragma once

#include <string>
#include <vector>

#include "coopcheck/ast.hpp"
#include "coopcheck/token.hpp"

namespace coopcheck {

// Parses one source file (one or more class texts). Throws CompileError on
// the first problem in the file.
std::vector<ClassAst> parse_classes(const std::vector<Token>& tokens,
                                    const std::string& file,
                                    std::vector<Diagnostic>* warnings = nullptr);

struct SourceFile {
  std::string name;
  std::string text;
};

struct ParseResult {
  std::vector<ClassAst> classes;
  std::vector<Diagnostic> diagnostics;  // errors and warnings, all files

  bool ok() const {
    for (const auto& d : diagnostics)
      if (d.is_error()) return false;
    return true;
  }
};

// Tokenizes and parses every file, stopping at the first error per file but
// continuing with the remaining files. Duplicate class names across the whole
// input and empty input are reported as errors.
ParseResult parse_program(const std::vector<SourceFile>& files);

}  // namespace coopcheck

#pragma once

#include <string>
#include <vector>

#include "coopcheck/diagnostics.hpp"

namespace coopcheck {

enum class TokenKind {
  keyword,
  identifier,
  integer_literal,
  boolean_literal,
  op,     // := + - * / < <= > >= = /=
  punct,  // ( ) { } [ ] : ; , .
};

struct Token {
  TokenKind kind;
  std::string text;
  int line = 0;
  int column = 0;

  bool is(TokenKind k, const char* t) const { return kind == k && text == t; }
  bool is_keyword(const char* t) const { return is(TokenKind::keyword, t); }
};

bool is_reserved_word(const std::string& word);

// Strips comments (`--` to end of line) and whitespace. Every remaining
// character lands in exactly one token; line/column are 1-based.
std::vector<Token> tokenize(const std::string& source, const std::string& file);

}  // namespace coopcheck

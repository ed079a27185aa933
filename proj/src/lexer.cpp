#include <array>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <string>

#include "coopcheck/token.hpp"

namespace coopcheck {

namespace {

const std::array<const char*, 25> kKeywords = {
    "class", "create", "feature", "do",      "end",       "local",
    "require", "ensure", "if",     "then",   "else",      "from",
    "until", "loop",   "separate", "Current", "Result",   "Void",
    "True",  "False",  "not",      "and",     "or",       "note",
    "invariant",
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  Lexer(const std::string& src, const std::string& file) : src_(src), file_(file) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (!at_end()) {
      skip_blank();
      if (at_end()) break;
      out.push_back(next_token());
    }
    return out;
  }

 private:
  bool at_end() const { return pos_ >= src_.size(); }
  char peek(size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      line_++;
      col_ = 1;
    } else {
      col_++;
    }
    return c;
  }

  void skip_blank() {
    while (!at_end()) {
      char c = peek();
      if (c == '-' && peek(1) == '-') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail(DiagKind kind, const std::string& msg, int line, int col) {
    throw CompileError({kind, {file_, line, col}, msg});
  }

  Token make(TokenKind kind, std::string text, int line, int col) {
    return {kind, std::move(text), line, col};
  }

  Token next_token() {
    int line = line_, col = col_;
    char c = peek();

    if (ident_start(c)) {
      std::string word;
      while (!at_end() && ident_char(peek())) word.push_back(advance());
      if (word == "True" || word == "False")
        return make(TokenKind::boolean_literal, word, line, col);
      for (const char* kw : kKeywords)
        if (word == kw) return make(TokenKind::keyword, word, line, col);
      return make(TokenKind::identifier, word, line, col);
    }

    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string digits;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())))
        digits.push_back(advance());
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))
        fail(DiagKind::unsupported_feature, "real literals are not supported", line, col);
      errno = 0;
      char* end = nullptr;
      (void)std::strtoll(digits.c_str(), &end, 10);
      if (errno == ERANGE || end != digits.c_str() + digits.size())
        fail(DiagKind::lex_error,
             "integer literal '" + digits + "' does not fit a signed 64-bit value",
             line, col);
      return make(TokenKind::integer_literal, digits, line, col);
    }

    switch (c) {
      case '"':
        fail(DiagKind::unsupported_feature, "string literals are not supported", line, col);
      case ':':
        advance();
        if (peek() == '=') {
          advance();
          return make(TokenKind::op, ":=", line, col);
        }
        return make(TokenKind::punct, ":", line, col);
      case '<':
        advance();
        if (peek() == '=') {
          advance();
          return make(TokenKind::op, "<=", line, col);
        }
        return make(TokenKind::op, "<", line, col);
      case '>':
        advance();
        if (peek() == '=') {
          advance();
          return make(TokenKind::op, ">=", line, col);
        }
        return make(TokenKind::op, ">", line, col);
      case '/':
        advance();
        if (peek() == '=') {
          advance();
          return make(TokenKind::op, "/=", line, col);
        }
        return make(TokenKind::op, "/", line, col);
      case '+': case '-': case '*': case '=':
        advance();
        return make(TokenKind::op, std::string(1, c), line, col);
      case '(': case ')': case '{': case '}': case '[': case ']':
      case ';': case ',': case '.':
        advance();
        return make(TokenKind::punct, std::string(1, c), line, col);
      default:
        fail(DiagKind::lex_error,
             "illegal character '" + std::string(1, c) + "'", line, col);
    }
  }

  const std::string& src_;
  std::string file_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

bool is_reserved_word(const std::string& word) {
  if (word == "True" || word == "False") return true;
  for (const char* kw : kKeywords)
    if (word == kw) return true;
  return false;
}

std::vector<Token> tokenize(const std::string& source, const std::string& file) {
  return Lexer(source, file).run();
}

}  // namespace coopcheck

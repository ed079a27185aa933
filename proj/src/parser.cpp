#include <algorithm>
#include <map>
#include <memory>
#include <set>

#include "coopcheck/parser.hpp"

namespace coopcheck {

namespace {

ExprPtr make_expr(Expr e) { return std::make_shared<const Expr>(std::move(e)); }
InstrPtr make_instr(Instruction i) {
  return std::make_shared<const Instruction>(std::move(i));
}

class Parser {
 public:
  Parser(const std::vector<Token>& tokens, std::string file,
         std::vector<Diagnostic>* warnings)
      : toks_(tokens), file_(std::move(file)), warnings_(warnings) {}

  std::vector<ClassAst> run() {
    std::vector<ClassAst> classes;
    skip_semis();
    while (!at_end()) {
      classes.push_back(parse_class());
      skip_semis();
    }
    if (classes.empty())
      fail(DiagKind::parse_error, "input contains no class text", cur_loc());
    return classes;
  }

 private:
  // ---- token plumbing ----

  bool at_end() const { return pos_ >= toks_.size(); }

  const Token& peek(size_t ahead = 0) const {
    static const Token eof{TokenKind::punct, "<end of input>", 0, 0};
    return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : eof;
  }

  const Token& advance() {
    const Token& t = peek();
    if (!at_end()) pos_++;
    return t;
  }

  SourceLoc cur_loc() const {
    // At end of input, point just past the last token instead of 0:0.
    if (at_end() && !toks_.empty()) {
      const Token& last = toks_.back();
      return {file_, last.line, last.column + static_cast<int>(last.text.size())};
    }
    const Token& t = peek();
    return {file_, t.line, t.column};
  }

  SourceLoc loc_of(const Token& t) const { return {file_, t.line, t.column}; }

  [[noreturn]] void fail(DiagKind kind, const std::string& msg,
                         const SourceLoc& loc) {
    throw CompileError({kind, loc, msg});
  }

  [[noreturn]] void expected(const std::string& what) {
    fail(DiagKind::parse_error,
         "expected " + what + ", found '" + peek().text + "'", cur_loc());
  }

  bool check(TokenKind k, const char* text) const { return peek().is(k, text); }
  bool check_keyword(const char* kw) const { return peek().is_keyword(kw); }

  bool match(TokenKind k, const char* text) {
    if (!check(k, text)) return false;
    advance();
    return true;
  }
  bool match_keyword(const char* kw) { return match(TokenKind::keyword, kw); }

  const Token& expect(TokenKind k, const char* text, const char* what) {
    if (!check(k, text)) expected(what);
    return advance();
  }
  void expect_keyword(const char* kw) {
    if (!match_keyword(kw)) expected(std::string("'") + kw + "'");
  }

  std::string expect_identifier(const char* what) {
    if (peek().kind != TokenKind::identifier) expected(what);
    return advance().text;
  }

  void skip_semis() {
    while (match(TokenKind::punct, ";")) {
    }
  }

  void reject_unsupported_name(const std::string& name, const SourceLoc& loc) {
    if (name == "old")
      fail(DiagKind::unsupported_feature, "old expressions are not supported", loc);
    if (name == "agent")
      fail(DiagKind::unsupported_feature, "agents are not supported", loc);
  }

  // ---- classes ----

  ClassAst parse_class() {
    if (check_keyword("note")) skip_note_block();
    const Token& kw = peek();
    expect_keyword("class");
    ClassAst cls;
    cls.loc = loc_of(kw);
    cls.name = expect_identifier("class name");

    if (check(TokenKind::punct, "["))
      fail(DiagKind::unsupported_feature, "generic classes are not supported",
           cur_loc());
    if (peek().kind == TokenKind::identifier && peek().text == "inherit")
      fail(DiagKind::unsupported_feature, "inheritance is not supported",
           cur_loc());

    if (match_keyword("create")) {
      cls.creation_procs.push_back(expect_identifier("creation procedure name"));
      while (match(TokenKind::punct, ","))
        cls.creation_procs.push_back(expect_identifier("creation procedure name"));
    }

    while (check_keyword("feature")) parse_feature_block(cls);

    if (check_keyword("invariant")) {
      SourceLoc loc = cur_loc();
      advance();
      while (!check_keyword("end")) parse_assertion_clause();
      if (warnings_)
        warnings_->push_back({DiagKind::warning, loc,
                              "class invariant in " + cls.name +
                                  " is not checked and was discarded"});
    }

    expect_keyword("end");
    check_class(cls);
    return cls;
  }

  void skip_note_block() {
    advance();  // note
    while (peek().kind == TokenKind::identifier &&
           peek(1).is(TokenKind::punct, ":")) {
      advance();
      advance();
      parse_note_value();
      while (match(TokenKind::punct, ",")) parse_note_value();
      skip_semis();
    }
  }

  void parse_note_value() {
    const Token& t = peek();
    if (t.kind == TokenKind::identifier || t.kind == TokenKind::integer_literal ||
        t.kind == TokenKind::boolean_literal) {
      advance();
      return;
    }
    expected("note value");
  }

  void parse_feature_block(ClassAst& cls) {
    expect_keyword("feature");
    if (match(TokenKind::punct, "{")) {  // export list, accepted and ignored
      do {
        if (peek().kind != TokenKind::identifier) expected("class name");
        advance();
      } while (match(TokenKind::punct, ","));
      expect(TokenKind::punct, "}", "'}'");
    }
    skip_semis();
    while (!at_end() && !check_keyword("feature") && !check_keyword("end") &&
           !check_keyword("invariant")) {
      parse_feature_decl(cls);
      skip_semis();
    }
  }

  // Attribute groups (`a, b: T`) and routines share a leading name; the shape
  // after it decides which one we are looking at.
  void parse_feature_decl(ClassAst& cls) {
    SourceLoc start = cur_loc();
    std::vector<std::string> names;
    names.push_back(expect_identifier("feature name"));
    while (match(TokenKind::punct, ",")) names.push_back(expect_identifier("feature name"));

    if (names.size() > 1) {
      expect(TokenKind::punct, ":", "':' after attribute names");
      TypeAnnot type = parse_type();
      for (const auto& n : names) cls.attributes.push_back({n, type, start});
      return;
    }

    FeatureAst routine;
    routine.name = names[0];
    routine.loc = start;

    if (match(TokenKind::punct, "(")) {
      parse_param_groups(routine.formals, ")");
      expect(TokenKind::punct, ")", "')'");
    }

    bool had_type = false;
    TypeAnnot type;
    if (match(TokenKind::punct, ":")) {
      type = parse_type();
      had_type = true;
    }

    bool is_routine = check_keyword("do") || check_keyword("require") ||
                      check_keyword("local") || !routine.formals.empty();
    if (!is_routine) {
      if (!had_type) expected("':' or routine body");
      cls.attributes.push_back({routine.name, type, start});
      return;
    }

    if (had_type) routine.return_type = type;

    if (match_keyword("require"))
      while (!check_keyword("local") && !check_keyword("do"))
        routine.require_clauses.push_back(parse_assertion_clause());

    if (match_keyword("local"))
      while (!check_keyword("do")) parse_param_groups_line(routine.locals);

    expect_keyword("do");
    routine.body = parse_instructions({"ensure", "end"});

    if (match_keyword("ensure"))
      while (!check_keyword("end"))
        routine.ensure_clauses.push_back(parse_assertion_clause());

    expect_keyword("end");
    cls.routines.push_back(std::move(routine));
  }

  // name (',' name)* ':' type
  void parse_param_groups_line(std::vector<Param>& out) {
    SourceLoc start = cur_loc();
    std::vector<std::string> names;
    names.push_back(expect_identifier("entity name"));
    while (match(TokenKind::punct, ",")) names.push_back(expect_identifier("entity name"));
    expect(TokenKind::punct, ":", "':' after entity names");
    TypeAnnot type = parse_type();
    for (const auto& n : names) out.push_back({n, type, start});
    skip_semis();
  }

  void parse_param_groups(std::vector<Param>& out, const char* terminator) {
    if (check(TokenKind::punct, terminator)) return;
    parse_param_groups_line(out);
    while (!check(TokenKind::punct, terminator)) parse_param_groups_line(out);
  }

  TypeAnnot parse_type() {
    TypeAnnot type;
    type.loc = cur_loc();
    if (match_keyword("separate")) type.separate = true;
    type.base = expect_identifier("type name");
    if (type.separate && !type.is_reference())
      fail(DiagKind::parse_error, type.base + " cannot be separate", type.loc);
    return type;
  }

  AssertionClause parse_assertion_clause() {
    AssertionClause clause;
    clause.loc = cur_loc();
    if (peek().kind == TokenKind::identifier &&
        peek(1).is(TokenKind::punct, ":")) {
      clause.tag = advance().text;
      advance();
    }
    clause.expr = parse_expr();
    skip_semis();
    return clause;
  }

  // ---- instructions ----

  std::vector<InstrPtr> parse_instructions(std::initializer_list<const char*> stop) {
    std::vector<InstrPtr> out;
    skip_semis();
    auto stopped = [&] {
      for (const char* kw : stop)
        if (check_keyword(kw)) return true;
      return at_end();
    };
    while (!stopped()) {
      out.push_back(parse_instruction());
      skip_semis();
    }
    return out;
  }

  InstrPtr parse_instruction() {
    SourceLoc loc = cur_loc();

    if (match_keyword("create")) {
      CreateInstr create;
      create.target = expect_identifier("creation target");
      expect(TokenKind::punct, ".", "'.' and an explicit creation procedure");
      create.creation_proc = expect_identifier("creation procedure name");
      if (match(TokenKind::punct, "(")) {
        create.args = parse_args();
        expect(TokenKind::punct, ")", "')'");
      }
      return make_instr({std::move(create), loc});
    }

    if (match_keyword("if")) {
      IfInstr branch;
      branch.condition = parse_expr();
      expect_keyword("then");
      branch.then_branch = parse_instructions({"else", "end"});
      if (match_keyword("else")) branch.else_branch = parse_instructions({"end"});
      expect_keyword("end");
      return make_instr({std::move(branch), loc});
    }

    if (match_keyword("from")) {
      LoopInstr loop;
      loop.init = parse_instructions({"until"});
      expect_keyword("until");
      loop.until = parse_expr();
      expect_keyword("loop");
      loop.body = parse_instructions({"end"});
      expect_keyword("end");
      return make_instr({std::move(loop), loc});
    }

    if (match_keyword("Result")) {
      expect(TokenKind::op, ":=", "':=' after Result");
      AssignInstr assign;
      assign.to_result = true;
      assign.value = parse_expr();
      return make_instr({std::move(assign), loc});
    }

    if (peek().kind == TokenKind::identifier) {
      ExprPtr chain = parse_postfix(parse_primary());
      if (check(TokenKind::op, ":=")) {
        advance();
        const auto* name = std::get_if<NameExpr>(&chain->node);
        if (!name || name->has_args) {
          if (std::holds_alternative<QualifiedCall>(chain->node))
            fail(DiagKind::unsupported_feature, "assigner calls are not supported", loc);
          fail(DiagKind::parse_error, "assignment target must be a name", loc);
        }
        AssignInstr assign;
        assign.target = name->name;
        assign.value = parse_expr();
        return make_instr({std::move(assign), loc});
      }
      if (const auto* name = std::get_if<NameExpr>(&chain->node)) {
        CallInstr call;
        call.feature = name->name;
        call.args = name->args;
        return make_instr({std::move(call), loc});
      }
      if (const auto* qual = std::get_if<QualifiedCall>(&chain->node)) {
        CallInstr call;
        call.target = qual->target;
        call.feature = qual->feature;
        call.args = qual->args;
        return make_instr({std::move(call), loc});
      }
      fail(DiagKind::parse_error, "expected an instruction", loc);
    }

    expected("an instruction");
  }

  // ---- expressions ----
  // not > * / > + - > comparisons > and > or, all left-associative.

  std::vector<ExprPtr> parse_args() {
    std::vector<ExprPtr> args;
    if (check(TokenKind::punct, ")")) return args;
    args.push_back(parse_expr());
    while (match(TokenKind::punct, ",")) args.push_back(parse_expr());
    return args;
  }

  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    while (check_keyword("or")) {
      SourceLoc loc = cur_loc();
      advance();
      if (check_keyword("else"))
        fail(DiagKind::unsupported_feature, "'or else' is not supported", cur_loc());
      lhs = make_expr({BinaryExpr{"or", lhs, parse_and()}, loc});
    }
    return lhs;
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_comparison();
    while (check_keyword("and")) {
      SourceLoc loc = cur_loc();
      advance();
      if (check_keyword("then"))
        fail(DiagKind::unsupported_feature, "'and then' is not supported", cur_loc());
      lhs = make_expr({BinaryExpr{"and", lhs, parse_comparison()}, loc});
    }
    return lhs;
  }

  bool check_any_op(std::initializer_list<const char*> ops) const {
    if (peek().kind != TokenKind::op) return false;
    for (const char* op : ops)
      if (peek().text == op) return true;
    return false;
  }

  ExprPtr parse_comparison() {
    ExprPtr lhs = parse_additive();
    while (check_any_op({"<", "<=", ">", ">=", "=", "/="})) {
      SourceLoc loc = cur_loc();
      std::string op = advance().text;
      lhs = make_expr({BinaryExpr{op, lhs, parse_additive()}, loc});
    }
    return lhs;
  }

  ExprPtr parse_additive() {
    ExprPtr lhs = parse_multiplicative();
    while (check_any_op({"+", "-"})) {
      SourceLoc loc = cur_loc();
      std::string op = advance().text;
      lhs = make_expr({BinaryExpr{op, lhs, parse_multiplicative()}, loc});
    }
    return lhs;
  }

  ExprPtr parse_multiplicative() {
    ExprPtr lhs = parse_unary();
    while (check_any_op({"*", "/"})) {
      SourceLoc loc = cur_loc();
      std::string op = advance().text;
      lhs = make_expr({BinaryExpr{op, lhs, parse_unary()}, loc});
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (check_keyword("not")) {
      SourceLoc loc = cur_loc();
      advance();
      return make_expr({UnaryExpr{"not", parse_unary()}, loc});
    }
    return parse_postfix(parse_primary());
  }

  ExprPtr parse_primary() {
    SourceLoc loc = cur_loc();
    const Token& t = peek();

    switch (t.kind) {
      case TokenKind::integer_literal: {
        advance();
        return make_expr({IntLit{std::stoll(t.text)}, loc});
      }
      case TokenKind::boolean_literal: {
        advance();
        return make_expr({BoolLit{t.text == "True"}, loc});
      }
      case TokenKind::keyword: {
        if (match_keyword("Void")) return make_expr({VoidLit{}, loc});
        if (match_keyword("Current")) return make_expr({CurrentLit{}, loc});
        if (match_keyword("Result")) return make_expr({ResultLit{}, loc});
        expected("an expression");
      }
      case TokenKind::identifier: {
        reject_unsupported_name(t.text, loc);
        NameExpr name;
        name.name = advance().text;
        if (match(TokenKind::punct, "(")) {
          name.has_args = true;
          name.args = parse_args();
          expect(TokenKind::punct, ")", "')'");
        }
        return make_expr({std::move(name), loc});
      }
      case TokenKind::punct: {
        if (match(TokenKind::punct, "(")) {
          ExprPtr inner = parse_expr();
          expect(TokenKind::punct, ")", "')'");
          return inner;
        }
        expected("an expression");
      }
      default:
        expected("an expression");
    }
  }

  ExprPtr parse_postfix(ExprPtr expr) {
    while (check(TokenKind::punct, ".")) {
      SourceLoc loc = cur_loc();
      advance();
      QualifiedCall call;
      call.target = expr;
      call.feature = expect_identifier("feature name after '.'");
      if (match(TokenKind::punct, "(")) {
        call.args = parse_args();
        expect(TokenKind::punct, ")", "')'");
      }
      expr = make_expr({std::move(call), loc});
    }
    return expr;
  }

  // ---- class-level checks ----

  void check_class(const ClassAst& cls) {
    std::map<std::string, SourceLoc> seen;
    auto declare = [&](const std::string& name, const SourceLoc& loc) {
      auto [it, fresh] = seen.emplace(name, loc);
      if (!fresh)
        fail(DiagKind::parse_error,
             "duplicate feature name '" + name + "' in class " + cls.name, loc);
    };
    for (const auto& a : cls.attributes) declare(a.name, a.loc);
    for (const auto& r : cls.routines) declare(r.name, r.loc);

    for (const auto& proc : cls.creation_procs)
      if (!cls.find_routine(proc))
        fail(DiagKind::parse_error,
             "creation procedure '" + proc + "' is not a routine of class " +
                 cls.name,
             cls.loc);

    for (const auto& r : cls.routines) {
      std::set<std::string> local_names;
      auto declare_entity = [&](const Param& p, const char* what) {
        if (!local_names.insert(p.name).second ||
            cls.find_attribute(p.name) != nullptr)
          fail(DiagKind::parse_error,
               std::string(what) + " '" + p.name + "' in " + cls.name + "." +
                   r.name + " shadows another name",
               p.loc);
      };
      for (const auto& p : r.formals) declare_entity(p, "formal");
      for (const auto& p : r.locals) declare_entity(p, "local");
    }
  }

  const std::vector<Token>& toks_;
  std::string file_;
  std::vector<Diagnostic>* warnings_;
  size_t pos_ = 0;
};

}  // namespace

const FeatureAst* ClassAst::find_routine(const std::string& name) const {
  for (const auto& r : routines)
    if (r.name == name) return &r;
  return nullptr;
}

const AttributeAst* ClassAst::find_attribute(const std::string& name) const {
  for (const auto& a : attributes)
    if (a.name == name) return &a;
  return nullptr;
}

std::vector<ClassAst> parse_classes(const std::vector<Token>& tokens,
                                    const std::string& file,
                                    std::vector<Diagnostic>* warnings) {
  return Parser(tokens, file, warnings).run();
}

ParseResult parse_program(const std::vector<SourceFile>& files) {
  ParseResult result;
  if (files.empty()) {
    result.diagnostics.push_back(
        {DiagKind::parse_error, {}, "no input files"});
    return result;
  }
  std::map<std::string, std::string> owner;  // class name -> file
  for (const auto& file : files) {
    try {
      auto tokens = tokenize(file.text, file.name);
      auto classes = parse_classes(tokens, file.name, &result.diagnostics);
      for (auto& cls : classes) {
        auto [it, fresh] = owner.emplace(cls.name, file.name);
        if (!fresh) {
          result.diagnostics.push_back(
              {DiagKind::duplicate_class, cls.loc,
               "class " + cls.name + " already defined in " + it->second});
          continue;
        }
        result.classes.push_back(std::move(cls));
      }
    } catch (const CompileError& e) {
      result.diagnostics.push_back(e.diag());
    }
  }
  return result;
}

}  // namespace coopcheck

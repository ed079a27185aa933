#pragma once

#include <map>
#include <string>
#include <vector>

#include "coopcheck/ast.hpp"
#include "coopcheck/model.hpp"

namespace coopcheck {

// First lowering pass: class and routine signatures only, so bodies can be
// checked against callees in any declaration order.
struct RoutineSig {
  std::string name;
  std::vector<TypeAnnot> formal_types;
  std::optional<TypeAnnot> return_type;
  bool is_creation = false;
  bool synthesized_getter = false;
};

struct ClassInfo {
  std::string name;
  std::vector<std::pair<std::string, TypeAnnot>> attributes;
  std::map<std::string, RoutineSig> routines;  // includes attribute getters
};

struct SymbolTable {
  std::map<std::string, ClassInfo> classes;
  const ClassInfo* find(const std::string& name) const {
    auto it = classes.find(name);
    return it == classes.end() ? nullptr : &it->second;
  }
};

// Throws CompileError on the first problem (unknown type, duplicate names are
// already parser territory).
SymbolTable collect_signatures(const std::vector<ClassAst>& classes);

// Lowers the whole program. `root` is "CLASS.procedure"; the procedure must be
// a creation procedure without formals. Throws CompileError.
ModelProgram lower_program(const std::vector<ClassAst>& classes,
                           const std::string& root);

}  // namespace coopcheck

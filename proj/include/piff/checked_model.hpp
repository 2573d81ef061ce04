#pragma once

#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "piff/ast.hpp"
#include "piff/rational.hpp"

namespace piff {

struct EnumTypeInfo {
  std::string name;
  std::vector<std::string> values;
  std::map<std::string, int> value_idx;
};

struct AttrInfo {
  std::string name;
  int type = -1; // index into enum_types
};

// Runtime value of an expression: a boolean, an exact rational, or an
// enumeration member.
struct Value {
  enum class Kind { Bool, Rat, Enum };
  Kind kind = Kind::Bool;
  bool b = false;
  Rational rat;
  int enum_type = -1;
  int enum_val = -1;

  static Value boolean(bool v) {
    Value x;
    x.kind = Kind::Bool;
    x.b = v;
    return x;
  }
  static Value rational(Rational r) {
    Value x;
    x.kind = Kind::Rat;
    x.rat = std::move(r);
    return x;
  }
  static Value enumv(int type, int val) {
    Value x;
    x.kind = Kind::Enum;
    x.enum_type = type;
    x.enum_val = val;
    return x;
  }
  bool operator==(const Value& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
      case Kind::Bool: return b == o.b;
      case Kind::Rat: return rat == o.rat;
      case Kind::Enum: return enum_type == o.enum_type && enum_val == o.enum_val;
    }
    return false;
  }
};

// A total assignment of attribute values, indices aligned with
// CheckedModel::attrs declaration order.
struct Store {
  std::vector<int> vals;
  auto operator<=>(const Store&) const = default;
};

// Validated model: the AST plus resolved symbol tables, evaluated constant
// bindings and the resolved initial population.
struct CheckedModel {
  std::shared_ptr<const ModelAST> ast;

  std::vector<EnumTypeInfo> enum_types;
  std::map<std::string, int> enum_type_idx;
  std::map<std::string, std::pair<int, int>> enum_value_idx; // globally unique value names
  std::vector<AttrInfo> attrs;
  std::map<std::string, int> attr_idx;
  std::map<std::string, Value> consts;
  std::map<std::string, const FuncDecl*> funcs;
  std::map<std::string, const UpdateDecl*> updates;
  std::vector<const StateEq*> states;
  std::map<std::string, int> state_idx;

  long init_total = 0;
  std::vector<std::tuple<int, Store, long>> init_entries; // (state, store, count)

  // Unique action-occurrence ids in source order, assigned by annotate_actions.
  std::vector<std::vector<int>> annotations; // [state][summand], 0 until assigned
  bool annotated = false;

  const std::string& enum_value_name(int type, int val) const {
    return enum_types[type].values[val];
  }
  std::string store_text(const Store& s) const; // "loc=A" / "a=X&b=Y"
  std::string value_text(const Value& v) const;
};

struct ValidateResult {
  std::optional<CheckedModel> model;
  DiagnosticList diags;
};

// Name resolution, type checks, exhaustive guard/predicate/update evaluation
// over all stores. Total: never throws, reports everything it finds.
// Takes ownership of a mutable tree: name resolution is written into the
// expression nodes, after which the tree is held const by CheckedModel.
ValidateResult validate_model(std::shared_ptr<ModelAST> ast);

// Assigns each summand's action a unique occurrence id (source order,
// starting at 1). Idempotent.
void annotate_actions(CheckedModel& model);

} // namespace piff

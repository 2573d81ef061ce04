#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "piff/diagnostics.hpp"
#include "piff/rational.hpp"

namespace piff {

// Expression nodes are shared by guards, communication predicates, constant
// definitions, update right-hand sides and function bodies; the validator
// restricts which kinds may appear where.
enum class ExprKind { BoolLit, Number, Ident, MyAttr, Call, Cmp, Not, And, Frc };
enum class CmpOp { Eq, Ne, Le, Lt, Ge, Gt };

// Filled in by validation; parsing leaves identifiers unresolved.
enum class NameRes { Unresolved, Param, EnumValue, Const, Attr, State };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  ExprKind kind;
  SourcePos pos;

  bool bval = false;             // BoolLit
  Rational num;                  // Number (exact value)
  std::string text;              // Number: verbatim spelling for printing
  std::string name;              // Ident / MyAttr / Call callee / Frc state argument
  CmpOp cmp = CmpOp::Eq;         // Cmp
  std::vector<ExprPtr> args;     // Call args; Cmp/And: [lhs, rhs]; Not: [e]; Frc predicate: [e]

  NameRes res = NameRes::Unresolved;
  int res_a = -1; // Param: index | EnumValue: type idx | Attr: attr idx | State: state idx
  int res_b = -1; // EnumValue: value idx
};

ExprPtr clone(const Expr& e);
bool equal(const Expr& a, const Expr& b); // structural, ignores positions/resolution

// Restricted probability expression of a state-equation summand:
// constant, constant * frc-term, or a bare frc-term.
struct ProbExpr {
  ExprPtr coeff; // Number or const Ident; null means 1
  ExprPtr frc;   // Frc node or null
};

struct Action {
  bool is_output = true; // outputs write the outbox, inputs consume one
  std::string label;
  ExprPtr pred;
  std::string update;
  SourcePos pos;
};

struct Summand {
  bool is_rest = false;
  ExprPtr guard;  // null for rest
  ProbExpr prob;  // empty for rest
  Action action;
  std::string target;
  SourcePos pos;
};

struct StateEq {
  std::string name;
  std::vector<Summand> summands;
  SourcePos pos;
};

struct AttrTypeDecl {
  std::string name;
  std::vector<std::string> values;
  SourcePos pos;
};

struct ConstDecl {
  std::string name;
  ExprPtr value; // constant arithmetic over literals, earlier consts, enum values
  SourcePos pos;
};

struct AttrDecl {
  std::string name;
  std::string type;
  SourcePos pos;
};

struct CaseRow {
  std::vector<std::string> keys; // one enum value name per parameter
  ExprPtr value;
  SourcePos pos;
};

struct FuncDecl {
  std::string name;
  std::vector<std::pair<std::string, std::string>> params; // (name, attype)
  std::string result_type; // attype name, or "float" for probability functions
  ExprPtr body;            // single-expression body, or
  std::vector<CaseRow> rows; // case table (exactly one of body/rows present)
  SourcePos pos;
  bool is_prob() const { return result_type == "float"; }
};

struct UpdateBranch {
  std::vector<std::pair<std::string, ExprPtr>> assigns; // my.attr := expr
  ExprPtr prob;
  SourcePos pos;
};

struct UpdateDecl {
  std::string name;
  std::vector<UpdateBranch> branches;
  SourcePos pos;
};

struct InitEntry {
  std::string state;
  std::vector<std::pair<std::string, std::string>> assigns; // attr = enum value
  long count = 0;
  SourcePos pos;
};

struct InitDecl {
  long total = 0;
  std::vector<InitEntry> entries;
  SourcePos pos;
};

struct ModelAST {
  std::string source_name;
  std::vector<AttrTypeDecl> attr_types;
  std::vector<ConstDecl> consts;
  std::vector<AttrDecl> attributes;
  std::vector<FuncDecl> funcs;
  std::vector<UpdateDecl> updates;
  std::vector<StateEq> states;
  std::optional<InitDecl> init;
};

bool equal(const ModelAST& a, const ModelAST& b);

// Reconstructs concrete syntax; parse(print(ast)) is structurally identical.
std::string print_model(const ModelAST& ast);

struct ParseResult {
  std::optional<ModelAST> ast; // present when no errors occurred
  DiagnosticList diags;
};

ParseResult parse_model(std::string_view source, std::string file_name);

} // namespace piff

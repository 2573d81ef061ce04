#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "piff/diagnostics.hpp"
#include "piff/quadform.hpp"

namespace piff {

// Action definition: an occupancy polynomial built from constants and
// fractions of flat states. Kept as the tree the translator produced so the
// textual form stays readable; normalization happens via flat_expr_poly.
struct FFExpr {
  enum class K { Const, FrcSum, Add, Sub, Mul };
  K k = K::Const;
  Rational c;                // Const
  std::vector<int> members;  // FrcSum: ascending flat-state indices
  std::vector<FFExpr> kids;  // Add/Mul: n-ary, Sub: binary

  static FFExpr constant(Rational r);
  static FFExpr frc_sum(std::vector<int> idx);
  static FFExpr add(std::vector<FFExpr> kids);
  static FFExpr sub(FFExpr lhs, FFExpr rhs);
  static FFExpr mul(FFExpr lhs, FFExpr rhs);
};

RawPoly flat_expr_poly(const FFExpr& e, int dim);

struct FlatSummand {
  int action = -1;
  int target = -1;
  friend bool operator==(const FlatSummand&, const FlatSummand&) = default;
};

struct FlatState {
  std::string name;
  // populated when the name (or the producing translator) identifies the
  // agent state and store; label files hard-fail on absent fields they need
  std::optional<std::string> agent;
  std::optional<std::map<std::string, std::string>> store;
  std::vector<FlatSummand> summands;
};

struct FlatAction {
  std::string name;
  FFExpr def;
};

struct FlatSpec {
  std::vector<FlatState> states;
  std::vector<FlatAction> actions;
  std::map<std::string, int> state_idx;
  std::map<std::string, int> action_idx;
  std::vector<std::pair<int, long>> init; // (flat state, agent count)

  long population() const {
    long n = 0;
    for (const auto& [s, c] : init) n += c;
    return n;
  }
};

// Render as the textual exchange format: action definitions, state equations,
// init line. Deterministic; parse_ff(print_ff(s)) reproduces s byte for byte.
std::string print_ff(const FlatSpec& spec);
std::string ffexpr_text(const FFExpr& e, const FlatSpec& spec);

struct FFParseResult {
  std::optional<FlatSpec> spec;
  DiagnosticList diags;
};

FFParseResult parse_ff(std::string_view source, std::string file_name);

} // namespace piff

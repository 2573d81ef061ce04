#pragma once

// Transition matrix function K(m) of the flat population model: one QuadForm
// per (row, column) pair, exact in the occupancy variables. Built once from a
// FlatSpec and read-only afterwards.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <json.hpp>
#include "piff/diagnostics.hpp"
#include "piff/flatspec.hpp"
#include "piff/quadform.hpp"

namespace piff {

// atomic propositions per state, each list sorted; empty outer vector means
// "no labelling attached yet"
using LabelMap = std::vector<std::vector<std::string>>;

struct MatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MatrixEntry {
  QuadForm form;
  // whether the entry summed from raw definitions with nonnegative
  // coefficients; when false, nonnegativity needs a sampled check
  bool raw_nonneg = true;
};

struct PolyMatrix {
  std::vector<std::string> states;
  std::map<std::string, int> state_idx;
  // optional per-state origin info, carried along for labelling
  std::vector<std::optional<std::string>> agent;
  std::vector<std::optional<std::map<std::string, std::string>>> store;
  std::vector<std::pair<int, long>> init; // (state, count); empty if unknown
  LabelMap labels;                        // empty if unlabelled
  std::vector<std::map<int, MatrixEntry>> rows;

  int dim() const { return static_cast<int>(states.size()); }
  // entry as a value; absent entries are the zero form
  QuadForm at(int r, int c) const;
};

// sums each state's action definitions by target; throws MatrixError when a
// definition exceeds degree 2, naming the offending action
PolyMatrix build_matrix(const FlatSpec& spec);

// row sums must equal the constant-one form and all entries must be
// nonnegative on the simplex; violations are reported, never thrown
DiagnosticList check_stochasticity(const PolyMatrix& m);

// numeric instantiation at an occupancy vector; throws MatrixError if the
// point is off the simplex or a row sum strays beyond 1e-12
Eigen::MatrixXd eval_matrix(const PolyMatrix& m, const std::vector<double>& mu);
std::vector<std::vector<Rational>> eval_matrix_exact(const PolyMatrix& m,
                                                     const std::vector<Rational>& mu);

// canonical sum of row z over the column set q (duplicates ignored)
QuadForm class_row_sum(const PolyMatrix& m, int z, const std::vector<int>& q);

nlohmann::json matrix_to_json(const PolyMatrix& m);
PolyMatrix matrix_from_json(const nlohmann::json& j); // throws MatrixError

// Render a matrix back as a flat spec, one action per entry. Entries are
// emitted in the simplest shape that canonicalizes to the same form:
// a plain constant, weighted fraction sums, or literal quadratic monomials.
// build_matrix(spec_from_matrix(m)) reproduces m entrywise.
FlatSpec spec_from_matrix(const PolyMatrix& m);

} // namespace piff

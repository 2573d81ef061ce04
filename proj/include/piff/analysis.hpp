#pragma once

// Deterministic analyses of a population matrix: the occupancy recurrence
// mu(t+1) = mu(t) K(mu(t)), the conditional law of a single tagged agent
// carried along that flow, and bounded-time PCTL checking of the tagged
// agent's inhomogeneous chain.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "piff/diagnostics.hpp"
#include "piff/polymatrix.hpp"
#include "piff/rational.hpp"

namespace piff {

struct AnalysisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rows are time points 0..steps, columns the states of m. Small numeric
// drift of the row sums is renormalized away; drift beyond 1e-9 aborts.
Eigen::MatrixXd meanfield_trajectory(const PolyMatrix& m, const std::vector<double>& mu0,
                                     int steps);

// One exact step of the same recurrence, for oracles and cross-checks.
std::vector<Rational> meanfield_step_exact(const PolyMatrix& m,
                                           const std::vector<Rational>& mu);

// Law h(t) of one agent started in `start`, with h(t+1) = h(t) K(mu(t)).
// Rows are time points 0..steps.
Eigen::MatrixXd fast_simulation(const PolyMatrix& m, const std::vector<double>& mu0,
                                int start, int steps);

// --- bounded PCTL over the tagged agent ------------------------------------

enum class PctlCmp { Le, Lt, Ge, Gt };

struct PctlNode {
  enum class Kind { True, False, Ap, Not, And, Next, Until, Prob };
  Kind kind = Kind::True;
  std::string ap;     // Ap
  int a = -1, b = -1; // Not/Next: a; And/Until: a and b; Prob: a is the path node
  PctlCmp cmp = PctlCmp::Le; // Prob
  Rational bound{0};         // Prob
  long steps = 0;            // Until horizon
};

struct PctlFormula {
  std::vector<PctlNode> nodes;
  int root = -1;
};

struct PctlParseResult {
  std::optional<PctlFormula> formula;
  DiagnosticList diags;
};

// Grammar:  f  := f '&' f | '!' f | '(' f ')' | 'true' | 'false' | ap
//              | 'P' cmp bound '[' 'X' f ']'
//              | 'P' cmp bound '[' f 'U' '<=' int f ']'
// with cmp one of <=, <, >=, > and bound a decimal or p/q rational literal.
// 'P', 'U', 'X', 'true' and 'false' are reserved and cannot name an ap.
PctlParseResult parse_pctl(std::string_view src, std::string file_name = "<formula>");

// Canonical rendering (bounds as reduced fractions); parses back to itself.
std::string pctl_text(const PctlFormula& f);

struct CheckOptions {
  bool memoize = true;
};

// probability is set iff the formula's root is a P operator
struct CheckResult {
  bool verdict = false;
  std::optional<double> probability;
};

// Does `state` at time `time` satisfy f, with the population flow started at
// mu0? Propositions refer to the matrix labelling; an unknown proposition or
// a missing labelling is an error.
CheckResult check_pctl(const PolyMatrix& m, const PctlFormula& f,
                       const std::vector<double>& mu0, int state, int time,
                       const CheckOptions& opts = {});

// Same question at every state of the matrix (result i answers state i),
// sharing one flow and one memo table across the sweep. Equivalent to, and
// much cheaper than, a loop over check_pctl.
std::vector<CheckResult> check_pctl_all(const PolyMatrix& m, const PctlFormula& f,
                                        const std::vector<double>& mu0, int time,
                                        const CheckOptions& opts = {});

} // namespace piff

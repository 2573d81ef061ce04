#include "piff/analysis.hpp"

#include "piff/kahan.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace piff {

namespace {

// accept tiny numeric drift, renormalize it away, refuse anything larger
std::vector<double> checked_occupancy(const std::vector<double>& mu, int dim) {
  if (static_cast<int>(mu.size()) != dim)
    throw AnalysisError("occupancy vector has length " + std::to_string(mu.size()) +
                        ", expected " + std::to_string(dim));
  double total = 0;
  for (double v : mu) {
    if (!std::isfinite(v) || v < -1e-9)
      throw AnalysisError("occupancy vector leaves the simplex");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw AnalysisError("occupancy vector mass is " + std::to_string(total) +
                        ", expected 1");
  std::vector<double> out = mu;
  if (std::abs(total - 1.0) > 1e-12)
    for (double& v : out) v /= total;
  return out;
}

// v^T K with compensated sums, then the defensive drift rule: tiny drift is
// scaled away, anything past 1e-9 means the kernel itself is broken
std::vector<double> advance_occupancy(const std::vector<double>& mu,
                                      const Eigen::MatrixXd& k) {
  const int n = static_cast<int>(mu.size());
  std::vector<double> next(n, 0.0);
  KahanSum total;
  for (int j = 0; j < n; ++j) {
    KahanSum s;
    for (int i = 0; i < n; ++i) s.add(mu[i] * k(i, j));
    next[j] = s.value();
    total.add(next[j]);
  }
  if (std::abs(total.value() - 1.0) > 1e-9)
    throw AnalysisError("occupancy drift exceeded 1e-9 after a step");
  if (std::abs(total.value() - 1.0) > 1e-12)
    for (double& v : next) v /= total.value();
  return next;
}

} // namespace

Eigen::MatrixXd meanfield_trajectory(const PolyMatrix& m, const std::vector<double>& mu0,
                                     int steps) {
  if (steps < 0) throw AnalysisError("step count must be nonnegative");
  const int n = m.dim();
  std::vector<double> mu = checked_occupancy(mu0, n);
  Eigen::MatrixXd traj(steps + 1, n);
  for (int j = 0; j < n; ++j) traj(0, j) = mu[j];
  for (int t = 0; t < steps; ++t) {
    mu = advance_occupancy(mu, eval_matrix(m, mu));
    for (int j = 0; j < n; ++j) traj(t + 1, j) = mu[j];
  }
  return traj;
}

std::vector<Rational> meanfield_step_exact(const PolyMatrix& m,
                                           const std::vector<Rational>& mu) {
  const auto k = eval_matrix_exact(m, mu);
  const int n = m.dim();
  std::vector<Rational> next(n, Rational(0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) next[j] += mu[i] * k[i][j];
  return next;
}

Eigen::MatrixXd fast_simulation(const PolyMatrix& m, const std::vector<double>& mu0,
                                int start, int steps) {
  if (steps < 0) throw AnalysisError("step count must be nonnegative");
  const int n = m.dim();
  if (start < 0 || start >= n) throw AnalysisError("start state index out of range");
  std::vector<double> mu = checked_occupancy(mu0, n);
  std::vector<double> h(n, 0.0);
  h[start] = 1.0;
  Eigen::MatrixXd traj(steps + 1, n);
  for (int j = 0; j < n; ++j) traj(0, j) = h[j];
  for (int t = 0; t < steps; ++t) {
    Eigen::MatrixXd k = eval_matrix(m, mu);
    h = advance_occupancy(h, k); // the tagged law follows the same kernel
    mu = advance_occupancy(mu, k);
    for (int j = 0; j < n; ++j) traj(t + 1, j) = h[j];
  }
  return traj;
}

// --- PCTL parsing -----------------------------------------------------------

namespace {

struct PctlTok {
  enum class Kind {
    Ident, Number, P, X, U, True, False,
    Bang, Amp, LPar, RPar, LBrk, RBrk,
    Le, Lt, Ge, Gt, End
  };
  Kind kind = Kind::End;
  std::string text;
  SourcePos pos;
};

class PctlLexer {
public:
  PctlLexer(std::string_view src, DiagnosticList& diags) : src_(src), diags_(diags) {}

  PctlTok next() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) bump();
    PctlTok t;
    t.pos = {1, static_cast<int>(i_) + 1};
    if (i_ >= src_.size()) return t;
    char c = src_[i_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t s = i_;
      while (i_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
        bump();
      t.text = std::string(src_.substr(s, i_ - s));
      if (t.text == "P") t.kind = PctlTok::Kind::P;
      else if (t.text == "X") t.kind = PctlTok::Kind::X;
      else if (t.text == "U") t.kind = PctlTok::Kind::U;
      else if (t.text == "true") t.kind = PctlTok::Kind::True;
      else if (t.text == "false") t.kind = PctlTok::Kind::False;
      else t.kind = PctlTok::Kind::Ident;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t s = i_;
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) bump();
      if (i_ < src_.size() && (src_[i_] == '/' || src_[i_] == '.')) {
        bump();
        while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) bump();
      }
      t.kind = PctlTok::Kind::Number;
      t.text = std::string(src_.substr(s, i_ - s));
      return t;
    }
    bump();
    switch (c) {
      case '!': t.kind = PctlTok::Kind::Bang; return t;
      case '&': t.kind = PctlTok::Kind::Amp; return t;
      case '(': t.kind = PctlTok::Kind::LPar; return t;
      case ')': t.kind = PctlTok::Kind::RPar; return t;
      case '[': t.kind = PctlTok::Kind::LBrk; return t;
      case ']': t.kind = PctlTok::Kind::RBrk; return t;
      case '<':
        if (i_ < src_.size() && src_[i_] == '=') { bump(); t.kind = PctlTok::Kind::Le; }
        else t.kind = PctlTok::Kind::Lt;
        return t;
      case '>':
        if (i_ < src_.size() && src_[i_] == '=') { bump(); t.kind = PctlTok::Kind::Ge; }
        else t.kind = PctlTok::Kind::Gt;
        return t;
      default:
        diags_.error(t.pos, std::string("unexpected character '") + c + "'");
        return next();
    }
  }

private:
  void bump() { ++i_; }
  std::string_view src_;
  DiagnosticList& diags_;
  size_t i_ = 0;
};

struct PctlParser {
  PctlParser(std::string_view src, DiagnosticList& diags)
      : lex_(src, diags), diags_(diags) {
    cur_ = lex_.next();
  }

  PctlFormula parse() {
    PctlFormula f;
    f.root = formula(f);
    if (!failed_ && cur_.kind != PctlTok::Kind::End)
      diags_.error(cur_.pos, "unexpected input after the formula");
    return f;
  }

  bool failed_ = false;

private:
  PctlTok take() {
    PctlTok t = cur_;
    cur_ = lex_.next();
    return t;
  }
  bool at(PctlTok::Kind k) const { return cur_.kind == k; }
  void fail(const std::string& msg) {
    if (!failed_) diags_.error(cur_.pos, msg);
    failed_ = true;
  }

  int add(PctlFormula& f, PctlNode n) {
    f.nodes.push_back(std::move(n));
    return static_cast<int>(f.nodes.size()) - 1;
  }

  int formula(PctlFormula& f) {
    int lhs = unary(f);
    while (!failed_ && at(PctlTok::Kind::Amp)) {
      take();
      int rhs = unary(f);
      PctlNode n;
      n.kind = PctlNode::Kind::And;
      n.a = lhs;
      n.b = rhs;
      lhs = add(f, std::move(n));
    }
    return lhs;
  }

  int unary(PctlFormula& f) {
    if (at(PctlTok::Kind::Bang)) {
      take();
      PctlNode n;
      n.kind = PctlNode::Kind::Not;
      n.a = unary(f);
      return add(f, std::move(n));
    }
    return atom(f);
  }

  int atom(PctlFormula& f) {
    switch (cur_.kind) {
      case PctlTok::Kind::True:
        take();
        return add(f, PctlNode{});
      case PctlTok::Kind::False: {
        take();
        PctlNode n;
        n.kind = PctlNode::Kind::False;
        return add(f, std::move(n));
      }
      case PctlTok::Kind::Ident: {
        PctlNode n;
        n.kind = PctlNode::Kind::Ap;
        n.ap = take().text;
        return add(f, std::move(n));
      }
      case PctlTok::Kind::LPar: {
        take();
        int inner = formula(f);
        if (at(PctlTok::Kind::RPar)) take();
        else fail("expected ')'");
        return inner;
      }
      case PctlTok::Kind::P:
        return prob(f);
      default:
        fail("expected a formula");
        return add(f, PctlNode{});
    }
  }

  int prob(PctlFormula& f) {
    take(); // 'P'
    PctlNode n;
    n.kind = PctlNode::Kind::Prob;
    switch (cur_.kind) {
      case PctlTok::Kind::Le: n.cmp = PctlCmp::Le; break;
      case PctlTok::Kind::Lt: n.cmp = PctlCmp::Lt; break;
      case PctlTok::Kind::Ge: n.cmp = PctlCmp::Ge; break;
      case PctlTok::Kind::Gt: n.cmp = PctlCmp::Gt; break;
      default:
        fail("expected a comparison after 'P'");
        return add(f, PctlNode{});
    }
    take();
    if (!at(PctlTok::Kind::Number)) {
      fail("expected a probability bound");
      return add(f, PctlNode{});
    }
    try {
      n.bound = rational_from_string(take().text);
    } catch (const std::invalid_argument& ex) {
      fail(ex.what());
      return add(f, PctlNode{});
    }
    if (at(PctlTok::Kind::LBrk)) take();
    else {
      fail("expected '[' after the probability bound");
      return add(f, PctlNode{});
    }
    if (at(PctlTok::Kind::X)) {
      take();
      PctlNode path;
      path.kind = PctlNode::Kind::Next;
      path.a = formula(f);
      n.a = add(f, std::move(path));
    } else {
      PctlNode path;
      path.kind = PctlNode::Kind::Until;
      path.a = formula(f);
      if (at(PctlTok::Kind::U)) take();
      else {
        fail("expected 'U' in the path formula");
        return add(f, PctlNode{});
      }
      if (at(PctlTok::Kind::Le)) take();
      else {
        fail("expected '<=' after 'U'");
        return add(f, PctlNode{});
      }
      if (!at(PctlTok::Kind::Number) ||
          cur_.text.find_first_of("/.") != std::string::npos) {
        fail("expected a step count after 'U<='");
        return add(f, PctlNode{});
      }
      try {
        path.steps = std::stol(take().text);
      } catch (const std::out_of_range&) {
        fail("step count out of range");
        return add(f, PctlNode{});
      }
      path.b = formula(f);
      n.a = add(f, std::move(path));
    }
    if (at(PctlTok::Kind::RBrk)) take();
    else fail("expected ']'");
    return add(f, std::move(n));
  }

  PctlLexer lex_;
  DiagnosticList& diags_;
  PctlTok cur_;
};

} // namespace

PctlParseResult parse_pctl(std::string_view src, std::string file_name) {
  PctlParseResult out;
  out.diags.file = std::move(file_name);
  PctlParser parser(src, out.diags);
  PctlFormula f = parser.parse();
  if (!out.diags.has_errors()) out.formula = std::move(f);
  return out;
}

namespace {

const char* cmp_text(PctlCmp c) {
  switch (c) {
    case PctlCmp::Le: return "<=";
    case PctlCmp::Lt: return "<";
    case PctlCmp::Ge: return ">=";
    case PctlCmp::Gt: return ">";
  }
  return "<=";
}

void render(const PctlFormula& f, int n, std::ostream& os) {
  const PctlNode& node = f.nodes[n];
  switch (node.kind) {
    case PctlNode::Kind::True: os << "true"; break;
    case PctlNode::Kind::False: os << "false"; break;
    case PctlNode::Kind::Ap: os << node.ap; break;
    case PctlNode::Kind::Not:
      os << "!";
      if (f.nodes[node.a].kind == PctlNode::Kind::And) {
        os << "(";
        render(f, node.a, os);
        os << ")";
      } else {
        render(f, node.a, os);
      }
      break;
    case PctlNode::Kind::And:
      render(f, node.a, os);
      os << " & ";
      if (f.nodes[node.b].kind == PctlNode::Kind::And) {
        os << "(";
        render(f, node.b, os);
        os << ")";
      } else {
        render(f, node.b, os);
      }
      break;
    case PctlNode::Kind::Next:
      os << "X ";
      render(f, node.a, os);
      break;
    case PctlNode::Kind::Until:
      render(f, node.a, os);
      os << " U<=" << node.steps << " ";
      render(f, node.b, os);
      break;
    case PctlNode::Kind::Prob:
      os << "P" << cmp_text(node.cmp) << to_string(node.bound) << " [";
      render(f, node.a, os);
      os << "]";
      break;
  }
}

} // namespace

std::string pctl_text(const PctlFormula& f) {
  std::ostringstream os;
  render(f, f.root, os);
  return os.str();
}

// --- PCTL checking ----------------------------------------------------------

namespace {

bool compare(PctlCmp cmp, double prob, const Rational& bound) {
  const double b = to_double(bound);
  switch (cmp) {
    case PctlCmp::Le: return prob <= b;
    case PctlCmp::Lt: return prob < b;
    case PctlCmp::Ge: return prob >= b;
    case PctlCmp::Gt: return prob > b;
  }
  return false;
}

struct CheckEngine {
  const PolyMatrix& m;
  const PctlFormula& f;
  bool memoize;

  std::vector<std::vector<double>> mu; // occupancy flow, index = time
  std::vector<Eigen::MatrixXd> ker;    // ker[t] = K(mu[t])
  std::map<std::tuple<int, int, int>, bool> sat_memo;
  std::map<std::tuple<int, int, int, long>, double> until_memo;

  const Eigen::MatrixXd& kernel(int t) {
    while (static_cast<int>(ker.size()) <= t) {
      int i = static_cast<int>(ker.size());
      ker.push_back(eval_matrix(m, mu[i]));
      mu.push_back(advance_occupancy(mu[i], ker[i]));
    }
    return ker[t];
  }

  bool sat(int n, int z, int t) {
    const PctlNode& node = f.nodes[n];
    switch (node.kind) {
      case PctlNode::Kind::True: return true;
      case PctlNode::Kind::False: return false;
      case PctlNode::Kind::Ap:
        return std::binary_search(m.labels[z].begin(), m.labels[z].end(), node.ap);
      case PctlNode::Kind::Not: return !sat(node.a, z, t);
      case PctlNode::Kind::And: return sat(node.a, z, t) && sat(node.b, z, t);
      case PctlNode::Kind::Prob: break;
      default:
        throw AnalysisError("path formula outside a P operator");
    }
    auto key = std::make_tuple(n, z, t);
    if (memoize) {
      auto it = sat_memo.find(key);
      if (it != sat_memo.end()) return it->second;
    }
    bool v = compare(node.cmp, path_prob(node.a, z, t), node.bound);
    if (memoize) sat_memo.emplace(key, v);
    return v;
  }

  double path_prob(int n, int z, int t) {
    const PctlNode& node = f.nodes[n];
    if (node.kind == PctlNode::Kind::Next) {
      // copy the row: recursing into sat() may grow the kernel cache and
      // reallocate it under a live reference
      const Eigen::RowVectorXd row = kernel(t).row(z);
      double p = 0;
      for (int c = 0; c < m.dim(); ++c)
        if (row(c) != 0.0 && sat(node.a, c, t + 1)) p += row(c);
      return p;
    }
    return until_prob(n, z, t, node.steps);
  }

  double until_prob(int n, int z, int t, long rem) {
    const PctlNode& node = f.nodes[n];
    if (sat(node.b, z, t)) return 1.0;
    if (!sat(node.a, z, t)) return 0.0;
    if (rem == 0) return 0.0;
    auto key = std::make_tuple(n, z, t, rem);
    if (memoize) {
      auto it = until_memo.find(key);
      if (it != until_memo.end()) return it->second;
    }
    // row copy for the same reallocation reason as in the Next case
    const Eigen::RowVectorXd row = kernel(t).row(z);
    double p = 0;
    for (int c = 0; c < m.dim(); ++c)
      if (row(c) != 0.0) p += row(c) * until_prob(n, c, t + 1, rem - 1);
    if (memoize) until_memo.emplace(key, p);
    return p;
  }
};

// shared by the one-state and all-states entry points
void require_valid_query(const PolyMatrix& m, const PctlFormula& f, int time) {
  if (f.root < 0 || f.root >= static_cast<int>(f.nodes.size()))
    throw AnalysisError("empty formula");
  if (time < 0) throw AnalysisError("time must be nonnegative");

  // every proposition must exist in the labelling before any flow is built
  for (const PctlNode& n : f.nodes) {
    if (n.kind != PctlNode::Kind::Ap) continue;
    if (m.labels.empty())
      throw AnalysisError("formula uses proposition '" + n.ap +
                          "', but the matrix carries no labelling");
    bool known = false;
    for (const auto& aps : m.labels)
      if (std::binary_search(aps.begin(), aps.end(), n.ap)) {
        known = true;
        break;
      }
    if (!known) throw AnalysisError("unknown proposition '" + n.ap + "'");
  }
}

CheckResult result_at(CheckEngine& engine, int state, int time) {
  CheckResult out;
  const PctlNode& root = engine.f.nodes[engine.f.root];
  if (root.kind == PctlNode::Kind::Prob) {
    double p = engine.path_prob(root.a, state, time);
    out.probability = p;
    out.verdict = compare(root.cmp, p, root.bound);
  } else {
    out.verdict = engine.sat(engine.f.root, state, time);
  }
  return out;
}

} // namespace

CheckResult check_pctl(const PolyMatrix& m, const PctlFormula& f,
                       const std::vector<double>& mu0, int state, int time,
                       const CheckOptions& opts) {
  require_valid_query(m, f, time);
  if (state < 0 || state >= m.dim()) throw AnalysisError("state index out of range");

  CheckEngine engine{m, f, opts.memoize, {}, {}, {}, {}};
  engine.mu.push_back(checked_occupancy(mu0, m.dim()));
  return result_at(engine, state, time);
}

std::vector<CheckResult> check_pctl_all(const PolyMatrix& m, const PctlFormula& f,
                                        const std::vector<double>& mu0, int time,
                                        const CheckOptions& opts) {
  require_valid_query(m, f, time);

  // one engine for the whole sweep: the flow, the kernels and the memo
  // tables are identical across states, so they are built once and shared
  CheckEngine engine{m, f, opts.memoize, {}, {}, {}, {}};
  engine.mu.push_back(checked_occupancy(mu0, m.dim()));
  std::vector<CheckResult> out;
  out.reserve(m.dim());
  for (int z = 0; z < m.dim(); ++z) out.push_back(result_at(engine, z, time));
  return out;
}

} // namespace piff

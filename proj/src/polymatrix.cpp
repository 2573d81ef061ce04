#include "piff/polymatrix.hpp"

#include "piff/kahan.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace piff {

QuadForm PolyMatrix::at(int r, int c) const {
  const auto& row = rows.at(r);
  auto it = row.find(c);
  return it == row.end() ? QuadForm::zero(dim()) : it->second.form;
}

PolyMatrix build_matrix(const FlatSpec& spec) {
  const int n = static_cast<int>(spec.states.size());
  PolyMatrix m;
  m.states.reserve(n);
  m.rows.resize(n);
  for (int i = 0; i < n; ++i) {
    const FlatState& s = spec.states[i];
    m.states.push_back(s.name);
    m.state_idx[s.name] = i;
    m.agent.push_back(s.agent);
    m.store.push_back(s.store);
  }
  m.init = spec.init;

  for (int i = 0; i < n; ++i) {
    std::map<int, RawPoly> acc;
    for (const FlatSummand& sm : spec.states[i].summands) {
      const FlatAction& a = spec.actions[sm.action];
      RawPoly p = [&] {
        try {
          return flat_expr_poly(a.def, n);
        } catch (const DegreeOverflow& ex) {
          throw MatrixError("action '" + a.name + "': " + ex.what());
        }
      }();
      auto it = acc.find(sm.target);
      if (it == acc.end())
        acc.emplace(sm.target, std::move(p));
      else
        it->second += p;
    }
    for (auto& [col, raw] : acc) {
      if (raw.is_zero()) continue;
      MatrixEntry e;
      e.raw_nonneg = raw.all_coeffs_nonnegative();
      e.form = QuadForm::canonicalize(raw);
      m.rows[i].emplace(col, std::move(e));
    }
  }
  return m;
}

namespace {

// evaluation points used when coefficient signs alone cannot certify an
// entry: simplex vertices, edge midpoints, and a fixed bag of rational
// interior points
std::vector<std::vector<Rational>> nonneg_battery(int n) {
  std::vector<std::vector<Rational>> pts;
  for (int i = 0; i < n; ++i) {
    std::vector<Rational> e(n, 0);
    e[i] = 1;
    pts.push_back(std::move(e));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      std::vector<Rational> e(n, 0);
      e[i] = Rational(1, 2);
      e[j] = Rational(1, 2);
      pts.push_back(std::move(e));
    }
  std::mt19937 gen(987654321u);
  std::uniform_int_distribution<int> pick(0, 999);
  for (int r = 0; r < 20; ++r) {
    std::vector<Rational> p(n);
    Rational total = 0;
    for (auto& x : p) {
      x = pick(gen);
      total += x;
    }
    if (total == 0) p[0] = total = 1;
    for (auto& x : p) x /= total;
    pts.push_back(std::move(p));
  }
  return pts;
}

} // namespace

DiagnosticList check_stochasticity(const PolyMatrix& m) {
  DiagnosticList diags;
  const int n = m.dim();
  const QuadForm unit = QuadForm::one(n);
  const QuadForm minus_one = unit.scaled(-1);

  std::vector<std::vector<Rational>> battery; // built lazily, used rarely
  for (int i = 0; i < n; ++i) {
    QuadForm sum = QuadForm::zero(n);
    for (const auto& [col, e] : m.rows[i]) sum = sum + e.form;
    if (!(sum == unit)) {
      QuadForm deficit = sum + minus_one;
      diags.error({0, 0}, "row '" + m.states[i] + "': transition mass differs from 1 by " +
                              deficit.str());
    }
    for (const auto& [col, e] : m.rows[i]) {
      if (e.raw_nonneg) continue;
      if (battery.empty()) battery = nonneg_battery(n);
      for (const auto& pt : battery) {
        Rational v = e.form.eval_exact(pt);
        if (v < 0) {
          std::ostringstream os;
          os << "entry '" << m.states[i] << "' -> '" << m.states[col]
             << "' evaluates to " << to_string(v) << " on the simplex";
          diags.error({0, 0}, os.str());
          break;
        }
      }
    }
  }
  return diags;
}

Eigen::MatrixXd eval_matrix(const PolyMatrix& m, const std::vector<double>& mu) {
  const int n = m.dim();
  if (static_cast<int>(mu.size()) != n)
    throw MatrixError("occupancy vector has length " + std::to_string(mu.size()) +
                      ", matrix has " + std::to_string(n) + " states");
  // Validate the point once up front, then evaluate on an exactly normalized
  // copy: occupancy vectors coming out of an iteration carry up to ~1e-12 of
  // drift, and a degree-2 row doubles that before it reaches the row gate.
  double sum = 0;
  for (double x : mu) {
    if (x < -1e-9) throw MatrixError("evaluation point has a negative coordinate");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw MatrixError("evaluation point is off the simplex by " + std::to_string(sum - 1.0));
  std::vector<double> pt(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) pt[i] = std::max(mu[i], 0.0) / sum;

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  try {
    for (int i = 0; i < n; ++i)
      for (const auto& [col, e] : m.rows[i]) out(i, col) = e.form.eval(pt);
  } catch (const std::domain_error& ex) {
    throw MatrixError(ex.what());
  }
  for (int i = 0; i < n; ++i) {
    KahanSum rs;
    for (int j = 0; j < n; ++j) rs.add(out(i, j));
    if (std::abs(rs.value() - 1.0) > 1e-12)
      throw MatrixError("row '" + m.states[i] + "' evaluates to total mass " +
                        std::to_string(rs.value()));
  }
  return out;
}

std::vector<std::vector<Rational>> eval_matrix_exact(const PolyMatrix& m,
                                                     const std::vector<Rational>& mu) {
  const int n = m.dim();
  if (static_cast<int>(mu.size()) != n)
    throw MatrixError("occupancy vector has length " + std::to_string(mu.size()) +
                      ", matrix has " + std::to_string(n) + " states");
  std::vector<std::vector<Rational>> out(n, std::vector<Rational>(n, 0));
  try {
    for (int i = 0; i < n; ++i)
      for (const auto& [col, e] : m.rows[i]) out[i][col] = e.form.eval_exact(mu);
  } catch (const std::domain_error& ex) {
    throw MatrixError(ex.what());
  }
  return out;
}

QuadForm class_row_sum(const PolyMatrix& m, int z, const std::vector<int>& q) {
  QuadForm sum = QuadForm::zero(m.dim());
  const auto& row = m.rows.at(z);
  std::set<int> cols(q.begin(), q.end());
  for (int c : cols) {
    auto it = row.find(c);
    if (it != row.end()) sum = sum + it->second.form;
  }
  return sum;
}

nlohmann::json matrix_to_json(const PolyMatrix& m) {
  nlohmann::json j;
  j["states"] = nlohmann::json::array();
  for (int i = 0; i < m.dim(); ++i) {
    nlohmann::json s;
    s["name"] = m.states[i];
    if (m.agent[i]) s["agent"] = *m.agent[i];
    if (m.store[i]) s["store"] = *m.store[i];
    j["states"].push_back(std::move(s));
  }
  if (!m.init.empty()) {
    nlohmann::json in = nlohmann::json::array();
    for (const auto& [idx, count] : m.init)
      in.push_back({{"state", m.states[idx]}, {"count", count}});
    j["init"] = std::move(in);
  }
  if (!m.labels.empty()) {
    nlohmann::json lb = nlohmann::json::object();
    for (int i = 0; i < m.dim(); ++i) lb[m.states[i]] = m.labels[i];
    j["labels"] = std::move(lb);
  }
  nlohmann::json entries = nlohmann::json::array();
  for (int i = 0; i < m.dim(); ++i)
    for (const auto& [col, e] : m.rows[i])
      entries.push_back(
          {{"row", i + 1}, {"col", col + 1}, {"poly", quadform_to_json(e.form)}});
  j["entries"] = std::move(entries);
  return j;
}

PolyMatrix matrix_from_json(const nlohmann::json& j) {
  try {
    PolyMatrix m;
    const auto& states = j.at("states");
    if (!states.is_array() || states.empty())
      throw MatrixError("matrix JSON needs a nonempty 'states' array");
    for (const auto& s : states) {
      std::string name = s.at("name").get<std::string>();
      if (!m.state_idx.emplace(name, m.dim()).second)
        throw MatrixError("matrix JSON repeats state '" + name + "'");
      m.states.push_back(std::move(name));
      m.agent.push_back(s.contains("agent")
                            ? std::optional<std::string>(s["agent"].get<std::string>())
                            : std::nullopt);
      m.store.push_back(s.contains("store")
                            ? std::optional<std::map<std::string, std::string>>(
                                  s["store"].get<std::map<std::string, std::string>>())
                            : std::nullopt);
    }
    const int n = m.dim();
    m.rows.resize(n);
    if (j.contains("init"))
      for (const auto& e : j["init"]) {
        auto it = m.state_idx.find(e.at("state").get<std::string>());
        if (it == m.state_idx.end())
          throw MatrixError("matrix JSON init names unknown state '" +
                            e["state"].get<std::string>() + "'");
        m.init.emplace_back(it->second, e.at("count").get<long>());
      }
    if (j.contains("labels")) {
      m.labels.assign(n, {});
      int seen = 0;
      for (const auto& [name, aps] : j["labels"].items()) {
        auto it = m.state_idx.find(name);
        if (it == m.state_idx.end())
          throw MatrixError("matrix JSON labels name unknown state '" + name + "'");
        m.labels[it->second] = aps.get<std::vector<std::string>>();
        std::sort(m.labels[it->second].begin(), m.labels[it->second].end());
        ++seen;
      }
      if (seen != n) throw MatrixError("matrix JSON labelling must cover every state");
    }
    for (const auto& e : j.at("entries")) {
      int row = e.at("row").get<int>(), col = e.at("col").get<int>();
      if (row < 1 || row > n || col < 1 || col > n)
        throw MatrixError("matrix JSON entry index out of range");
      QuadForm form = quadform_from_json(e.at("poly"));
      if (form.dim != n)
        throw MatrixError("matrix JSON entry polynomial has dimension " +
                          std::to_string(form.dim) + ", expected " + std::to_string(n));
      MatrixEntry me;
      me.raw_nonneg = true;
      for (const auto& [ij, v] : form.coeff)
        if (v < 0) me.raw_nonneg = false;
      me.form = std::move(form);
      if (!m.rows[row - 1].emplace(col - 1, std::move(me)).second)
        throw MatrixError("matrix JSON repeats entry (" + std::to_string(row) + ", " +
                          std::to_string(col) + ")");
    }
    return m;
  } catch (const nlohmann::json::exception& ex) {
    throw MatrixError(std::string("malformed matrix JSON: ") + ex.what());
  }
}

namespace {

// simplest expression whose canonical form equals q
FFExpr entry_expr(const QuadForm& q) {
  const int n = q.dim;

  // constant c homogenizes to c on the diagonal, 2c off it
  {
    Rational c = q.at(0, 0);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      for (int j = i; j < n && ok; ++j) ok = q.at(i, j) == (i == j ? c : 2 * c);
    if (ok) return FFExpr::constant(c);
  }

  // sum of h_i * m_i homogenizes to h_i + h_j at (i, j)
  {
    std::vector<Rational> h(n);
    for (int i = 0; i < n; ++i) h[i] = q.at(i, i);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      for (int j = i + 1; j < n && ok; ++j) ok = q.at(i, j) == h[i] + h[j];
    if (ok) {
      // fold equal weights so rows render as k*(frc(a) + frc(b))
      std::vector<FFExpr> terms;
      std::vector<bool> used(n, false);
      for (int i = 0; i < n; ++i) {
        if (used[i] || h[i] == 0) continue;
        std::vector<int> members;
        for (int j = i; j < n; ++j)
          if (!used[j] && h[j] == h[i]) {
            members.push_back(j);
            used[j] = true;
          }
        FFExpr frc = FFExpr::frc_sum(std::move(members));
        terms.push_back(h[i] == 1
                            ? std::move(frc)
                            : FFExpr::mul(FFExpr::constant(h[i]), std::move(frc)));
      }
      if (terms.empty()) return FFExpr::constant(0);
      if (terms.size() == 1) return std::move(terms.front());
      return FFExpr::add(std::move(terms));
    }
  }

  // general quadratic: literal c * frc(i) * frc(j) monomials
  std::vector<FFExpr> terms;
  for (const auto& [ij, c] : q.coeff) {
    FFExpr mono = FFExpr::mul(FFExpr::frc_sum({ij.first}), FFExpr::frc_sum({ij.second}));
    terms.push_back(c == 1 ? std::move(mono)
                           : FFExpr::mul(FFExpr::constant(c), std::move(mono)));
  }
  if (terms.empty()) return FFExpr::constant(0);
  if (terms.size() == 1) return std::move(terms.front());
  return FFExpr::add(std::move(terms));
}

std::string action_stem(const std::string& s) {
  std::string out;
  for (char ch : s)
    out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') ? ch : '_';
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out.insert(out.begin(), 'a');
  return out;
}

} // namespace

FlatSpec spec_from_matrix(const PolyMatrix& m) {
  FlatSpec spec;
  spec.states.resize(m.dim());
  for (int i = 0; i < m.dim(); ++i) {
    spec.states[i].name = m.states[i];
    spec.states[i].agent = m.agent[i];
    spec.states[i].store = m.store[i];
    spec.state_idx[m.states[i]] = i;
  }
  for (int i = 0; i < m.dim(); ++i)
    for (const auto& [c, e] : m.rows[i]) {
      std::string base = action_stem(m.states[i]) + "_to_" + action_stem(m.states[c]);
      std::string name = base;
      for (int k = 2; spec.action_idx.count(name); ++k) name = base + "_" + std::to_string(k);
      int a = static_cast<int>(spec.actions.size());
      spec.action_idx[name] = a;
      spec.actions.push_back({std::move(name), entry_expr(e.form)});
      spec.states[i].summands.push_back({a, c});
    }
  spec.init = m.init;
  return spec;
}

} // namespace piff

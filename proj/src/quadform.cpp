#include "piff/quadform.hpp"

#include "piff/kahan.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace piff {

namespace {

std::pair<int, int> ordered(int i, int j) { return i <= j ? std::pair{i, j} : std::pair{j, i}; }

void check_dim(int a, int b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw std::invalid_argument(os.str());
  }
}

std::string var_name(int i, const std::vector<std::string>* names) {
  if (names && i < static_cast<int>(names->size())) return (*names)[i];
  return "m" + std::to_string(i + 1);
}

} // namespace

RawPoly RawPoly::constant_poly(int dim, Rational c) {
  RawPoly p;
  p.dim = dim;
  p.constant = std::move(c);
  return p;
}

RawPoly RawPoly::frc_sum(int dim, const std::vector<int>& idx) {
  RawPoly p;
  p.dim = dim;
  for (int i : idx) p.linear[i] += 1;
  p.strip_zeros();
  return p;
}

int RawPoly::degree() const {
  if (!quad.empty()) return 2;
  if (!linear.empty()) return 1;
  return 0;
}

bool RawPoly::is_zero() const { return constant == 0 && linear.empty() && quad.empty(); }

bool RawPoly::all_coeffs_nonnegative() const {
  if (constant < 0) return false;
  for (const auto& [i, c] : linear)
    if (c < 0) return false;
  for (const auto& [ij, c] : quad)
    if (c < 0) return false;
  return true;
}

void RawPoly::strip_zeros() {
  for (auto it = linear.begin(); it != linear.end();)
    it = it->second == 0 ? linear.erase(it) : std::next(it);
  for (auto it = quad.begin(); it != quad.end();)
    it = it->second == 0 ? quad.erase(it) : std::next(it);
}

RawPoly& RawPoly::operator+=(const RawPoly& o) {
  check_dim(dim, o.dim, "poly add");
  constant += o.constant;
  for (const auto& [i, c] : o.linear) linear[i] += c;
  for (const auto& [ij, c] : o.quad) quad[ij] += c;
  strip_zeros();
  return *this;
}

RawPoly& RawPoly::operator-=(const RawPoly& o) {
  check_dim(dim, o.dim, "poly sub");
  constant -= o.constant;
  for (const auto& [i, c] : o.linear) linear[i] -= c;
  for (const auto& [ij, c] : o.quad) quad[ij] -= c;
  strip_zeros();
  return *this;
}

RawPoly RawPoly::operator+(const RawPoly& o) const {
  RawPoly r = *this;
  r += o;
  return r;
}

RawPoly RawPoly::operator-(const RawPoly& o) const {
  RawPoly r = *this;
  r -= o;
  return r;
}

RawPoly RawPoly::scaled(const Rational& k) const {
  RawPoly r;
  r.dim = dim;
  if (k == 0) return r;
  r.constant = constant * k;
  for (const auto& [i, c] : linear) r.linear[i] = c * k;
  for (const auto& [ij, c] : quad) r.quad[ij] = c * k;
  return r;
}

RawPoly RawPoly::mul(const RawPoly& o) const {
  check_dim(dim, o.dim, "poly mul");
  if (degree() + o.degree() > 2)
    throw DegreeOverflow("product exceeds degree 2 (degrees " + std::to_string(degree()) +
                         " and " + std::to_string(o.degree()) + ")");
  RawPoly r;
  r.dim = dim;
  r.constant = constant * o.constant;
  for (const auto& [i, c] : o.linear) r.linear[i] += constant * c;
  for (const auto& [i, c] : linear) r.linear[i] += c * o.constant;
  for (const auto& [ij, c] : o.quad) r.quad[ij] += constant * c;
  for (const auto& [ij, c] : quad) r.quad[ij] += c * o.constant;
  for (const auto& [i, a] : linear)
    for (const auto& [j, b] : o.linear) r.quad[ordered(i, j)] += a * b;
  r.strip_zeros();
  return r;
}

Rational RawPoly::eval(const std::vector<Rational>& m) const {
  check_dim(dim, static_cast<int>(m.size()), "poly eval");
  Rational v = constant;
  for (const auto& [i, c] : linear) v += c * m[i];
  for (const auto& [ij, c] : quad) v += c * m[ij.first] * m[ij.second];
  return v;
}

double RawPoly::eval(const std::vector<double>& m) const {
  check_dim(dim, static_cast<int>(m.size()), "poly eval");
  KahanSum v;
  v.add(to_double(constant));
  for (const auto& [i, c] : linear) v.add(to_double(c) * m[i]);
  for (const auto& [ij, c] : quad) v.add(to_double(c) * m[ij.first] * m[ij.second]);
  return v.value();
}

std::string RawPoly::str(const std::vector<std::string>* names) const {
  std::ostringstream os;
  bool first = true;
  auto sep = [&] {
    if (!first) os << " + ";
    first = false;
  };
  if (constant != 0 || (linear.empty() && quad.empty())) {
    sep();
    os << constant.str();
  }
  for (const auto& [i, c] : linear) {
    sep();
    os << c.str() << '*' << var_name(i, names);
  }
  for (const auto& [ij, c] : quad) {
    sep();
    os << c.str() << '*' << var_name(ij.first, names) << '*' << var_name(ij.second, names);
  }
  return os.str();
}

QuadForm QuadForm::one(int dim) { return canonicalize(RawPoly::constant_poly(dim, 1)); }

QuadForm QuadForm::canonicalize(const RawPoly& p) {
  QuadForm q;
  q.dim = p.dim;
  for (const auto& [ij, c] : p.quad)
    if (c != 0) q.coeff[ij] = c;
  // h_i * m_i == m_i * sum_j m_j on the simplex
  for (const auto& [i, h] : p.linear) {
    if (h == 0) continue;
    for (int j = 0; j < p.dim; ++j) q.coeff[ordered(i, j)] += h;
  }
  // h == h * (sum m)^2 on the simplex
  if (p.constant != 0) {
    for (int i = 0; i < p.dim; ++i) {
      q.coeff[{i, i}] += p.constant;
      for (int j = i + 1; j < p.dim; ++j) q.coeff[{i, j}] += 2 * p.constant;
    }
  }
  for (auto it = q.coeff.begin(); it != q.coeff.end();)
    it = it->second == 0 ? q.coeff.erase(it) : std::next(it);
  return q;
}

QuadForm QuadForm::operator+(const QuadForm& o) const {
  check_dim(dim, o.dim, "quadform add");
  QuadForm r = *this;
  for (const auto& [ij, c] : o.coeff) {
    auto& slot = r.coeff[ij];
    slot += c;
    if (slot == 0) r.coeff.erase(ij);
  }
  return r;
}

QuadForm QuadForm::scaled(const Rational& k) const {
  QuadForm r;
  r.dim = dim;
  if (k == 0) return r;
  for (const auto& [ij, c] : coeff) r.coeff[ij] = c * k;
  return r;
}

Rational QuadForm::at(int i, int j) const {
  auto it = coeff.find(ordered(i, j));
  return it == coeff.end() ? Rational(0) : it->second;
}

Rational QuadForm::eval_exact(const std::vector<Rational>& m) const {
  check_dim(dim, static_cast<int>(m.size()), "quadform eval");
  Rational sum = 0;
  for (const auto& x : m) {
    if (x < 0) throw std::domain_error("evaluation point has a negative coordinate");
    sum += x;
  }
  if (sum != 1) throw std::domain_error("evaluation point is not on the simplex");
  Rational v = 0;
  for (const auto& [ij, c] : coeff) v += c * m[ij.first] * m[ij.second];
  return v;
}

double QuadForm::eval(const std::vector<double>& m, double tol) const {
  check_dim(dim, static_cast<int>(m.size()), "quadform eval");
  double sum = 0;
  for (double x : m) {
    if (x < -tol) throw std::domain_error("evaluation point has a negative coordinate");
    sum += x;
  }
  if (std::abs(sum - 1.0) > tol)
    throw std::domain_error("evaluation point is off the simplex by " + std::to_string(sum - 1.0));
  return eval_unchecked(m.data());
}

double QuadForm::eval_unchecked(const double* m) const {
  KahanSum v;
  for (const auto& [ij, c] : coeff) v.add(to_double(c) * m[ij.first] * m[ij.second]);
  return v.value();
}

std::string QuadForm::str(const std::vector<std::string>* names) const {
  if (coeff.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [ij, c] : coeff) {
    if (!first) os << " + ";
    first = false;
    os << c.str() << '*' << var_name(ij.first, names) << '*' << var_name(ij.second, names);
  }
  return os.str();
}

int compare(const QuadForm& a, const QuadForm& b) {
  if (a.dim != b.dim) return a.dim < b.dim ? -1 : 1;
  auto ia = a.coeff.begin(), ib = b.coeff.begin();
  for (; ia != a.coeff.end() && ib != b.coeff.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first < ib->first ? -1 : 1;
    if (ia->second != ib->second) return ia->second < ib->second ? -1 : 1;
  }
  if (ia != a.coeff.end()) return 1;
  if (ib != b.coeff.end()) return -1;
  return 0;
}

bool equal_on_simplex(const QuadForm& a, const QuadForm& b) {
  check_dim(a.dim, b.dim, "equal_on_simplex");
  return a.coeff == b.coeff;
}

nlohmann::json quadform_to_json(const QuadForm& q) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [ij, c] : q.coeff)
    entries.push_back({ij.first + 1, ij.second + 1, c.str()});
  return {{"S", q.dim}, {"quad", entries}};
}

QuadForm quadform_from_json(const nlohmann::json& j) {
  QuadForm q;
  q.dim = j.at("S").get<int>();
  for (const auto& e : j.at("quad")) {
    int i = e.at(0).get<int>() - 1;
    int k = e.at(1).get<int>() - 1;
    if (i < 0 || k < i || k >= q.dim) throw std::invalid_argument("bad quadform index pair");
    Rational c = rational_from_string(e.at(2).get<std::string>());
    if (c != 0) q.coeff[{i, k}] += c;
  }
  return q;
}

} // namespace piff

#pragma once

#include <json.hpp>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "piff/rational.hpp"

namespace piff {

struct DegreeOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact polynomial over occupancy variables m_1..m_dim, kept in the raw
// (inhomogeneous) shape it had in the source expression: constant + linear
// + quadratic part. Total degree is capped at 2; multiplication beyond that
// throws DegreeOverflow.
struct RawPoly {
  int dim = 0;
  Rational constant{0};
  std::map<int, Rational> linear;                    // i -> coeff, 0-based
  std::map<std::pair<int, int>, Rational> quad;      // (i <= j) -> coeff

  static RawPoly constant_poly(int dim, Rational c);
  static RawPoly frc_sum(int dim, const std::vector<int>& idx); // sum of m_i

  int degree() const; // 0, 1 or 2 (zero polynomial reports 0)
  bool is_zero() const;
  bool all_coeffs_nonnegative() const;

  RawPoly& operator+=(const RawPoly& o);
  RawPoly& operator-=(const RawPoly& o);
  RawPoly operator+(const RawPoly& o) const;
  RawPoly operator-(const RawPoly& o) const;
  RawPoly mul(const RawPoly& o) const; // throws DegreeOverflow if degrees sum > 2
  RawPoly scaled(const Rational& k) const;

  Rational eval(const std::vector<Rational>& m) const;
  double eval(const std::vector<double>& m) const;

  void strip_zeros();
  std::string str(const std::vector<std::string>* names = nullptr) const;
};

// Canonical normal form: a homogeneous degree-2 form sum u_{ij} m_i m_j
// (i <= j) equal to the source polynomial on the standard simplex. The
// rewriting uses sum_i m_i = 1: a constant h is absorbed as h*(sum m)^2 and
// a linear term h_i m_i as m_i * (sum m). Two polynomials are equal as
// functions on the simplex iff their canonical coefficient maps are equal,
// so operator== decides pointwise equality.
struct QuadForm {
  int dim = 0;
  std::map<std::pair<int, int>, Rational> coeff; // (i <= j), zero entries absent

  static QuadForm canonicalize(const RawPoly& p);
  static QuadForm zero(int dim) { return QuadForm{dim, {}}; }
  static QuadForm one(int dim);

  QuadForm operator+(const QuadForm& o) const;
  QuadForm scaled(const Rational& k) const;
  bool is_zero() const { return coeff.empty(); }

  Rational at(int i, int j) const; // 0 for absent entries; orders the pair

  // Exact evaluation; the point must lie exactly on the simplex.
  Rational eval_exact(const std::vector<Rational>& m) const;
  // Numeric evaluation with a simplex tolerance check (throws std::domain_error).
  double eval(const std::vector<double>& m, double tol = 1e-9) const;
  double eval_unchecked(const double* m) const;

  bool operator==(const QuadForm& o) const { return dim == o.dim && coeff == o.coeff; }
  std::string str(const std::vector<std::string>* names = nullptr) const;
};

// Total deterministic order, used to group refinement signatures.
int compare(const QuadForm& a, const QuadForm& b);
struct QuadFormLess {
  bool operator()(const QuadForm& a, const QuadForm& b) const { return compare(a, b) < 0; }
};

// Decides pointwise equality on the simplex {m >= 0, sum m = 1}.
// Sound and complete for canonical forms; throws on dimension mismatch.
bool equal_on_simplex(const QuadForm& a, const QuadForm& b);

// Serialization: {"S": n, "quad": [[i, j, "p/q"], ...]} with 1-based i <= j,
// entries sorted lexicographically.
nlohmann::json quadform_to_json(const QuadForm& q);
QuadForm quadform_from_json(const nlohmann::json& j);

} // namespace piff

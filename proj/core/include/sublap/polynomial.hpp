#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <memory>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sublap/group.hpp"
#include "sublap/lie_algebra.hpp"

namespace sublap {

class Frame;

enum class Part { Real = 0, Imag = 1 };

/// Exponents over the 2 n^2 real generators Re g_ab, Im g_ab; generator
/// (a, b, part) has index 2 (a n + b) + part.
struct Monomial {
  std::vector<int> exponents;
  int degree() const;
  friend bool operator==(const Monomial&, const Monomial&) = default;
};

/// All monomials of degree <= D in the real entries of an n x n matrix,
/// ordered by degree and then lexicographically by sorted factor list. The
/// basis for a smaller cap is a prefix of the basis for a larger one.
class MonomialBasis {
 public:
  MonomialBasis(int n, int degree_cap);
  /// Shared cached instance.
  static std::shared_ptr<const MonomialBasis> get(int n, int degree_cap);

  int n() const { return n_; }
  int degree_cap() const { return cap_; }
  int variable_count() const { return 2 * n_ * n_; }
  int size() const { return static_cast<int>(factors_.size()); }
  /// Number of monomials of degree <= d.
  int prefix_size(int d) const;

  static int variable(int n, int a, int b, Part part) { return 2 * (a * n + b) + static_cast<int>(part); }

  const std::vector<int>& factors(int k) const { return factors_[static_cast<std::size_t>(k)]; }
  int degree(int k) const { return static_cast<int>(factors_[static_cast<std::size_t>(k)].size()); }
  Monomial monomial(int k) const;
  /// Index of the monomial with the given sorted factor list, or -1.
  int index_of(std::span<const int> sorted_factors) const;
  int index_of(const Monomial& m) const;

  /// Generator values (Re g_ab, Im g_ab) of a matrix.
  Eigen::VectorXd variables(const CMatrix& g) const;
  /// Values of every monomial at g.
  void evaluate(const CMatrix& g, std::span<double> out) const;
  Eigen::VectorXd evaluate(const CMatrix& g) const;

  /// Matrix of the left-invariant derivative d/dt u(g exp(tX)) at t = 0 on
  /// coefficient vectors: column k holds the derivative of monomial k.
  Eigen::SparseMatrix<double> derivative(const AlgebraElement& x) const;

 private:
  std::uint64_t key(std::span<const int> sorted_factors) const;

  int n_;
  int cap_;
  std::vector<std::vector<int>> factors_;
  std::vector<int> parent_;
  std::vector<int> last_var_;
  std::vector<int> prefix_;
  std::unordered_map<std::uint64_t, int> lookup_;
};

/// Real polynomial in the entries of g and their conjugates.
class PolyField {
 public:
  PolyField(int n, int degree_cap);
  PolyField(std::shared_ptr<const MonomialBasis> basis, Eigen::VectorXd coefficients);

  static PolyField constant(int n, int degree_cap, double value);
  /// Re g_ab or Im g_ab with zero-based a, b.
  static PolyField entry(int n, int degree_cap, int a, int b, Part part);
  static PolyField from_terms(int n, int degree_cap, std::span<const std::pair<Monomial, double>> terms);

  int n() const { return basis_->n(); }
  int degree_cap() const { return basis_->degree_cap(); }
  /// Largest degree carrying a nonzero coefficient (0 for the zero field).
  int degree() const;
  const MonomialBasis& basis() const { return *basis_; }
  const std::shared_ptr<const MonomialBasis>& basis_ptr() const { return basis_; }
  const Eigen::VectorXd& coefficients() const { return coeffs_; }
  /// Nonzero terms in basis order.
  std::vector<std::pair<Monomial, double>> terms() const;

  /// Re-expresses the field over a basis with a different cap. Throws
  /// DegreeCapError when a nonzero term would be dropped.
  PolyField with_degree_cap(int degree_cap) const;

  PolyField& operator+=(const PolyField& other);
  PolyField& operator-=(const PolyField& other);
  PolyField& operator*=(double s);
  friend PolyField operator+(PolyField a, const PolyField& b) { return a += b; }
  friend PolyField operator-(PolyField a, const PolyField& b) { return a -= b; }
  friend PolyField operator*(double s, PolyField a) { return a *= s; }
  friend PolyField operator*(PolyField a, double s) { return a *= s; }

  /// Product with cap equal to the sum of the caps.
  friend PolyField operator*(const PolyField& a, const PolyField& b);

 private:
  std::shared_ptr<const MonomialBasis> basis_;
  Eigen::VectorXd coeffs_;
};

/// Exact left-invariant derivative X u.
PolyField apply_field(const AlgebraElement& x, const PolyField& u);
std::vector<PolyField> horizontal_gradient(const PolyField& u, const Frame& frame);
/// Horizontal components followed by the epsilon-scaled vertical components.
std::vector<PolyField> full_gradient_eps(const PolyField& u, const Frame& frame);

/// Throws DomainError unless g is in SU(n).
double evaluate(const PolyField& u, const CMatrix& g);
double evaluate(const PolyField& u, const GroupElement& g);

struct FlowCheck {
  double exact;
  double finite_difference;
  double error;
};

/// Compares X u (g) with the central difference along t -> g exp(tX).
FlowCheck flow_derivative_check(const AlgebraElement& x, const PolyField& u, const GroupElement& g, double h);

}  // namespace sublap

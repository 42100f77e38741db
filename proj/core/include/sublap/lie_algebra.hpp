#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace sublap {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

/// Anti-Hermitian traceless n x n complex matrix.
class AlgebraElement {
 public:
  AlgebraElement() = default;
  /// Throws InvalidElement unless the matrix is anti-Hermitian and traceless.
  explicit AlgebraElement(CMatrix entries);

  static AlgebraElement zero(int n);
  /// Skips validation. Use only for values built from valid elements.
  static AlgebraElement trusted(CMatrix entries);

  int n() const { return static_cast<int>(entries_.rows()); }
  const CMatrix& matrix() const { return entries_; }
  double frobenius_norm() const { return entries_.norm(); }

  AlgebraElement& operator+=(const AlgebraElement& other);
  AlgebraElement& operator-=(const AlgebraElement& other);
  AlgebraElement& operator*=(double scale);

  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
  friend AlgebraElement operator-(AlgebraElement a) { return a *= -1.0; }
  friend AlgebraElement operator*(double s, AlgebraElement a) { return a *= s; }
  friend AlgebraElement operator*(AlgebraElement a, double s) { return a *= s; }
  friend AlgebraElement operator/(AlgebraElement a, double s) { return a *= 1.0 / s; }

 private:
  CMatrix entries_;
};

/// XY - YX.
AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y);

/// -scale * Re tr(XY). scale = 1/2 gives the standard su(n) metric.
double trace_inner(const AlgebraElement& x, const AlgebraElement& y, double scale);

/// Ordered orthonormal basis of a matrix Lie algebra.
class LieAlgebra {
 public:
  /// Throws ValidationError unless the basis is orthonormal for
  /// -metric_scale * Re tr(XY) (to 1e-10).
  LieAlgebra(std::vector<AlgebraElement> basis, double metric_scale,
             std::vector<std::string> labels = {});

  int n() const { return n_; }
  int dimension() const { return static_cast<int>(basis_.size()); }
  double metric_scale() const { return metric_scale_; }
  const std::vector<AlgebraElement>& basis() const { return basis_; }
  const AlgebraElement& operator[](int i) const { return basis_[static_cast<std::size_t>(i)]; }
  const std::vector<std::string>& labels() const { return labels_; }

  double inner(const AlgebraElement& x, const AlgebraElement& y) const;
  double norm(const AlgebraElement& x) const;
  /// Orthogonal-projection coordinates in the basis.
  Eigen::VectorXd coordinates(const AlgebraElement& x) const;
  AlgebraElement element(const Eigen::Ref<const Eigen::VectorXd>& coords) const;
  /// Distance from x to the span of the basis, in the metric norm.
  double span_residual(const AlgebraElement& x) const;
  /// Matrix of ad X in basis coordinates; column j holds coordinates of [X, E_j].
  Eigen::MatrixXd ad(const AlgebraElement& x) const;

 private:
  int n_ = 0;
  std::vector<AlgebraElement> basis_;
  double metric_scale_ = 0.5;
  std::vector<std::string> labels_;
};

/// Orthonormal generalized Gell-Mann basis of su(n): diagonal elements
/// first, then off-diagonal pairs. For n = 3 this is (T1, T2, X1, ..., X6).
LieAlgebra su_basis(int n);

/// The standard frame of su(3): X1..X6 followed by X7 = -[X1,X2], X8 = -[X3,X4].
std::vector<AlgebraElement> su3_frame_fields();

double inner(const AlgebraElement& x, const AlgebraElement& y, const LieAlgebra& algebra);

/// Coefficients c(i,j,k) with [E_i, E_j] = sum_k c(i,j,k) E_k.
class StructureConstants {
 public:
  struct Entry {
    int i;
    int j;
    int k;
    double value;
  };

  StructureConstants(int dimension, std::vector<double> values, double max_residual);

  int dimension() const { return dim_; }
  double operator()(int i, int j, int k) const {
    return values_[static_cast<std::size_t>((i * dim_ + j) * dim_ + k)];
  }
  /// Largest Frobenius residual of the expansion over all pairs.
  double max_residual() const { return max_residual_; }
  std::vector<Entry> nonzero(double tol = 0.0) const;

 private:
  int dim_;
  std::vector<double> values_;
  double max_residual_;
};

/// Throws ClosureError when some bracket leaves the span by more than 1e-10.
StructureConstants structure_constants(const LieAlgebra& algebra);
/// Same, for an arbitrary linearly independent list (not necessarily orthonormal).
StructureConstants structure_constants(std::span<const AlgebraElement> elements, double metric_scale);

/// B(E_i, E_j) = tr(ad E_i ad E_j).
Eigen::MatrixXd killing_form(const LieAlgebra& algebra);

struct SemisimplicityReport {
  bool compact_semisimple = false;
  Eigen::VectorXd killing_eigenvalues;
  std::string diagnostic;
  explicit operator bool() const { return compact_semisimple; }
};

SemisimplicityReport is_compact_semisimple(const LieAlgebra& algebra);

/// Orthonormal basis of a maximal commutative subalgebra, grown greedily from
/// the first basis element. Throws NotSemisimple for other algebras.
std::vector<AlgebraElement> cartan_subalgebra(const LieAlgebra& algebra);

}  // namespace sublap

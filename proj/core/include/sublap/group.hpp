#pragma once

#include "sublap/lie_algebra.hpp"
#include "sublap/rng.hpp"

namespace sublap {

/// Element of SU(n).
class GroupElement {
 public:
  GroupElement() = default;
  /// Throws DomainError unless g g* = I and det g = 1 within tol.
  explicit GroupElement(CMatrix entries, double tol = 1e-10);

  static GroupElement identity(int n);
  static GroupElement trusted(CMatrix entries);

  int n() const { return static_cast<int>(entries_.rows()); }
  const CMatrix& matrix() const { return entries_; }
  GroupElement inverse() const { return trusted(entries_.adjoint()); }

  friend GroupElement operator*(const GroupElement& a, const GroupElement& b);

 private:
  CMatrix entries_;
};

/// max(|g g* - I|, |det g - 1|).
double group_residual(const CMatrix& g);
bool is_group_element(const CMatrix& g, double tol = 1e-10);

/// Nearest unitary (polar factor) with the determinant phase removed.
GroupElement project_to_group(const CMatrix& g);

/// Matrix exponential (Pade scaling and squaring), re-projected to SU(n).
GroupElement exp(const AlgebraElement& x);
/// Principal logarithm with eigenvalue angles in (-pi, pi], made traceless by
/// shifting the largest angles by 2 pi when the angles do not sum to zero.
AlgebraElement log(const GroupElement& g);

/// Haar-distributed element: Ginibre QR with phase and determinant correction.
GroupElement haar_random(int n, Rng& rng);

}  // namespace sublap

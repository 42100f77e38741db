#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "sublap/lie_algebra.hpp"

namespace sublap {

struct PositiveRoot {
  Eigen::VectorXd coordinates;  // in the Cartan basis
  AlgebraElement vector;
};

/// Real root-space pair spanning H_R with [odd, even] = -R.
struct RootPair {
  AlgebraElement odd;
  AlgebraElement even;
  int root_index;
};

/// Largest residuals of the four frame identities.
struct RootProperties {
  double orthonormality = 0.0;  // (i) pairs orthonormal and orthogonal to the Cartan part
  double pair_brackets = 0.0;   // (ii)
  double horizontal_brackets = 0.0;  // (iii) Cartan component of non-paired brackets
  double cartan_action = 0.0;   // (iv) [X, T] leaves H_R
  double max() const;
};

class RootDatum {
 public:
  RootDatum(LieAlgebra algebra, std::vector<AlgebraElement> cartan_basis,
            std::vector<PositiveRoot> positive_roots, std::vector<RootPair> pairs,
            std::vector<int> root_basis_indices);

  const LieAlgebra& algebra() const { return algebra_; }
  const std::vector<AlgebraElement>& cartan_basis() const { return cartan_; }
  const std::vector<PositiveRoot>& positive_roots() const { return roots_; }
  const std::vector<RootPair>& pairs() const { return pairs_; }
  const std::vector<int>& root_basis_indices() const { return root_basis_; }
  int rank() const { return static_cast<int>(cartan_.size()); }

  RootProperties properties() const;
  /// Throws NumericalError if any identity fails by more than tol.
  void verify(double tol = 1e-10) const;

 private:
  LieAlgebra algebra_;
  std::vector<AlgebraElement> cartan_;
  std::vector<PositiveRoot> roots_;
  std::vector<RootPair> pairs_;
  std::vector<int> root_basis_;
};

/// Real root-space decomposition relative to the given Cartan basis.
/// Throws DegeneracyError when eigenvalue clusters cannot be separated.
RootDatum root_space_decomposition(const LieAlgebra& algebra, std::span<const AlgebraElement> cartan);

/// Horizontal fields X_1..X_2n and vertical fields R_j (unscaled roots),
/// with the vertical fields scaled by epsilon. The frame is orthonormal for
/// the epsilon-Riemannian metric in which R_j / epsilon are unit vectors.
class Frame {
 public:
  Frame(std::vector<AlgebraElement> horizontal, std::vector<AlgebraElement> roots, double epsilon,
        double metric_scale);

  const std::vector<AlgebraElement>& horizontal() const { return horizontal_; }
  /// epsilon * R_j.
  const std::vector<AlgebraElement>& vertical() const { return vertical_; }
  const std::vector<AlgebraElement>& roots() const { return roots_; }
  /// Horizontal fields followed by the scaled vertical fields.
  std::vector<AlgebraElement> all() const;
  double epsilon() const { return epsilon_; }
  double metric_scale() const { return metric_scale_; }
  int n() const { return horizontal_.front().n(); }
  int horizontal_count() const { return static_cast<int>(horizontal_.size()); }
  int vertical_count() const { return static_cast<int>(vertical_.size()); }
  int size() const { return horizontal_count() + vertical_count(); }
  /// Q = 2n + 2 nu.
  int homogeneous_dimension() const { return horizontal_count() + 2 * vertical_count(); }

 private:
  std::vector<AlgebraElement> horizontal_;
  std::vector<AlgebraElement> roots_;
  std::vector<AlgebraElement> vertical_;
  double epsilon_;
  double metric_scale_;
};

Frame horizontal_frame(const RootDatum& datum);
/// Scales the vertical fields; requires frame.epsilon() == 1.
Frame epsilon_frame(const Frame& frame, double eps);
/// Standard su(n) frame: su_basis, greedy Cartan, decomposition, horizontal_frame.
Frame su_frame(int n);

/// Dimension of the smallest bracket-closed subspace containing the
/// horizontal fields.
int hormander_rank(const Frame& frame);
/// Dimension of the bracket closure of an arbitrary list of fields.
int bracket_closure_rank(std::span<const AlgebraElement> fields);

}  // namespace sublap

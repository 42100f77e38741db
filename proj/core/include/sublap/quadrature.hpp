#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "sublap/group.hpp"
#include "sublap/polynomial.hpp"

namespace sublap {

/// Equal-weight Haar sample of SU(n), reproducible from (n, N, seed).
class QuadratureSet {
 public:
  QuadratureSet(int n, std::uint64_t seed, std::vector<GroupElement> points);

  int n() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return points_.size(); }
  double weight() const { return 1.0 / static_cast<double>(points_.size()); }
  const std::vector<GroupElement>& points() const { return points_; }
  const GroupElement& operator[](std::size_t i) const { return points_[i]; }

 private:
  int n_;
  std::uint64_t seed_;
  std::vector<GroupElement> points_;
};

/// N independent Haar points; point k depends only on (seed, k).
QuadratureSet haar_quadrature(std::size_t count, std::uint64_t seed, int n = 3);

/// Values of every basis monomial at every point (points x monomials).
Eigen::MatrixXd monomial_values(const MonomialBasis& basis, const std::vector<GroupElement>& points);

/// Points per chunk in deterministic reductions.
inline constexpr std::size_t kReductionChunk = 256;

/// Equal-weight mean of f(index, point) with a fixed pairwise summation
/// order. Throws EvaluationError at the first non-finite value.
double integrate(const QuadratureSet& q, const std::function<double(std::size_t, const GroupElement&)>& f);
double integrate(const PolyField& u, const QuadratureSet& q);

struct MeanEstimate {
  double mean;
  double standard_error;
};

/// Mean with its Monte Carlo standard error.
MeanEstimate integrate_with_error(const QuadratureSet& q,
                                  const std::function<double(std::size_t, const GroupElement&)>& f);

}  // namespace sublap

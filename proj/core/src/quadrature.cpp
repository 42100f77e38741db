#include "sublap/quadrature.hpp"

#include <array>
#include <cmath>

#include "sublap/error.hpp"
#include "sublap/parallel.hpp"

namespace sublap {

QuadratureSet::QuadratureSet(int n, std::uint64_t seed, std::vector<GroupElement> points)
    : n_(n), seed_(seed), points_(std::move(points)) {
  if (points_.empty()) throw RangeError("quadrature needs at least one point");
  for (const auto& g : points_) {
    if (g.n() != n_) throw SizeMismatch("quadrature point has wrong size");
  }
}

QuadratureSet haar_quadrature(std::size_t count, std::uint64_t seed, int n) {
  if (count < 1) throw RangeError("quadrature needs N >= 1");
  if (n < 2) throw InvalidDimension("SU(n) requires n >= 2");
  std::vector<GroupElement> points(count);
  parallel_for(count, [&](std::size_t k) {
    Rng rng(seed, "haar", k);
    points[k] = haar_random(n, rng);
  });
  return QuadratureSet(n, seed, std::move(points));
}

Eigen::MatrixXd monomial_values(const MonomialBasis& basis, const std::vector<GroupElement>& points) {
  Eigen::MatrixXd values(static_cast<Eigen::Index>(points.size()), basis.size());
  const std::size_t chunks = (points.size() + kReductionChunk - 1) / kReductionChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Eigen::VectorXd row(basis.size());
    const std::size_t end = std::min(points.size(), (c + 1) * kReductionChunk);
    for (std::size_t i = c * kReductionChunk; i < end; ++i) {
      basis.evaluate(points[i].matrix(), std::span<double>(row.data(), static_cast<std::size_t>(row.size())));
      values.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
  });
  return values;
}

MeanEstimate integrate_with_error(const QuadratureSet& q,
                                  const std::function<double(std::size_t, const GroupElement&)>& f) {
  using Sums = std::array<double, 2>;
  const Sums total = deterministic_reduce<Sums>(
      q.size(), kReductionChunk,
      [&](std::size_t begin, std::size_t end) {
        Sums s{0.0, 0.0};
        for (std::size_t i = begin; i < end; ++i) {
          const double v = f(i, q[i]);
          if (!std::isfinite(v)) throw EvaluationError("non-finite integrand", i);
          s[0] += v;
          s[1] += v * v;
        }
        return s;
      },
      [](Sums& a, const Sums& b) {
        a[0] += b[0];
        a[1] += b[1];
      });
  const double n = static_cast<double>(q.size());
  const double mean = total[0] / n;
  const double var = n > 1 ? std::max(0.0, (total[1] - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

double integrate(const QuadratureSet& q, const std::function<double(std::size_t, const GroupElement&)>& f) {
  return integrate_with_error(q, f).mean;
}

double integrate(const PolyField& u, const QuadratureSet& q) {
  if (u.n() != q.n()) throw SizeMismatch("field and quadrature on different groups");
  return integrate(q, [&](std::size_t, const GroupElement& g) { return u.basis().evaluate(g.matrix()).dot(u.coefficients()); });
}

}  // namespace sublap

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

namespace sublap {

/// Representative flux a(xi) = (delta + |xi|^2)^((p-2)/2) xi.
struct FluxSpec {
  double p = 2.0;
  double delta = 1.0;

  /// Throws ValidationError unless p > 1 and 0 <= delta <= 1.
  void validate() const;
  /// Lower ellipticity constant min(1, p - 1).
  double lower() const;
  /// Upper constant m (1 + |p - 2|) for m components; bounds both the
  /// entrywise Jacobian sum and |a_i|.
  double upper(int components) const;
};

Eigen::VectorXd flux(const Eigen::Ref<const Eigen::VectorXd>& xi, const FluxSpec& spec);
Eigen::MatrixXd flux_jacobian(const Eigen::Ref<const Eigen::VectorXd>& xi, const FluxSpec& spec);

struct EllipticityReport {
  double lower_bound = 0.0;  // l
  double upper_bound = 0.0;  // L
  double lower_empirical = 0.0;  // min over samples of lambda_min / w^((p-2)/2)
  double upper_empirical = 0.0;  // max over samples of the two upper ratios
  std::size_t samples = 0;
  std::optional<std::size_t> violation;
  Eigen::VectorXd violating_xi;
  bool satisfied() const { return !violation.has_value(); }
};

/// Samples xi over many scales and checks the three structure conditions.
EllipticityReport ellipticity_check(const FluxSpec& spec, int components, std::size_t samples, std::uint64_t seed);

}  // namespace sublap

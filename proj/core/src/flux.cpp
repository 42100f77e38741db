#include "sublap/flux.hpp"

#include <algorithm>
#include <cmath>

#include "sublap/error.hpp"
#include "sublap/rng.hpp"

namespace sublap {

void FluxSpec::validate() const {
  if (!(p > 1.0) || !std::isfinite(p)) throw ValidationError("flux exponent p must exceed 1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in [0, 1]");
}

double FluxSpec::lower() const { return std::min(1.0, p - 1.0); }

double FluxSpec::upper(int components) const { return components * (1.0 + std::abs(p - 2.0)); }

Eigen::VectorXd flux(const Eigen::Ref<const Eigen::VectorXd>& xi, const FluxSpec& spec) {
  if (!xi.allFinite()) throw ValidationError("non-finite flux argument");
  const double w = spec.delta + xi.squaredNorm();
  if (w == 0.0) {
    if (spec.p < 2.0) throw SingularityError("flux undefined at xi = 0 with delta = 0 and p < 2");
    return Eigen::VectorXd::Zero(xi.size());
  }
  return std::pow(w, 0.5 * (spec.p - 2.0)) * xi;
}

Eigen::MatrixXd flux_jacobian(const Eigen::Ref<const Eigen::VectorXd>& xi, const FluxSpec& spec) {
  if (!xi.allFinite()) throw ValidationError("non-finite flux argument");
  const auto m = xi.size();
  const double w = spec.delta + xi.squaredNorm();
  if (w == 0.0) {
    if (spec.p == 2.0) return Eigen::MatrixXd::Identity(m, m);
    if (spec.p > 2.0) return Eigen::MatrixXd::Zero(m, m);
    throw SingularityError("flux Jacobian undefined at xi = 0 with delta = 0 and p < 2");
  }
  const double base = std::pow(w, 0.5 * (spec.p - 2.0));
  return base * Eigen::MatrixXd::Identity(m, m) + (spec.p - 2.0) * (base / w) * (xi * xi.transpose());
}

EllipticityReport ellipticity_check(const FluxSpec& spec, int components, std::size_t samples, std::uint64_t seed) {
  spec.validate();
  if (components < 1) throw InvalidDimension("flux needs at least one component");
  EllipticityReport report;
  report.lower_bound = spec.lower();
  report.upper_bound = spec.upper(components);
  report.lower_empirical = INFINITY;
  report.samples = samples;
  Rng rng(seed, "ellipticity");
  for (std::size_t s = 0; s < samples; ++s) {
    Eigen::VectorXd xi(components);
    for (int i = 0; i < components; ++i) xi(i) = rng.normal();
    xi *= std::pow(10.0, rng.uniform(-3.0, 3.0)) / std::max(xi.norm(), 1e-300);
    const double w = spec.delta + xi.squaredNorm();
    const Eigen::MatrixXd j = flux_jacobian(xi, spec);
    const Eigen::VectorXd a = flux(xi, spec);
    const double scale = std::pow(w, 0.5 * (spec.p - 2.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(j, Eigen::EigenvaluesOnly);
    const double lower = eig.eigenvalues().minCoeff() / scale;
    const double entry_sum = j.cwiseAbs().sum() / scale;
    const double growth = a.cwiseAbs().maxCoeff() / std::pow(w, 0.5 * (spec.p - 1.0));
    report.lower_empirical = std::min(report.lower_empirical, lower);
    report.upper_empirical = std::max({report.upper_empirical, entry_sum, growth});
    const double slack = 1e-10;
    if (!report.violation && (lower < report.lower_bound * (1.0 - slack) ||
                              entry_sum > report.upper_bound * (1.0 + slack) ||
                              growth > report.upper_bound * (1.0 + slack))) {
      report.violation = s;
      report.violating_xi = xi;
    }
  }
  return report;
}

}  // namespace sublap

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "sublap/group.hpp"
#include "sublap/roots.hpp"

namespace sublap {

enum class GaugeKind {
  SubRiemannian,  // max(|h|, |t|^(1/2))
  Riemannian,     // (|h|^2 + |t|^2)^(1/2)
  Epsilon,        // max(|h|, min(|t|^(1/2), |t| / eps))
};

/// Exponential coordinates theta = sum h_i X_i + sum t_j R_j relative to a frame.
struct LogSplit {
  Eigen::VectorXd horizontal;
  Eigen::VectorXd vertical;
};

/// Ball-box geometry of an unscaled frame: log splitting, gauges, the Haar
/// density of exp, and the derivative of log along right translation.
class GaugeGeometry {
 public:
  explicit GaugeGeometry(const Frame& frame);

  const Frame& frame() const { return frame_; }
  LogSplit split(const AlgebraElement& theta) const;
  AlgebraElement compose(const Eigen::Ref<const Eigen::VectorXd>& horizontal,
                         const Eigen::Ref<const Eigen::VectorXd>& vertical) const;
  /// Gauge of center^-1 g.
  double gauge(const GroupElement& center, const GroupElement& g, GaugeKind kind, double eps = 1.0) const;
  double gauge(const LogSplit& s, GaugeKind kind, double eps = 1.0) const;
  /// Half-widths (horizontal, vertical) of the product region {|h| <= a, |t| <= b} that is
  /// the ball of radius r for the sub-Riemannian and epsilon gauges and contains it otherwise.
  std::pair<double, double> box(double r, GaugeKind kind, double eps = 1.0) const;

  /// Density of the Haar (Riemannian) measure in exponential coordinates:
  /// prod over root pairs of (2 sin(lambda/2) / lambda)^2.
  double exp_jacobian(const AlgebraElement& theta) const;
  /// sqrt(det Gram(R_j)), the Lebesgue factor of the vertical coordinates.
  double vertical_volume_factor() const { return vertical_factor_; }

  /// d/ds log(exp(theta) exp(sX)) at s = 0, i.e. psi(ad theta) X with
  /// psi(z) = z / (1 - e^-z).
  AlgebraElement log_right_derivative(const AlgebraElement& theta, const AlgebraElement& x) const;

  /// Derivative of the gauge of exp(theta) along the left-invariant field X.
  double gauge_derivative(const AlgebraElement& theta, const AlgebraElement& x, GaugeKind kind, double eps = 1.0) const;

 private:
  Frame frame_;
  Eigen::MatrixXd vertical_gram_;
  Eigen::LDLT<Eigen::MatrixXd> vertical_ldlt_;
  double vertical_factor_;
};

/// Gauge geometry of su_frame(n), cached.
std::shared_ptr<const GaugeGeometry> standard_geometry(int n);

/// Importance quadrature of a gauge ball: theta is drawn uniformly from the
/// product of Euclidean coordinate balls that contains the gauge ball, points
/// outside the ball are discarded and each kept point carries the weight
/// (region volume) * exp_jacobian / N. Weighted sums approximate Haar
/// (Riemannian) integrals over the ball.
class GaugeBallQuadrature {
 public:
  GaugeBallQuadrature(const GaugeGeometry& geometry, const GroupElement& center, double radius, GaugeKind kind,
                      double eps, std::size_t count, std::uint64_t seed);

  std::size_t size() const { return points_.size(); }
  std::size_t drawn() const { return drawn_; }
  const std::vector<GroupElement>& points() const { return points_; }
  const std::vector<AlgebraElement>& thetas() const { return thetas_; }
  const std::vector<double>& weights() const { return weights_; }
  /// Draw index of each kept point.
  const std::vector<std::size_t>& indices() const { return indices_; }
  /// Estimated measure of the ball.
  double measure() const;
  /// Standard error of measure().
  double measure_error() const { return measure_error_; }
  double radius() const { return radius_; }

 private:
  double radius_;
  std::size_t drawn_;
  std::vector<GroupElement> points_;
  std::vector<AlgebraElement> thetas_;
  std::vector<double> weights_;
  std::vector<std::size_t> indices_;
  double measure_error_ = 0.0;
};

double unit_ball_volume(int dimension);
/// Total Riemannian volume of SU(n) for the metric scale * Re tr(X* Y).
double group_volume(int n, double metric_scale);

}  // namespace sublap

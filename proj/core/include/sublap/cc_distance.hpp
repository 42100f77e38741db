#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sublap/ball_quadrature.hpp"
#include "sublap/group.hpp"

namespace sublap {

/// Piecewise-constant controls: step k moves by exp(h * sum_i controls(k, i) F_i).
struct ControlPath {
  double h = 0.0;
  Eigen::MatrixXd controls;

  int steps() const { return static_cast<int>(controls.rows()); }
  int fields() const { return static_cast<int>(controls.cols()); }
  double duration() const { return h * steps(); }
  /// Every row has Euclidean norm <= 1 + tol.
  bool is_subunit(double tol = 1e-12) const;
  /// The path traversed backwards with negated controls.
  ControlPath reversed() const;
  /// This path followed by `next`. Commensurate steps are refined to a common
  /// step, so durations add exactly; otherwise the shorter step is slowed to
  /// the longer one, which keeps the curve but overstates the duration.
  ControlPath then(const ControlPath& next) const;
};

GroupElement endpoint(const ControlPath& path, const GroupElement& start, std::span<const AlgebraElement> fields);

struct DistanceBudget {
  int steps = 64;
  int restarts = 4;
  int max_iterations = 200;
  double tol_end = 1e-4;

  void validate() const;
};

struct DistanceResult {
  double T = 0.0;
  ControlPath path;
  /// Metric norm of log(y^-1 * endpoint).
  double endpoint_error = 0.0;
  bool feasible = false;
  int iterations = 0;
};

/// Upper bound for the Carnot-Caratheodory distance from x to y over the
/// horizontal frame, by a minimum-energy transcription (fixed K steps,
/// Gauss-Newton SQP on the endpoint constraint, several seeded restarts).
DistanceResult cc_upper_bound(const GroupElement& x, const GroupElement& y, const DistanceBudget& budget = {},
                              std::uint64_t seed = 0);

/// Upper bound for d^eps over the full eps-frame (horizontal and eps R_j).
/// A horizontal warm start (for instance a cc_upper_bound path) is padded with
/// zero vertical controls and kept as a candidate.
DistanceResult riemannian_distance_eps(const GroupElement& x, const GroupElement& y, double eps,
                                       const DistanceBudget& budget = {}, std::uint64_t seed = 0,
                                       const ControlPath* warm_start = nullptr);

/// Transcription over an arbitrary field list; `initial` paths are tried in
/// addition to the log projection and the seeded restarts.
DistanceResult control_distance(const GroupElement& x, const GroupElement& y, std::span<const AlgebraElement> fields,
                                const DistanceBudget& budget, std::uint64_t seed,
                                std::span<const ControlPath> initial = {});

struct BallVolumeReport {
  std::vector<double> radii;
  /// Haar-measure fractions.
  std::vector<double> volumes;
  std::vector<double> standard_errors;
  std::vector<std::size_t> hits;
  double slope = 0.0;
};

/// Haar fractions of gauge balls around the identity of SU(n) and the
/// least-squares slope of log volume against log r.
BallVolumeReport ball_volume_estimate(std::span<const double> radii, std::size_t samples, std::uint64_t seed,
                                      GaugeKind kind = GaugeKind::SubRiemannian, double eps = 1.0, int n = 3);

struct SurrogateCheck {
  std::vector<double> gauges;
  std::vector<double> distances;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
};

/// Compares cc_upper_bound(I, g) with the sub-Riemannian gauge of g on
/// `count` seeded points with gauge in [0.05, 0.3].
SurrogateCheck surrogate_distance_check(std::size_t count, std::uint64_t seed, const DistanceBudget& budget = {});

}  // namespace sublap

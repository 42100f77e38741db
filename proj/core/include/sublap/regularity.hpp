#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sublap/ball_quadrature.hpp"
#include "sublap/flux.hpp"
#include "sublap/polynomial.hpp"
#include "sublap/quadrature.hpp"
#include "sublap/solver.hpp"

namespace sublap {

/// A solved field together with the structure data of its equation.
struct SolvedField {
  PolyField u = PolyField(3, 2);
  FluxSpec flux;
  /// Vertical scale the field was solved with; 0 for the horizontal equation.
  double epsilon = 0.0;

  static SolvedField from(const SolutionReport& report, const SolveConfig& cfg);
};

struct CutoffSpec {
  GroupElement center = GroupElement::identity(3);
  double r_inner = 0.2;
  double r_outer = 0.4;
  /// 1: cubic smoothstep (C^1), 2: quintic smoothstep (C^2).
  int profile = 1;

  void validate() const;
};

struct CutoffInvariants {
  double min_value = 0.0;
  double max_value = 0.0;
  /// max |eta - 1| on inner-ball samples.
  double inner_deviation = 0.0;
  /// max eta on samples with gauge in (r_outer, 2 r_outer].
  double exterior_max = 0.0;
  double sup_horizontal_gradient = 0.0;
  double sup_vertical_gradient = 0.0;
  double horizontal_bound = 0.0;
  double vertical_bound = 0.0;
  std::size_t samples = 0;
  bool satisfied() const;
};

/// eta = S((rho - r_inner) / (r_outer - r_inner)) with rho a gauge of
/// center^-1 g and S a smoothstep, 1 - S clamped to [0, 1].
class Cutoff {
 public:
  Cutoff(CutoffSpec spec, GaugeKind kind = GaugeKind::SubRiemannian, double eps = 1.0);

  const CutoffSpec& spec() const { return spec_; }
  GaugeKind gauge_kind() const { return kind_; }
  double gauge_eps() const { return eps_; }
  const GaugeGeometry& geometry() const { return *geometry_; }

  double value(const GroupElement& g) const;
  /// Value from theta = log(center^-1 g).
  double value_at(const AlgebraElement& theta) const;
  /// Derivatives of eta along each field at exp(theta) relative to the center.
  Eigen::VectorXd derivatives_at(const AlgebraElement& theta, std::span<const AlgebraElement> fields) const;
  /// Derivatives along the horizontal fields followed by the roots R_j.
  Eigen::VectorXd frame_derivatives_at(const AlgebraElement& theta) const;

  CutoffInvariants check(std::size_t samples, std::uint64_t seed) const;

  /// Least-squares fit in the degree-D polynomial space on samples around the
  /// outer ball; throws DegreeCapError when the sampled sup error exceeds 5%.
  PolyField project(int degree_cap, std::size_t samples, std::uint64_t seed) const;

 private:
  double profile(double s) const;
  double profile_derivative(double s) const;

  CutoffSpec spec_;
  GaugeKind kind_;
  double eps_;
  std::shared_ptr<const GaugeGeometry> geometry_;
};

Cutoff cutoff(const CutoffSpec& spec);

enum class Inequality { C1, C2, C3, C4, C5, L32 };
std::string to_string(Inequality which);
Inequality inequality_from_string(const std::string& name);

struct RatioReport {
  double lhs = 0.0;
  /// Each right-hand integral with its displayed factors, without the unknown constant.
  std::vector<double> rhs_terms;
  double ratio = 0.0;
  /// Ratios at N, 2N, 4N, ... samples.
  std::vector<double> refinement_trace;
  std::size_t samples = 0;

  double rhs_sum() const;
  bool finite() const;
  /// max / min over the refinement trace (1 when all ratios are 0).
  double refinement_spread() const;
};

struct CheckOptions {
  std::size_t samples = 10000;
  /// Number of sample sizes N, 2N, ...; the report values use the largest.
  int refinement_levels = 2;
  std::uint64_t seed = 0;
  /// Overrides the field's epsilon for L32.
  std::optional<double> epsilon;
};

RatioReport caccioppoli_check(const SolvedField& field, const CutoffSpec& spec, double beta, Inequality which,
                              const CheckOptions& options = {});

struct BatteryEntry {
  Inequality which;
  double beta;
  RatioReport report;
};

/// Every admissible (inequality, beta) pair on shared samples.
std::vector<BatteryEntry> inequality_battery(const SolvedField& field, const CutoffSpec& spec,
                                             std::span<const double> betas, const CheckOptions& options = {});

struct LevelSetReport {
  RatioReport ratio;
  /// Sampled sup of |grad_T u| over the doubled ball.
  double M = 0.0;
  /// Sampled measure of A+ in the outer ball.
  double level_set_measure = 0.0;
  std::size_t sup_samples = 0;
};

/// Level-set estimate for (X_s u - k)+ with s in 1..2n.
LevelSetReport level_set_caccioppoli(const SolvedField& field, int s, double k, double r_in, double r_out,
                                     double q_exp = 4.0, const CheckOptions& options = {},
                                     const GroupElement& center = GroupElement::identity(3));

struct SupAvgReport {
  double ratio = 0.0;
  double sup = 0.0;
  double average = 0.0;
  std::vector<double> refinement_trace;
  std::size_t samples = 0;
};

/// sup over B_{r/2} of the gradient norm divided by the (B_r average of
/// (delta + |grad u|^2)^(p/2))^(1/p). eps = 0 uses horizontal gradients and
/// sub-Riemannian balls; eps > 0 uses eps-gradients and eps-gauge balls.
SupAvgReport sup_avg_ratio(const SolvedField& field, const GroupElement& center, double r, double eps,
                           const CheckOptions& options = {});

struct HolderReport {
  double alpha = 0.0;
  bool resolution_limited = false;
  std::vector<double> radii;
  std::vector<double> oscillations;
  /// Slopes of the pair-resampled bootstrap replicates.
  std::vector<double> bootstrap;
  /// max |bootstrap - alpha|.
  double bootstrap_spread = 0.0;
};

/// Slope of log osc(grad_H u, B_r) against log r over sub-Riemannian balls.
HolderReport holder_exponent_estimate(const SolvedField& field, const GroupElement& center,
                                      std::span<const double> radii, std::size_t samples = 256,
                                      std::uint64_t seed = 0, int bootstrap = 50);

/// u and its derivatives up to order two along the unscaled frame
/// (horizontal fields, then the roots R_j).
class FieldJet {
 public:
  FieldJet(const PolyField& u, const Frame& frame);

  struct Values {
    double u = 0.0;
    Eigen::VectorXd first;
    /// second(a, b) = F_a F_b u.
    Eigen::MatrixXd second;
  };

  int horizontal_count() const { return m_; }
  int size() const { return size_; }
  Values at(const GroupElement& g) const;

 private:
  std::shared_ptr<const MonomialBasis> basis_;
  int m_;
  int size_;
  Eigen::MatrixXd coefficients_;  // monomials x (1 + size + size^2)
};

}  // namespace sublap

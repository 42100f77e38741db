#include "sublap/cc_distance.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "sublap/error.hpp"
#include "sublap/parallel.hpp"
#include "sublap/rng.hpp"

namespace sublap {

namespace {

constexpr int kReprojectEvery = 50;
constexpr int kDexpTerms = 10;

const Frame& cached_frame(int n) { return standard_geometry(n)->frame(); }

std::shared_ptr<const LieAlgebra> cached_basis(int n) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const LieAlgebra>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const LieAlgebra>(su_basis(n));
  return slot;
}

double metric_norm(const AlgebraElement& x, double scale) { return std::sqrt(std::max(0.0, trace_inner(x, x, scale))); }

// Fixed-duration (T = 1) transcription: alpha is K x m, step k is exp(h sum alpha_ki F_i), h = 1/K.
class Transcription {
 public:
  Transcription(const GroupElement& x, const GroupElement& y, std::span<const AlgebraElement> fields, int steps)
      : n_(x.n()), K_(steps), m_(static_cast<int>(fields.size())), h_(1.0 / steps),
        base_((y.inverse() * x).matrix()), basis_(cached_basis(x.n())) {
    for (const auto& f : fields) fields_.push_back(f.matrix());
    d_ = basis_->dimension();
    scale_ = basis_->metric_scale();
  }

  int variables() const { return K_ * m_; }
  int constraints() const { return d_; }

  CMatrix step_generator(const Eigen::VectorXd& alpha, int k) const {
    CMatrix a = CMatrix::Zero(n_, n_);
    for (int i = 0; i < m_; ++i) a += (h_ * alpha(k * m_ + i)) * fields_[static_cast<std::size_t>(i)];
    return a;
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& alpha) const {
    CMatrix e = base_;
    for (int k = 0; k < K_; ++k) {
      e = e * step_generator(alpha, k).exp();
      if ((k + 1) % kReprojectEvery == 0) e = project_to_group(e).matrix();
    }
    return coordinates(skew(e));
  }

  void residual_jacobian(const Eigen::VectorXd& alpha, Eigen::VectorXd& r, Eigen::MatrixXd& jac) const {
    std::vector<CMatrix> gens(static_cast<std::size_t>(K_));
    std::vector<CMatrix> suffix(static_cast<std::size_t>(K_ + 1));
    suffix[static_cast<std::size_t>(K_)] = CMatrix::Identity(n_, n_);
    for (int k = K_ - 1; k >= 0; --k) {
      const auto ku = static_cast<std::size_t>(k);
      gens[ku] = step_generator(alpha, k);
      suffix[ku] = gens[ku].exp() * suffix[ku + 1];
      if ((K_ - k) % kReprojectEvery == 0) suffix[ku] = project_to_group(suffix[ku]).matrix();
    }
    const CMatrix e = base_ * suffix[0];
    r = coordinates(skew(e));
    jac.resize(d_, variables());
    for (int k = 0; k < K_; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const CMatrix& s = suffix[ku + 1];
      const CMatrix& g = gens[ku];
      for (int i = 0; i < m_; ++i) {
        CMatrix term = h_ * fields_[static_cast<std::size_t>(i)];
        CMatrix psi = term;
        double factorial = 1.0;
        for (int j = 1; j <= kDexpTerms; ++j) {
          term = g * term - term * g;
          factorial *= (j + 1);
          psi += ((j % 2 == 1) ? -1.0 : 1.0) / factorial * term;
        }
        jac.col(k * m_ + i) = coordinates(skew(e * (s.adjoint() * psi * s)));
      }
    }
  }

 private:
  CMatrix skew(const CMatrix& e) const {
    CMatrix a = 0.5 * (e - e.adjoint());
    a.diagonal().array() -= a.trace() / static_cast<double>(n_);
    return a;
  }

  Eigen::VectorXd coordinates(const CMatrix& x) const {
    Eigen::VectorXd c(d_);
    for (int l = 0; l < d_; ++l) c(l) = -scale_ * (x * (*basis_)[l].matrix()).trace().real();
    return c;
  }

  int n_, K_, m_;
  double h_;
  CMatrix base_;
  std::shared_ptr<const LieAlgebra> basis_;
  std::vector<CMatrix> fields_;
  int d_ = 0;
  double scale_ = 0.5;
};

struct SqpOutcome {
  Eigen::VectorXd alpha;
  int iterations = 0;
};

SqpOutcome minimum_energy(const Transcription& tr, Eigen::VectorXd alpha, int max_iterations) {
  const int d = tr.constraints();
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  double rho = 1.0;
  double last_energy = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    tr.residual_jacobian(alpha, r, jac);
    Eigen::MatrixXd jjt = jac * jac.transpose();
    const double mu = 1e-12 * std::max(1.0, jjt.trace() / d);
    jjt.diagonal().array() += mu;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(jjt);
    const Eigen::VectorXd lambda = ldlt.solve(jac * alpha - r);
    const Eigen::VectorXd delta = jac.transpose() * lambda - alpha;
    const double rnorm1 = r.lpNorm<1>();
    if (delta.norm() <= 1e-7 * (1.0 + alpha.norm()) && r.lpNorm<Eigen::Infinity>() <= 1e-10) break;
    rho = std::max(rho, 1.5 * lambda.lpNorm<Eigen::Infinity>() + 1e-8);
    const double phi0 = 0.5 * alpha.squaredNorm() + rho * rnorm1;
    const double slope = alpha.dot(delta) - rho * rnorm1;
    auto merit = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& ra) {
      return 0.5 * a.squaredNorm() + rho * ra.lpNorm<1>();
    };
    bool accepted = false;
    {
      Eigen::VectorXd trial = alpha + delta;
      Eigen::VectorXd rt = tr.residual(trial);
      if (merit(trial, rt) <= phi0 + 1e-4 * slope) {
        alpha = std::move(trial);
        accepted = true;
      } else {
        // second-order correction against the Maratos effect
        Eigen::VectorXd soc = trial - jac.transpose() * ldlt.solve(rt);
        Eigen::VectorXd rs = tr.residual(soc);
        if (merit(soc, rs) <= phi0 + 1e-4 * slope) {
          alpha = std::move(soc);
          accepted = true;
        }
      }
    }
    double t = 0.5;
    for (int halving = 0; !accepted && halving < 40; ++halving, t *= 0.5) {
      Eigen::VectorXd trial = alpha + t * delta;
      if (merit(trial, tr.residual(trial)) <= phi0 + 1e-4 * t * slope) {
        alpha = std::move(trial);
        accepted = true;
      }
    }
    if (!accepted) break;
    const double energy = 0.5 * alpha.squaredNorm();
    if (r.lpNorm<Eigen::Infinity>() <= 1e-10 && std::abs(energy - last_energy) <= 1e-10 * energy) break;
    last_energy = energy;
  }
  return {std::move(alpha), iter};
}

ControlPath to_path(const Eigen::VectorXd& alpha, int K, int m) {
  ControlPath path;
  path.controls = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      alpha.data(), K, m);
  const double speed = path.controls.rowwise().norm().maxCoeff();
  if (speed <= 0.0) {
    path.controls.setZero();
    path.h = 0.0;
    return path;
  }
  path.controls /= speed;
  path.h = speed / K;
  return path;
}

// Piecewise-constant resampling of a path to K steps in fixed-duration form.
Eigen::VectorXd to_alpha(const ControlPath& path, int K) {
  const int m = path.fields();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(K, m);
  const double T = path.duration();
  if (T > 0.0) {
    const double H = T / K;
    for (int j = 0; j < path.steps(); ++j) {
      const double s0 = j * path.h, s1 = (j + 1) * path.h;
      const int k0 = std::clamp(static_cast<int>(s0 / H), 0, K - 1);
      const int k1 = std::clamp(static_cast<int>(s1 / H), 0, K - 1);
      for (int k = k0; k <= k1; ++k) {
        const double overlap = std::min(s1, (k + 1) * H) - std::max(s0, k * H);
        if (overlap > 0.0) a.row(k) += (overlap / H) * T * path.controls.row(j);
      }
    }
  }
  Eigen::VectorXd out(K * m);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < m; ++i) out(k * m + i) = a(k, i);
  return out;
}

DistanceResult evaluate(const ControlPath& path, const GroupElement& x, const GroupElement& y,
                        std::span<const AlgebraElement> fields, double tol_end, int iterations) {
  DistanceResult res;
  res.T = path.duration();
  res.path = path;
  const double scale = cached_basis(x.n())->metric_scale();
  res.endpoint_error = metric_norm(log(y.inverse() * endpoint(path, x, fields)), scale);
  res.feasible = res.endpoint_error <= tol_end;
  res.iterations = iterations;
  return res;
}

bool better(const DistanceResult& a, const DistanceResult& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) return a.T < b.T;
  return a.endpoint_error < b.endpoint_error;
}

}  // namespace

bool ControlPath::is_subunit(double tol) const {
  for (int k = 0; k < steps(); ++k)
    if (controls.row(k).norm() > 1.0 + tol) return false;
  return true;
}

ControlPath ControlPath::reversed() const {
  ControlPath out;
  out.h = h;
  out.controls = -controls.colwise().reverse();
  return out;
}

ControlPath ControlPath::then(const ControlPath& next) const {
  if (fields() != next.fields()) throw SizeMismatch("ControlPath::then: field counts differ");
  ControlPath out;
  if (steps() == 0 || h == 0.0) return next;
  if (next.steps() == 0 || next.h == 0.0) return *this;
  // Smallest a, b with h / a == next.h / b, if the ratio is a small rational.
  int a = 0, b = 0;
  for (int q = 1; q <= 64 && a == 0; ++q) {
    const double p = next.h / h * q;
    const double r = std::round(p);
    if (r >= 1.0 && std::abs(p - r) <= 1e-9 * p) {
      a = q;
      b = static_cast<int>(r);
    }
  }
  if (a > 0 && (steps() * a + next.steps() * b) <= 16 * (steps() + next.steps())) {
    out.h = h / a;
    out.controls.resize(steps() * a + next.steps() * b, fields());
    int row = 0;
    for (int k = 0; k < steps(); ++k)
      for (int r = 0; r < a; ++r) out.controls.row(row++) = controls.row(k);
    for (int k = 0; k < next.steps(); ++k)
      for (int r = 0; r < b; ++r) out.controls.row(row++) = next.controls.row(k);
    return out;
  }
  out.h = std::max(h, next.h);
  out.controls.resize(steps() + next.steps(), fields());
  out.controls.topRows(steps()) = (h / out.h) * controls;
  out.controls.bottomRows(next.steps()) = (next.h / out.h) * next.controls;
  return out;
}

GroupElement endpoint(const ControlPath& path, const GroupElement& start, std::span<const AlgebraElement> fields) {
  if (path.fields() != static_cast<int>(fields.size()))
    throw SizeMismatch("endpoint: control columns do not match the field count");
  const int n = start.n();
  CMatrix g = start.matrix();
  for (int k = 0; k < path.steps(); ++k) {
    CMatrix a = CMatrix::Zero(n, n);
    for (int i = 0; i < path.fields(); ++i) a += (path.h * path.controls(k, i)) * fields[static_cast<std::size_t>(i)].matrix();
    g = g * a.exp();
    if ((k + 1) % kReprojectEvery == 0) g = project_to_group(g).matrix();
  }
  return project_to_group(g);
}

void DistanceBudget::validate() const {
  if (steps < 1) throw ValidationError("budget.steps must be >= 1");
  if (restarts < 1) throw ValidationError("budget.restarts must be >= 1");
  if (max_iterations < 0) throw ValidationError("budget.max_iterations must be >= 0");
  if (!(tol_end > 0.0)) throw ValidationError("budget.tol_end must be positive");
}

DistanceResult control_distance(const GroupElement& x, const GroupElement& y, std::span<const AlgebraElement> fields,
                                const DistanceBudget& budget, std::uint64_t seed,
                                std::span<const ControlPath> initial) {
  budget.validate();
  if (x.n() != y.n()) throw SizeMismatch("control_distance: group sizes differ");
  if (fields.empty()) throw InvalidElement("control_distance: empty field list");
  const int K = budget.steps;
  const int m = static_cast<int>(fields.size());
  const double scale = cached_basis(x.n())->metric_scale();
  const AlgebraElement theta = log(x.inverse() * y);
  const double size = metric_norm(theta, scale);
  if (size <= 1e-12) {
    ControlPath zero{0.0, Eigen::MatrixXd::Zero(K, m)};
    return evaluate(zero, x, y, fields, budget.tol_end, 0);
  }

  // least-squares field coordinates of theta
  Eigen::MatrixXd gram(m, m);
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) {
    rhs(i) = trace_inner(fields[static_cast<std::size_t>(i)], theta, scale);
    for (int j = 0; j < m; ++j)
      gram(i, j) = trace_inner(fields[static_cast<std::size_t>(i)], fields[static_cast<std::size_t>(j)], scale);
  }
  const Eigen::VectorXd projected = gram.completeOrthogonalDecomposition().solve(rhs);

  const Transcription tr(x, y, fields, K);
  std::vector<Eigen::VectorXd> starts;
  Eigen::VectorXd base(K * m);
  for (int k = 0; k < K; ++k) base.segment(k * m, m) = projected;
  starts.push_back(base);
  const double amplitude = 2.0 * std::max(std::sqrt(size), size);
  for (int r = 1; r < budget.restarts; ++r) {
    Rng rng(seed, "cc-restart", static_cast<std::uint64_t>(r));
    Eigen::VectorXd a = base;
    for (int f = 1; f <= 2; ++f) {
      Eigen::VectorXd c(m), s(m);
      for (int i = 0; i < m; ++i) c(i) = rng.normal();
      for (int i = 0; i < m; ++i) s(i) = rng.normal();
      const double w = amplitude / (f * std::sqrt(2.0 * m));
      for (int k = 0; k < K; ++k) {
        const double t = 2.0 * std::numbers::pi * f * (k + 0.5) / K;
        a.segment(k * m, m) += w * (std::cos(t) * c + std::sin(t) * s);
      }
    }
    starts.push_back(std::move(a));
  }
  for (const auto& p : initial) {
    if (p.fields() != m) throw SizeMismatch("control_distance: initial path has the wrong field count");
    starts.push_back(to_alpha(p, K));
  }

  std::vector<DistanceResult> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t s) {
    SqpOutcome out = minimum_energy(tr, starts[s], budget.max_iterations);
    results[s] = evaluate(to_path(out.alpha, K, m), x, y, fields, budget.tol_end, out.iterations);
  });
  for (const auto& p : initial) results.push_back(evaluate(p, x, y, fields, budget.tol_end, 0));
  // the unoptimized projection is exactly feasible when theta lies in the field span
  results.push_back(evaluate(to_path(base, K, m), x, y, fields, budget.tol_end, 0));

  DistanceResult best = results.front();
  int total_iterations = 0;
  for (const auto& r : results) {
    total_iterations += r.iterations;
    if (better(r, best)) best = r;
  }
  best.iterations = total_iterations;
  return best;
}

DistanceResult cc_upper_bound(const GroupElement& x, const GroupElement& y, const DistanceBudget& budget,
                              std::uint64_t seed) {
  const Frame* frame = &cached_frame(x.n());
  return control_distance(x, y, frame->horizontal(), budget, seed);
}

DistanceResult riemannian_distance_eps(const GroupElement& x, const GroupElement& y, double eps,
                                       const DistanceBudget& budget, std::uint64_t seed,
                                       const ControlPath* warm_start) {
  if (!(eps > 0.0 && eps <= 1.0)) throw RangeError("riemannian_distance_eps: eps must lie in (0, 1]");
  const Frame* frame = &cached_frame(x.n());
  const Frame scaled = epsilon_frame(*frame, eps);
  const std::vector<AlgebraElement> fields = scaled.all();
  std::vector<ControlPath> initial;
  if (warm_start) {
    if (warm_start->fields() != frame->horizontal_count())
      throw SizeMismatch("riemannian_distance_eps: warm start must be a horizontal path");
    ControlPath padded;
    padded.h = warm_start->h;
    padded.controls = Eigen::MatrixXd::Zero(warm_start->steps(), scaled.size());
    padded.controls.leftCols(warm_start->fields()) = warm_start->controls;
    initial.push_back(std::move(padded));
  }
  return control_distance(x, y, fields, budget, seed, initial);
}

BallVolumeReport ball_volume_estimate(std::span<const double> radii, std::size_t samples, std::uint64_t seed,
                                      GaugeKind kind, double eps, int n) {
  if (radii.size() < 2) throw PreconditionError("ball_volume_estimate: need at least two radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0 && radii[i] <= 0.5)) throw RangeError("ball_volume_estimate: radii must lie in (0, 0.5]");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw PreconditionError("ball_volume_estimate: radii must be descending");
  }
  const Frame* frame = &cached_frame(n);
  const GaugeGeometry& geometry = *standard_geometry(n);
  const double total = group_volume(n, frame->metric_scale());
  BallVolumeReport report;
  report.radii.assign(radii.begin(), radii.end());
  report.volumes.resize(radii.size());
  report.standard_errors.resize(radii.size());
  report.hits.resize(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) {
    const GaugeBallQuadrature q(geometry, GroupElement::identity(n), radii[i], kind, eps, samples,
                                derive_seed(seed, "ballvol", i));
    report.hits[i] = q.size();
    report.volumes[i] = q.measure() / total;
    report.standard_errors[i] = q.measure_error() / total;
  });
  for (std::size_t h : report.hits)
    if (h < 30) throw StatisticalInsufficiency("ball_volume_estimate: fewer than 30 samples inside a ball");
  const auto m = static_cast<int>(radii.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    a(i, 0) = std::log(radii[static_cast<std::size_t>(i)]);
    a(i, 1) = 1.0;
    b(i) = std::log(report.volumes[static_cast<std::size_t>(i)]);
  }
  report.slope = a.colPivHouseholderQr().solve(b)(0);
  return report;
}

SurrogateCheck surrogate_distance_check(std::size_t count, std::uint64_t seed, const DistanceBudget& budget) {
  const Frame* frame = &cached_frame(3);
  const GaugeGeometry& geometry = *standard_geometry(3);
  SurrogateCheck out;
  out.gauges.resize(count);
  out.distances.resize(count);
  const int m = frame->horizontal_count();
  const int nu = frame->vertical_count();
  parallel_for(count, [&](std::size_t k) {
    Rng rng(seed, "surrogate", k);
    const double r = rng.uniform(0.05, 0.3);
    Eigen::VectorXd h(m), t(nu);
    for (int i = 0; i < m; ++i) h(i) = rng.normal();
    for (int j = 0; j < nu; ++j) t(j) = rng.normal();
    // random mix of horizontal and vertical extent at gauge exactly r
    const double mix = rng.uniform();
    h *= r * (mix < 0.5 ? 1.0 : rng.uniform()) / h.norm();
    t *= r * r * (mix < 0.5 ? rng.uniform() : 1.0) / t.norm();
    const AlgebraElement theta = geometry.compose(h, t);
    const GroupElement g = exp(theta);
    out.gauges[k] = geometry.gauge(geometry.split(log(g)), GaugeKind::SubRiemannian);
    out.distances[k] = cc_upper_bound(GroupElement::identity(3), g, budget, derive_seed(seed, "surrogate-cc", k)).T;
  });
  out.min_ratio = std::numeric_limits<double>::infinity();
  out.max_ratio = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double ratio = out.distances[k] / out.gauges[k];
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
  }
  return out;
}

}  // namespace sublap

#include "sublap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <tuple>

#include "sublap/error.hpp"
#include "sublap/haar_integration.hpp"
#include "sublap/parallel.hpp"
#include "sublap/quadrature.hpp"
#include "sublap/rng.hpp"

namespace sublap {

namespace {

std::shared_ptr<const Eigen::MatrixXd> quadrature_values(int n, int degree_cap, std::size_t count, std::uint64_t seed) {
  using Key = std::tuple<int, int, std::size_t, std::uint64_t>;
  static std::mutex mutex;
  static std::deque<std::pair<Key, std::shared_ptr<const Eigen::MatrixXd>>> cache;
  const Key key{n, degree_cap, count, seed};
  {
    std::lock_guard lock(mutex);
    for (const auto& [k, v] : cache) {
      if (k == key) return v;
    }
  }
  const QuadratureSet q = haar_quadrature(count, seed, n);
  auto values = std::make_shared<const Eigen::MatrixXd>(monomial_values(*MonomialBasis::get(n, degree_cap), q.points()));
  std::lock_guard lock(mutex);
  cache.emplace_back(key, values);
  if (cache.size() > 6) cache.pop_front();
  return values;
}

const Frame& cached_su_frame(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<Frame>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Frame>(su_frame(n));
  return *slot;
}

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::MaxIterations:
      return "max_iterations";
    case SolveStatus::LineSearchFailure:
      return "line_search_failure";
  }
  return "unknown";
}

void SolveConfig::validate() const {
  flux.validate();
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in [0, 1]");
  if (group_n < 2) throw InvalidDimension("group size must be at least 2");
  if (degree_cap < 1) throw ValidationError("degree cap must be at least 1");
  if (quadrature_points < 1) throw ValidationError("quadrature needs at least one point");
  if (!(tol_grad >= 0.0)) throw ValidationError("tol_grad must be non-negative");
  if (max_iter < 1) throw ValidationError("max_iter must be positive");
  if (source.n() != group_n) throw ValidationError("source lives on a different group");
  if (source.degree() > degree_cap) throw ValidationError("source degree exceeds the degree cap");
  const double mean = exact_integral(source);
  if (std::abs(mean) >= 1e-8) throw ValidationError("source must have zero mean (mean " + std::to_string(mean) + ")");
}

double SolveConfig::gradient_tolerance() const {
  if (tol_grad > 0.0) return tol_grad;
  return flux.p == 2.0 ? 1e-8 : 1e-6;
}

Frame SolveConfig::frame() const {
  const Frame& base = cached_su_frame(group_n);
  return epsilon > 0.0 ? epsilon_frame(base, epsilon) : base;
}

std::vector<AlgebraElement> SolveConfig::gradient_fields() const {
  const Frame f = frame();
  return epsilon > 0.0 ? f.all() : f.horizontal();
}

EnergyFunctional::EnergyFunctional(const SolveConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  basis_ = MonomialBasis::get(cfg_.group_n, cfg_.degree_cap);
  values_ = quadrature_values(cfg_.group_n, cfg_.degree_cap, cfg_.quadrature_points, cfg_.quadrature_seed);
  const int m = basis_->size();
  bool exact_moments = true;
  try {
    moments_ = moment_matrix(cfg_.group_n, cfg_.degree_cap);
  } catch (const Unsupported&) {
    exact_moments = false;
    moments_ = std::make_shared<const Eigen::MatrixXd>(values_->transpose() * *values_ /
                                                       static_cast<double>(values_->rows()));
  }
  exact_ = exact_moments && cfg_.flux.p == 2.0;
  const Eigen::MatrixXd& mom = *moments_;
  means_ = mom.col(0);

  // Greedy L^2-independent selection by incremental Cholesky of the covariance.
  const Eigen::MatrixXd cov = mom - means_ * means_.transpose();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(m, m);
  for (int k = 1; k < m; ++k) {
    const double diag = cov(k, k);
    if (diag <= 1e-14) continue;
    const int s = static_cast<int>(selected_.size());
    Eigen::VectorXd row(s);
    for (int j = 0; j < s; ++j) {
      double v = cov(k, selected_[j]);
      for (int t = 0; t < j; ++t) v -= row(t) * l(j, t);
      row(j) = v / l(j, j);
    }
    const double residual = diag - row.squaredNorm();
    if (residual > 1e-9 * diag) {
      l.row(s).head(s) = row.transpose();
      l(s, s) = std::sqrt(residual);
      selected_.push_back(k);
    }
  }
  const int dim = dimension();
  if (dim == 0) throw SingularSystem("no non-constant basis functions", 0, m);
  psi_ = Eigen::MatrixXd::Zero(m, dim);
  for (int k = 0; k < dim; ++k) {
    psi_(selected_[k], k) = 1.0;
    psi_(0, k) -= means_(selected_[k]);
  }
  gram_ = psi_.transpose() * mom * psi_;
  gram_ldlt_.compute(gram_);

  for (const auto& x : cfg_.gradient_fields()) {
    derivatives_.push_back(basis_->derivative(x));
    derivative_psi_.push_back(derivatives_.back() * psi_);
  }
  stiffness_ = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& dp : derivative_psi_) stiffness_ += dp.transpose() * mom * dp;
  stiffness_ = 0.5 * (stiffness_ + stiffness_.transpose());

  const PolyField f = cfg_.source.with_degree_cap(cfg_.degree_cap);
  source_moments_ = mom * f.coefficients();
  load_ = psi_.transpose() * source_moments_;
}

PolyField EnergyFunctional::field(const Eigen::Ref<const Eigen::VectorXd>& c) const {
  if (c.size() != dimension()) throw SizeMismatch("coordinate vector has wrong length");
  return PolyField(basis_, psi_ * c);
}

Eigen::VectorXd EnergyFunctional::coordinates(const PolyField& u) const {
  if (u.n() != cfg_.group_n) throw SizeMismatch("field lives on a different group");
  const PolyField v = u.with_degree_cap(cfg_.degree_cap);
  return gram_ldlt_.solve(psi_.transpose() * (*moments_ * v.coefficients()));
}

Eigen::MatrixXd EnergyFunctional::field_derivatives(const Eigen::Ref<const Eigen::VectorXd>& c) const {
  if (c.size() != dimension()) throw SizeMismatch("coordinate vector has wrong length");
  Eigen::MatrixXd dc(basis_->size(), static_cast<Eigen::Index>(derivative_psi_.size()));
  for (std::size_t i = 0; i < derivative_psi_.size(); ++i) dc.col(static_cast<Eigen::Index>(i)) = derivative_psi_[i] * c;
  return dc;
}

EnergyFunctional::Pass EnergyFunctional::quadrature_pass(const Eigen::Ref<const Eigen::VectorXd>& c, bool moments) const {
  const Eigen::MatrixXd dc = field_derivatives(c);
  const Eigen::MatrixXd& vals = *values_;
  const std::size_t count = static_cast<std::size_t>(vals.rows());
  const double p = cfg_.flux.p;
  const double delta = cfg_.flux.delta;
  const auto m = dc.cols();
  Pass total = deterministic_reduce<Pass>(
      count, kReductionChunk,
      [&](std::size_t begin, std::size_t end) {
        const auto len = static_cast<Eigen::Index>(end - begin);
        const auto rows = vals.middleRows(static_cast<Eigen::Index>(begin), len);
        Eigen::MatrixXd xi = rows * dc;
        Pass part;
        for (Eigen::Index r = 0; r < len; ++r) {
          const double w = delta + xi.row(r).squaredNorm();
          const long double phi = std::pow(static_cast<long double>(w), 0.5L * p) / p;
          if (!std::isfinite(static_cast<double>(phi))) {
            throw EvaluationError("non-finite energy density", begin + static_cast<std::size_t>(r));
          }
          part.flux_energy += phi;
          if (moments) {
            double scale;
            if (w == 0.0) {
              if (p < 2.0) throw SingularityError("flux undefined where the gradient vanishes");
              scale = p == 2.0 ? 1.0 : 0.0;
            } else {
              scale = std::pow(w, 0.5 * (p - 2.0));
            }
            xi.row(r) *= scale;
          }
        }
        if (moments) part.flux_moments = rows.transpose() * xi;
        return part;
      },
      [](Pass& a, const Pass& b) {
        a.flux_energy += b.flux_energy;
        if (a.flux_moments.size() == 0) {
          a.flux_moments = b.flux_moments;
        } else if (b.flux_moments.size() != 0) {
          a.flux_moments += b.flux_moments;
        }
      });
  total.flux_energy /= static_cast<long double>(count);
  if (moments) {
    total.flux_moments /= static_cast<double>(count);
    if (total.flux_moments.size() == 0) total.flux_moments = Eigen::MatrixXd::Zero(vals.cols(), m);
  }
  return total;
}

double EnergyFunctional::value(const Eigen::Ref<const Eigen::VectorXd>& c) const {
  if (exact_) return 0.5 * (cfg_.flux.delta + c.dot(stiffness_ * c)) - load_.dot(c);
  const Pass pass = quadrature_pass(c, false);
  long double load = 0.0L;
  for (Eigen::Index k = 0; k < c.size(); ++k) load += static_cast<long double>(load_(k)) * c(k);
  return static_cast<double>(pass.flux_energy - load);
}

double EnergyFunctional::value_and_gradient(const Eigen::Ref<const Eigen::VectorXd>& c, Eigen::VectorXd& grad) const {
  if (exact_) {
    const Eigen::VectorXd kc = stiffness_ * c;
    grad = kc - load_;
    return 0.5 * (cfg_.flux.delta + c.dot(kc)) - load_.dot(c);
  }
  const Pass pass = quadrature_pass(c, true);
  grad = -load_;
  for (std::size_t i = 0; i < derivative_psi_.size(); ++i) {
    grad += derivative_psi_[i].transpose() * pass.flux_moments.col(static_cast<Eigen::Index>(i));
  }
  long double load = 0.0L;
  for (Eigen::Index k = 0; k < c.size(); ++k) load += static_cast<long double>(load_(k)) * c(k);
  return static_cast<double>(pass.flux_energy - load);
}

Eigen::VectorXd EnergyFunctional::gradient(const Eigen::Ref<const Eigen::VectorXd>& c) const {
  Eigen::VectorXd g;
  value_and_gradient(c, g);
  return g;
}

double EnergyFunctional::weak_residual(const Eigen::Ref<const Eigen::VectorXd>& c) const {
  Eigen::VectorXd r = -source_moments_;
  if (exact_) {
    const Eigen::MatrixXd dc = field_derivatives(c);
    for (std::size_t i = 0; i < derivatives_.size(); ++i) {
      r += derivatives_[i].transpose() * (*moments_ * dc.col(static_cast<Eigen::Index>(i)));
    }
  } else {
    const Pass pass = quadrature_pass(c, true);
    for (std::size_t i = 0; i < derivatives_.size(); ++i) {
      r += derivatives_[i].transpose() * pass.flux_moments.col(static_cast<Eigen::Index>(i));
    }
  }
  return r.cwiseAbs().maxCoeff();
}

OmegaStats EnergyFunctional::omega_stats(const Eigen::Ref<const Eigen::VectorXd>& c) const {
  const Eigen::MatrixXd dc = field_derivatives(c);
  const Eigen::MatrixXd& vals = *values_;
  using Stats = std::array<double, 3>;
  const Stats s = deterministic_reduce<Stats>(
      static_cast<std::size_t>(vals.rows()), kReductionChunk,
      [&](std::size_t begin, std::size_t end) {
        const Eigen::MatrixXd xi = vals.middleRows(static_cast<Eigen::Index>(begin),
                                                   static_cast<Eigen::Index>(end - begin)) * dc;
        const Eigen::VectorXd w = (xi.rowwise().squaredNorm().array() + cfg_.flux.delta).matrix();
        return Stats{w.minCoeff(), w.maxCoeff(), w.sum()};
      },
      [](Stats& a, const Stats& b) {
        a[0] = std::min(a[0], b[0]);
        a[1] = std::max(a[1], b[1]);
        a[2] += b[2];
      });
  return {s[0], s[1], s[2] / static_cast<double>(vals.rows())};
}

double energy(const PolyField& u, const SolveConfig& cfg) {
  const EnergyFunctional f(cfg);
  return f.value(f.coordinates(u));
}

Eigen::VectorXd energy_gradient(const PolyField& u, const SolveConfig& cfg) {
  const EnergyFunctional f(cfg);
  return f.gradient(f.coordinates(u));
}

SolutionReport minimize(const SolveConfig& cfg, const PolyField& init) {
  if (!cfg.pin) throw PreconditionError("the minimizer requires mean-zero pinning");
  if (cfg.flux.delta == 0.0 && cfg.flux.p < 2.0) {
    throw PreconditionError("delta = 0 with p < 2 gives a non-smooth energy");
  }
  const EnergyFunctional f(cfg);
  const double tol = cfg.gradient_tolerance();
  const int dim = f.dimension();

  Eigen::LDLT<Eigen::MatrixXd> k_ldlt(f.stiffness());
  if (k_ldlt.info() != Eigen::Success || !k_ldlt.isPositive()) {
    throw SingularSystem("Galerkin matrix is not positive definite", 0, dim);
  }
  const Eigen::MatrixXd h0 = k_ldlt.solve(Eigen::MatrixXd::Identity(dim, dim));

  SolutionReport report;
  report.epsilon = cfg.epsilon;
  Eigen::VectorXd c = f.coordinates(init);
  Eigen::VectorXd g;
  double e = f.value_and_gradient(c, g);
  report.energy_trace.push_back(e);
  report.gradient_trace.push_back(g.norm());

  Eigen::MatrixXd h = h0;
  bool scaled = false;
  report.status = SolveStatus::MaxIterations;
  Eigen::VectorXd trial_grad;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    if (g.norm() <= tol) {
      report.status = SolveStatus::Converged;
      break;
    }
    Eigen::VectorXd d = -h * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      h = h0;
      scaled = false;
      d = -h * g;
      slope = g.dot(d);
    }
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    double trial_e = 0.0;
    for (int halving = 0; halving <= 60; ++halving) {
      trial = c + t * d;
      trial_e = f.value_and_gradient(trial, trial_grad);
      const double predicted = 1e-4 * t * slope;
      const bool armijo = trial_e <= e + predicted;
      const bool rounding = trial_e <= e && std::abs(predicted) <= 1e-13 * std::max(1.0, std::abs(e));
      if (std::isfinite(trial_e) && (armijo || rounding)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      report.status = SolveStatus::LineSearchFailure;
      break;
    }
    const Eigen::VectorXd s = trial - c;
    const Eigen::VectorXd y = trial_grad - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h *= sy / y.dot(h * y);
        scaled = true;
      }
      const Eigen::VectorXd hy = h * y;
      const double rho = 1.0 / sy;
      h += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) - rho * (s * hy.transpose() + hy * s.transpose());
    }
    c = trial;
    g = trial_grad;
    e = trial_e;
    ++report.iterations;
    report.energy_trace.push_back(e);
    report.gradient_trace.push_back(g.norm());
  }
  if (report.status != SolveStatus::Converged && g.norm() <= tol) report.status = SolveStatus::Converged;
  report.coordinates = c;
  report.coefficients = f.field(c);
  report.final_gradient_norm = g.norm();
  report.weak_residual = f.weak_residual(c);
  report.omega_stats = f.omega_stats(c);
  return report;
}

SolutionReport minimize(const SolveConfig& cfg) {
  return minimize(cfg, PolyField(cfg.group_n, cfg.degree_cap));
}

PolyField linear_solve_p2(const SolveConfig& cfg) {
  if (cfg.flux.p != 2.0) throw PreconditionError("linear solve requires p = 2");
  const EnergyFunctional f(cfg);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f.stiffness());
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cutoff = 1e-12 * std::max(1.0, lambda.maxCoeff());
  const int rank = static_cast<int>((lambda.array() > cutoff).count());
  if (rank < f.dimension()) throw SingularSystem("singular Galerkin system on the mean-zero space", rank, f.dimension());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(f.stiffness());
  Eigen::VectorXd c = ldlt.solve(f.load());
  // One step of iterative refinement.
  c += ldlt.solve(f.load() - f.stiffness() * c);
  return f.field(c);
}

std::vector<SolutionReport> epsilon_sweep(const SolveConfig& cfg, std::span<const double> eps_list) {
  if (eps_list.empty()) throw ValidationError("empty epsilon list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] >= 0.0 && eps_list[i] <= 1.0)) throw RangeError("epsilon values must lie in [0, 1]");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw ValidationError("epsilon list must be strictly decreasing");
  }
  std::vector<SolutionReport> reports;
  PolyField init(cfg.group_n, cfg.degree_cap);
  for (double eps : eps_list) {
    SolveConfig step = cfg;
    step.epsilon = eps;
    reports.push_back(minimize(step, init));
    init = reports.back().coefficients;
  }
  return reports;
}

PolyField random_field(const SolveConfig& cfg, std::uint64_t seed, double scale) {
  const EnergyFunctional f(cfg);
  Rng rng(seed, "random_field");
  Eigen::VectorXd c(f.dimension());
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = scale * rng.normal();
  return f.field(c);
}

}  // namespace sublap

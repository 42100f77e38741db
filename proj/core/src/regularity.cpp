#include "sublap/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sublap/error.hpp"
#include "sublap/parallel.hpp"
#include "sublap/rng.hpp"

namespace sublap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_ratio(double lhs, double rhs) {
  if (rhs == 0.0) return lhs > 0.0 ? kInf : 0.0;
  return lhs / rhs;
}

double power(double base, double e) {
  if (e == 0.0) return 1.0;
  return std::pow(base, e);
}

// One ball sample with the jet of u and the cutoff data.
struct Sample {
  std::size_t index = 0;
  double raw_weight = 0.0;
  FieldJet::Values jet;
  double eta = 0.0;
  Eigen::VectorXd eta_derivatives;  // horizontal, then roots
};

struct SampleSet {
  std::vector<Sample> samples;
  std::size_t drawn = 0;
};

SampleSet collect(const GaugeGeometry& geometry, const FieldJet& jet, const Cutoff* cut, const GroupElement& center,
                  double radius, GaugeKind kind, double eps, std::size_t count, std::uint64_t seed) {
  const GaugeBallQuadrature q(geometry, center, radius, kind, eps, count, seed);
  SampleSet set;
  set.drawn = q.drawn();
  set.samples.resize(q.size());
  const double scale = static_cast<double>(q.drawn());
  parallel_for(q.size(), [&](std::size_t i) {
    Sample& s = set.samples[i];
    s.index = q.indices()[i];
    s.raw_weight = q.weights()[i] * scale;
    s.jet = jet.at(q.points()[i]);
    if (cut) {
      const AlgebraElement theta = log(cut->spec().center.inverse() * q.points()[i]);
      s.eta = cut->value_at(theta);
      s.eta_derivatives = cut->frame_derivatives_at(theta);
    }
  });
  return set;
}

std::vector<std::size_t> level_sizes(const CheckOptions& o) {
  if (o.samples == 0) throw RangeError("check samples must be positive");
  if (o.refinement_levels < 1) throw RangeError("refinement_levels must be >= 1");
  std::vector<std::size_t> out;
  for (int l = 0; l < o.refinement_levels; ++l) out.push_back(o.samples << l);
  return out;
}

struct Quantities {
  double eta, etaH2, etaT, w, omega, nH2, nT2, HT2, HH2, Teps2, epsgradT2, gradeta_eps2;
};

Quantities quantities(const Sample& s, int m, double delta, double eps) {
  Quantities q{};
  const auto& f = s.jet.first;
  const auto& d2 = s.jet.second;
  const int size = static_cast<int>(f.size());
  const int nu = size - m;
  q.eta = s.eta;
  q.etaH2 = s.eta_derivatives.head(m).squaredNorm();
  q.etaT = s.eta_derivatives.tail(nu).norm();
  q.nH2 = f.head(m).squaredNorm();
  q.nT2 = f.tail(nu).squaredNorm();
  q.w = delta + q.nH2;
  q.omega = q.w + eps * eps * q.nT2;
  q.HT2 = d2.block(0, m, m, nu).squaredNorm();
  q.HH2 = d2.block(0, 0, m, m).squaredNorm();
  q.Teps2 = eps * eps * q.nT2;
  q.epsgradT2 = eps * eps * (q.HT2 + eps * eps * d2.block(m, m, nu, nu).squaredNorm());
  q.gradeta_eps2 = q.etaH2 + eps * eps * q.etaT * q.etaT;
  return q;
}

// Integrands of each inequality; the assemble step applies constants and sup factors.
std::vector<double> integrands(Inequality which, const Quantities& q, double p, double beta) {
  const double a = 0.5 * (p - 2.0);
  const double e2 = q.eta * q.eta;
  switch (which) {
    case Inequality::C1:
      return {e2 * power(q.w, a) * power(q.nT2, beta) * q.HT2, q.etaH2 * power(q.w, a) * power(q.nT2, beta + 1.0),
              e2 * power(q.w, 0.5 * p) * power(q.nT2, beta)};
    case Inequality::C2:
      return {e2 * power(q.w, a + beta) * q.HH2, e2 * power(q.w, a + beta) * q.nT2,
              (e2 + q.etaH2 + q.eta * q.etaT) * power(q.w, 0.5 * p + beta)};
    case Inequality::C3:
      return {power(q.eta, 2.0 * beta + 2.0) * power(q.w, a) * power(q.nT2, beta) * q.HH2,
              power(q.eta, 2.0 * beta) * power(q.w, 0.5 * p) * power(q.nT2, beta - 1.0) * q.HH2};
    case Inequality::C4:
      return {power(q.eta, 2.0 * beta + 2.0) * power(q.w, a) * power(q.nT2, beta) * q.HH2,
              e2 * power(q.w, a + beta) * q.HH2};
    case Inequality::C5:
      return {e2 * power(q.w, a + beta) * q.HH2, q.eta > 0.0 ? power(q.w, 0.5 * p + beta) : 0.0};
    case Inequality::L32:
      return {e2 * power(q.omega, a) * power(q.Teps2, beta) * q.epsgradT2,
              q.gradeta_eps2 * power(q.omega, a) * power(q.Teps2, beta + 1.0),
              e2 * power(q.omega, 0.5 * p) * power(q.Teps2, beta)};
  }
  return {};
}

void assemble(Inequality which, const std::vector<double>& ints, double beta, double eps, double supH, double supT,
              double& lhs, std::vector<double>& rhs) {
  const double b1 = beta + 1.0;
  lhs = ints[0];
  switch (which) {
    case Inequality::C1:
      rhs = {ints[1], b1 * b1 * ints[2]};
      break;
    case Inequality::C2:
      rhs = {std::pow(b1, 4) * ints[1], b1 * b1 * ints[2]};
      break;
    case Inequality::C3:
      rhs = {std::pow(b1, 4) * supH * supH * ints[1]};
      break;
    case Inequality::C4:
      rhs = {std::pow(b1, 4.0 * beta) * std::pow(supH, 2.0 * beta) * ints[1]};
      break;
    case Inequality::C5:
      rhs = {std::pow(b1, 12) * (1.0 + supH * supH + supT) * ints[1]};
      break;
    case Inequality::L32:
      rhs = {ints[1], eps * eps * b1 * b1 * ints[2]};
      break;
  }
}

void check_beta(Inequality which, double beta) {
  if (!std::isfinite(beta) || beta < 0.0) throw PreconditionError("beta must be a finite number >= 0");
  if ((which == Inequality::C3 || which == Inequality::C4) && beta < 1.0)
    throw PreconditionError(to_string(which) + " requires beta >= 1");
}

RatioReport ratio_from_samples(const SampleSet& set, Inequality which, double beta, double p, double delta, double eps,
                               int m, const std::vector<std::size_t>& levels) {
  RatioReport report;
  for (std::size_t N : levels) {
    std::vector<long double> sums;
    double supH = 0.0, supT = 0.0;
    for (const Sample& s : set.samples) {
      if (s.index >= N) continue;
      const Quantities q = quantities(s, m, delta, eps);
      supH = std::max(supH, std::sqrt(q.etaH2));
      supT = std::max(supT, q.etaT);
      const std::vector<double> v = integrands(which, q, p, beta);
      if (sums.empty()) sums.assign(v.size(), 0.0L);
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (!std::isfinite(v[j])) throw EvaluationError("non-finite integrand in " + to_string(which), s.index);
        sums[j] += static_cast<long double>(s.raw_weight) * v[j];
      }
    }
    std::vector<double> ints(sums.size());
    for (std::size_t j = 0; j < sums.size(); ++j) ints[j] = static_cast<double>(sums[j] / static_cast<long double>(N));
    if (ints.empty()) ints.assign(3, 0.0);
    double lhs = 0.0;
    std::vector<double> rhs;
    assemble(which, ints, beta, eps, supH, supT, lhs, rhs);
    report.lhs = lhs;
    report.rhs_terms = rhs;
    report.ratio = safe_ratio(lhs, report.rhs_sum());
    report.refinement_trace.push_back(report.ratio);
    report.samples = N;
  }
  return report;
}

double effective_eps(const SolvedField& field, const CheckOptions& o) {
  const double eps = o.epsilon.value_or(field.epsilon);
  if (!(eps > 0.0 && eps <= 1.0)) throw PreconditionError("L32 needs an epsilon in (0, 1]");
  return eps;
}

double smoothstep(double s, int order) {
  if (order == 1) return s * s * (3.0 - 2.0 * s);
  return s * s * s * (s * (6.0 * s - 15.0) + 10.0);
}

double smoothstep_derivative(double s, int order) {
  if (order == 1) return 6.0 * s * (1.0 - s);
  const double t = s * (1.0 - s);
  return 30.0 * t * t;
}

double slope_of(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double max_pair_distance(const std::vector<Eigen::VectorXd>& g, std::span<const std::size_t> idx) {
  double best = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) best = std::max(best, (g[idx[a]] - g[idx[b]]).squaredNorm());
  return std::sqrt(best);
}

}  // namespace

SolvedField SolvedField::from(const SolutionReport& report, const SolveConfig& cfg) {
  return SolvedField{report.coefficients, cfg.flux, cfg.epsilon};
}

void CutoffSpec::validate() const {
  if (!(r_inner > 0.0) || !(r_outer > r_inner) || !std::isfinite(r_outer))
    throw RangeError("cutoff radii must satisfy 0 < r_inner < r_outer");
  if (profile != 1 && profile != 2) throw RangeError("cutoff profile must be 1 or 2");
}

bool CutoffInvariants::satisfied() const {
  return min_value >= 0.0 && max_value <= 1.0 && inner_deviation <= 1e-12 && exterior_max <= 0.05 &&
         sup_horizontal_gradient <= horizontal_bound && sup_vertical_gradient <= vertical_bound;
}

Cutoff::Cutoff(CutoffSpec spec, GaugeKind kind, double eps)
    : spec_(std::move(spec)), kind_(kind), eps_(eps), geometry_(standard_geometry(spec_.center.n())) {
  spec_.validate();
  if (!(eps_ > 0.0)) throw RangeError("cutoff gauge eps must be positive");
}

Cutoff cutoff(const CutoffSpec& spec) { return Cutoff(spec); }

double Cutoff::profile(double s) const { return 1.0 - smoothstep(std::clamp(s, 0.0, 1.0), spec_.profile); }

double Cutoff::profile_derivative(double s) const {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return -smoothstep_derivative(s, spec_.profile);
}

double Cutoff::value_at(const AlgebraElement& theta) const {
  const double rho = geometry_->gauge(geometry_->split(theta), kind_, eps_);
  return profile((rho - spec_.r_inner) / (spec_.r_outer - spec_.r_inner));
}

double Cutoff::value(const GroupElement& g) const { return value_at(log(spec_.center.inverse() * g)); }

Eigen::VectorXd Cutoff::derivatives_at(const AlgebraElement& theta, std::span<const AlgebraElement> fields) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<int>(fields.size()));
  const double width = spec_.r_outer - spec_.r_inner;
  const double rho = geometry_->gauge(geometry_->split(theta), kind_, eps_);
  const double ds = profile_derivative((rho - spec_.r_inner) / width);
  if (ds == 0.0) return out;
  for (std::size_t i = 0; i < fields.size(); ++i)
    out(static_cast<int>(i)) = ds / width * geometry_->gauge_derivative(theta, fields[i], kind_, eps_);
  return out;
}

Eigen::VectorXd Cutoff::frame_derivatives_at(const AlgebraElement& theta) const {
  const Frame& f = geometry_->frame();
  std::vector<AlgebraElement> fields = f.horizontal();
  fields.insert(fields.end(), f.roots().begin(), f.roots().end());
  return derivatives_at(theta, fields);
}

CutoffInvariants Cutoff::check(std::size_t samples, std::uint64_t seed) const {
  CutoffInvariants out;
  const double width = spec_.r_outer - spec_.r_inner;
  out.horizontal_bound = 2.5 / width;
  out.vertical_bound = 10.0 / (width * width);
  out.min_value = kInf;
  out.max_value = -kInf;
  const int m = geometry_->frame().horizontal_count();
  const GaugeBallQuadrature inner(*geometry_, spec_.center, spec_.r_inner, kind_, eps_, samples,
                                  derive_seed(seed, "cutoff-inner", 0));
  for (const auto& th : inner.thetas()) out.inner_deviation = std::max(out.inner_deviation, std::abs(value_at(th) - 1.0));
  const GaugeBallQuadrature ball(*geometry_, spec_.center, spec_.r_outer, kind_, eps_, samples,
                                 derive_seed(seed, "cutoff-ball", 0));
  for (const auto& th : ball.thetas()) {
    const double v = value_at(th);
    out.min_value = std::min(out.min_value, v);
    out.max_value = std::max(out.max_value, v);
    const Eigen::VectorXd d = frame_derivatives_at(th);
    out.sup_horizontal_gradient = std::max(out.sup_horizontal_gradient, d.head(m).norm());
    out.sup_vertical_gradient = std::max(out.sup_vertical_gradient, d.tail(d.size() - m).norm());
  }
  const GaugeBallQuadrature outer(*geometry_, spec_.center, 2.0 * spec_.r_outer, kind_, eps_, samples,
                                  derive_seed(seed, "cutoff-exterior", 0));
  for (const auto& th : outer.thetas()) {
    if (geometry_->gauge(geometry_->split(th), kind_, eps_) <= spec_.r_outer) continue;
    out.exterior_max = std::max(out.exterior_max, value_at(th));
  }
  out.samples = inner.size() + ball.size() + outer.size();
  return out;
}

PolyField Cutoff::project(int degree_cap, std::size_t samples, std::uint64_t seed) const {
  const int n = spec_.center.n();
  const auto basis = MonomialBasis::get(n, degree_cap);
  const GaugeBallQuadrature ball(*geometry_, spec_.center, 1.5 * spec_.r_outer, kind_, eps_, samples,
                                 derive_seed(seed, "cutoff-fit", 0));
  const QuadratureSet haar = haar_quadrature(samples, derive_seed(seed, "cutoff-fit-haar", 0), n);
  std::vector<GroupElement> points = ball.points();
  points.insert(points.end(), haar.points().begin(), haar.points().end());
  const Eigen::MatrixXd v = monomial_values(*basis, points);
  Eigen::VectorXd target(static_cast<int>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) target(static_cast<int>(i)) = value(points[i]);
  const Eigen::VectorXd c = v.colPivHouseholderQr().solve(target);
  const double sup_error = (v * c - target).lpNorm<Eigen::Infinity>();
  if (sup_error > 0.05)
    throw DegreeCapError("cutoff projection onto degree " + std::to_string(degree_cap) + " has sup error " +
                         std::to_string(sup_error));
  return PolyField(basis, c);
}

std::string to_string(Inequality which) {
  switch (which) {
    case Inequality::C1: return "C1";
    case Inequality::C2: return "C2";
    case Inequality::C3: return "C3";
    case Inequality::C4: return "C4";
    case Inequality::C5: return "C5";
    case Inequality::L32: return "L32";
  }
  return "?";
}

Inequality inequality_from_string(const std::string& name) {
  for (Inequality w : {Inequality::C1, Inequality::C2, Inequality::C3, Inequality::C4, Inequality::C5, Inequality::L32})
    if (to_string(w) == name) return w;
  throw ValidationError("unknown inequality '" + name + "'");
}

double RatioReport::rhs_sum() const {
  double s = 0.0;
  for (double t : rhs_terms) s += t;
  return s;
}

bool RatioReport::finite() const {
  if (!std::isfinite(lhs) || !std::isfinite(ratio)) return false;
  for (double t : rhs_terms)
    if (!std::isfinite(t)) return false;
  for (double r : refinement_trace)
    if (!std::isfinite(r)) return false;
  return true;
}

double RatioReport::refinement_spread() const {
  double lo = kInf, hi = 0.0;
  for (double r : refinement_trace) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (hi == 0.0) return 1.0;
  if (lo == 0.0) return kInf;
  return hi / lo;
}

FieldJet::FieldJet(const PolyField& u, const Frame& frame)
    : basis_(u.basis_ptr()), m_(frame.horizontal_count()), size_(frame.size()) {
  std::vector<AlgebraElement> fields = frame.horizontal();
  fields.insert(fields.end(), frame.roots().begin(), frame.roots().end());
  coefficients_.resize(basis_->size(), 1 + size_ + size_ * size_);
  coefficients_.col(0) = u.coefficients();
  for (int b = 0; b < size_; ++b) {
    const PolyField db = apply_field(fields[static_cast<std::size_t>(b)], u);
    coefficients_.col(1 + b) = db.coefficients();
    for (int a = 0; a < size_; ++a)
      coefficients_.col(1 + size_ + a * size_ + b) = apply_field(fields[static_cast<std::size_t>(a)], db).coefficients();
  }
}

FieldJet::Values FieldJet::at(const GroupElement& g) const {
  const Eigen::VectorXd mono = basis_->evaluate(g.matrix());
  const Eigen::VectorXd all = coefficients_.transpose() * mono;
  Values v;
  v.u = all(0);
  v.first = all.segment(1, size_);
  v.second.resize(size_, size_);
  for (int a = 0; a < size_; ++a)
    for (int b = 0; b < size_; ++b) v.second(a, b) = all(1 + size_ + a * size_ + b);
  return v;
}

std::vector<BatteryEntry> inequality_battery(const SolvedField& field, const CutoffSpec& spec,
                                             std::span<const double> betas, const CheckOptions& options) {
  spec.validate();
  field.flux.validate();
  const auto levels = level_sizes(options);
  const auto geometry = standard_geometry(field.u.n());
  const FieldJet jet(field.u, geometry->frame());
  const int m = jet.horizontal_count();
  const Cutoff intrinsic(spec, GaugeKind::SubRiemannian);
  const SampleSet set = collect(*geometry, jet, &intrinsic, spec.center, spec.r_outer, GaugeKind::SubRiemannian, 1.0,
                                levels.back(), derive_seed(options.seed, "battery", 0));
  std::vector<BatteryEntry> out;
  for (Inequality w : {Inequality::C1, Inequality::C2, Inequality::C3, Inequality::C4, Inequality::C5}) {
    for (double beta : betas) {
      if ((w == Inequality::C3 || w == Inequality::C4) && beta < 1.0) continue;
      check_beta(w, beta);
      out.push_back({w, beta, ratio_from_samples(set, w, beta, field.flux.p, field.flux.delta, 0.0, m, levels)});
    }
  }
  const double eps = options.epsilon.value_or(field.epsilon);
  if (eps > 0.0) {
    const double e = effective_eps(field, options);
    const Cutoff scaled(spec, GaugeKind::Epsilon, e);
    const SampleSet eset = collect(*geometry, jet, &scaled, spec.center, spec.r_outer, GaugeKind::Epsilon, e,
                                   levels.back(), derive_seed(options.seed, "battery-eps", 0));
    for (double beta : betas) {
      check_beta(Inequality::L32, beta);
      out.push_back({Inequality::L32, beta,
                     ratio_from_samples(eset, Inequality::L32, beta, field.flux.p, field.flux.delta, e, m, levels)});
    }
  }
  return out;
}

RatioReport caccioppoli_check(const SolvedField& field, const CutoffSpec& spec, double beta, Inequality which,
                              const CheckOptions& options) {
  spec.validate();
  field.flux.validate();
  check_beta(which, beta);
  const auto levels = level_sizes(options);
  const auto geometry = standard_geometry(field.u.n());
  const FieldJet jet(field.u, geometry->frame());
  if (which == Inequality::L32) {
    const double e = effective_eps(field, options);
    const Cutoff scaled(spec, GaugeKind::Epsilon, e);
    const SampleSet set = collect(*geometry, jet, &scaled, spec.center, spec.r_outer, GaugeKind::Epsilon, e,
                                  levels.back(), derive_seed(options.seed, "battery-eps", 0));
    return ratio_from_samples(set, which, beta, field.flux.p, field.flux.delta, e, jet.horizontal_count(), levels);
  }
  const Cutoff intrinsic(spec, GaugeKind::SubRiemannian);
  const SampleSet set = collect(*geometry, jet, &intrinsic, spec.center, spec.r_outer, GaugeKind::SubRiemannian, 1.0,
                                levels.back(), derive_seed(options.seed, "battery", 0));
  return ratio_from_samples(set, which, beta, field.flux.p, field.flux.delta, 0.0, jet.horizontal_count(), levels);
}

LevelSetReport level_set_caccioppoli(const SolvedField& field, int s, double k, double r_in, double r_out,
                                     double q_exp, const CheckOptions& options, const GroupElement& center) {
  field.flux.validate();
  const double p = field.flux.p;
  const double delta = field.flux.delta;
  if (p < 2.0) throw PreconditionError("level_set_caccioppoli requires p >= 2");
  if (!(q_exp >= 4.0)) throw PreconditionError("level_set_caccioppoli requires q >= 4");
  if (!(r_in > 0.0 && r_out > r_in)) throw RangeError("level_set_caccioppoli radii must satisfy 0 < r_in < r_out");
  if (!std::isfinite(k)) throw RangeError("level k must be finite");
  const auto levels = level_sizes(options);
  const auto geometry = standard_geometry(field.u.n());
  const FieldJet jet(field.u, geometry->frame());
  const int m = jet.horizontal_count();
  if (s < 1 || s > m) throw RangeError("direction index s must lie in 1.." + std::to_string(m));
  const int si = s - 1;
  const std::size_t N = levels.back();
  const auto kind = GaugeKind::SubRiemannian;
  const SampleSet inner = collect(*geometry, jet, nullptr, center, r_in, kind, 1.0, N, derive_seed(options.seed, "level-inner", 0));
  const SampleSet outer = collect(*geometry, jet, nullptr, center, r_out, kind, 1.0, N, derive_seed(options.seed, "level-outer", 0));
  const SampleSet doubled = collect(*geometry, jet, nullptr, center, 2.0 * r_out, kind, 1.0, N, derive_seed(options.seed, "level-sup", 0));
  const double a = 0.5 * (p - 2.0);

  LevelSetReport report;
  for (std::size_t n : levels) {
    double M = 0.0;
    for (const Sample& x : doubled.samples)
      if (x.index < n) M = std::max(M, x.jet.first.tail(x.jet.first.size() - m).norm());
    if (!(std::abs(k) < M))
      throw PreconditionError("level_set_caccioppoli requires |k| < M (sampled sup of |grad_T u| = " +
                              std::to_string(M) + ")");
    long double lhs = 0.0L, rhs1 = 0.0L, measure = 0.0L;
    for (const Sample& x : inner.samples) {
      if (x.index >= n) continue;
      const double xs = x.jet.first(si);
      if (xs - k <= 0.0) continue;
      const double w = delta + x.jet.first.head(m).squaredNorm();
      lhs += static_cast<long double>(x.raw_weight) * power(w, a) * x.jet.second.block(0, si, m, 1).squaredNorm();
    }
    for (const Sample& x : outer.samples) {
      if (x.index >= n) continue;
      const double v = x.jet.first(si) - k;
      if (v <= 0.0) continue;
      const double w = delta + x.jet.first.head(m).squaredNorm();
      rhs1 += static_cast<long double>(x.raw_weight) * power(w, a) * v * v;
      measure += x.raw_weight;
    }
    const double nd = static_cast<double>(n);
    const double L = static_cast<double>(lhs) / nd;
    const double A = static_cast<double>(measure) / nd;
    const double width = r_out - r_in;
    report.ratio.lhs = L;
    report.ratio.rhs_terms = {static_cast<double>(rhs1) / nd / (width * width),
                              A > 0.0 ? std::pow(delta + M * M, 0.5 * p) * std::pow(A, 1.0 - 2.0 / q_exp) : 0.0};
    report.ratio.ratio = safe_ratio(L, report.ratio.rhs_sum());
    report.ratio.refinement_trace.push_back(report.ratio.ratio);
    report.ratio.samples = n;
    report.M = M;
    report.level_set_measure = A;
    report.sup_samples = n;
  }
  return report;
}

SupAvgReport sup_avg_ratio(const SolvedField& field, const GroupElement& center, double r, double eps,
                           const CheckOptions& options) {
  field.flux.validate();
  if (!(r > 0.0) || !std::isfinite(r)) throw RangeError("sup_avg_ratio radius must be positive");
  if (eps < 0.0 || eps > 1.0) throw RangeError("sup_avg_ratio eps must lie in [0, 1]");
  const auto levels = level_sizes(options);
  const auto geometry = standard_geometry(field.u.n());
  const FieldJet jet(field.u, geometry->frame());
  const int m = jet.horizontal_count();
  const GaugeKind kind = eps > 0.0 ? GaugeKind::Epsilon : GaugeKind::SubRiemannian;
  const double ge = eps > 0.0 ? eps : 1.0;
  const std::size_t N = levels.back();
  const SampleSet half = collect(*geometry, jet, nullptr, center, 0.5 * r, kind, ge, N, derive_seed(options.seed, "sup-half", 0));
  const SampleSet full = collect(*geometry, jet, nullptr, center, r, kind, ge, N, derive_seed(options.seed, "sup-full", 0));
  auto grad2 = [&](const Sample& x) {
    const auto& f = x.jet.first;
    return f.head(m).squaredNorm() + eps * eps * f.tail(f.size() - m).squaredNorm();
  };
  const double p = field.flux.p;
  SupAvgReport out;
  for (std::size_t n : levels) {
    double sup = 0.0;
    std::size_t count = 0;
    for (const Sample& x : half.samples)
      if (x.index < n) {
        sup = std::max(sup, std::sqrt(grad2(x)));
        ++count;
      }
    long double num = 0.0L, den = 0.0L;
    for (const Sample& x : full.samples) {
      if (x.index >= n) continue;
      num += static_cast<long double>(x.raw_weight) * std::pow(field.flux.delta + grad2(x), 0.5 * p);
      den += x.raw_weight;
    }
    if (count < 30 || den <= 0.0L) throw StatisticalInsufficiency("sup_avg_ratio: too few ball samples");
    out.sup = sup;
    out.average = std::pow(static_cast<double>(num / den), 1.0 / p);
    out.ratio = safe_ratio(sup, out.average);
    out.refinement_trace.push_back(out.ratio);
    out.samples = n;
  }
  return out;
}

HolderReport holder_exponent_estimate(const SolvedField& field, const GroupElement& center,
                                      std::span<const double> radii, std::size_t samples, std::uint64_t seed,
                                      int bootstrap) {
  if (radii.size() < 2) throw PreconditionError("holder_exponent_estimate needs at least two radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw RangeError("radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw PreconditionError("radii must be descending");
  }
  if (samples < 2) throw RangeError("holder_exponent_estimate needs at least two samples per ball");
  const auto geometry = standard_geometry(field.u.n());
  const FieldJet jet(field.u, geometry->frame());
  const int m = jet.horizontal_count();
  HolderReport out;
  out.radii.assign(radii.begin(), radii.end());
  std::vector<std::vector<Eigen::VectorXd>> grads(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const SampleSet set = collect(*geometry, jet, nullptr, center, radii[i], GaugeKind::SubRiemannian, 1.0, samples,
                                  derive_seed(seed, "holder", i));
    for (const Sample& s : set.samples) grads[i].push_back(s.jet.first.head(m));
  }
  std::vector<double> logr, logo;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    std::vector<std::size_t> idx(grads[i].size());
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    const double osc = max_pair_distance(grads[i], idx);
    out.oscillations.push_back(osc);
    if (osc < 1e-10) out.resolution_limited = true;
    logr.push_back(std::log(radii[i]));
    logo.push_back(std::log(osc));
  }
  if (out.resolution_limited) {
    out.alpha = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.alpha = slope_of(logr, logo);
  out.bootstrap.resize(static_cast<std::size_t>(std::max(0, bootstrap)));
  parallel_for(out.bootstrap.size(), [&](std::size_t b) {
    Rng rng(seed, "holder-bootstrap", b);
    std::vector<double> lo;
    for (std::size_t i = 0; i < radii.size(); ++i) {
      std::vector<std::size_t> idx(grads[i].size());
      for (auto& j : idx) j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(grads[i].size()));
      lo.push_back(std::log(std::max(max_pair_distance(grads[i], idx), 1e-300)));
    }
    out.bootstrap[b] = slope_of(logr, lo);
  });
  for (double a : out.bootstrap) out.bootstrap_spread = std::max(out.bootstrap_spread, std::abs(a - out.alpha));
  return out;
}

}  // namespace sublap

#include "sublap/ball_quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "sublap/error.hpp"
#include "sublap/rng.hpp"

namespace sublap {

namespace {

double sinc_half(double x) {
  // 2 sin(x/2) / x
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 24.0;
  return 2.0 * std::sin(0.5 * x) / x;
}

// c_{2k} in psi(z) = 1 + z/2 + sum c_{2k} z^{2k}.
const std::vector<double>& psi_even_coefficients() {
  static const std::vector<double> c = [] {
    std::vector<double> out;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int k = 1; k <= 20; ++k) {
      const int e = 2 * k;
      double zeta = 0.0;
      if (k == 1) {
        zeta = std::numbers::pi * std::numbers::pi / 6.0;
      } else {
        for (int m = 2000; m >= 1; --m) zeta += std::pow(static_cast<double>(m), -e);
      }
      const double sign = (k % 2 == 1) ? 1.0 : -1.0;
      out.push_back(sign * 2.0 * zeta / std::pow(two_pi, e));
    }
    return out;
  }();
  return c;
}

void sample_ball(Rng& rng, Eigen::Ref<Eigen::VectorXd> out, double radius) {
  const int m = static_cast<int>(out.size());
  if (m == 0) return;
  for (int i = 0; i < m; ++i) out(i) = rng.normal();
  double norm = out.norm();
  while (norm == 0.0) {
    for (int i = 0; i < m; ++i) out(i) = rng.normal();
    norm = out.norm();
  }
  out *= radius * std::pow(rng.uniform(), 1.0 / m) / norm;
}

}  // namespace

double unit_ball_volume(int dimension) {
  const double d = dimension;
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double group_volume(int n, double metric_scale) {
  if (n < 2) throw InvalidDimension("group_volume: n must be >= 2");
  double factorials = 1.0;
  double f = 1.0;
  for (int k = 1; k < n; ++k) {
    f *= k;
    factorials *= f;
  }
  const double d = n * n - 1;
  const double frobenius = std::sqrt(static_cast<double>(n)) *
                           std::pow(2.0 * std::numbers::pi, 0.5 * (n - 1) * (n + 2)) / factorials;
  return frobenius * std::pow(metric_scale, 0.5 * d);
}

std::shared_ptr<const GaugeGeometry> standard_geometry(int n) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const GaugeGeometry>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const GaugeGeometry>(su_frame(n));
  return slot;
}

GaugeGeometry::GaugeGeometry(const Frame& frame) : frame_(frame) {
  if (frame_.epsilon() != 1.0) throw PreconditionError("GaugeGeometry: frame must be unscaled");
  const auto& roots = frame_.roots();
  const int nu = static_cast<int>(roots.size());
  vertical_gram_.resize(nu, nu);
  for (int a = 0; a < nu; ++a)
    for (int b = 0; b < nu; ++b) vertical_gram_(a, b) = trace_inner(roots[a], roots[b], frame_.metric_scale());
  vertical_ldlt_.compute(vertical_gram_);
  vertical_factor_ = std::sqrt(vertical_gram_.determinant());
}

LogSplit GaugeGeometry::split(const AlgebraElement& theta) const {
  const double scale = frame_.metric_scale();
  const auto& hor = frame_.horizontal();
  LogSplit out;
  out.horizontal.resize(static_cast<int>(hor.size()));
  CMatrix rest = theta.matrix();
  for (std::size_t i = 0; i < hor.size(); ++i) {
    const double c = trace_inner(theta, hor[i], scale);
    out.horizontal(static_cast<int>(i)) = c;
    rest -= c * hor[i].matrix();
  }
  const auto rest_el = AlgebraElement::trusted(rest);
  const auto& roots = frame_.roots();
  Eigen::VectorXd b(static_cast<int>(roots.size()));
  for (std::size_t j = 0; j < roots.size(); ++j) b(static_cast<int>(j)) = trace_inner(rest_el, roots[j], scale);
  out.vertical = roots.empty() ? Eigen::VectorXd() : Eigen::VectorXd(vertical_ldlt_.solve(b));
  return out;
}

AlgebraElement GaugeGeometry::compose(const Eigen::Ref<const Eigen::VectorXd>& horizontal,
                                      const Eigen::Ref<const Eigen::VectorXd>& vertical) const {
  const auto& hor = frame_.horizontal();
  const auto& roots = frame_.roots();
  if (horizontal.size() != static_cast<Eigen::Index>(hor.size()) ||
      vertical.size() != static_cast<Eigen::Index>(roots.size()))
    throw SizeMismatch("GaugeGeometry::compose: coordinate sizes do not match the frame");
  CMatrix m = CMatrix::Zero(frame_.n(), frame_.n());
  for (std::size_t i = 0; i < hor.size(); ++i) m += horizontal(static_cast<int>(i)) * hor[i].matrix();
  for (std::size_t j = 0; j < roots.size(); ++j) m += vertical(static_cast<int>(j)) * roots[j].matrix();
  return AlgebraElement::trusted(m);
}

double GaugeGeometry::gauge(const LogSplit& s, GaugeKind kind, double eps) const {
  const double a = s.horizontal.norm();
  const double t = s.vertical.norm();
  switch (kind) {
    case GaugeKind::SubRiemannian:
      return std::max(a, std::sqrt(t));
    case GaugeKind::Riemannian:
      return std::hypot(a, t);
    case GaugeKind::Epsilon:
      if (!(eps > 0.0)) throw RangeError("gauge: eps must be positive");
      return std::max(a, std::min(std::sqrt(t), t / eps));
  }
  return 0.0;
}

double GaugeGeometry::gauge(const GroupElement& center, const GroupElement& g, GaugeKind kind, double eps) const {
  return gauge(split(log(center.inverse() * g)), kind, eps);
}

std::pair<double, double> GaugeGeometry::box(double r, GaugeKind kind, double eps) const {
  if (!(r > 0.0) || !std::isfinite(r)) throw RangeError("gauge ball radius must be positive");
  switch (kind) {
    case GaugeKind::SubRiemannian:
      return {r, r * r};
    case GaugeKind::Riemannian:
      return {r, r};
    case GaugeKind::Epsilon:
      if (!(eps > 0.0)) throw RangeError("gauge: eps must be positive");
      return {r, std::max(r * r, eps * r)};
  }
  return {r, r};
}

double GaugeGeometry::exp_jacobian(const AlgebraElement& theta) const {
  const CMatrix h = Complex(0.0, -1.0) * theta.matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd mu = es.eigenvalues();
  double j = 1.0;
  for (int a = 0; a < mu.size(); ++a)
    for (int b = a + 1; b < mu.size(); ++b) {
      const double s = sinc_half(mu(a) - mu(b));
      j *= s * s;
    }
  return j;
}

AlgebraElement GaugeGeometry::log_right_derivative(const AlgebraElement& theta, const AlgebraElement& x) const {
  const CMatrix& t = theta.matrix();
  auto ad = [&](const CMatrix& y) -> CMatrix { return t * y - y * t; };
  CMatrix out = x.matrix() + 0.5 * ad(x.matrix());
  CMatrix term = x.matrix();
  const double tiny = 1e-18 * std::max(1.0, x.matrix().norm());
  for (double c : psi_even_coefficients()) {
    term = ad(ad(term));
    out += c * term;
    if (term.norm() * std::abs(c) < tiny) break;
  }
  return AlgebraElement::trusted(out);
}

double GaugeGeometry::gauge_derivative(const AlgebraElement& theta, const AlgebraElement& x, GaugeKind kind,
                                       double eps) const {
  const LogSplit s = split(theta);
  const LogSplit ds = split(log_right_derivative(theta, x));
  const double a = s.horizontal.norm();
  const double t = s.vertical.norm();
  const double da = a > 0.0 ? s.horizontal.dot(ds.horizontal) / a : 0.0;
  const double dt = t > 0.0 ? s.vertical.dot(ds.vertical) / t : 0.0;
  switch (kind) {
    case GaugeKind::Riemannian: {
      const double r = std::hypot(a, t);
      return r > 0.0 ? (a * da + t * dt) / r : 0.0;
    }
    case GaugeKind::SubRiemannian: {
      const double b = std::sqrt(t);
      if (a >= b) return da;
      return t > 0.0 ? dt / (2.0 * b) : 0.0;
    }
    case GaugeKind::Epsilon: {
      if (!(eps > 0.0)) throw RangeError("gauge: eps must be positive");
      const double root = std::sqrt(t);
      const double lin = t / eps;
      const double b = std::min(root, lin);
      if (a >= b) return da;
      if (root <= lin) return t > 0.0 ? dt / (2.0 * root) : 0.0;
      return dt / eps;
    }
  }
  return 0.0;
}

GaugeBallQuadrature::GaugeBallQuadrature(const GaugeGeometry& geometry, const GroupElement& center, double radius,
                                         GaugeKind kind, double eps, std::size_t count, std::uint64_t seed)
    : radius_(radius), drawn_(count) {
  if (count == 0) throw RangeError("GaugeBallQuadrature: count must be positive");
  const auto [a, b] = geometry.box(radius, kind, eps);
  const int m = geometry.frame().horizontal_count();
  const int nu = geometry.frame().vertical_count();
  const double region = unit_ball_volume(m) * std::pow(a, m) * unit_ball_volume(nu) * std::pow(b, nu) *
                        geometry.vertical_volume_factor();
  Eigen::VectorXd h(m), t(nu);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng(seed, "gauge-ball", k);
    sample_ball(rng, h, a);
    sample_ball(rng, t, b);
    if (kind == GaugeKind::Riemannian && std::hypot(h.norm(), t.norm()) > radius) continue;
    AlgebraElement theta = geometry.compose(h, t);
    const double value = region * geometry.exp_jacobian(theta);
    sum += value;
    sum_sq += value * value;
    weights_.push_back(value / static_cast<double>(count));
    indices_.push_back(k);
    points_.push_back(center * exp(theta));
    thetas_.push_back(std::move(theta));
  }
  const double nd = static_cast<double>(count);
  const double mean = sum / nd;
  const double var = std::max(0.0, sum_sq / nd - mean * mean);
  measure_error_ = std::sqrt(var / nd);
}

double GaugeBallQuadrature::measure() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

}  // namespace sublap

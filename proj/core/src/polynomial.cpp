#include "sublap/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "sublap/error.hpp"
#include "sublap/roots.hpp"

namespace sublap {

int Monomial::degree() const {
  int d = 0;
  for (int e : exponents) d += e;
  return d;
}

MonomialBasis::MonomialBasis(int n, int degree_cap) : n_(n), cap_(degree_cap) {
  if (n < 1) throw InvalidDimension("matrix size must be positive");
  if (degree_cap < 0) throw RangeError("degree cap must be non-negative");
  const double digits = std::log2(static_cast<double>(variable_count() + 1)) * degree_cap;
  if (digits >= 63.0) throw Unsupported("degree cap too large for the monomial index");
  factors_.push_back({});
  parent_.push_back(-1);
  last_var_.push_back(-1);
  prefix_.push_back(1);
  std::size_t level_begin = 0;
  for (int d = 1; d <= cap_; ++d) {
    const std::size_t level_end = factors_.size();
    for (std::size_t k = level_begin; k < level_end; ++k) {
      const int start = factors_[k].empty() ? 0 : factors_[k].back();
      for (int v = start; v < variable_count(); ++v) {
        std::vector<int> f = factors_[k];
        f.push_back(v);
        factors_.push_back(std::move(f));
        parent_.push_back(static_cast<int>(k));
        last_var_.push_back(v);
      }
    }
    level_begin = level_end;
    prefix_.push_back(static_cast<int>(factors_.size()));
  }
  lookup_.reserve(factors_.size());
  for (std::size_t k = 0; k < factors_.size(); ++k) lookup_.emplace(key(factors_[k]), static_cast<int>(k));
}

std::shared_ptr<const MonomialBasis> MonomialBasis::get(int n, int degree_cap) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const MonomialBasis>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, degree_cap}];
  if (!slot) slot = std::make_shared<const MonomialBasis>(n, degree_cap);
  return slot;
}

int MonomialBasis::prefix_size(int d) const {
  if (d < 0) return 0;
  return prefix_[static_cast<std::size_t>(std::min(d, cap_))];
}

std::uint64_t MonomialBasis::key(std::span<const int> sorted_factors) const {
  std::uint64_t k = 0;
  const auto base = static_cast<std::uint64_t>(variable_count() + 1);
  for (int f : sorted_factors) k = k * base + static_cast<std::uint64_t>(f + 1);
  return k;
}

Monomial MonomialBasis::monomial(int k) const {
  Monomial m{std::vector<int>(static_cast<std::size_t>(variable_count()), 0)};
  for (int f : factors(k)) ++m.exponents[static_cast<std::size_t>(f)];
  return m;
}

int MonomialBasis::index_of(std::span<const int> sorted_factors) const {
  if (static_cast<int>(sorted_factors.size()) > cap_) return -1;
  const auto it = lookup_.find(key(sorted_factors));
  return it == lookup_.end() ? -1 : it->second;
}

int MonomialBasis::index_of(const Monomial& m) const {
  if (static_cast<int>(m.exponents.size()) != variable_count()) throw SizeMismatch("monomial has wrong arity");
  std::vector<int> f;
  for (int v = 0; v < variable_count(); ++v) {
    if (m.exponents[v] < 0) throw RangeError("negative exponent");
    for (int e = 0; e < m.exponents[v]; ++e) f.push_back(v);
  }
  return index_of(f);
}

Eigen::VectorXd MonomialBasis::variables(const CMatrix& g) const {
  if (g.rows() != n_ || g.cols() != n_) throw SizeMismatch("matrix size does not match the basis");
  Eigen::VectorXd x(variable_count());
  for (int a = 0; a < n_; ++a) {
    for (int b = 0; b < n_; ++b) {
      x(variable(n_, a, b, Part::Real)) = g(a, b).real();
      x(variable(n_, a, b, Part::Imag)) = g(a, b).imag();
    }
  }
  return x;
}

void MonomialBasis::evaluate(const CMatrix& g, std::span<double> out) const {
  if (static_cast<int>(out.size()) != size()) throw SizeMismatch("output span has wrong length");
  const Eigen::VectorXd x = variables(g);
  out[0] = 1.0;
  for (std::size_t k = 1; k < out.size(); ++k) out[k] = out[static_cast<std::size_t>(parent_[k])] * x(last_var_[k]);
}

Eigen::VectorXd MonomialBasis::evaluate(const CMatrix& g) const {
  Eigen::VectorXd out(size());
  evaluate(g, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

Eigen::SparseMatrix<double> MonomialBasis::derivative(const AlgebraElement& x) const {
  if (x.n() != n_) throw SizeMismatch("field size does not match the basis");
  const int nv = variable_count();
  // d/dt of generator v along g exp(tX) is the linear form a(v, .) of the generators.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nv, nv);
  const CMatrix& m = x.matrix();
  for (int r = 0; r < n_; ++r) {
    for (int b = 0; b < n_; ++b) {
      const int re = variable(n_, r, b, Part::Real);
      const int im = variable(n_, r, b, Part::Imag);
      for (int c = 0; c < n_; ++c) {
        const int src_re = variable(n_, r, c, Part::Real);
        const int src_im = variable(n_, r, c, Part::Imag);
        a(re, src_re) += m(c, b).real();
        a(re, src_im) -= m(c, b).imag();
        a(im, src_re) += m(c, b).imag();
        a(im, src_im) += m(c, b).real();
      }
    }
  }
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(nv));
  for (int v = 0; v < nv; ++v) {
    for (int w = 0; w < nv; ++w) {
      if (a(v, w) != 0.0) rows[v].emplace_back(w, a(v, w));
    }
  }
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<int> scratch;
  for (int k = 1; k < size(); ++k) {
    const auto& f = factors(k);
    for (std::size_t t = 0; t < f.size(); ++t) {
      for (const auto& [w, value] : rows[static_cast<std::size_t>(f[t])]) {
        scratch = f;
        scratch[t] = w;
        std::sort(scratch.begin(), scratch.end());
        triplets.emplace_back(index_of(scratch), k, value);
      }
    }
  }
  Eigen::SparseMatrix<double> d(size(), size());
  d.setFromTriplets(triplets.begin(), triplets.end());
  d.prune(0.0);
  return d;
}

PolyField::PolyField(int n, int degree_cap)
    : basis_(MonomialBasis::get(n, degree_cap)), coeffs_(Eigen::VectorXd::Zero(basis_->size())) {}

PolyField::PolyField(std::shared_ptr<const MonomialBasis> basis, Eigen::VectorXd coefficients)
    : basis_(std::move(basis)), coeffs_(std::move(coefficients)) {
  if (!basis_) throw InputError("null monomial basis");
  if (coeffs_.size() != basis_->size()) throw SizeMismatch("coefficient vector does not match the basis");
  if (!coeffs_.allFinite()) throw ValidationError("non-finite coefficient");
}

PolyField PolyField::constant(int n, int degree_cap, double value) {
  PolyField u(n, degree_cap);
  u.coeffs_(0) = value;
  return u;
}

PolyField PolyField::entry(int n, int degree_cap, int a, int b, Part part) {
  if (degree_cap < 1) throw DegreeCapError("entry fields need degree cap >= 1");
  if (a < 0 || b < 0 || a >= n || b >= n) throw RangeError("entry index out of range");
  PolyField u(n, degree_cap);
  const int v = MonomialBasis::variable(n, a, b, part);
  u.coeffs_(u.basis_->index_of(std::span<const int>(&v, 1))) = 1.0;
  return u;
}

PolyField PolyField::from_terms(int n, int degree_cap, std::span<const std::pair<Monomial, double>> terms) {
  PolyField u(n, degree_cap);
  for (const auto& [m, c] : terms) {
    if (!std::isfinite(c)) throw ValidationError("non-finite coefficient");
    const int k = u.basis_->index_of(m);
    if (k < 0) throw DegreeCapError("monomial of degree " + std::to_string(m.degree()) + " exceeds cap");
    u.coeffs_(k) += c;
  }
  return u;
}

int PolyField::degree() const {
  for (int k = static_cast<int>(coeffs_.size()) - 1; k >= 0; --k) {
    if (coeffs_(k) != 0.0) return basis_->degree(k);
  }
  return 0;
}

std::vector<std::pair<Monomial, double>> PolyField::terms() const {
  std::vector<std::pair<Monomial, double>> out;
  for (int k = 0; k < coeffs_.size(); ++k) {
    if (coeffs_(k) != 0.0) out.emplace_back(basis_->monomial(k), coeffs_(k));
  }
  return out;
}

PolyField PolyField::with_degree_cap(int degree_cap) const {
  auto target = MonomialBasis::get(n(), degree_cap);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(target->size());
  const int keep = std::min<int>(target->size(), static_cast<int>(coeffs_.size()));
  if (keep < coeffs_.size() && coeffs_.tail(coeffs_.size() - keep).cwiseAbs().maxCoeff() != 0.0) {
    throw DegreeCapError("field has degree " + std::to_string(degree()) + " above cap " + std::to_string(degree_cap));
  }
  c.head(keep) = coeffs_.head(keep);
  return PolyField(std::move(target), std::move(c));
}

PolyField& PolyField::operator+=(const PolyField& other) {
  if (other.n() != n()) throw SizeMismatch("fields on different groups");
  if (other.degree_cap() > degree_cap()) *this = with_degree_cap(other.degree_cap());
  coeffs_.head(other.coeffs_.size()) += other.coeffs_;
  return *this;
}

PolyField& PolyField::operator-=(const PolyField& other) {
  if (other.n() != n()) throw SizeMismatch("fields on different groups");
  if (other.degree_cap() > degree_cap()) *this = with_degree_cap(other.degree_cap());
  coeffs_.head(other.coeffs_.size()) -= other.coeffs_;
  return *this;
}

PolyField& PolyField::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

PolyField operator*(const PolyField& a, const PolyField& b) {
  if (a.n() != b.n()) throw SizeMismatch("fields on different groups");
  PolyField out(a.n(), a.degree_cap() + b.degree_cap());
  const MonomialBasis& basis = *out.basis_;
  std::vector<int> merged;
  for (int i = 0; i < a.coeffs_.size(); ++i) {
    if (a.coeffs_(i) == 0.0) continue;
    for (int j = 0; j < b.coeffs_.size(); ++j) {
      if (b.coeffs_(j) == 0.0) continue;
      const auto& fa = a.basis_->factors(i);
      const auto& fb = b.basis_->factors(j);
      merged.resize(fa.size() + fb.size());
      std::merge(fa.begin(), fa.end(), fb.begin(), fb.end(), merged.begin());
      out.coeffs_(basis.index_of(merged)) += a.coeffs_(i) * b.coeffs_(j);
    }
  }
  return out;
}

PolyField apply_field(const AlgebraElement& x, const PolyField& u) {
  const Eigen::SparseMatrix<double> d = u.basis().derivative(x);
  return PolyField(u.basis_ptr(), d * u.coefficients());
}

std::vector<PolyField> horizontal_gradient(const PolyField& u, const Frame& frame) {
  std::vector<PolyField> out;
  for (const auto& x : frame.horizontal()) out.push_back(apply_field(x, u));
  return out;
}

std::vector<PolyField> full_gradient_eps(const PolyField& u, const Frame& frame) {
  std::vector<PolyField> out;
  for (const auto& x : frame.all()) out.push_back(apply_field(x, u));
  return out;
}

double evaluate(const PolyField& u, const CMatrix& g) {
  if (g.rows() != u.n() || g.cols() != u.n()) throw SizeMismatch("matrix size does not match the field");
  if (!is_group_element(g)) throw DomainError("evaluation point is not in SU(n)");
  return u.basis().evaluate(g).dot(u.coefficients());
}

double evaluate(const PolyField& u, const GroupElement& g) { return evaluate(u, g.matrix()); }

FlowCheck flow_derivative_check(const AlgebraElement& x, const PolyField& u, const GroupElement& g, double h) {
  if (!(h > 0.0)) throw RangeError("step must be positive");
  FlowCheck check{};
  check.exact = evaluate(apply_field(x, u), g);
  const double forward = evaluate(u, g * exp(h * x));
  const double backward = evaluate(u, g * exp(-h * x));
  check.finite_difference = (forward - backward) / (2.0 * h);
  check.error = std::abs(check.exact - check.finite_difference);
  return check;
}

}  // namespace sublap

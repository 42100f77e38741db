#include "sublap/lie_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sublap/error.hpp"

namespace sublap {

namespace {

constexpr double kElementTol = 1e-12;

void require_same_size(const AlgebraElement& x, const AlgebraElement& y) {
  if (x.n() != y.n()) {
    throw SizeMismatch("algebra elements of size " + std::to_string(x.n()) + " and " +
                       std::to_string(y.n()));
  }
}

double re_trace_product(const CMatrix& x, const CMatrix& y) {
  double sum = 0.0;
  for (Eigen::Index a = 0; a < x.rows(); ++a) {
    for (Eigen::Index b = 0; b < x.cols(); ++b) sum += (x(a, b) * y(b, a)).real();
  }
  return sum;
}

// Orthonormal basis (columns) of the null space of m.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = rel_tol * std::max(1.0, s.size() > 0 ? s(0) : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++rank;
  }
  const Eigen::Index cols = m.cols();
  return svd.matrixV().rightCols(cols - rank);
}

}  // namespace

AlgebraElement::AlgebraElement(CMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    throw InvalidElement("algebra element must be a square matrix");
  }
  const double scale = std::max(1.0, entries_.norm());
  const double skew = (entries_ + entries_.adjoint()).norm();
  if (skew > kElementTol * scale) {
    throw InvalidElement("matrix is not anti-Hermitian (residual " + std::to_string(skew) + ")");
  }
  if (std::abs(entries_.trace()) > kElementTol * scale) {
    throw InvalidElement("matrix is not traceless");
  }
}

AlgebraElement AlgebraElement::zero(int n) { return trusted(CMatrix::Zero(n, n)); }

AlgebraElement AlgebraElement::trusted(CMatrix entries) {
  AlgebraElement x;
  x.entries_ = std::move(entries);
  return x;
}

AlgebraElement& AlgebraElement::operator+=(const AlgebraElement& other) {
  require_same_size(*this, other);
  entries_ += other.entries_;
  return *this;
}

AlgebraElement& AlgebraElement::operator-=(const AlgebraElement& other) {
  require_same_size(*this, other);
  entries_ -= other.entries_;
  return *this;
}

AlgebraElement& AlgebraElement::operator*=(double scale) {
  entries_ *= scale;
  return *this;
}

AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y) {
  require_same_size(x, y);
  return AlgebraElement::trusted(x.matrix() * y.matrix() - y.matrix() * x.matrix());
}

double trace_inner(const AlgebraElement& x, const AlgebraElement& y, double scale) {
  require_same_size(x, y);
  return -scale * re_trace_product(x.matrix(), y.matrix());
}

LieAlgebra::LieAlgebra(std::vector<AlgebraElement> basis, double metric_scale,
                       std::vector<std::string> labels)
    : basis_(std::move(basis)), metric_scale_(metric_scale), labels_(std::move(labels)) {
  if (basis_.empty()) throw InvalidDimension("empty basis");
  if (!(metric_scale_ > 0.0)) throw ValidationError("metric_scale must be positive");
  n_ = basis_.front().n();
  for (const auto& e : basis_) {
    if (e.n() != n_) throw SizeMismatch("basis elements have different sizes");
  }
  if (labels_.empty()) {
    for (std::size_t i = 0; i < basis_.size(); ++i) labels_.push_back("E" + std::to_string(i + 1));
  } else if (labels_.size() != basis_.size()) {
    throw SizeMismatch("label count does not match basis size");
  }
  const int d = dimension();
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double g = inner(basis_[i], basis_[j]);
      const double expected = i == j ? 1.0 : 0.0;
      if (std::abs(g - expected) > 1e-10) {
        throw ValidationError("basis is not orthonormal at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      }
    }
  }
}

double LieAlgebra::inner(const AlgebraElement& x, const AlgebraElement& y) const {
  return trace_inner(x, y, metric_scale_);
}

double LieAlgebra::norm(const AlgebraElement& x) const { return std::sqrt(std::max(0.0, inner(x, x))); }

Eigen::VectorXd LieAlgebra::coordinates(const AlgebraElement& x) const {
  Eigen::VectorXd c(dimension());
  for (int i = 0; i < dimension(); ++i) c(i) = inner(basis_[i], x);
  return c;
}

AlgebraElement LieAlgebra::element(const Eigen::Ref<const Eigen::VectorXd>& coords) const {
  if (coords.size() != dimension()) throw SizeMismatch("coordinate vector has wrong length");
  CMatrix m = CMatrix::Zero(n_, n_);
  for (int i = 0; i < dimension(); ++i) m += coords(i) * basis_[i].matrix();
  return AlgebraElement::trusted(std::move(m));
}

double LieAlgebra::span_residual(const AlgebraElement& x) const {
  return norm(x - element(coordinates(x)));
}

Eigen::MatrixXd LieAlgebra::ad(const AlgebraElement& x) const {
  const int d = dimension();
  Eigen::MatrixXd a(d, d);
  for (int j = 0; j < d; ++j) a.col(j) = coordinates(bracket(x, basis_[j]));
  return a;
}

double inner(const AlgebraElement& x, const AlgebraElement& y, const LieAlgebra& algebra) {
  return algebra.inner(x, y);
}

LieAlgebra su_basis(int n) {
  if (n < 2) throw InvalidDimension("su(n) requires n >= 2, got " + std::to_string(n));
  const Complex i_unit(0.0, 1.0);
  std::vector<AlgebraElement> basis;
  std::vector<std::string> labels;
  for (int k = 1; k < n; ++k) {
    const double c = 1.0 / std::sqrt(k * (k + 1) / 2.0);
    CMatrix h = CMatrix::Zero(n, n);
    for (int a = 0; a < k; ++a) h(a, a) = -i_unit * c;
    h(k, k) = i_unit * (c * k);
    basis.push_back(AlgebraElement::trusted(std::move(h)));
    labels.push_back("T" + std::to_string(k));
  }
  const std::vector<AlgebraElement> diagonal(basis.begin(), basis.end());
  int label = 1;
  for (int height = 1; height < n; ++height) {
    for (int a = 0; a + height < n; ++a) {
      const int b = a + height;
      CMatrix odd = CMatrix::Zero(n, n);
      odd(a, b) = 1.0;
      odd(b, a) = -1.0;
      // Orientation: -[X_odd, X_even] is a positive root in the diagonal basis.
      CMatrix h = CMatrix::Zero(n, n);
      h(b, b) = 2.0 * i_unit;
      h(a, a) = -2.0 * i_unit;
      const AlgebraElement root = AlgebraElement::trusted(h);
      double sign = 1.0;
      for (const auto& t : diagonal) {
        const double coord = trace_inner(root, t, 0.5);
        if (std::abs(coord) > 1e-12) {
          sign = coord > 0 ? 1.0 : -1.0;
          break;
        }
      }
      CMatrix even = CMatrix::Zero(n, n);
      even(a, b) = sign * i_unit;
      even(b, a) = sign * i_unit;
      basis.push_back(AlgebraElement::trusted(std::move(odd)));
      basis.push_back(AlgebraElement::trusted(std::move(even)));
      labels.push_back("X" + std::to_string(label++));
      labels.push_back("X" + std::to_string(label++));
    }
  }
  return LieAlgebra(std::move(basis), 0.5, std::move(labels));
}

std::vector<AlgebraElement> su3_frame_fields() {
  const LieAlgebra su3 = su_basis(3);
  std::vector<AlgebraElement> fields(su3.basis().begin() + 2, su3.basis().end());
  fields.push_back(-bracket(fields[0], fields[1]));
  fields.push_back(-bracket(fields[2], fields[3]));
  return fields;
}

StructureConstants::StructureConstants(int dimension, std::vector<double> values, double max_residual)
    : dim_(dimension), values_(std::move(values)), max_residual_(max_residual) {
  if (values_.size() != static_cast<std::size_t>(dim_) * dim_ * dim_) {
    throw SizeMismatch("structure constant table has wrong size");
  }
}

std::vector<StructureConstants::Entry> StructureConstants::nonzero(double tol) const {
  std::vector<Entry> out;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      for (int k = 0; k < dim_; ++k) {
        const double v = (*this)(i, j, k);
        if (std::abs(v) > tol) out.push_back({i, j, k, v});
      }
    }
  }
  return out;
}

StructureConstants structure_constants(std::span<const AlgebraElement> elements, double metric_scale) {
  const int d = static_cast<int>(elements.size());
  if (d == 0) throw InvalidDimension("empty element list");
  for (const auto& e : elements) {
    if (e.n() != elements[0].n()) throw SizeMismatch("elements have different sizes");
  }
  Eigen::MatrixXd gram(d, d);
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) gram(k, l) = trace_inner(elements[k], elements[l], metric_scale);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
    throw InputError("elements are not linearly independent");
  }
  std::vector<double> values(static_cast<std::size_t>(d) * d * d, 0.0);
  double max_residual = 0.0;
  Eigen::VectorXd rhs(d);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      const AlgebraElement b = bracket(elements[i], elements[j]);
      for (int k = 0; k < d; ++k) rhs(k) = trace_inner(b, elements[k], metric_scale);
      const Eigen::VectorXd c = ldlt.solve(rhs);
      CMatrix rebuilt = CMatrix::Zero(b.n(), b.n());
      for (int k = 0; k < d; ++k) rebuilt += c(k) * elements[k].matrix();
      const double residual = (b.matrix() - rebuilt).norm();
      if (residual > 1e-10 * std::max(1.0, b.frobenius_norm())) throw ClosureError(i, j, residual);
      max_residual = std::max(max_residual, residual);
      for (int k = 0; k < d; ++k) {
        values[static_cast<std::size_t>((i * d + j) * d + k)] = c(k);
        values[static_cast<std::size_t>((j * d + i) * d + k)] = -c(k);
      }
    }
  }
  return StructureConstants(d, std::move(values), max_residual);
}

StructureConstants structure_constants(const LieAlgebra& algebra) {
  return structure_constants(std::span<const AlgebraElement>(algebra.basis()), algebra.metric_scale());
}

Eigen::MatrixXd killing_form(const LieAlgebra& algebra) {
  const StructureConstants c = structure_constants(algebra);
  const int d = algebra.dimension();
  std::vector<Eigen::MatrixXd> ad(static_cast<std::size_t>(d), Eigen::MatrixXd(d, d));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < d; ++k) ad[i](k, j) = c(i, j, k);
    }
  }
  Eigen::MatrixXd b(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) b(i, j) = (ad[i] * ad[j]).trace();
  }
  return b;
}

SemisimplicityReport is_compact_semisimple(const LieAlgebra& algebra) {
  SemisimplicityReport report;
  Eigen::MatrixXd b;
  try {
    b = killing_form(algebra);
  } catch (const ClosureError& e) {
    report.diagnostic = e.what();
    return report;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (b + b.transpose()));
  report.killing_eigenvalues = eig.eigenvalues();
  const double largest = report.killing_eigenvalues.maxCoeff();
  report.compact_semisimple = largest < -1e-10;
  std::ostringstream msg;
  if (report.compact_semisimple) {
    msg << "Killing form negative definite; largest eigenvalue " << largest;
  } else {
    msg << "Killing form not negative definite; largest eigenvalue " << largest;
  }
  report.diagnostic = msg.str();
  return report;
}

std::vector<AlgebraElement> cartan_subalgebra(const LieAlgebra& algebra) {
  const SemisimplicityReport semisimple = is_compact_semisimple(algebra);
  if (!semisimple) throw NotSemisimple("Cartan subalgebra requested for " + semisimple.diagnostic);
  const int d = algebra.dimension();
  std::vector<Eigen::VectorXd> chosen;
  chosen.push_back(Eigen::VectorXd::Unit(d, 0));
  std::vector<Eigen::MatrixXd> ads;
  ads.push_back(algebra.ad(algebra[0]));
  for (;;) {
    Eigen::MatrixXd stacked(d * static_cast<int>(ads.size()), d);
    for (std::size_t i = 0; i < ads.size(); ++i) stacked.middleRows(static_cast<Eigen::Index>(i) * d, d) = ads[i];
    const Eigen::MatrixXd commutant = null_space(stacked, 1e-9);
    Eigen::MatrixXd span_s(d, static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t i = 0; i < chosen.size(); ++i) span_s.col(static_cast<Eigen::Index>(i)) = chosen[i];
    // Part of the commutant orthogonal to the current span.
    const Eigen::MatrixXd outside = commutant - span_s * (span_s.transpose() * commutant);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(outside, Eigen::ComputeThinU);
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) > 1e-8) ++rank;
    }
    if (rank == 0) break;
    const Eigen::MatrixXd q = svd.matrixU().leftCols(rank);
    bool extended = false;
    for (int m = 0; m < d; ++m) {
      Eigen::VectorXd proj = q * q.transpose().col(m);
      if (proj.norm() > 1e-6) {
        proj.normalize();
        proj = proj.unaryExpr([](double v) { return std::abs(v) < 1e-15 ? 0.0 : v; });
        const Eigen::Index top = [&] {
          Eigen::Index idx;
          proj.cwiseAbs().maxCoeff(&idx);
          return idx;
        }();
        if (std::abs(std::abs(proj(top)) - 1.0) < 1e-12) {
          const double sign = proj(top) > 0 ? 1.0 : -1.0;
          proj.setZero();
          proj(top) = sign;
        }
        chosen.push_back(proj);
        ads.push_back(algebra.ad(algebra.element(proj)));
        extended = true;
        break;
      }
    }
    if (!extended) break;
  }
  std::vector<AlgebraElement> out;
  for (const auto& c : chosen) out.push_back(algebra.element(c));
  return out;
}

}  // namespace sublap

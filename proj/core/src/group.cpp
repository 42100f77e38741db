#include "sublap/group.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "sublap/error.hpp"

namespace sublap {

GroupElement::GroupElement(CMatrix entries, double tol) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) throw DomainError("group element must be square");
  const double residual = group_residual(entries_);
  if (!(residual <= tol)) {
    throw DomainError("matrix is not in SU(n) (residual " + std::to_string(residual) + ")");
  }
}

GroupElement GroupElement::identity(int n) { return trusted(CMatrix::Identity(n, n)); }

GroupElement GroupElement::trusted(CMatrix entries) {
  GroupElement g;
  g.entries_ = std::move(entries);
  return g;
}

GroupElement operator*(const GroupElement& a, const GroupElement& b) {
  if (a.n() != b.n()) throw SizeMismatch("group elements of different sizes");
  return GroupElement::trusted(a.entries_ * b.entries_);
}

double group_residual(const CMatrix& g) {
  if (g.rows() != g.cols()) return INFINITY;
  const double unitary = (g * g.adjoint() - CMatrix::Identity(g.rows(), g.cols())).norm();
  const double det = std::abs(g.determinant() - Complex(1.0, 0.0));
  return std::max(unitary, det);
}

bool is_group_element(const CMatrix& g, double tol) { return group_residual(g) <= tol; }

GroupElement project_to_group(const CMatrix& g) {
  Eigen::JacobiSVD<CMatrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  CMatrix u = svd.matrixU() * svd.matrixV().adjoint();
  const Complex det = u.determinant();
  const double phase = std::arg(det) / static_cast<double>(u.rows());
  u *= std::polar(1.0, -phase);
  return GroupElement::trusted(std::move(u));
}

GroupElement exp(const AlgebraElement& x) {
  const CMatrix e = x.matrix().exp();
  return project_to_group(e);
}

AlgebraElement log(const GroupElement& g) {
  const int n = g.n();
  Eigen::ComplexSchur<CMatrix> schur(g.matrix());
  const CMatrix& t = schur.matrixT();
  const CMatrix& q = schur.matrixU();
  std::vector<double> angle(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) angle[k] = std::arg(t(k, k));
  const double total = std::accumulate(angle.begin(), angle.end(), 0.0);
  long shifts = std::lround(total / (2.0 * std::numbers::pi));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return angle[a] > angle[b]; });
  for (long s = 0; s < std::abs(shifts) && s < n; ++s) {
    if (shifts > 0) {
      angle[order[s]] -= 2.0 * std::numbers::pi;
    } else {
      angle[order[n - 1 - s]] += 2.0 * std::numbers::pi;
    }
  }
  CMatrix d = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) d(k, k) = Complex(0.0, angle[k]);
  CMatrix x = q * d * q.adjoint();
  x = 0.5 * (x - x.adjoint());
  x.diagonal().array() -= x.trace() / static_cast<double>(n);
  return AlgebraElement::trusted(std::move(x));
}

GroupElement haar_random(int n, Rng& rng) {
  CMatrix z(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      z(i, j) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < n; ++k) {
    const Complex d = r(k, k);
    const double mag = std::abs(d);
    q.col(k) *= mag > 0 ? d / mag : Complex(1.0, 0.0);
  }
  const Complex det = q.determinant();
  q *= std::polar(1.0, -std::arg(det) / static_cast<double>(n));
  return GroupElement::trusted(std::move(q));
}

}  // namespace sublap

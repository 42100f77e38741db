#pragma once

#include <Eigen/Dense>
#include <complex>

#include "sublap/group.hpp"
#include "sublap/lie_algebra.hpp"
#include "sublap/polynomial.hpp"
#include "sublap/rng.hpp"

namespace sublap::testing {

inline constexpr std::complex<double> I{0.0, 1.0};

// X1..X8 written out entry by entry.
inline AlgebraElement X(int k) {
  CMatrix m = CMatrix::Zero(3, 3);
  switch (k) {
    case 1: m(0, 1) = 1.0; m(1, 0) = -1.0; break;
    case 2: m(0, 1) = I; m(1, 0) = I; break;
    case 3: m(1, 2) = 1.0; m(2, 1) = -1.0; break;
    case 4: m(1, 2) = -I; m(2, 1) = -I; break;
    case 5: m(0, 2) = 1.0; m(2, 0) = -1.0; break;
    case 6: m(0, 2) = I; m(2, 0) = I; break;
    case 7: m(0, 0) = -2.0 * I; m(1, 1) = 2.0 * I; break;
    case 8: m(1, 1) = 2.0 * I; m(2, 2) = -2.0 * I; break;
    default: break;
  }
  return AlgebraElement(m);
}

inline AlgebraElement T(int k) {
  CMatrix m = CMatrix::Zero(3, 3);
  if (k == 1) {
    m(0, 0) = -I;
    m(1, 1) = I;
  } else {
    const double s = 1.0 / std::sqrt(3.0);
    m(0, 0) = -I * s;
    m(1, 1) = -I * s;
    m(2, 2) = 2.0 * I * s;
  }
  return AlgebraElement(m);
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline AlgebraElement random_element(const LieAlgebra& algebra, Rng& rng, double scale = 1.0) {
  Eigen::VectorXd c(algebra.dimension());
  for (int i = 0; i < c.size(); ++i) c(i) = scale * rng.normal();
  return algebra.element(c);
}

inline PolyField random_poly(int n, int cap, int degree, Rng& rng) {
  const auto basis = MonomialBasis::get(n, cap);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(basis->size());
  for (int k = 0; k < basis->size(); ++k)
    if (basis->degree(k) <= degree) c(k) = rng.normal();
  return PolyField(basis, c);
}

inline PolyField entry(int a, int b, Part part) { return PolyField::entry(3, 2, a, b, part); }

}  // namespace sublap::testing

#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>

#include "sublap/polynomial.hpp"

namespace sublap {

/// Exact Haar integral over SU(n) of the monomial with the given sorted
/// factor list. Uses the first and second order Weingarten formulas and the
/// determinant identity; throws Unsupported for moments beyond those.
double haar_monomial_integral(int n, std::span<const int> factors);

/// Exact Haar integral of a field.
double exact_integral(const PolyField& u);

/// Integrals of every monomial of the basis (cached per (n, D)).
std::shared_ptr<const Eigen::VectorXd> monomial_integrals(int n, int degree_cap);

/// Mom(a, b) = integral of m_a m_b over the basis of cap D (cached).
std::shared_ptr<const Eigen::MatrixXd> moment_matrix(int n, int degree_cap);

}  // namespace sublap

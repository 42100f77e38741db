#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sublap/flux.hpp"
#include "sublap/polynomial.hpp"
#include "sublap/roots.hpp"

namespace sublap {

struct SolveConfig {
  FluxSpec flux;
  /// Scale of the vertical fields; 0 selects the purely horizontal equation.
  double epsilon = 1.0;
  int group_n = 3;
  int degree_cap = 2;
  std::size_t quadrature_points = 20000;
  std::uint64_t quadrature_seed = 0;
  PolyField source = PolyField(3, 2);
  bool pin = true;
  /// Gradient-norm tolerance; 0 selects 1e-8 for p = 2 and 1e-6 otherwise.
  double tol_grad = 0.0;
  int max_iter = 5000;

  /// Throws ValidationError (or PreconditionError) on an unusable configuration.
  void validate() const;
  double gradient_tolerance() const;
  /// Unscaled frame of SU(group_n) when epsilon = 0, else its epsilon-frame.
  Frame frame() const;
  /// Fields entering the gradient: horizontal, then epsilon R_j when epsilon > 0.
  std::vector<AlgebraElement> gradient_fields() const;
};

struct OmegaStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

enum class SolveStatus { Converged, MaxIterations, LineSearchFailure };
std::string to_string(SolveStatus status);

struct SolutionReport {
  PolyField coefficients = PolyField(3, 2);
  Eigen::VectorXd coordinates;
  std::vector<double> energy_trace;
  std::vector<double> gradient_trace;
  double final_gradient_norm = 0.0;
  double weak_residual = 0.0;
  int iterations = 0;
  OmegaStats omega_stats;
  SolveStatus status = SolveStatus::MaxIterations;
  double epsilon = 1.0;
  bool converged() const { return status == SolveStatus::Converged; }
};

/// Discrete energy E(c) = (1/p) int (delta + |grad^eps u|^2)^(p/2) - int f u
/// for u = sum c_k psi_k, where psi_k = m_k - int m_k runs over a maximal
/// L^2-independent set of non-constant monomials. For p = 2 every integral is
/// exact; otherwise the flux term uses the Haar quadrature of the config.
class EnergyFunctional {
 public:
  explicit EnergyFunctional(const SolveConfig& cfg);

  int dimension() const { return static_cast<int>(selected_.size()); }
  const std::vector<int>& selected_monomials() const { return selected_; }
  bool exact() const { return exact_; }

  PolyField field(const Eigen::Ref<const Eigen::VectorXd>& c) const;
  /// L^2 projection onto the span of the psi_k (exact for degree <= D).
  Eigen::VectorXd coordinates(const PolyField& u) const;

  double value(const Eigen::Ref<const Eigen::VectorXd>& c) const;
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& c) const;
  double value_and_gradient(const Eigen::Ref<const Eigen::VectorXd>& c, Eigen::VectorXd& grad) const;

  /// p = 2 Galerkin matrix sum_i D_i^T Mom D_i in psi coordinates.
  const Eigen::MatrixXd& stiffness() const { return stiffness_; }
  const Eigen::VectorXd& load() const { return load_; }
  /// max over monomials phi of |sum_i int a_i X_i phi - int f phi|.
  double weak_residual(const Eigen::Ref<const Eigen::VectorXd>& c) const;
  OmegaStats omega_stats(const Eigen::Ref<const Eigen::VectorXd>& c) const;

 private:
  struct Pass {
    long double flux_energy = 0.0L;
    Eigen::MatrixXd flux_moments;  // monomials x fields
  };
  Pass quadrature_pass(const Eigen::Ref<const Eigen::VectorXd>& c, bool moments) const;
  Eigen::MatrixXd field_derivatives(const Eigen::Ref<const Eigen::VectorXd>& c) const;

  SolveConfig cfg_;
  bool exact_;
  std::shared_ptr<const MonomialBasis> basis_;
  std::shared_ptr<const Eigen::MatrixXd> moments_;
  std::vector<int> selected_;
  Eigen::VectorXd means_;
  Eigen::MatrixXd psi_;  // monomials x K
  Eigen::MatrixXd gram_;
  Eigen::LDLT<Eigen::MatrixXd> gram_ldlt_;
  std::vector<Eigen::SparseMatrix<double>> derivatives_;
  std::vector<Eigen::MatrixXd> derivative_psi_;  // D_i psi
  Eigen::MatrixXd stiffness_;
  Eigen::VectorXd load_;
  Eigen::VectorXd source_moments_;  // int f m_j
  std::shared_ptr<const Eigen::MatrixXd> values_;  // quadrature points x monomials
};

double energy(const PolyField& u, const SolveConfig& cfg);
/// Gradient with respect to the psi coordinates.
Eigen::VectorXd energy_gradient(const PolyField& u, const SolveConfig& cfg);

/// Quasi-Newton (BFGS) descent with backtracking, started from init.
SolutionReport minimize(const SolveConfig& cfg, const PolyField& init);
SolutionReport minimize(const SolveConfig& cfg);

/// Direct solve of the p = 2 Galerkin system on the mean-zero space.
PolyField linear_solve_p2(const SolveConfig& cfg);

/// Solves for each epsilon (strictly decreasing, in [0, 1]), warm-starting
/// from the previous solution.
std::vector<SolutionReport> epsilon_sweep(const SolveConfig& cfg, std::span<const double> eps_list);

/// Random mean-zero field of degree <= D with standard-normal psi coordinates.
PolyField random_field(const SolveConfig& cfg, std::uint64_t seed, double scale = 1.0);

}  // namespace sublap

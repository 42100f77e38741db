#include "sublap/haar_integration.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <numeric>
#include <vector>

#include "sublap/error.hpp"

namespace sublap {

namespace {

struct Entry {
  int row;
  int col;
};

int permutation_sign(std::vector<int> values) {
  int sign = 1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      if (values[i] == values[j]) return 0;
      if (values[i] > values[j]) sign = -sign;
    }
  }
  return sign;
}

double epsilon_moment(const std::vector<Entry>& factors, int n) {
  std::vector<int> rows;
  std::vector<int> cols;
  for (const auto& f : factors) {
    rows.push_back(f.row);
    cols.push_back(f.col);
  }
  double factorial = 1.0;
  for (int k = 2; k <= n; ++k) factorial *= k;
  return permutation_sign(rows) * permutation_sign(cols) / factorial;
}

// Integral of prod g_{z} prod conj(g_{w}).
double complex_moment(const std::vector<Entry>& z, const std::vector<Entry>& w, int n) {
  const int p = static_cast<int>(z.size());
  const int q = static_cast<int>(w.size());
  if (p == 0 && q == 0) return 1.0;
  if (((p - q) % n + n) % n != 0) return 0.0;
  if (p == q && p == 1) {
    return (z[0].row == w[0].row && z[0].col == w[0].col) ? 1.0 / n : 0.0;
  }
  if (p == q && p == 2) {
    const double nn = static_cast<double>(n);
    const double wg_identity = 1.0 / (nn * nn - 1.0);
    const double wg_swap = -1.0 / (nn * (nn * nn - 1.0));
    double total = 0.0;
    for (int sigma = 0; sigma < 2; ++sigma) {
      const bool rows_match = sigma == 0 ? (z[0].row == w[0].row && z[1].row == w[1].row)
                                         : (z[0].row == w[1].row && z[1].row == w[0].row);
      if (!rows_match) continue;
      for (int tau = 0; tau < 2; ++tau) {
        const bool cols_match = tau == 0 ? (z[0].col == w[0].col && z[1].col == w[1].col)
                                         : (z[0].col == w[1].col && z[1].col == w[0].col);
        if (!cols_match) continue;
        total += sigma == tau ? wg_identity : wg_swap;
      }
    }
    return total;
  }
  if (q == 0 && p == n) return epsilon_moment(z, n);
  if (p == 0 && q == n) return epsilon_moment(w, n);
  throw Unsupported("Haar moment of bidegree (" + std::to_string(p) + ", " + std::to_string(q) + ") on SU(" +
                    std::to_string(n) + ") is not implemented");
}

}  // namespace

double haar_monomial_integral(int n, std::span<const int> factors) {
  if (n < 2) throw InvalidDimension("SU(n) requires n >= 2");
  const int d = static_cast<int>(factors.size());
  if (d > 20) throw Unsupported("monomial degree too large");
  std::complex<double> total = 0.0;
  std::vector<Entry> z;
  std::vector<Entry> w;
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    z.clear();
    w.clear();
    std::complex<double> coeff = 1.0;
    for (int s = 0; s < d; ++s) {
      const int v = factors[static_cast<std::size_t>(s)];
      const int cell = v / 2;
      const Entry e{cell / n, cell % n};
      const bool imag = (v % 2) == 1;
      const bool conj = (mask >> s) & 1u;
      // Re z = (z + conj z) / 2, Im z = (z - conj z) / (2i).
      if (!imag) {
        coeff *= 0.5;
      } else {
        coeff *= conj ? std::complex<double>(0.0, 0.5) : std::complex<double>(0.0, -0.5);
      }
      (conj ? w : z).push_back(e);
    }
    const double m = complex_moment(z, w, n);
    if (m != 0.0) total += coeff * m;
  }
  return total.real();
}

std::shared_ptr<const Eigen::VectorXd> monomial_integrals(int n, int degree_cap) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const Eigen::VectorXd>> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find({n, degree_cap});
    if (it != cache.end()) return it->second;
  }
  auto basis = MonomialBasis::get(n, degree_cap);
  auto values = std::make_shared<Eigen::VectorXd>(basis->size());
  for (int k = 0; k < basis->size(); ++k) (*values)(k) = haar_monomial_integral(n, basis->factors(k));
  std::lock_guard lock(mutex);
  return cache.emplace(std::make_pair(n, degree_cap), std::move(values)).first->second;
}

double exact_integral(const PolyField& u) {
  const auto integrals = monomial_integrals(u.n(), u.degree());
  const int m = static_cast<int>(integrals->size());
  return integrals->dot(u.coefficients().head(m));
}

std::shared_ptr<const Eigen::MatrixXd> moment_matrix(int n, int degree_cap) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const Eigen::MatrixXd>> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find({n, degree_cap});
    if (it != cache.end()) return it->second;
  }
  auto basis = MonomialBasis::get(n, degree_cap);
  auto product_basis = MonomialBasis::get(n, 2 * degree_cap);
  const auto integrals = monomial_integrals(n, 2 * degree_cap);
  const int m = basis->size();
  auto mom = std::make_shared<Eigen::MatrixXd>(m, m);
  std::vector<int> merged;
  for (int a = 0; a < m; ++a) {
    for (int b = a; b < m; ++b) {
      const auto& fa = basis->factors(a);
      const auto& fb = basis->factors(b);
      merged.resize(fa.size() + fb.size());
      std::merge(fa.begin(), fa.end(), fb.begin(), fb.end(), merged.begin());
      const double v = (*integrals)(product_basis->index_of(merged));
      (*mom)(a, b) = v;
      (*mom)(b, a) = v;
    }
  }
  std::lock_guard lock(mutex);
  return cache.emplace(std::make_pair(n, degree_cap), std::move(mom)).first->second;
}

}  // namespace sublap

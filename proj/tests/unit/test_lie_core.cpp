#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "sublap/error.hpp"
#include "sublap/group.hpp"
#include "sublap/roots.hpp"
#include "support.hpp"

namespace sublap {
namespace {

using testing::T;
using testing::X;
using testing::max_abs;

TEST(SuBasis, Dimensions) {
  EXPECT_EQ(su_basis(3).dimension(), 8);
  EXPECT_EQ(su_basis(2).dimension(), 3);
  EXPECT_EQ(su_basis(4).dimension(), 15);
  EXPECT_THROW(su_basis(1), InvalidDimension);
}

TEST(SuBasis, GramIsIdentity) {
  for (int n : {2, 3, 4, 5}) {
    const LieAlgebra a = su_basis(n);
    for (int i = 0; i < a.dimension(); ++i)
      for (int j = 0; j < a.dimension(); ++j)
        EXPECT_NEAR(inner(a[i], a[j], a), i == j ? 1.0 : 0.0, 1e-12) << n << " " << i << " " << j;
  }
}

TEST(SuBasis, MatchesGellMannOrdering) {
  const LieAlgebra a = su_basis(3);
  EXPECT_EQ(a[0].matrix(), T(1).matrix());
  EXPECT_LT(max_abs(a[1].matrix() - T(2).matrix()), 1e-15);
  for (int k = 1; k <= 6; ++k) EXPECT_EQ(a[k + 1].matrix(), X(k).matrix()) << "X" << k;
}

TEST(AlgebraElement, RejectsNonMembers) {
  CMatrix m = CMatrix::Zero(3, 3);
  m(0, 1) = 1.0;
  EXPECT_THROW(AlgebraElement{m}, InvalidElement);
  m = CMatrix::Identity(3, 3) * testing::I;
  EXPECT_THROW(AlgebraElement{m}, InvalidElement);
}

TEST(Bracket, TableEntries) {
  EXPECT_LT(max_abs(bracket(X(1), X(2)).matrix() + X(7).matrix()), 1e-15);
  EXPECT_LT(max_abs(bracket(X(5), X(6)).matrix() - (X(8) - X(7)).matrix()), 1e-15);
  EXPECT_EQ(max_abs(bracket(X(3), X(3)).matrix()), 0.0);
}

TEST(Bracket, SizeMismatch) { EXPECT_THROW(bracket(X(1), su_basis(2)[0]), SizeMismatch); }

TEST(Inner, Values) {
  const LieAlgebra a = su_basis(3);
  EXPECT_NEAR(inner(X(1), X(1), a), 1.0, 1e-15);
  EXPECT_NEAR(inner(T(1), X(1), a), 0.0, 1e-15);
  EXPECT_NEAR(inner(X(7), X(7), a), 4.0, 1e-15);
  EXPECT_NEAR(inner(X(7), X(8), a), 2.0, 1e-15);
}

// Table of commutators [X_i, X_j] as coefficient lists over X1..X8.
std::vector<std::vector<std::vector<double>>> commutator_table() {
  auto e = [](std::initializer_list<std::pair<int, double>> terms) {
    std::vector<double> v(8, 0.0);
    for (auto [k, c] : terms) v[static_cast<std::size_t>(k - 1)] = c;
    return v;
  };
  using P = std::pair<int, double>;
  const std::vector<double> z(8, 0.0);
  return {
      {z, e({P{7, -1}}), e({P{5, 1}}), e({P{6, -1}}), e({P{3, -1}}), e({P{4, 1}}), e({P{2, 4}}), e({P{2, 2}})},
      {e({P{7, 1}}), z, e({P{6, 1}}), e({P{5, 1}}), e({P{4, -1}}), e({P{3, -1}}), e({P{1, -4}}), e({P{1, -2}})},
      {e({P{5, -1}}), e({P{6, -1}}), z, e({P{8, -1}}), e({P{1, 1}}), e({P{2, 1}}), e({P{4, 2}}), e({P{4, 4}})},
      {e({P{6, 1}}), e({P{5, -1}}), e({P{8, 1}}), z, e({P{2, 1}}), e({P{1, -1}}), e({P{3, -2}}), e({P{3, -4}})},
      {e({P{3, 1}}), e({P{4, 1}}), e({P{1, -1}}), e({P{2, -1}}), z, e({P{8, 1}, P{7, -1}}), e({P{6, 2}}), e({P{6, -2}})},
      {e({P{4, -1}}), e({P{3, 1}}), e({P{2, -1}}), e({P{1, 1}}), e({P{7, 1}, P{8, -1}}), z, e({P{5, -2}}), e({P{5, 2}})},
      {e({P{2, -4}}), e({P{1, 4}}), e({P{4, -2}}), e({P{3, 2}}), e({P{6, -2}}), e({P{5, 2}}), z, z},
      {e({P{2, -2}}), e({P{1, 2}}), e({P{4, -4}}), e({P{3, 4}}), e({P{6, 2}}), e({P{5, -2}}), z, z},
  };
}

TEST(StructureConstants, ReproduceCommutatorTable) {
  const std::vector<AlgebraElement> fields = su3_frame_fields();
  ASSERT_EQ(fields.size(), 8u);
  for (int k = 0; k < 8; ++k) EXPECT_EQ(fields[static_cast<std::size_t>(k)].matrix(), X(k + 1).matrix());
  const StructureConstants c = structure_constants(fields, 0.5);
  EXPECT_LT(c.max_residual(), 1e-12);
  const auto table = commutator_table();
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k)
        EXPECT_EQ(c(i, j, k), table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][static_cast<std::size_t>(k)])
            << "[X" << i + 1 << ", X" << j + 1 << "] component X" << k + 1;
  EXPECT_EQ(c(6, 0, 1), -4.0);
}

TEST(StructureConstants, AntisymmetricOnOrthonormalBasis) {
  for (int n : {2, 3, 4}) {
    const LieAlgebra a = su_basis(n);
    const StructureConstants c = structure_constants(a);
    EXPECT_LT(c.max_residual(), 1e-10);
    for (int i = 0; i < a.dimension(); ++i)
      for (int j = 0; j < a.dimension(); ++j)
        for (int k = 0; k < a.dimension(); ++k) {
          EXPECT_NEAR(c(i, j, k), -c(j, i, k), 1e-14);
          if (i == j) EXPECT_EQ(c(i, i, k), 0.0);
        }
  }
}

TEST(StructureConstants, ClosureErrorNamesPair) {
  const std::vector<AlgebraElement> open = {X(1), X(2)};
  try {
    structure_constants(open, 0.5);
    FAIL() << "expected ClosureError";
  } catch (const ClosureError& e) {
    EXPECT_EQ(e.first, 0);
    EXPECT_EQ(e.second, 1);
    EXPECT_GT(e.residual, 1.0);
  }
}

TEST(Semisimplicity, Examples) {
  EXPECT_TRUE(is_compact_semisimple(su_basis(3)));
  EXPECT_TRUE(is_compact_semisimple(su_basis(2)));
  const LieAlgebra abelian({T(1)}, 0.5);
  const SemisimplicityReport r = is_compact_semisimple(abelian);
  EXPECT_FALSE(r);
  EXPECT_FALSE(r.diagnostic.empty());
}

TEST(Cartan, RankAndMaximality) {
  for (int n : {2, 3, 4}) {
    const LieAlgebra a = su_basis(n);
    const auto h = cartan_subalgebra(a);
    ASSERT_EQ(static_cast<int>(h.size()), n - 1);
    for (std::size_t i = 0; i < h.size(); ++i) {
      for (std::size_t j = 0; j < h.size(); ++j) {
        EXPECT_NEAR(inner(h[i], h[j], a), i == j ? 1.0 : 0.0, 1e-12);
        EXPECT_LT(bracket(h[i], h[j]).frobenius_norm(), 1e-12);
      }
    }
    // The joint kernel of ad h_k is the Cartan subalgebra itself.
    Eigen::MatrixXd stacked(a.dimension() * static_cast<int>(h.size()), a.dimension());
    for (std::size_t k = 0; k < h.size(); ++k)
      stacked.middleRows(static_cast<int>(k) * a.dimension(), a.dimension()) = a.ad(h[k]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    svd.setThreshold(1e-9);
    EXPECT_EQ(a.dimension() - static_cast<int>(svd.rank()), n - 1) << "n = " << n;
  }
  EXPECT_THROW(cartan_subalgebra(LieAlgebra({T(1)}, 0.5)), NotSemisimple);
}

// Roots of su(n) relative to a diagonal Cartan basis: the eigenvalue of
// ad(diag(i t)) on E_ab is i (t_a - t_b), so the coordinates are differences
// of diagonal entries.
std::vector<Eigen::VectorXd> diagonal_roots(const std::vector<AlgebraElement>& cartan, int n) {
  std::vector<Eigen::VectorXd> out;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      Eigen::VectorXd r(static_cast<int>(cartan.size()));
      for (std::size_t k = 0; k < cartan.size(); ++k) {
        const CMatrix& m = cartan[k].matrix();
        r(static_cast<int>(k)) = (m(a, a) - m(b, b)).imag();
      }
      for (int k = 0; k < r.size(); ++k)
        if (std::abs(r(k)) > 1e-12) {
          if (r(k) < 0) r = -r;
          break;
        }
      out.push_back(r);
    }
  return out;
}

TEST(Roots, Su3Coordinates) {
  const LieAlgebra a = su_basis(3);
  const auto h = cartan_subalgebra(a);
  for (const auto& t : h) EXPECT_LT((t.matrix() - CMatrix(t.matrix().diagonal().asDiagonal())).norm(), 1e-14);
  const RootDatum d = root_space_decomposition(a, h);
  ASSERT_EQ(d.positive_roots().size(), 3u);
  const auto oracle = diagonal_roots(h, 3);
  const double s3 = std::sqrt(3.0);
  std::vector<Eigen::Vector2d> expected = {{2.0, 0.0}, {1.0, s3}, {1.0, -s3}};
  for (const auto& r : d.positive_roots()) {
    EXPECT_NEAR(a.norm(r.vector) * a.norm(r.vector), 4.0, 1e-12);
    EXPECT_GT(r.coordinates(0), 0.0);
    const bool in_oracle = std::any_of(oracle.begin(), oracle.end(),
                                       [&](const Eigen::VectorXd& o) { return (o - r.coordinates).norm() < 1e-12; });
    EXPECT_TRUE(in_oracle);
    const bool in_expected = std::any_of(expected.begin(), expected.end(),
                                         [&](const Eigen::Vector2d& o) { return (o - r.coordinates).norm() < 1e-12; });
    EXPECT_TRUE(in_expected) << r.coordinates.transpose();
  }
  const bool has_x7 = std::any_of(d.positive_roots().begin(), d.positive_roots().end(), [](const PositiveRoot& r) {
    return max_abs(r.vector.matrix() - X(7).matrix()) < 1e-12;
  });
  EXPECT_TRUE(has_x7);
  EXPECT_LT(max_abs(X(7).matrix() - 2.0 * T(1).matrix()), 1e-15);
}

TEST(Roots, PropertySuite) {
  for (int n : {2, 3, 4, 5}) {
    const LieAlgebra a = su_basis(n);
    const RootDatum d = root_space_decomposition(a, cartan_subalgebra(a));
    EXPECT_EQ(static_cast<int>(d.positive_roots().size()), n * (n - 1) / 2);
    EXPECT_LT(d.properties().max(), 1e-10) << "n = " << n;
    EXPECT_NO_THROW(d.verify());
    for (const RootPair& p : d.pairs()) {
      const AlgebraElement& R = d.positive_roots()[static_cast<std::size_t>(p.root_index)].vector;
      const double r2 = a.inner(R, R);
      EXPECT_LT((bracket(p.odd, p.even) + R).frobenius_norm(), 1e-10);
      EXPECT_LT((bracket(p.even, R) + r2 * p.odd).frobenius_norm(), 1e-10);
      EXPECT_LT((bracket(R, p.odd) + r2 * p.even).frobenius_norm(), 1e-10);
    }
    // Root basis spans the Cartan subalgebra.
    Eigen::MatrixXd basis(n - 1, static_cast<int>(d.root_basis_indices().size()));
    for (std::size_t k = 0; k < d.root_basis_indices().size(); ++k)
      basis.col(static_cast<int>(k)) = d.positive_roots()[static_cast<std::size_t>(d.root_basis_indices()[k])].coordinates;
    EXPECT_EQ(basis.cols(), n - 1);
    EXPECT_EQ(Eigen::FullPivLU<Eigen::MatrixXd>(basis).rank(), n - 1);
  }
}

TEST(Frame, Su3Counts) {
  const Frame f = su_frame(3);
  EXPECT_EQ(f.horizontal_count(), 6);
  EXPECT_EQ(f.vertical_count(), 2);
  EXPECT_EQ(f.homogeneous_dimension(), 10);
  EXPECT_EQ(su_frame(4).homogeneous_dimension(), 18);
  EXPECT_EQ(su_frame(2).homogeneous_dimension(), 4);
  for (int k = 0; k < 6; ++k) EXPECT_LT(max_abs(f.horizontal()[static_cast<std::size_t>(k)].matrix() - X(k + 1).matrix()), 1e-14);
  EXPECT_LT(max_abs(f.vertical()[0].matrix() - X(7).matrix()), 1e-14);
  EXPECT_LT(max_abs(f.vertical()[1].matrix() - X(8).matrix()), 1e-14);
}

TEST(Frame, HorizontalOrthonormalAndOrthogonalToRoots) {
  for (int n : {2, 3, 4}) {
    const Frame f = su_frame(n);
    const LieAlgebra a = su_basis(n);
    for (const auto& x : f.horizontal()) {
      for (const auto& y : f.horizontal()) EXPECT_NEAR(inner(x, y, a), &x == &y ? 1.0 : 0.0, 1e-12);
      for (const auto& r : f.roots()) EXPECT_NEAR(inner(x, r, a), 0.0, 1e-12);
    }
  }
}

TEST(Hormander, Ranks) {
  EXPECT_EQ(hormander_rank(su_frame(3)), 8);
  EXPECT_EQ(bracket_closure_rank(su_frame(3).all()), 8);
  EXPECT_EQ(hormander_rank(su_frame(2)), 3);
  EXPECT_EQ(hormander_rank(su_frame(4)), 15);
  const std::vector<AlgebraElement> torus = {T(1), T(2)};
  EXPECT_EQ(bracket_closure_rank(torus), 2);
}

TEST(EpsilonFrame, Scaling) {
  const Frame f = su_frame(3);
  const LieAlgebra a = su_basis(3);
  const Frame same = epsilon_frame(f, 1.0);
  for (int j = 0; j < 2; ++j) EXPECT_EQ(same.vertical()[static_cast<std::size_t>(j)].matrix(), f.vertical()[static_cast<std::size_t>(j)].matrix());
  const double eps = 0.5;
  const Frame e = epsilon_frame(f, eps);
  EXPECT_EQ(e.epsilon(), eps);
  const AlgebraElement& x7e = e.vertical()[0];
  EXPECT_LT(max_abs(x7e.matrix() - eps * X(7).matrix()), 1e-15);
  EXPECT_LT(max_abs(bracket(e.horizontal()[0], e.horizontal()[1]).matrix() + (1.0 / eps) * x7e.matrix()), 1e-14);
  EXPECT_NEAR(inner(x7e, x7e, a), eps * eps * 4.0, 1e-14);
  EXPECT_LT(max_abs(bracket(x7e, e.horizontal()[0]).matrix() + eps * 4.0 * X(2).matrix()), 1e-14);
  EXPECT_THROW(epsilon_frame(f, 0.0), RangeError);
  EXPECT_THROW(epsilon_frame(f, 1.5), RangeError);
}

TEST(Properties, JacobiAndAntisymmetry) {
  const LieAlgebra a = su_basis(3);
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const AlgebraElement x = testing::random_element(a, rng), y = testing::random_element(a, rng),
                         z = testing::random_element(a, rng);
    EXPECT_LT((bracket(x, y) + bracket(y, x)).frobenius_norm(), 1e-12);
    const AlgebraElement j = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y));
    EXPECT_LT(j.frobenius_norm(), 1e-10);
  }
}

TEST(Properties, AdSkewness) {
  const LieAlgebra a = su_basis(4);
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    const AlgebraElement x = testing::random_element(a, rng), y = testing::random_element(a, rng),
                         z = testing::random_element(a, rng);
    EXPECT_NEAR(a.inner(bracket(x, y), z), -a.inner(y, bracket(x, z)), 1e-10);
  }
}

TEST(Properties, AdInvariance) {
  const LieAlgebra a = su_basis(3);
  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    const GroupElement g = exp(testing::random_element(a, rng));
    const AlgebraElement x = testing::random_element(a, rng), y = testing::random_element(a, rng);
    const CMatrix& G = g.matrix();
    const AlgebraElement gx(G * x.matrix() * G.adjoint()), gy(G * y.matrix() * G.adjoint());
    EXPECT_NEAR(a.inner(gx, gy), a.inner(x, y), 1e-10);
  }
}

TEST(Group, ExpLogRoundTrip) {
  const LieAlgebra a = su_basis(3);
  Rng rng(14);
  for (int t = 0; t < 50; ++t) {
    const AlgebraElement x = testing::random_element(a, rng, 0.4);
    EXPECT_LT((log(exp(x)) - x).frobenius_norm(), 1e-12);
  }
  const GroupElement r = exp((M_PI / 2) * X(1));
  EXPECT_NEAR(r.matrix()(0, 1).real(), 1.0, 1e-15);
  EXPECT_NEAR(r.matrix()(0, 0).real(), 0.0, 1e-15);
  EXPECT_THROW(GroupElement(CMatrix::Identity(3, 3) * 2.0), DomainError);
}

TEST(Group, HaarSamplesAreGroupElements) {
  Rng rng(15);
  for (int t = 0; t < 100; ++t) EXPECT_LT(group_residual(haar_random(3, rng).matrix()), 1e-10);
}

}  // namespace
}  // namespace sublap

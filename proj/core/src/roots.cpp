#include "sublap/roots.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "sublap/error.hpp"

namespace sublap {

namespace {

// Replaces a unit coordinate vector that coincides with +-e_m by the exact basis vector.
void snap_to_basis(Eigen::VectorXd& x) {
  for (Eigen::Index m = 0; m < x.size(); ++m) {
    if (std::abs(std::abs(x(m)) - 1.0) < 1e-12) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(x.size());
      e(m) = x(m) > 0 ? 1.0 : -1.0;
      if ((x - e).norm() < 1e-12) x = e;
      return;
    }
  }
}

struct Plane {
  int first_touch;
  Eigen::VectorXd theta;
  Eigen::VectorXd odd;
  Eigen::VectorXd even;
  Eigen::VectorXd root;  // algebra coordinates
};

Eigen::VectorXd real_vector(const AlgebraElement& x) {
  const CMatrix& m = x.matrix();
  Eigen::VectorXd v(2 * m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    v(2 * i) = m.data()[i].real();
    v(2 * i + 1) = m.data()[i].imag();
  }
  return v;
}

}  // namespace

double RootProperties::max() const {
  return std::max({orthonormality, pair_brackets, horizontal_brackets, cartan_action});
}

RootDatum::RootDatum(LieAlgebra algebra, std::vector<AlgebraElement> cartan_basis,
                     std::vector<PositiveRoot> positive_roots, std::vector<RootPair> pairs,
                     std::vector<int> root_basis_indices)
    : algebra_(std::move(algebra)),
      cartan_(std::move(cartan_basis)),
      roots_(std::move(positive_roots)),
      pairs_(std::move(pairs)),
      root_basis_(std::move(root_basis_indices)) {}

RootProperties RootDatum::properties() const {
  RootProperties p;
  std::vector<AlgebraElement> all = cartan_;
  std::vector<AlgebraElement> horizontal;
  for (const auto& pair : pairs_) {
    horizontal.push_back(pair.odd);
    horizontal.push_back(pair.even);
  }
  all.insert(all.end(), horizontal.begin(), horizontal.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < all.size(); ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      p.orthonormality = std::max(p.orthonormality, std::abs(algebra_.inner(all[i], all[j]) - expected));
    }
  }
  for (const auto& pair : pairs_) {
    const AlgebraElement& r = roots_[static_cast<std::size_t>(pair.root_index)].vector;
    const double r2 = algebra_.inner(r, r);
    p.pair_brackets = std::max({p.pair_brackets, algebra_.norm(bracket(pair.odd, pair.even) + r),
                                algebra_.norm(bracket(pair.even, r) + r2 * pair.odd),
                                algebra_.norm(bracket(r, pair.odd) + r2 * pair.even)});
    for (const auto& t : cartan_) {
      for (const AlgebraElement* x : {&pair.odd, &pair.even}) {
        const AlgebraElement b = bracket(*x, t);
        const AlgebraElement in_plane =
            algebra_.inner(b, pair.odd) * pair.odd + algebra_.inner(b, pair.even) * pair.even;
        p.cartan_action = std::max(p.cartan_action, algebra_.norm(b - in_plane));
      }
    }
  }
  for (std::size_t m = 0; m < horizontal.size(); ++m) {
    for (std::size_t k = 0; k < horizontal.size(); ++k) {
      if (m / 2 == k / 2) continue;
      const AlgebraElement b = bracket(horizontal[m], horizontal[k]);
      for (const auto& t : cartan_) {
        p.horizontal_brackets = std::max(p.horizontal_brackets, std::abs(algebra_.inner(b, t)));
      }
    }
  }
  return p;
}

void RootDatum::verify(double tol) const {
  const RootProperties p = properties();
  if (p.max() > tol) {
    throw NumericalError("root datum identities fail: orthonormality " + std::to_string(p.orthonormality) +
                         ", pair brackets " + std::to_string(p.pair_brackets) + ", horizontal brackets " +
                         std::to_string(p.horizontal_brackets) + ", Cartan action " +
                         std::to_string(p.cartan_action));
  }
}

RootDatum root_space_decomposition(const LieAlgebra& algebra, std::span<const AlgebraElement> cartan) {
  const int d = algebra.dimension();
  const int nu = static_cast<int>(cartan.size());
  if (nu == 0) throw PreconditionError("empty Cartan basis");
  Eigen::MatrixXd cartan_coords(d, nu);
  for (int k = 0; k < nu; ++k) {
    if (cartan[k].n() != algebra.n()) throw SizeMismatch("Cartan element has wrong size");
    if (algebra.span_residual(cartan[k]) > 1e-10) throw PreconditionError("Cartan element outside the algebra");
    cartan_coords.col(k) = algebra.coordinates(cartan[k]);
    for (int l = 0; l < nu; ++l) {
      if (std::abs(algebra.inner(cartan[k], cartan[l]) - (k == l ? 1.0 : 0.0)) > 1e-10) {
        throw PreconditionError("Cartan basis is not orthonormal");
      }
      if (algebra.norm(bracket(cartan[k], cartan[l])) > 1e-10) {
        throw PreconditionError("Cartan basis elements do not commute");
      }
    }
  }

  std::vector<Eigen::MatrixXd> ad_cartan;
  AlgebraElement generic = AlgebraElement::zero(algebra.n());
  double weight = 1.0;
  for (int k = 0; k < nu; ++k) {
    ad_cartan.push_back(algebra.ad(cartan[k]));
    generic += weight * cartan[k];
    weight /= std::numbers::pi;
  }
  const Eigen::MatrixXd a = algebra.ad(generic);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.transpose() * a);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double top = std::max(lambda.maxCoeff(), 1e-300);

  int zeros = 0;
  while (zeros < d && lambda(zeros) <= 1e-10 * top) ++zeros;
  if (zeros != nu) {
    throw PreconditionError("kernel of a generic Cartan element has dimension " + std::to_string(zeros) +
                            ", expected " + std::to_string(nu) + "; Cartan subalgebra not maximal");
  }

  std::vector<std::pair<int, int>> clusters;
  for (int i = zeros; i < d;) {
    int j = i + 1;
    while (j < d && std::abs(lambda(j) - lambda(j - 1)) <= 1e-8 * lambda(j)) ++j;
    clusters.emplace_back(i, j);
    i = j;
  }
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto [begin, end] = clusters[c];
    if (c > 0) {
      const double gap = (lambda(begin) - lambda(begin - 1)) / lambda(begin);
      if (gap < 1e-6) throw DegeneracyError("root eigenvalue clusters are not separated", gap);
    }
    if (end - begin != 2) {
      const double gap = end - begin > 1 ? (lambda(end - 1) - lambda(begin)) / lambda(end - 1) : 0.0;
      throw DegeneracyError("root eigenvalue cluster of size " + std::to_string(end - begin), gap);
    }
  }

  std::vector<Plane> planes;
  for (const auto& [begin, end] : clusters) {
    const Eigen::VectorXd v1 = eig.eigenvectors().col(begin);
    const Eigen::VectorXd v2 = eig.eigenvectors().col(begin + 1);
    Plane plane;
    plane.theta.resize(nu);
    for (int k = 0; k < nu; ++k) plane.theta(k) = v2.dot(ad_cartan[k] * v1);
    for (int k = 0; k < nu; ++k) {
      if (std::abs(plane.theta(k)) > 1e-9) {
        if (plane.theta(k) < 0) plane.theta = -plane.theta;
        break;
      }
    }
    const Eigen::VectorXd root = cartan_coords * plane.theta;
    const double r2 = plane.theta.squaredNorm();
    plane.first_touch = -1;
    for (int m = 0; m < d; ++m) {
      Eigen::VectorXd proj = v1 * v1(m) + v2 * v2(m);
      if (proj.norm() > 1e-6) {
        plane.first_touch = m;
        plane.odd = proj.normalized();
        break;
      }
    }
    snap_to_basis(plane.odd);
    Eigen::MatrixXd ad_root = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < nu; ++k) ad_root += plane.theta(k) * ad_cartan[k];
    plane.even = -(ad_root * plane.odd) / r2;
    snap_to_basis(plane.even);
    const double in_plane = (plane.even - v1 * v1.dot(plane.even) - v2 * v2.dot(plane.even)).norm();
    if (std::abs(plane.even.norm() - 1.0) > 1e-8 || in_plane > 1e-8) {
      throw NumericalError("root pair construction failed: |X_even| = " + std::to_string(plane.even.norm()));
    }
    // Recompute the root from the pair so that [X_odd, X_even] = -R holds as an identity.
    const AlgebraElement odd = algebra.element(plane.odd);
    const AlgebraElement even = algebra.element(plane.even);
    plane.root = algebra.coordinates(-bracket(odd, even));
    if ((plane.root - root).norm() > 1e-8 * std::max(1.0, root.norm())) {
      throw NumericalError("root recomputed from its pair disagrees with the eigen-derived root");
    }
    plane.theta = cartan_coords.transpose() * plane.root;
    planes.push_back(std::move(plane));
  }
  std::stable_sort(planes.begin(), planes.end(), [](const Plane& x, const Plane& y) {
    if (x.first_touch != y.first_touch) return x.first_touch < y.first_touch;
    return std::lexicographical_compare(x.theta.begin(), x.theta.end(), y.theta.begin(), y.theta.end());
  });

  std::vector<PositiveRoot> roots;
  std::vector<RootPair> pairs;
  for (std::size_t j = 0; j < planes.size(); ++j) {
    const AlgebraElement r = -bracket(algebra.element(planes[j].odd), algebra.element(planes[j].even));
    roots.push_back({planes[j].theta, r});
    pairs.push_back({algebra.element(planes[j].odd), algebra.element(planes[j].even), static_cast<int>(j)});
  }

  std::vector<int> basis_indices;
  Eigen::MatrixXd selected(nu, 0);
  for (std::size_t j = 0; j < roots.size() && static_cast<int>(basis_indices.size()) < nu; ++j) {
    Eigen::MatrixXd trial(nu, selected.cols() + 1);
    trial << selected, roots[j].coordinates;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(trial);
    lu.setThreshold(1e-9);
    if (lu.rank() == trial.cols()) {
      selected = trial;
      basis_indices.push_back(static_cast<int>(j));
    }
  }
  if (static_cast<int>(basis_indices.size()) != nu) {
    throw NumericalError("positive roots do not span the Cartan subalgebra");
  }

  RootDatum datum(algebra, std::vector<AlgebraElement>(cartan.begin(), cartan.end()), std::move(roots),
                  std::move(pairs), std::move(basis_indices));
  datum.verify(1e-10);
  return datum;
}

Frame::Frame(std::vector<AlgebraElement> horizontal, std::vector<AlgebraElement> roots, double epsilon,
             double metric_scale)
    : horizontal_(std::move(horizontal)), roots_(std::move(roots)), epsilon_(epsilon), metric_scale_(metric_scale) {
  if (horizontal_.empty()) throw InvalidDimension("frame needs horizontal fields");
  if (!(epsilon_ > 0.0 && epsilon_ <= 1.0)) throw RangeError("epsilon must lie in (0, 1]");
  for (const auto& x : horizontal_) {
    if (x.n() != horizontal_.front().n()) throw SizeMismatch("frame fields have different sizes");
  }
  for (const auto& r : roots_) {
    if (r.n() != horizontal_.front().n()) throw SizeMismatch("frame fields have different sizes");
    vertical_.push_back(epsilon_ * r);
  }
}

std::vector<AlgebraElement> Frame::all() const {
  std::vector<AlgebraElement> out = horizontal_;
  out.insert(out.end(), vertical_.begin(), vertical_.end());
  return out;
}

Frame horizontal_frame(const RootDatum& datum) {
  datum.verify(1e-10);
  std::vector<AlgebraElement> horizontal;
  for (const auto& pair : datum.pairs()) {
    horizontal.push_back(pair.odd);
    horizontal.push_back(pair.even);
  }
  std::vector<AlgebraElement> vertical;
  for (int idx : datum.root_basis_indices()) vertical.push_back(datum.positive_roots()[idx].vector);
  return Frame(std::move(horizontal), std::move(vertical), 1.0, datum.algebra().metric_scale());
}

Frame epsilon_frame(const Frame& frame, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw RangeError("epsilon must lie in (0, 1], got " + std::to_string(eps));
  if (frame.epsilon() != 1.0) throw PreconditionError("epsilon_frame expects an unscaled frame");
  return Frame(frame.horizontal(), frame.roots(), eps, frame.metric_scale());
}

Frame su_frame(int n) {
  const LieAlgebra algebra = su_basis(n);
  const std::vector<AlgebraElement> cartan = cartan_subalgebra(algebra);
  return horizontal_frame(root_space_decomposition(algebra, cartan));
}

int bracket_closure_rank(std::span<const AlgebraElement> fields) {
  std::vector<AlgebraElement> elements;
  std::vector<Eigen::VectorXd> orthonormal;
  auto try_add = [&](const AlgebraElement& x) {
    Eigen::VectorXd v = real_vector(x);
    const double scale = v.norm();
    if (scale < 1e-12) return false;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : orthonormal) v -= q.dot(v) * q;
    }
    if (v.norm() <= 1e-9 * scale) return false;
    orthonormal.push_back(v.normalized());
    elements.push_back(x);
    return true;
  };
  for (const auto& f : fields) try_add(f);
  std::size_t processed = 0;
  while (processed < elements.size()) {
    const AlgebraElement current = elements[processed++];
    for (const auto& f : fields) try_add(bracket(f, current));
  }
  return static_cast<int>(orthonormal.size());
}

int hormander_rank(const Frame& frame) { return bracket_closure_rank(frame.horizontal()); }

}  // namespace sublap

#include "manilip/laplacian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "manilip/error.hpp"

namespace manilip {

double heat_kernel(double sq_dist, double t, int d) {
  if (!(t > 0.0)) throw InvalidArgument("heat kernel temperature must be positive");
  if (d < 1) throw InvalidArgument("intrinsic dimension must be >= 1");
  if (!(sq_dist >= 0.0)) throw InvalidArgument("squared distance must be nonnegative");
  const double norm = std::pow(4.0 * std::numbers::pi * t, -0.5 * d);
  return norm * std::exp(-sq_dist / (4.0 * t));
}

namespace {

double sq_dist(const Mat& points, Eigen::Index i, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    const double diff = points(i, c) - points(j, c);
    s += diff * diff;
  }
  return s;
}

void require_length(const LaplacianMatrix& L, Eigen::Index len, const char* what) {
  if (len != L.n)
    throw InvalidArgument(std::string(what) + " has length " + std::to_string(len) +
                          ", graph has " + std::to_string(L.n) + " points");
}

}  // namespace

LaplacianMatrix build_laplacian(const Mat& points, const LaplacianConfig& config) {
  if (!(config.t > 0.0)) throw InvalidArgument("heat kernel temperature must be positive");
  if (config.d < 1) throw InvalidArgument("intrinsic dimension must be >= 1");
  if (!(config.threshold >= 0.0)) throw InvalidArgument("threshold must be nonnegative");
  const Eigen::Index n = points.rows();
  if (n < 2) throw InvalidArgument("a Laplacian needs at least two points");
  if (!points.allFinite()) throw InvalidArgument("points contain non-finite coordinates");

  const double t = config.t;
  const double norm = heat_kernel(0.0, t, config.d);
  const auto kernel = [&](Eigen::Index i, Eigen::Index j) {
    const double g = norm * std::exp(-sq_dist(points, i, j) / (4.0 * t));
    return g < config.threshold ? 0.0 : g;
  };
  const double self_kernel = kernel(0, 0);

  // Pass 1: leave-one-out degrees  (1/(N-1)) sum_{m != i} G(x_m, x_i).
  Vec loo = Vec::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) s += kernel(i, j);
    if (!(s > 0.0)) throw ConstructionError("isolated point: every kernel value is below the threshold", static_cast<std::size_t>(i));
    loo[i] = s / static_cast<double>(n - 1);
  }

  LaplacianMatrix L;
  L.n = static_cast<int>(n);
  L.config = config;
  L.col_degree = loo;
  if (config.degree_convention == DegreeConvention::leave_one_out_symmetric) {
    L.row_degree = loo;
  } else {
    // (1/N) sum_n G(z, x_n) including the self term.
    L.row_degree = (loo * static_cast<double>(n - 1)).array() + self_kernel;
    L.row_degree /= static_cast<double>(n);
  }

  // Pass 2: weights.
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) * 16);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double g = kernel(i, j);
      if (g == 0.0) continue;
      const double w = g / (t * std::sqrt(L.row_degree[i] * L.col_degree[j]));
      entries.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
    }
  }
  L.weights.resize(n, n);
  L.weights.setFromTriplets(entries.begin(), entries.end());
  L.weights.makeCompressed();

  L.row_sums = Vec::Zero(n);
  for (int i = 0; i < L.n; ++i) {
    double s = 0.0;
    for (SparseRowMat::InnerIterator it(L.weights, i); it; ++it) s += it.value();
    L.row_sums[i] = s;
  }
  return L;
}

Vec apply_laplacian(const LaplacianMatrix& L, const Vec& f) {
  require_length(L, f.size(), "f");
  Vec out(L.n);
  const double inv_n = 1.0 / L.n;
  for (int i = 0; i < L.n; ++i) {
    double s = 0.0;
    // Differences are formed first so constants cancel exactly.
    for (SparseRowMat::InnerIterator it(L.weights, i); it; ++it)
      s += it.value() * (f[i] - f[it.col()]);
    out[i] = inv_n * s;
  }
  return out;
}

Mat apply_laplacian(const LaplacianMatrix& L, const Mat& f) {
  require_length(L, f.rows(), "f");
  Mat out(f.rows(), f.cols());
  for (Eigen::Index c = 0; c < f.cols(); ++c) out.col(c) = apply_laplacian(L, Vec(f.col(c)));
  return out;
}

Vec apply_laplacian_transpose(const LaplacianMatrix& L, const Vec& g) {
  require_length(L, g.size(), "g");
  Vec out = L.row_sums.cwiseProduct(g);
  for (int i = 0; i < L.n; ++i)
    for (SparseRowMat::InnerIterator it(L.weights, i); it; ++it)
      out[it.col()] -= it.value() * g[i];
  return out / static_cast<double>(L.n);
}

double dirichlet_energy(const LaplacianMatrix& L, const Vec& f, const Vec& lambda) {
  require_length(L, f.size(), "f");
  require_length(L, lambda.size(), "lambda");
  const Vec lf = apply_laplacian(L, f);
  double s = 0.0;
  for (int i = 0; i < L.n; ++i) s += f[i] * lf[i] * lambda[i];
  return s / L.n;
}

double dirichlet_energy(const LaplacianMatrix& L, const Mat& f, const Vec& lambda) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < f.cols(); ++c) s += dirichlet_energy(L, Vec(f.col(c)), lambda);
  return s;
}

Mat dirichlet_energy_gradient(const LaplacianMatrix& L, const Mat& f, const Vec& lambda) {
  require_length(L, f.rows(), "f");
  require_length(L, lambda.size(), "lambda");
  Mat out(f.rows(), f.cols());
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    const Vec fc = f.col(c);
    const Vec lf = apply_laplacian(L, fc);
    const Vec lt = apply_laplacian_transpose(L, Vec(lambda.cwiseProduct(fc)));
    out.col(c) = (lambda.cwiseProduct(lf) + lt) / static_cast<double>(L.n);
  }
  return out;
}

double weighted_dirichlet_form(const LaplacianMatrix& L, const Mat& f, const Vec& lambda) {
  require_length(L, f.rows(), "f");
  require_length(L, lambda.size(), "lambda");
  double total = 0.0;
  for (int i = 0; i < L.weights.outerSize(); ++i)
    for (SparseRowMat::InnerIterator it(L.weights, i); it; ++it) {
      const auto j = it.col();
      total += it.value() * 0.5 * (lambda[i] + lambda[j]) * (f.row(i) - f.row(j)).squaredNorm();
    }
  const double n = static_cast<double>(L.n);
  return total / (2.0 * n * n);
}

Mat weighted_dirichlet_form_gradient(const LaplacianMatrix& L, const Mat& f, const Vec& lambda) {
  require_length(L, f.rows(), "f");
  require_length(L, lambda.size(), "lambda");
  Mat out = Mat::Zero(f.rows(), f.cols());
  const double n = static_cast<double>(L.n);
  const double scale = 1.0 / (n * n);
  for (int i = 0; i < L.weights.outerSize(); ++i)
    for (SparseRowMat::InnerIterator it(L.weights, i); it; ++it) {
      const auto j = it.col();
      // Each ordered pair feeds both endpoints; W_ij and W_ji add up for asymmetric W.
      const double c = scale * it.value() * 0.5 * (lambda[i] + lambda[j]);
      const Eigen::RowVectorXd diff = c * (f.row(i) - f.row(j));
      out.row(i) += diff;
      out.row(j) -= diff;
    }
  return out;
}

double temperature_rule(long n, int d, double alpha) {
  if (n < 1) throw InvalidArgument("sample count must be >= 1");
  if (d < 1) throw InvalidArgument("intrinsic dimension must be >= 1");
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  return std::pow(static_cast<double>(n), -1.0 / (d + 2.0 + alpha));
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Components connected_components(const LaplacianMatrix& L) {
  DisjointSets sets(L.n);
  for (int i = 0; i < L.n; ++i)
    for (SparseRowMat::InnerIterator it(L.weights, i); it; ++it)
      if (it.value() != 0.0) sets.unite(i, static_cast<int>(it.col()));

  Components out;
  out.label.assign(L.n, -1);
  std::vector<int> root_label(L.n, -1);
  for (int i = 0; i < L.n; ++i) {
    const int r = sets.find(i);
    if (root_label[r] < 0) root_label[r] = out.count++;
    out.label[i] = root_label[r];
  }
  return out;
}

long cross_edges(const LaplacianMatrix& L, const std::vector<int>& class_labels) {
  require_length(L, static_cast<Eigen::Index>(class_labels.size()), "class_labels");
  long count = 0;
  for (int i = 0; i < L.n; ++i) {
    for (SparseRowMat::InnerIterator it(L.weights, i); it; ++it) {
      const int j = static_cast<int>(it.col());
      if (it.value() == 0.0 || class_labels[i] == class_labels[j]) continue;
      // Count {i,j} once: from the smaller index, or from i when W_ji is absent.
      const bool reverse_present = L.weights.coeff(j, i) != 0.0;
      if (i < j || !reverse_present) ++count;
    }
  }
  return count;
}

void write_triplets(const LaplacianMatrix& L, std::ostream& out) {
  const auto old = out.precision(17);
  for (int i = 0; i < L.n; ++i)
    for (SparseRowMat::InnerIterator it(L.weights, i); it; ++it)
      out << i << ' ' << it.col() << ' ' << it.value() << '\n';
  out.precision(old);
}

}  // namespace manilip

#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "manilip/nn.hpp"

namespace manilip {

enum class DegreeConvention {
  /// z-side degree averages over all N points including z itself; the
  /// x-side degree is the leave-one-out average over N-1 points.
  literal,
  /// Leave-one-out degree on both sides. W is exactly symmetric.
  leave_one_out_symmetric,
};

struct LaplacianConfig {
  double t = 0.005;  ///< heat-kernel temperature
  int d = 1;         ///< intrinsic dimension in the (4 pi t)^{-d/2} normalizer
  double threshold = 0.0;  ///< kernel values below this are dropped
  DegreeConvention degree_convention = DegreeConvention::leave_one_out_symmetric;
};

using SparseRowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Degree-normalized heat-kernel weights over a point cloud.
///
/// The operator is (L f)_i = (1/n) sum_j W_ij (f_i - f_j).
struct LaplacianMatrix {
  int n = 0;
  SparseRowMat weights;       ///< W, zero diagonal, nonnegative
  Vec row_degree;             ///< degree used for the row (z) side
  Vec col_degree;             ///< degree used for the column (x_n) side
  Vec row_sums;               ///< sum_j W_ij, cached for the transpose
  LaplacianConfig config;

  long nonzeros() const { return weights.nonZeros(); }
};

/// (4 pi t)^{-d/2} exp(-sq_dist / 4t).
double heat_kernel(double sq_dist, double t, int d);

/// Dense O(n^2) construction. `points` holds one point per row.
/// Throws ConstructionError naming the first point with zero degree.
LaplacianMatrix build_laplacian(const Mat& points, const LaplacianConfig& config);

Vec apply_laplacian(const LaplacianMatrix& L, const Vec& f);
/// Column-wise application for vector-valued functions (n x O).
Mat apply_laplacian(const LaplacianMatrix& L, const Mat& f);
Vec apply_laplacian_transpose(const LaplacianMatrix& L, const Vec& g);

/// (1/n) sum_i f_i (L f)_i lambda_i. Columns of a matrix-valued f are summed.
double dirichlet_energy(const LaplacianMatrix& L, const Vec& f, const Vec& lambda);
double dirichlet_energy(const LaplacianMatrix& L, const Mat& f, const Vec& lambda);

/// d/df of dirichlet_energy, same shape as f.
Mat dirichlet_energy_gradient(const LaplacianMatrix& L, const Mat& f, const Vec& lambda);

/// Edge-weighted form (1/(2n^2)) sum_ij W_ij (lambda_i + lambda_j)/2 |f_i - f_j|^2.
/// Nonnegative for every lambda >= 0 and equal to dirichlet_energy when lambda is
/// constant and W is symmetric. The plain estimator f.(Lf).lambda is indefinite
/// once lambda varies, so training uses this form instead.
double weighted_dirichlet_form(const LaplacianMatrix& L, const Mat& f, const Vec& lambda);
Mat weighted_dirichlet_form_gradient(const LaplacianMatrix& L, const Mat& f, const Vec& lambda);

/// N^{-1/(d+2+alpha)}.
double temperature_rule(long n, int d, double alpha);

struct Components {
  int count = 0;
  std::vector<int> label;  ///< per point, in [0, count), numbered by first appearance
};

/// Components of the undirected graph with an edge wherever W_ij or W_ji is nonzero.
Components connected_components(const LaplacianMatrix& L);

/// Unordered nonzero-weight pairs whose endpoints carry different labels.
long cross_edges(const LaplacianMatrix& L, const std::vector<int>& class_labels);

/// "row col weight" lines, 0-based indices, one per stored entry.
void write_triplets(const LaplacianMatrix& L, std::ostream& out);

}  // namespace manilip

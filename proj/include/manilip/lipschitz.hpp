#pragma once

#include <vector>

#include "manilip/nn.hpp"

namespace manilip {

struct NeighborhoodRule {
  enum class Kind { epsilon, knn };
  Kind kind = Kind::knn;
  double delta = 0.0;  ///< radius for Kind::epsilon
  int k = 8;           ///< neighbor count for Kind::knn

  static NeighborhoodRule epsilon(double delta) { return {Kind::epsilon, delta, 0}; }
  static NeighborhoodRule knn(int k) { return {Kind::knn, 0.0, k}; }
};

/// Only the Euclidean ambient metric ships; the enum is the extension point.
enum class Metric { euclidean };

struct Neighbor {
  int index;
  double distance;
};

/// Per-point neighbor lists. Coincident points are never neighbors of each other.
struct Neighborhoods {
  std::vector<std::vector<Neighbor>> lists;
  NeighborhoodRule rule;
  Metric metric = Metric::euclidean;

  int size() const { return static_cast<int>(lists.size()); }
};

/// epsilon: symmetric by construction, every point needs a neighbor within delta.
/// knn: the min(k, n-1) nearest points, distance ties broken by index, not symmetrized.
Neighborhoods build_neighborhoods(const Mat& points, const NeighborhoodRule& rule,
                                  Metric metric = Metric::euclidean);

struct GradNormEstimate {
  Vec values;               ///< max_z |f(x_i) - f(z)| / d(x_i, z)
  std::vector<int> argmax;  ///< maximizing neighbor, -1 for an empty list
};

/// `f_values` is n x O; the output difference is measured in the Euclidean norm.
/// Ties in the max go to the lowest neighbor index.
GradNormEstimate grad_norm_estimates(const Mat& f_values, const Neighborhoods& nbrs);

struct MaxGradNorm {
  double rho;        ///< max squared gradient-norm estimate
  double lipschitz;  ///< sqrt(rho)
};

MaxGradNorm max_grad_norm(const GradNormEstimate& est);

}  // namespace manilip

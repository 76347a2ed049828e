#include "manilip/lipschitz.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "manilip/error.hpp"

namespace manilip {

namespace {

double distance(const Mat& points, Eigen::Index i, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    const double diff = points(i, c) - points(j, c);
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace

Neighborhoods build_neighborhoods(const Mat& points, const NeighborhoodRule& rule, Metric metric) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw InvalidArgument("neighborhoods need at least two points");
  if (!points.allFinite()) throw InvalidArgument("points contain non-finite coordinates");

  Neighborhoods out;
  out.rule = rule;
  out.metric = metric;
  out.lists.resize(n);

  if (rule.kind == NeighborhoodRule::Kind::epsilon) {
    if (!(rule.delta > 0.0)) throw InvalidArgument("epsilon neighborhood radius must be positive");
    // Distances are symmetric, so scanning all pairs yields a symmetric relation.
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double d = distance(points, i, j);
        if (d > 0.0 && d <= rule.delta) out.lists[i].push_back({static_cast<int>(j), d});
      }
      if (out.lists[i].empty())
        throw ConstructionError("no neighbor within radius " + std::to_string(rule.delta),
                                static_cast<std::size_t>(i));
    }
    return out;
  }

  if (rule.k < 1) throw InvalidArgument("knn neighbor count must be positive");
  const auto k = static_cast<std::size_t>(std::min<Eigen::Index>(rule.k, n - 1));
  std::vector<Neighbor> candidates;
  candidates.reserve(n);
  const auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    candidates.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = distance(points, i, j);
      if (d > 0.0) candidates.push_back({static_cast<int>(j), d});
    }
    const auto take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), closer);
    out.lists[i].assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

GradNormEstimate grad_norm_estimates(const Mat& f_values, const Neighborhoods& nbrs) {
  if (f_values.rows() != nbrs.size())
    throw InvalidArgument("f_values has " + std::to_string(f_values.rows()) +
                          " rows, neighborhoods cover " + std::to_string(nbrs.size()) + " points");
  GradNormEstimate est;
  est.values = Vec::Zero(nbrs.size());
  est.argmax.assign(nbrs.size(), -1);
  for (int i = 0; i < nbrs.size(); ++i) {
    double best = -1.0;
    int best_index = -1;
    for (const Neighbor& nb : nbrs.lists[i]) {
      const double ratio = (f_values.row(i) - f_values.row(nb.index)).norm() / nb.distance;
      if (ratio > best || (ratio == best && nb.index < best_index)) {
        best = ratio;
        best_index = nb.index;
      }
    }
    if (best_index >= 0) {
      est.values[i] = best;
      est.argmax[i] = best_index;
    }
  }
  return est;
}

MaxGradNorm max_grad_norm(const GradNormEstimate& est) {
  if (est.values.size() == 0) throw InvalidArgument("empty gradient-norm estimate");
  const double top = est.values.maxCoeff();
  return {top * top, top};
}

}  // namespace manilip

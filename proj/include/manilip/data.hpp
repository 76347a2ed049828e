#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "manilip/nn.hpp"

namespace manilip {

enum class Task { classification_pm1, regression };

/// Points are stored labeled-first: rows [0, n_labeled) carry targets in `labels`.
struct Dataset {
  Mat points;  ///< n x D
  Mat labels;  ///< n_labeled x O
  int n_labeled = 0;
  int n_unlabeled = 0;
  Task task = Task::regression;
  /// Ground-truth class per point (for two moons: +1 / -1), empty when unknown.
  std::vector<int> class_of_point;

  int size() const { return n_labeled + n_unlabeled; }
  int input_dim() const { return static_cast<int>(points.cols()); }
  int output_dim() const { return static_cast<int>(labels.cols()); }
  Mat labeled_points() const { return points.topRows(n_labeled); }

  /// Throws InvalidArgument when the counts, shapes or labels are inconsistent.
  void validate() const;
};

/// Moon A: (cos u, sin u), label +1. Moon B: (1 - cos u, 0.5 - sin u), label -1.
/// u runs over an even grid on [0, pi]; which grid points are labeled is drawn from `seed`.
Dataset two_moons(int n_labeled_per_class, int n_unlabeled_per_class, double noise,
                  std::uint64_t seed);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Rect {
  double x0, y0, x1, y1;
  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

/// Planar single-integrator world  s <- s + v Ts  inside an axis-aligned box.
struct NavEnv {
  double width = 20.0;
  double height = 10.0;
  std::vector<Rect> obstacles;
  Vec2 goal{19.0, 1.0};
  double goal_radius = 0.5;
  double ts = 0.1;
  double v_max = 2.0;
  int max_steps = 600;
  double grid_spacing = 0.5;
  bool eight_connected = true;
  std::vector<Vec2> train_starts{{1.0, 9.0}, {14.0, 1.0}};

  /// Two walls forcing an S-shaped route from the top-left to the goal.
  static NavEnv with_default_obstacles();

  bool in_domain(Vec2 p) const { return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height; }
  bool in_obstacle(Vec2 p) const;
  bool is_free(Vec2 p) const { return in_domain(p) && !in_obstacle(p); }
  void validate() const;
};

struct GridPoint {
  int ix = 0;
  int iy = 0;
  bool operator==(const GridPoint&) const = default;
};

/// The square lattice of spacing `grid_spacing` restricted to free space.
struct FreeGrid {
  int nx = 0;
  int ny = 0;
  double spacing = 0.0;
  std::vector<char> free;  ///< nx * ny, row-major in iy

  explicit FreeGrid(const NavEnv& env);
  bool is_free(GridPoint g) const;
  int node_index(GridPoint g) const { return g.iy * nx + g.ix; }
  Vec2 position(GridPoint g) const { return {g.ix * spacing, g.iy * spacing}; }
  /// Closest free node to `p`; throws InvalidArgument if the grid has none.
  GridPoint nearest_free(Vec2 p) const;
  std::vector<GridPoint> free_nodes() const;
};

/// Shortest path over free grid nodes with Euclidean edge lengths.
/// Equal-cost frontier entries are settled in node-index order.
/// Throws NoPathError when `goal_node` is unreachable.
std::vector<GridPoint> dijkstra_grid(const NavEnv& env, GridPoint start, GridPoint goal_node);

/// Labeled (state, velocity) pairs: action i = (p[i+1] - p[i]) / Ts, clamped to v_max.
/// The last path point carries no action.
Dataset label_actions(const std::vector<Vec2>& path, const NavEnv& env);

enum class RolloutOutcome { success, collision, timeout };

struct Rollout {
  std::vector<Vec2> trajectory;
  RolloutOutcome outcome = RolloutOutcome::timeout;
};

/// Clamp to magnitude v_max, keeping direction.
Vec2 clamp_speed(Vec2 v, double v_max);

/// Closed-loop simulation of a 2-in / 2-out model from `start`.
Rollout rollout(const MlpParams& model, const NavEnv& env, Vec2 start);

/// Labeled expert pairs from every training start plus every remaining free grid node unlabeled.
Dataset navigation_dataset(const NavEnv& env);

/// `count` uniform draws over free space.
std::vector<Vec2> random_free_starts(const NavEnv& env, int count, std::uint64_t seed);

struct CsvSchema {
  std::vector<std::string> features;
  std::vector<std::string> targets;
  std::string unlabeled_flag;  ///< optional; rows with a nonzero flag carry no targets
};

/// Header row names the columns. Throws ParseError with the 1-based line on bad input
/// and InvalidArgument when the file holds no data rows.
Dataset load_csv(const std::string& path, const CsvSchema& schema);

}  // namespace manilip

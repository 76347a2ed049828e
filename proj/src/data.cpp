#include "manilip/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_map>

#include "manilip/error.hpp"

namespace manilip {

void Dataset::validate() const {
  if (n_labeled < 0 || n_unlabeled < 0) throw InvalidArgument("negative point counts");
  if (points.rows() != n_labeled + n_unlabeled)
    throw InvalidArgument("point count does not match n_labeled + n_unlabeled");
  if (labels.rows() != n_labeled) throw InvalidArgument("label count does not match n_labeled");
  if (!class_of_point.empty() && static_cast<int>(class_of_point.size()) != size())
    throw InvalidArgument("class_of_point must cover every point");
  if (task == Task::classification_pm1)
    for (Eigen::Index i = 0; i < labels.size(); ++i)
      if (labels.data()[i] != 1.0 && labels.data()[i] != -1.0)
        throw InvalidArgument("classification labels must be +1 or -1");
}

Dataset two_moons(int n_labeled_per_class, int n_unlabeled_per_class, double noise,
                  std::uint64_t seed) {
  if (n_labeled_per_class < 0 || n_unlabeled_per_class < 0)
    throw InvalidArgument("two_moons counts must be nonnegative");
  if (n_labeled_per_class + n_unlabeled_per_class == 0)
    throw InvalidArgument("two_moons needs at least one point per class");
  if (!(noise >= 0.0)) throw InvalidArgument("noise must be nonnegative");

  const int per_class = n_labeled_per_class + n_unlabeled_per_class;
  std::mt19937_64 rng(seed);

  // Grid slots per class, first n_labeled_per_class of a shuffled order are labeled.
  std::array<std::vector<int>, 2> order;
  for (auto& o : order) {
    o.resize(per_class);
    std::iota(o.begin(), o.end(), 0);
    std::shuffle(o.begin(), o.end(), rng);
    std::sort(o.begin(), o.begin() + n_labeled_per_class);
    std::sort(o.begin() + n_labeled_per_class, o.end());
  }

  const auto arc = [&](int moon, int slot) -> Vec2 {
    const double u = per_class > 1 ? std::numbers::pi * slot / (per_class - 1) : 0.0;
    if (moon == 0) return {std::cos(u), std::sin(u)};
    return {1.0 - std::cos(u), 0.5 - std::sin(u)};
  };

  Dataset ds;
  ds.task = Task::classification_pm1;
  ds.n_labeled = 2 * n_labeled_per_class;
  ds.n_unlabeled = 2 * n_unlabeled_per_class;
  ds.points.resize(2 * per_class, 2);
  ds.labels.resize(ds.n_labeled, 1);
  ds.class_of_point.resize(2 * per_class);

  int row = 0;
  const auto emit = [&](int moon, int slot) {
    const Vec2 p = arc(moon, slot);
    ds.points(row, 0) = p.x;
    ds.points(row, 1) = p.y;
    ds.class_of_point[row] = moon == 0 ? 1 : -1;
    if (row < ds.n_labeled) ds.labels(row, 0) = ds.class_of_point[row];
    ++row;
  };
  for (int moon = 0; moon < 2; ++moon)
    for (int k = 0; k < n_labeled_per_class; ++k) emit(moon, order[moon][k]);
  for (int moon = 0; moon < 2; ++moon)
    for (int k = n_labeled_per_class; k < per_class; ++k) emit(moon, order[moon][k]);

  if (noise > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise);
    for (Eigen::Index i = 0; i < ds.points.rows(); ++i)
      for (Eigen::Index c = 0; c < 2; ++c) ds.points(i, c) += gauss(rng);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Navigation

NavEnv NavEnv::with_default_obstacles() {
  NavEnv env;
  env.obstacles = {Rect{5.0, 0.0, 7.0, 7.0}, Rect{11.0, 3.0, 13.0, 10.0}};
  return env;
}

bool NavEnv::in_obstacle(Vec2 p) const {
  return std::any_of(obstacles.begin(), obstacles.end(), [&](const Rect& r) { return r.contains(p); });
}

void NavEnv::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) throw InvalidArgument("domain must have positive size");
  if (!(ts > 0.0)) throw InvalidArgument("Ts must be positive");
  if (!(v_max > 0.0)) throw InvalidArgument("v_max must be positive");
  if (!(goal_radius > 0.0)) throw InvalidArgument("goal radius must be positive");
  if (max_steps < 1) throw InvalidArgument("max_steps must be positive");
  if (!(grid_spacing > 0.0)) throw InvalidArgument("grid spacing must be positive");
  for (const Rect& r : obstacles)
    if (!(r.x1 >= r.x0) || !(r.y1 >= r.y0)) throw InvalidArgument("obstacle rectangle is inverted");
  if (!is_free(goal)) throw InvalidArgument("goal lies outside free space");
}

FreeGrid::FreeGrid(const NavEnv& env) : spacing(env.grid_spacing) {
  if (!(spacing > 0.0)) throw InvalidArgument("grid spacing must be positive");
  nx = static_cast<int>(std::floor(env.width / spacing + 1e-9)) + 1;
  ny = static_cast<int>(std::floor(env.height / spacing + 1e-9)) + 1;
  free.assign(static_cast<std::size_t>(nx) * ny, 0);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      free[node_index({ix, iy})] = env.is_free(position({ix, iy})) ? 1 : 0;
}

bool FreeGrid::is_free(GridPoint g) const {
  return g.ix >= 0 && g.ix < nx && g.iy >= 0 && g.iy < ny && free[node_index(g)];
}

GridPoint FreeGrid::nearest_free(Vec2 p) const {
  GridPoint best{-1, -1};
  double best_d = std::numeric_limits<double>::infinity();
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      if (!free[node_index({ix, iy})]) continue;
      const Vec2 q = position({ix, iy});
      const double d = std::hypot(q.x - p.x, q.y - p.y);
      if (d < best_d) {
        best_d = d;
        best = {ix, iy};
      }
    }
  if (best.ix < 0) throw InvalidArgument("grid has no free nodes");
  return best;
}

std::vector<GridPoint> FreeGrid::free_nodes() const {
  std::vector<GridPoint> out;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      if (free[node_index({ix, iy})]) out.push_back({ix, iy});
  return out;
}

std::vector<GridPoint> dijkstra_grid(const NavEnv& env, GridPoint start, GridPoint goal_node) {
  const FreeGrid grid(env);
  if (!grid.is_free(start)) throw InvalidArgument("start is not a free grid node");
  if (!grid.is_free(goal_node)) throw InvalidArgument("goal is not a free grid node");

  const int total = grid.nx * grid.ny;
  std::vector<double> dist(total, std::numeric_limits<double>::infinity());
  std::vector<int> prev(total, -1);
  std::vector<char> done(total, 0);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;

  const int s = grid.node_index(start);
  const int g = grid.node_index(goal_node);
  dist[s] = 0.0;
  frontier.push({0.0, s});

  static constexpr int kMoves[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                       {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  const int n_moves = env.eight_connected ? 8 : 4;
  while (!frontier.empty()) {
    const auto [d, u] = frontier.top();
    frontier.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == g) break;
    const GridPoint gu{u % grid.nx, u / grid.nx};
    for (int m = 0; m < n_moves; ++m) {
      const GridPoint gv{gu.ix + kMoves[m][0], gu.iy + kMoves[m][1]};
      if (!grid.is_free(gv)) continue;
      const int v = grid.node_index(gv);
      const double step = (m < 4 ? 1.0 : std::numbers::sqrt2) * grid.spacing;
      if (d + step < dist[v]) {
        dist[v] = d + step;
        prev[v] = u;
        frontier.push({dist[v], v});
      }
    }
  }
  if (!done[g]) throw NoPathError("goal grid node is unreachable from the start");

  std::vector<GridPoint> path;
  for (int v = g; v != -1; v = prev[v]) path.push_back({v % grid.nx, v / grid.nx});
  std::reverse(path.begin(), path.end());
  return path;
}

Vec2 clamp_speed(Vec2 v, double v_max) {
  const double speed = std::hypot(v.x, v.y);
  if (speed <= v_max || speed == 0.0) return v;
  const double scale = v_max / speed;
  return {v.x * scale, v.y * scale};
}

Dataset label_actions(const std::vector<Vec2>& path, const NavEnv& env) {
  if (path.size() < 2) throw InvalidArgument("a labeled path needs at least two points");
  if (!(env.ts > 0.0)) throw InvalidArgument("Ts must be positive");
  const int m = static_cast<int>(path.size()) - 1;
  Dataset ds;
  ds.task = Task::regression;
  ds.n_labeled = m;
  ds.points.resize(m, 2);
  ds.labels.resize(m, 2);
  for (int i = 0; i < m; ++i) {
    const Vec2 raw{(path[i + 1].x - path[i].x) / env.ts, (path[i + 1].y - path[i].y) / env.ts};
    const Vec2 a = clamp_speed(raw, env.v_max);
    ds.points.row(i) << path[i].x, path[i].y;
    ds.labels.row(i) << a.x, a.y;
  }
  return ds;
}

Rollout rollout(const MlpParams& model, const NavEnv& env, Vec2 start) {
  if (model.input_dim() != 2 || model.output_dim() != 2)
    throw InvalidArgument("navigation model must map R^2 to R^2");
  if (!env.is_free(start)) throw InvalidArgument("rollout start is not in free space");

  const auto at_goal = [&](Vec2 p) { return std::hypot(p.x - env.goal.x, p.y - env.goal.y) <= env.goal_radius; };
  Rollout r;
  r.trajectory.push_back(start);
  if (at_goal(start)) {
    r.outcome = RolloutOutcome::success;
    return r;
  }
  Vec2 s = start;
  Vec x(2);
  for (int step = 0; step < env.max_steps; ++step) {
    x << s.x, s.y;
    const Vec out = mlp_forward(model, x);
    const Vec2 v = clamp_speed({out[0], out[1]}, env.v_max);
    s = {s.x + v.x * env.ts, s.y + v.y * env.ts};
    r.trajectory.push_back(s);
    if (!env.is_free(s)) {
      r.outcome = RolloutOutcome::collision;
      return r;
    }
    if (at_goal(s)) {
      r.outcome = RolloutOutcome::success;
      return r;
    }
  }
  r.outcome = RolloutOutcome::timeout;
  return r;
}

Dataset navigation_dataset(const NavEnv& env) {
  env.validate();
  const FreeGrid grid(env);
  const GridPoint goal_node = grid.nearest_free(env.goal);

  std::vector<Vec2> points;
  std::vector<Vec2> actions;
  std::vector<char> used(static_cast<std::size_t>(grid.nx) * grid.ny, 0);
  for (const Vec2& start : env.train_starts) {
    const auto nodes = dijkstra_grid(env, grid.nearest_free(start), goal_node);
    if (nodes.size() < 2) continue;
    std::vector<Vec2> path;
    for (const GridPoint& g : nodes) path.push_back(grid.position(g));
    const Dataset part = label_actions(path, env);
    for (int i = 0; i < part.n_labeled; ++i) {
      const int idx = grid.node_index(nodes[i]);
      if (used[idx]) continue;  // paths may merge; first expert label wins
      used[idx] = 1;
      points.push_back(path[i]);
      actions.push_back({part.labels(i, 0), part.labels(i, 1)});
    }
  }
  if (points.empty()) throw InvalidArgument("navigation training starts produced no labeled pairs");

  std::vector<Vec2> unlabeled;
  for (const GridPoint& g : grid.free_nodes())
    if (!used[grid.node_index(g)]) unlabeled.push_back(grid.position(g));

  Dataset ds;
  ds.task = Task::regression;
  ds.n_labeled = static_cast<int>(points.size());
  ds.n_unlabeled = static_cast<int>(unlabeled.size());
  ds.points.resize(ds.size(), 2);
  ds.labels.resize(ds.n_labeled, 2);
  for (int i = 0; i < ds.n_labeled; ++i) {
    ds.points.row(i) << points[i].x, points[i].y;
    ds.labels.row(i) << actions[i].x, actions[i].y;
  }
  for (int i = 0; i < ds.n_unlabeled; ++i)
    ds.points.row(ds.n_labeled + i) << unlabeled[i].x, unlabeled[i].y;
  return ds;
}

std::vector<Vec2> random_free_starts(const NavEnv& env, int count, std::uint64_t seed) {
  if (count < 0) throw InvalidArgument("start count must be nonnegative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, env.width);
  std::uniform_real_distribution<double> uy(0.0, env.height);
  std::vector<Vec2> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > 1000 * (count + 1)) throw InvalidArgument("free space is too small to sample starts");
    const Vec2 p{ux(rng), uy(rng)};
    if (env.is_free(p)) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, const std::string& column, std::size_t line) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last)
    throw ParseError("non-numeric value '" + cell + "' in column '" + column + "'", line);
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  if (schema.features.empty()) throw InvalidArgument("CSV schema needs at least one feature column");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file '" + path + "'");

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split_row(line);
    break;
  }
  if (header.empty()) throw ParseError("missing header row", line_no);

  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < header.size(); ++c) column.emplace(header[c], c);
  const auto index_of = [&](const std::string& name) {
    const auto it = column.find(name);
    if (it == column.end()) throw ParseError("missing column '" + name + "'", 1);
    return it->second;
  };
  std::vector<std::size_t> feat_idx, targ_idx;
  for (const auto& f : schema.features) feat_idx.push_back(index_of(f));
  for (const auto& t : schema.targets) targ_idx.push_back(index_of(t));
  const bool has_flag = !schema.unlabeled_flag.empty();
  const std::size_t flag_idx = has_flag ? index_of(schema.unlabeled_flag) : 0;

  std::vector<std::vector<double>> lab_x, lab_y, unl_x;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size())
      throw ParseError("row has " + std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(header.size()), line_no);
    std::vector<double> x;
    for (std::size_t k = 0; k < feat_idx.size(); ++k)
      x.push_back(parse_number(cells[feat_idx[k]], schema.features[k], line_no));
    const bool unlabeled = has_flag && parse_number(cells[flag_idx], schema.unlabeled_flag, line_no) != 0.0;
    if (unlabeled) {
      unl_x.push_back(std::move(x));
      continue;
    }
    std::vector<double> y;
    for (std::size_t k = 0; k < targ_idx.size(); ++k)
      y.push_back(parse_number(cells[targ_idx[k]], schema.targets[k], line_no));
    lab_x.push_back(std::move(x));
    lab_y.push_back(std::move(y));
  }
  if (lab_x.empty() && unl_x.empty()) throw InvalidArgument("CSV file '" + path + "' has no data rows");

  Dataset ds;
  ds.task = Task::regression;
  ds.n_labeled = static_cast<int>(lab_x.size());
  ds.n_unlabeled = static_cast<int>(unl_x.size());
  ds.points.resize(ds.size(), static_cast<Eigen::Index>(feat_idx.size()));
  ds.labels.resize(ds.n_labeled, static_cast<Eigen::Index>(targ_idx.size()));
  for (int i = 0; i < ds.n_labeled; ++i) {
    for (std::size_t c = 0; c < feat_idx.size(); ++c) ds.points(i, c) = lab_x[i][c];
    for (std::size_t c = 0; c < targ_idx.size(); ++c) ds.labels(i, c) = lab_y[i][c];
  }
  for (int i = 0; i < ds.n_unlabeled; ++i)
    for (std::size_t c = 0; c < feat_idx.size(); ++c) ds.points(ds.n_labeled + i, c) = unl_x[i][c];
  return ds;
}

}  // namespace manilip

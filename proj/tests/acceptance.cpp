// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.
//
// usage: acceptance <configs-dir>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "manilip/duality.hpp"
#include "manilip/error.hpp"
#include "manilip/experiment.hpp"
#include "manilip/laplacian.hpp"
#include "manilip/nn.hpp"
#include "manilip/trainers.hpp"

using namespace manilip;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

/// Dual invariants checked on every epoch of every training run below.
struct InvariantLog {
  long epochs = 0;
  long violations = 0;

  void scan(const TrainReport& r, int n) {
    for (const EpochRecord& e : r.history) {
      ++epochs;
      const bool ok = e.mu >= 0.0 && e.lambda_min >= 0.0 && std::abs(e.lambda_sum - n) < 1e-9 * n;
      if (!ok) ++violations;
    }
  }
};

InvariantLog invariants;

struct RunResult {
  bool converged = false;  ///< training finished with finite outputs
  double metric = 0.0;
  double final_loss = 0.0;
  double seconds = 0.0;
};

RunResult run_moons(const ExperimentConfig& cfg, Method m, std::uint64_t seed, double t) {
  const Dataset data = two_moons(cfg.moons.labeled_per_class, cfg.moons.unlabeled_per_class, cfg.moons.noise,
                                 cfg.moons.fixed_seed ? cfg.moons.seed : seed);
  TrainConfig tc = cfg.train_config(m, seed);
  tc.laplacian.t = t;
  RunResult out;
  const auto start = std::chrono::steady_clock::now();
  try {
    const TrainReport rep = train(tc, data);
    invariants.scan(rep, data.size());
    out.converged = true;
    out.final_loss = rep.final_mean_loss;
    out.metric = evaluate(rep.model, data, build_neighborhoods(data.points, tc.neighborhoods), tc.epsilon).metric;
  } catch (const std::exception& e) {
    std::printf("    %s seed %llu t %g: %s\n", to_string(m).c_str(), static_cast<unsigned long long>(seed), t,
                e.what());
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("    %-18s seed %llu t %-6g acc %.4f loss %.5f %.1fs\n", to_string(m).c_str(),
              static_cast<unsigned long long>(seed), t, out.metric, out.final_loss, out.seconds);
  std::fflush(stdout);
  return out;
}

// ---------------------------------------------------------------------------
// 1 and 8: two moons separation and feasibility.

struct MoonsSummary {
  Outcome separation;
  Outcome feasibility;
};

/// Runs seeds in order until the cell's verdict cannot change.
/// Counts runs where `hit` holds; the cell passes with at least `need` hits out of `seeds.size()`.
bool decide_cell(const std::vector<std::uint64_t>& seeds, int need, const std::function<bool(std::uint64_t)>& hit,
                 int& hits, int& ran) {
  hits = 0;
  ran = 0;
  const int total = static_cast<int>(seeds.size());
  for (std::uint64_t s : seeds) {
    if (hits >= need || hits + (total - ran) < need) break;
    hits += hit(s) ? 1 : 0;
    ++ran;
  }
  return hits >= need;
}

MoonsSummary criterion_moons(const ExperimentConfig& cfg) {
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const int need = 4;
  bool ok = true;
  double slowest = 0.0;
  int lip_runs = 0, lip_feasible = 0;
  std::ostringstream detail;

  const auto lip_hit = [&](double t) {
    return [&, t](std::uint64_t s) {
      const RunResult r = run_moons(cfg, Method::manifold_lipschitz, s, t);
      slowest = std::max(slowest, r.seconds);
      if (r.converged) {
        ++lip_runs;
        lip_feasible += r.final_loss <= 1.1 * cfg.defaults.epsilon;
      }
      return r.converged && r.metric == 1.0;
    };
  };
  for (double t : {0.005, 0.007, 0.01, 0.015}) {
    int hits = 0, ran = 0;
    const bool cell = decide_cell(seeds, need, lip_hit(t), hits, ran);
    ok = ok && cell;
    detail << "lipschitz t=" << t << " " << hits << "/" << ran << (cell ? " ok" : " short") << "; ";
  }

  {
    int hits = 0, ran = 0;
    const bool cell = decide_cell(seeds, need, [&](std::uint64_t s) {
      const RunResult r = run_moons(cfg, Method::manifold_reg, s, 0.004);
      slowest = std::max(slowest, r.seconds);
      return r.converged && r.metric == 1.0;
    }, hits, ran);
    ok = ok && cell;
    detail << "reg t=0.004 " << hits << "/" << ran << (cell ? " ok" : " short") << "; ";
  }
  for (double t : {0.005, 0.007, 0.01, 0.015}) {
    int misses = 0, ran = 0;
    const bool cell = decide_cell(seeds, need, [&](std::uint64_t s) {
      const RunResult r = run_moons(cfg, Method::manifold_reg, s, t);
      slowest = std::max(slowest, r.seconds);
      return !(r.converged && r.metric == 1.0);
    }, misses, ran);
    ok = ok && cell;
    detail << "reg fails t=" << t << " " << misses << "/" << ran << (cell ? " ok" : " short") << "; ";
  }
  const bool fast = slowest < 120.0;
  detail << "slowest run " << slowest << "s";

  MoonsSummary s;
  s.separation = {ok && fast, detail.str()};
  std::ostringstream f;
  f << lip_feasible << "/" << lip_runs << " converged lipschitz runs with loss <= 1.1*eps (eps="
    << cfg.defaults.epsilon << ")";
  s.feasibility = {lip_runs > 0 && lip_feasible == lip_runs, f.str()};
  return s;
}

// ---------------------------------------------------------------------------
// 2: temperature ablation trend on the graph.

Outcome criterion_ablation(const ExperimentConfig& cfg) {
  const std::vector<double> grid{0.004, 0.005, 0.006, 0.007, 0.008, 0.009, 0.01, 0.015, 0.0175, 0.018, 0.019, 0.02};
  const std::uint64_t seed = cfg.moons.fixed_seed ? cfg.moons.seed : 1;
  const Dataset data = two_moons(cfg.moons.labeled_per_class, cfg.moons.unlabeled_per_class, cfg.moons.noise, seed);
  int prev_comp = std::numeric_limits<int>::max();
  long prev_cross = -1;
  bool ok = true;
  std::ostringstream detail;
  for (double t : grid) {
    LaplacianConfig lc = cfg.defaults.laplacian;
    lc.t = t;
    try {
      const LaplacianMatrix L = build_laplacian(data.points, lc);
      const int comps = connected_components(L).count;
      const long cross = cross_edges(L, data.class_of_point);
      ok = ok && comps <= prev_comp && cross >= prev_cross;
      prev_comp = comps;
      prev_cross = cross;
      detail << t << ":" << comps << "c/" << cross << "x ";
    } catch (const ConstructionError& e) {
      ok = false;
      detail << t << ": " << e.what() << " ";
    }
  }
  return {ok, detail.str()};
}

// ---------------------------------------------------------------------------
// 3: navigation ordering.

Outcome criterion_navigation(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const NavEnv& env = cfg.navigation.env;
  const Dataset data = navigation_dataset(env);
  const std::vector<Method> methods{Method::erm, Method::ambient, Method::manifold_reg, Method::manifold_lipschitz};
  int wins = 0;
  std::ostringstream detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto starts = random_free_starts(env, cfg.navigation.n_starts, seed);
    std::vector<int> succ;
    for (Method m : methods) {
      int s = 0;
      try {
        const TrainReport rep = train(cfg.train_config(m, seed), data);
        invariants.scan(rep, data.size());
        for (const Vec2& p : starts) s += rollout(rep.model, env, p).outcome == RolloutOutcome::success;
      } catch (const std::exception& e) {
        std::printf("    navigation %s seed %llu: %s\n", to_string(m).c_str(),
                    static_cast<unsigned long long>(seed), e.what());
      }
      succ.push_back(s);
    }
    const bool won = succ[3] > succ[0] && succ[3] > succ[1] && succ[3] > succ[2];
    wins += won;
    std::ostringstream line;
    line << "seed " << seed << " erm/amb/reg/lip " << succ[0] << "/" << succ[1] << "/" << succ[2] << "/" << succ[3];
    detail << line.str() << "; ";
    std::printf("    navigation %s\n", line.str().c_str());
    std::fflush(stdout);
  }
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  detail << "lipschitz best in " << wins << "/3 seeds, " << minutes << " min";
  return {wins >= 2 && minutes < 10.0, detail.str()};
}

// ---------------------------------------------------------------------------
// 4: Dirichlet energy on the unit circle.

Mat circle(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  Mat p(n, 2);
  for (int i = 0; i < n; ++i) {
    const double a = u(rng);
    p(i, 0) = std::cos(a);
    p(i, 1) = std::sin(a);
  }
  return p;
}

double circle_energy(int n, std::uint64_t seed) {
  const Mat x = circle(n, seed);
  LaplacianConfig lc;
  lc.t = temperature_rule(n, 1, 1.0);
  lc.d = 1;
  lc.threshold = 0.0;
  const LaplacianMatrix L = build_laplacian(x, lc);
  // Uniform lambda relative to the sampling measure; int x (-Delta x) dmu = 1/2 on the circle.
  return dirichlet_energy(L, Vec(x.col(0)), Vec::Ones(n));
}

Outcome criterion_circle() {
  const double exact = 0.5;
  const double e = circle_energy(2000, 1);
  const double rel = std::abs(e - exact) / exact;
  std::vector<double> errs;
  for (int n : {250, 1000, 4000}) {
    double err = 0.0;
    for (std::uint64_t s = 1; s <= 5; ++s) err += std::abs(circle_energy(n, s) - exact);
    errs.push_back(err / 5.0);
  }
  const bool monotone = errs[0] > errs[1] && errs[1] > errs[2];
  std::ostringstream d;
  d << "N=2000 estimate " << e << " (rel err " << rel << "); mean abs err N=250/1000/4000: " << errs[0] << "/"
    << errs[1] << "/" << errs[2];
  return {rel < 0.2 && monotone, d.str()};
}

// ---------------------------------------------------------------------------
// 5: backward pass against central differences.

double weighted_objective(const MlpParams& p, const Mat& x, const Vec& w, const Mat& g) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (int o = 0; o < p.output_dim(); ++o) {
      double out = p.biases[1](o);
      for (int h = 0; h < p.hidden_dim(); ++h) {
        double pre = p.biases[0](h);
        for (int d = 0; d < p.input_dim(); ++d) pre += p.weights[0](h, d) * x(i, d);
        out += p.weights[1](o, h) * std::tanh(pre);
      }
      total += w[i] * g(i, o) * out;
    }
  return total;
}

Outcome criterion_gradient() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 4), hid(2, 16), batch(1, 8);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    MlpParams p = mlp_init({dim(rng), hid(rng), dim(rng)}, rng());
    for (auto& b : p.biases)
      for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = 0.5 * unif(rng);
    const int n = batch(rng);
    Mat x(n, p.input_dim()), g(n, p.output_dim());
    Vec w(n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * unif(rng);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = unif(rng);
    for (int i = 0; i < n; ++i) w[i] = 0.1 + std::abs(unif(rng));
    const Gradient grad = mlp_backward(p, x, w, g);

    const double h = 1e-5;
    const auto probe = [&](double& slot, double analytic) {
      const double keep = slot;
      slot = keep + h;
      const double up = weighted_objective(p, x, w, g);
      slot = keep - h;
      const double down = weighted_objective(p, x, w, g);
      slot = keep;
      const double fd = (up - down) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - analytic) / std::max(1.0, std::max(std::abs(fd), std::abs(analytic))));
    };
    for (int k = 0; k < 2; ++k) {
      for (Eigen::Index i = 0; i < p.weights[k].size(); ++i) probe(p.weights[k].data()[i], grad.weights[k].data()[i]);
      for (Eigen::Index i = 0; i < p.biases[k].size(); ++i) probe(p.biases[k].data()[i], grad.biases[k].data()[i]);
    }
  }
  std::ostringstream d;
  d << "worst relative error " << worst << " over 20 instances";
  return {worst < 1e-5, d.str()};
}

// ---------------------------------------------------------------------------
// 6: simplex projection against active-set enumeration.

Vec active_set_projection(const Vec& v, double total) {
  const int n = static_cast<int>(v.size());
  Vec best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        sum += v[i];
        ++count;
      }
    Vec x = Vec::Zero(n);
    bool feasible = true;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        x[i] = v[i] - (sum - total) / count;
        feasible = feasible && x[i] >= 0.0;
      }
    if (feasible && (x - v).squaredNorm() < best_dist) {
      best_dist = (x - v).squaredNorm();
      best = x;
    }
  }
  return best;
}

Outcome criterion_projection() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 3.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    Vec v(5);
    for (int i = 0; i < 5; ++i) v[i] = g(rng);
    worst = std::max(worst, (project_scaled_simplex(v, 5.0) - active_set_projection(v, 5.0)).cwiseAbs().maxCoeff());
  }
  std::ostringstream d;
  d << "worst deviation " << worst << " over 100 instances";
  return {worst < 1e-9, d.str()};
}

// ---------------------------------------------------------------------------
// 9: reductions to ERM.

bool bitwise_equal(const TrainReport& a, const TrainReport& b) {
  for (int k = 0; k < 2; ++k)
    if (a.model.weights[k] != b.model.weights[k] || a.model.biases[k] != b.model.biases[k]) return false;
  if (a.history.size() != b.history.size()) return false;
  for (std::size_t e = 0; e < a.history.size(); ++e)
    if (a.history[e].mean_loss != b.history[e].mean_loss || a.history[e].objective != b.history[e].objective ||
        a.history[e].lipschitz != b.history[e].lipschitz)
      return false;
  return true;
}

Outcome criterion_reductions(const ExperimentConfig& cfg, int epochs) {
  int identical = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const Dataset data = two_moons(cfg.moons.labeled_per_class, cfg.moons.unlabeled_per_class, cfg.moons.noise,
                                   cfg.moons.fixed_seed ? cfg.moons.seed : seed);
    TrainConfig erm = cfg.train_config(Method::erm, seed);
    erm.epochs = epochs;
    TrainConfig amb = cfg.train_config(Method::ambient, seed);
    amb.epochs = epochs;
    amb.weight_decay = 0.0;
    TrainConfig reg = cfg.train_config(Method::manifold_reg, seed);
    reg.epochs = epochs;
    reg.gamma = 0.0;
    const TrainReport base = train(erm, data);
    identical += bitwise_equal(base, train(amb, data)) && bitwise_equal(base, train(reg, data));
  }
  std::ostringstream d;
  d << identical << "/3 seeds bitwise identical over " << epochs << " epochs";
  return {identical == 3, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <configs-dir>\n");
    return 2;
  }
  const std::string dir = argv[1];
  ExperimentConfig moons, nav;
  try {
    moons = load_experiment_config(dir + "/twomoons.json");
    nav = load_experiment_config(dir + "/navigate.json");
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }

  std::vector<std::pair<int, Outcome>> results;
  const auto report = [&](int id, const Outcome& o) {
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
    std::fflush(stdout);
    results.emplace_back(id, o);
  };

  // Cheap criteria first so their verdicts appear early.
  report(2, criterion_ablation(moons));
  report(4, criterion_circle());
  report(5, criterion_gradient());
  report(6, criterion_projection());
  report(9, criterion_reductions(moons, 2000));
  report(3, criterion_navigation(nav));
  const MoonsSummary ms = criterion_moons(moons);
  report(1, ms.separation);
  std::ostringstream inv;
  inv << invariants.violations << " violations over " << invariants.epochs << " epochs";
  report(7, {invariants.epochs > 0 && invariants.violations == 0, inv.str()});
  report(8, ms.feasibility);

  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  int failed = 0;
  std::printf("\nsummary\n");
  for (const auto& [id, o] : results) {
    std::printf("%s criterion %d\n", o.pass ? "PASS" : "FAIL", id);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}

#include "manilip/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "manilip/error.hpp"
#include "manilip/laplacian.hpp"
#include "manilip/lipschitz.hpp"

namespace manilip {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

DegreeConvention parse_degree_convention(const std::string& name) {
  if (name == "literal") return DegreeConvention::literal;
  if (name == "leave_one_out_symmetric") return DegreeConvention::leave_one_out_symmetric;
  throw ConfigError("unknown degree_convention '" + name + "'");
}

LossNormalization parse_loss_normalization(const std::string& name) {
  if (name == "labeled") return LossNormalization::labeled;
  if (name == "all_points") return LossNormalization::all_points;
  throw ConfigError("unknown loss_normalization '" + name + "'");
}

LossKind parse_loss(const std::string& name) {
  if (name == "mse") return LossKind::mse;
  if (name == "mse_pm1_labels") return LossKind::mse_pm1_labels;
  throw ConfigError("unknown loss '" + name + "'");
}

const std::vector<std::string>& known_experiments() {
  static const std::vector<std::string> names{"twomoons", "navigate", "fit_csv", "ablate_t",
                                              "laplacian_info"};
  return names;
}

}  // namespace

void apply_train_json(TrainConfig& cfg, const json& patch) {
  if (!patch.is_object()) throw ConfigError("training parameters must be a JSON object");
  try {
    if (patch.contains("variant")) cfg.variant = parse_variant(patch.at("variant").get<std::string>());
    if (patch.contains("loss")) cfg.loss = parse_loss(patch.at("loss").get<std::string>());
    if (patch.contains("loss_normalization"))
      cfg.loss_normalization = parse_loss_normalization(patch.at("loss_normalization").get<std::string>());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  cfg.hidden = get_or(patch, "hidden", cfg.hidden);
  cfg.use_bias = get_or(patch, "bias", cfg.use_bias);
  cfg.epsilon = get_or(patch, "epsilon", cfg.epsilon);
  cfg.eta_theta = get_or(patch, "eta_theta", cfg.eta_theta);
  cfg.eta_mu = get_or(patch, "eta_mu", cfg.eta_mu);
  cfg.eta_lambda = get_or(patch, "eta_lambda", cfg.eta_lambda);
  cfg.mu0 = get_or(patch, "mu0", cfg.mu0);
  cfg.gamma = get_or(patch, "gamma", cfg.gamma);
  cfg.weight_decay = get_or(patch, "weight_decay", cfg.weight_decay);
  cfg.primal_steps = get_or(patch, "primal_steps", cfg.primal_steps);
  cfg.epochs = get_or(patch, "epochs", cfg.epochs);
  if (patch.contains("laplacian")) {
    const json& lap = patch.at("laplacian");
    cfg.laplacian.t = get_or(lap, "t", cfg.laplacian.t);
    cfg.laplacian.d = get_or(lap, "d", cfg.laplacian.d);
    cfg.laplacian.threshold = get_or(lap, "threshold", cfg.laplacian.threshold);
    if (lap.contains("degree_convention"))
      cfg.laplacian.degree_convention = parse_degree_convention(lap.at("degree_convention").get<std::string>());
  }
  if (patch.contains("neighborhoods")) {
    const json& nb = patch.at("neighborhoods");
    const auto rule = get_or<std::string>(nb, "rule", "knn");
    if (rule == "knn") {
      cfg.neighborhoods = NeighborhoodRule::knn(get_or(nb, "k", 8));
    } else if (rule == "epsilon") {
      cfg.neighborhoods = NeighborhoodRule::epsilon(get_or(nb, "delta", 0.0));
    } else {
      throw ConfigError("unknown neighborhood rule '" + rule + "'");
    }
  }
}

TrainConfig ExperimentConfig::train_config(Method method, std::uint64_t seed) const {
  TrainConfig cfg = defaults;
  const auto it = overrides.find(method);
  if (it != overrides.end()) apply_train_json(cfg, it->second);
  cfg.method = method;
  cfg.seed = seed;
  return cfg;
}

ExperimentConfig parse_experiment_config(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  ExperimentConfig cfg;
  cfg.experiment = get_or<std::string>(doc, "experiment", "");
  const auto& known = known_experiments();
  if (std::find(known.begin(), known.end(), cfg.experiment) == known.end())
    throw ConfigError("unknown or missing experiment '" + cfg.experiment + "'");
  cfg.output_dir = get_or<std::string>(doc, "output_dir", cfg.output_dir);
  cfg.grid_resolution = get_or(doc, "grid_resolution", cfg.grid_resolution);

  try {
    for (const auto& name : get_or<std::vector<std::string>>(doc, "methods", {}))
      cfg.methods.push_back(parse_method(name));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  cfg.seeds = get_or<std::vector<std::uint64_t>>(doc, "seeds", {});

  if (doc.contains("defaults")) apply_train_json(cfg.defaults, doc.at("defaults"));
  if (doc.contains("method_overrides")) {
    for (const auto& [name, patch] : doc.at("method_overrides").items()) {
      Method m;
      try {
        m = parse_method(name);
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
      TrainConfig probe = cfg.defaults;
      apply_train_json(probe, patch);  // validate eagerly
      cfg.overrides[m] = patch;
    }
  }

  if (doc.contains("dataset")) {
    const json& ds = doc.at("dataset");
    cfg.moons.labeled_per_class = get_or(ds, "labeled_per_class", cfg.moons.labeled_per_class);
    cfg.moons.unlabeled_per_class = get_or(ds, "unlabeled_per_class", cfg.moons.unlabeled_per_class);
    cfg.moons.noise = get_or(ds, "noise", cfg.moons.noise);
    if (ds.contains("seed") && !ds.at("seed").is_null()) {
      cfg.moons.fixed_seed = true;
      cfg.moons.seed = get_or<std::uint64_t>(ds, "seed", 0);
    }
  }

  if (doc.contains("navigation")) {
    const json& nav = doc.at("navigation");
    NavEnv& env = cfg.navigation.env;
    env.width = get_or(nav, "width", env.width);
    env.height = get_or(nav, "height", env.height);
    env.goal_radius = get_or(nav, "goal_radius", env.goal_radius);
    env.ts = get_or(nav, "ts", env.ts);
    env.v_max = get_or(nav, "v_max", env.v_max);
    env.max_steps = get_or(nav, "max_steps", env.max_steps);
    env.grid_spacing = get_or(nav, "grid_spacing", env.grid_spacing);
    env.eight_connected = get_or(nav, "eight_connected", env.eight_connected);
    if (nav.contains("goal")) {
      const auto g = get_or<std::vector<double>>(nav, "goal", {});
      if (g.size() != 2) throw ConfigError("navigation.goal must have two coordinates");
      env.goal = {g[0], g[1]};
    }
    if (nav.contains("obstacles")) {
      env.obstacles.clear();
      for (const auto& r : get_or<std::vector<std::vector<double>>>(nav, "obstacles", {})) {
        if (r.size() != 4) throw ConfigError("obstacles are [x0, y0, x1, y1]");
        env.obstacles.push_back({r[0], r[1], r[2], r[3]});
      }
    }
    if (nav.contains("train_starts")) {
      env.train_starts.clear();
      for (const auto& s : get_or<std::vector<std::vector<double>>>(nav, "train_starts", {})) {
        if (s.size() != 2) throw ConfigError("train_starts entries are [x, y]");
        env.train_starts.push_back({s[0], s[1]});
      }
    }
    cfg.navigation.n_starts = get_or(nav, "n_starts", cfg.navigation.n_starts);
    try {
      env.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("navigation: ") + e.what());
    }
  }

  if (doc.contains("csv")) {
    const json& c = doc.at("csv");
    const auto resolve = [&](const std::string& p) {
      if (p.empty() || base_dir.empty() || fs::path(p).is_absolute()) return p;
      return (fs::path(base_dir) / p).string();
    };
    cfg.csv.train_path = resolve(get_or<std::string>(c, "train", ""));
    cfg.csv.test_path = resolve(get_or<std::string>(c, "test", ""));
    cfg.csv.schema.features = get_or<std::vector<std::string>>(c, "features", {});
    cfg.csv.schema.targets = get_or<std::vector<std::string>>(c, "targets", {});
    cfg.csv.schema.unlabeled_flag = get_or<std::string>(c, "unlabeled_flag", "");
  }

  cfg.temperatures = get_or<std::vector<double>>(doc, "temperatures", {});
  if (doc.contains("ablation")) cfg.temperatures = get_or<std::vector<double>>(doc.at("ablation"), "temperatures", {});

  // Invariants.
  if (cfg.experiment != "laplacian_info" && cfg.methods.empty())
    throw ConfigError("at least one method is required");
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
  if (cfg.grid_resolution < 2) throw ConfigError("grid_resolution must be >= 2");
  if (cfg.experiment == "ablate_t" && cfg.temperatures.empty())
    throw ConfigError("ablate_t needs a temperature list");
  if (cfg.experiment == "fit_csv" && (cfg.csv.train_path.empty() || cfg.csv.schema.targets.empty()))
    throw ConfigError("fit_csv needs csv.train, csv.features and csv.targets");
  try {
    cfg.defaults.validate();
    for (Method m : cfg.methods) cfg.train_config(m, 0).validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_experiment_config(doc, fs::path(path).parent_path().string());
}

ordered_json MetricRecord::to_json() const {
  ordered_json j;
  j["experiment"] = experiment;
  j["method"] = to_string(method);
  j["seed"] = seed;
  if (temperature) j["t"] = *temperature;
  j["metric"] = metric_name;
  j[metric_name] = metric;
  if (n_starts) j["n_starts"] = *n_starts;
  j["lipschitz"] = lipschitz;
  j["feasibility_gap"] = feasibility_gap;
  j["final_loss"] = final_loss;
  j["feasible"] = feasible;
  j["mu_final"] = mu_final;
  j["epochs"] = epochs;
  return j;
}

void emit_metrics(std::vector<MetricRecord> records, const std::string& output_dir) {
  if (records.empty()) throw InvalidArgument("no metric records to emit");
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + output_dir + "': " + ec.message());

  std::stable_sort(records.begin(), records.end(), [](const MetricRecord& a, const MetricRecord& b) {
    const auto ka = std::make_tuple(to_string(a.method), a.seed, a.temperature.value_or(0.0));
    const auto kb = std::make_tuple(to_string(b.method), b.seed, b.temperature.value_or(0.0));
    return ka < kb;
  });

  const auto metrics_path = (fs::path(output_dir) / "metrics.jsonl").string();
  std::ofstream metrics(metrics_path);
  if (!metrics) throw IoError("cannot write '" + metrics_path + "'");
  for (const auto& r : records) metrics << r.to_json().dump() << '\n';

  const auto times_path = (fs::path(output_dir) / "run_times.jsonl").string();
  std::ofstream times(times_path);
  if (!times) throw IoError("cannot write '" + times_path + "'");
  for (const auto& r : records) {
    ordered_json j;
    j["method"] = to_string(r.method);
    j["seed"] = r.seed;
    if (r.temperature) j["t"] = *r.temperature;
    j["wall_seconds"] = r.wall_seconds;
    times << j.dump() << '\n';
  }
  if (!metrics || !times) throw IoError("failed while writing metrics to '" + output_dir + "'");
}

Mat decision_grid(const MlpParams& model, const Mat& points, int resolution) {
  if (resolution < 2) throw InvalidArgument("grid resolution must be >= 2");
  if (points.cols() != 2 || model.input_dim() != 2)
    throw InvalidArgument("decision grids are only defined for planar inputs");
  const Eigen::Vector2d lo = points.colwise().minCoeff();
  const Eigen::Vector2d hi = points.colwise().maxCoeff();
  Mat lattice(static_cast<Eigen::Index>(resolution) * resolution, 2);
  for (int iy = 0; iy < resolution; ++iy)
    for (int ix = 0; ix < resolution; ++ix) {
      const Eigen::Index r = static_cast<Eigen::Index>(iy) * resolution + ix;
      lattice(r, 0) = lo[0] + (hi[0] - lo[0]) * ix / (resolution - 1);
      lattice(r, 1) = lo[1] + (hi[1] - lo[1]) * iy / (resolution - 1);
    }
  const Mat f = mlp_forward_batch(model, lattice);
  Mat out(lattice.rows(), 3);
  out.leftCols(2) = lattice;
  out.col(2) = f.col(0);
  return out;
}

namespace {

void write_csv(const fs::path& path, const std::string& header, const Mat& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.precision(10);
  out << header << '\n';
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) out << (c ? "," : "") << rows(i, c);
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string run_tag(Method m, std::uint64_t seed) {
  return to_string(m) + "_seed" + std::to_string(seed);
}

/// Executes `fn` and rewraps library errors under `stage`.
template <typename Fn>
auto staged(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

MetricRecord base_record(const ExperimentConfig& cfg, Method m, std::uint64_t seed,
                         const TrainReport& rep) {
  MetricRecord r;
  r.experiment = cfg.experiment;
  r.method = m;
  r.seed = seed;
  r.final_loss = rep.final_mean_loss;
  r.feasible = rep.feasible;
  r.mu_final = rep.dual.mu;
  r.epochs = static_cast<int>(rep.history.size());
  r.wall_seconds = rep.wall_seconds;
  return r;
}

Mat lambda_rows(const Dataset& data, const Vec& lambda) {
  Mat rows(data.size(), data.input_dim() + 1);
  rows.leftCols(data.input_dim()) = data.points;
  rows.col(data.input_dim()) = lambda;
  return rows;
}

Dataset moons_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto& p = cfg.moons;
  return staged("dataset", [&] {
    return two_moons(p.labeled_per_class, p.unlabeled_per_class, p.noise, p.fixed_seed ? p.seed : seed);
  });
}

std::vector<MetricRecord> run_twomoons(const ExperimentConfig& cfg) {
  const fs::path out(cfg.output_dir);
  std::vector<MetricRecord> records;
  for (std::uint64_t seed : cfg.seeds) {
    const Dataset data = moons_for(cfg, seed);
    for (Method m : cfg.methods) {
      const TrainConfig tc = cfg.train_config(m, seed);
      const TrainReport rep = staged("training", [&] { return train(tc, data); });
      const Evaluation ev = staged("evaluation", [&] {
        return evaluate(rep.model, data, build_neighborhoods(data.points, tc.neighborhoods), tc.epsilon);
      });
      MetricRecord r = base_record(cfg, m, seed, rep);
      r.metric_name = "accuracy";
      r.metric = ev.metric;
      r.lipschitz = ev.lipschitz;
      r.feasibility_gap = ev.feasibility_gap;
      records.push_back(r);
      staged("output", [&] {
        write_csv(out / ("grid_" + run_tag(m, seed) + ".csv"), "x,y,f",
                  decision_grid(rep.model, data.points, cfg.grid_resolution));
        write_csv(out / ("lambda_" + run_tag(m, seed) + ".csv"), "x,y,lambda",
                  lambda_rows(data, rep.dual.lambda));
        return 0;
      });
    }
  }
  return records;
}

std::vector<MetricRecord> run_ablation(const ExperimentConfig& cfg) {
  const fs::path out(cfg.output_dir);
  std::vector<MetricRecord> records;
  std::ostringstream table;
  table << "seed,t,components,cross_edges";
  for (Method m : cfg.methods) table << ',' << to_string(m) << "_accuracy";
  table << '\n';
  table.precision(10);
  for (std::uint64_t seed : cfg.seeds) {
    const Dataset data = moons_for(cfg, seed);
    for (double t : cfg.temperatures) {
      LaplacianConfig lc = cfg.defaults.laplacian;
      lc.t = t;
      const LaplacianMatrix L = staged("graph", [&] { return build_laplacian(data.points, lc); });
      const Components comps = connected_components(L);
      const long crossing = cross_edges(L, data.class_of_point);
      table << seed << ',' << t << ',' << comps.count << ',' << crossing;
      for (Method m : cfg.methods) {
        TrainConfig tc = cfg.train_config(m, seed);
        tc.laplacian.t = t;
        const TrainReport rep = staged("training", [&] { return train(tc, data); });
        const Evaluation ev = staged("evaluation", [&] {
          return evaluate(rep.model, data, build_neighborhoods(data.points, tc.neighborhoods), tc.epsilon);
        });
        MetricRecord r = base_record(cfg, m, seed, rep);
        r.temperature = t;
        r.metric_name = "accuracy";
        r.metric = ev.metric;
        r.lipschitz = ev.lipschitz;
        r.feasibility_gap = ev.feasibility_gap;
        records.push_back(r);
        table << ',' << ev.metric;
      }
      table << '\n';
    }
  }
  staged("output", [&] {
    fs::create_directories(out);
    std::ofstream f(out / "ablation.csv");
    if (!(f << table.str())) throw IoError("cannot write ablation.csv");
    return 0;
  });
  return records;
}

std::vector<MetricRecord> run_navigation(const ExperimentConfig& cfg) {
  const fs::path out(cfg.output_dir);
  const NavEnv& env = cfg.navigation.env;
  const Dataset data = staged("dataset", [&] { return navigation_dataset(env); });
  std::vector<MetricRecord> records;
  for (std::uint64_t seed : cfg.seeds) {
    const auto starts = staged("dataset", [&] { return random_free_starts(env, cfg.navigation.n_starts, seed); });
    for (Method m : cfg.methods) {
      const TrainConfig tc = cfg.train_config(m, seed);
      const TrainReport rep = staged("training", [&] { return train(tc, data); });
      std::ostringstream rolls;
      rolls << "start_x,start_y,outcome,steps\n";
      int successes = 0;
      staged("evaluation", [&] {
        for (const Vec2& s : starts) {
          const Rollout r = rollout(rep.model, env, s);
          if (r.outcome == RolloutOutcome::success) ++successes;
          const char* tag = r.outcome == RolloutOutcome::success     ? "success"
                            : r.outcome == RolloutOutcome::collision ? "collision"
                                                                     : "timeout";
          rolls << s.x << ',' << s.y << ',' << tag << ',' << r.trajectory.size() - 1 << '\n';
        }
        return 0;
      });
      const Evaluation ev = staged("evaluation", [&] {
        return evaluate(rep.model, data, build_neighborhoods(data.points, tc.neighborhoods), tc.epsilon);
      });
      MetricRecord r = base_record(cfg, m, seed, rep);
      r.metric_name = "successes";
      r.metric = successes;
      r.n_starts = cfg.navigation.n_starts;
      r.lipschitz = ev.lipschitz;
      r.feasibility_gap = ev.feasibility_gap;
      records.push_back(r);
      staged("output", [&] {
        fs::create_directories(out);
        std::ofstream f(out / ("rollouts_" + run_tag(m, seed) + ".csv"));
        if (!(f << rolls.str())) throw IoError("cannot write rollouts file");
        write_csv(out / ("lambda_" + run_tag(m, seed) + ".csv"), "x,y,lambda", lambda_rows(data, rep.dual.lambda));
        return 0;
      });
    }
  }
  return records;
}

std::vector<MetricRecord> run_fit_csv(const ExperimentConfig& cfg) {
  const Dataset train_set = staged("dataset", [&] { return load_csv(cfg.csv.train_path, cfg.csv.schema); });
  std::optional<Dataset> test_set;
  if (!cfg.csv.test_path.empty())
    test_set = staged("dataset", [&] { return load_csv(cfg.csv.test_path, cfg.csv.schema); });
  std::vector<MetricRecord> records;
  for (std::uint64_t seed : cfg.seeds) {
    for (Method m : cfg.methods) {
      const TrainConfig tc = cfg.train_config(m, seed);
      const TrainReport rep = staged("training", [&] { return train(tc, train_set); });
      const Evaluation ev = staged("evaluation", [&] {
        return evaluate(rep.model, train_set, build_neighborhoods(train_set.points, tc.neighborhoods),
                        tc.epsilon, test_set ? &*test_set : nullptr);
      });
      MetricRecord r = base_record(cfg, m, seed, rep);
      r.metric_name = "mse";
      r.metric = ev.metric;
      r.lipschitz = ev.lipschitz;
      r.feasibility_gap = ev.feasibility_gap;
      records.push_back(r);
    }
  }
  return records;
}

void run_laplacian_info(const ExperimentConfig& cfg) {
  const fs::path out(cfg.output_dir);
  for (std::uint64_t seed : cfg.seeds) {
    const Dataset data = moons_for(cfg, seed);
    const LaplacianMatrix L = staged("graph", [&] { return build_laplacian(data.points, cfg.defaults.laplacian); });
    staged("output", [&] {
      fs::create_directories(out);
      std::ofstream w(out / ("laplacian_seed" + std::to_string(seed) + ".txt"));
      write_triplets(L, w);
      ordered_json info;
      info["seed"] = seed;
      info["n"] = L.n;
      info["t"] = L.config.t;
      info["nonzeros"] = L.nonzeros();
      info["components"] = connected_components(L).count;
      info["cross_edges"] = cross_edges(L, data.class_of_point);
      std::ofstream j(out / ("laplacian_seed" + std::to_string(seed) + ".json"));
      j << info.dump(2) << '\n';
      if (!w || !j) throw IoError("cannot write Laplacian files");
      return 0;
    });
  }
}

}  // namespace

std::vector<MetricRecord> run_experiment(const ExperimentConfig& cfg) {
  staged("output", [&] {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.output_dir + "': " + ec.message());
    return 0;
  });

  std::vector<MetricRecord> records;
  if (cfg.experiment == "twomoons") {
    records = run_twomoons(cfg);
  } else if (cfg.experiment == "ablate_t") {
    records = run_ablation(cfg);
  } else if (cfg.experiment == "navigate") {
    records = run_navigation(cfg);
  } else if (cfg.experiment == "fit_csv") {
    records = run_fit_csv(cfg);
  } else if (cfg.experiment == "laplacian_info") {
    run_laplacian_info(cfg);
    return records;
  } else {
    throw StageError("config", "unknown experiment '" + cfg.experiment + "'");
  }
  staged("output", [&] {
    emit_metrics(records, cfg.output_dir);
    return 0;
  });
  return records;
}

}  // namespace manilip

#include "manilip/manilip.h"

#include <cstring>
#include <sstream>
#include <string>

#include "manilip/error.hpp"
#include "manilip/experiment.hpp"

struct manilip_dataset {
  manilip::Dataset data;
};

struct manilip_model {
  manilip::TrainReport report;
  manilip::TrainConfig config;
};

struct manilip_laplacian {
  manilip::LaplacianMatrix matrix;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_stage;

manilip_status fail(manilip_status code, const std::string& what, const std::string& stage = "") {
  g_last_error = what;
  g_last_stage = stage;
  return code;
}

/// Maps library exceptions onto status codes.
template <typename Fn>
manilip_status guarded(Fn&& fn) {
  g_last_error.clear();
  g_last_stage.clear();
  try {
    fn();
    return MANILIP_OK;
  } catch (const manilip::ConfigError& e) {
    return fail(MANILIP_ERR_CONFIG, e.what(), "config");
  } catch (const manilip::StageError& e) {
    return fail(MANILIP_ERR_RUNTIME, e.what(), e.stage());
  } catch (const manilip::InvalidArgument& e) {
    return fail(MANILIP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const manilip::ConstructionError& e) {
    return fail(MANILIP_ERR_CONSTRUCTION, e.what());
  } catch (const manilip::NoPathError& e) {
    return fail(MANILIP_ERR_NO_PATH, e.what());
  } catch (const manilip::ParseError& e) {
    return fail(MANILIP_ERR_PARSE, e.what());
  } catch (const manilip::IoError& e) {
    return fail(MANILIP_ERR_IO, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(MANILIP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(MANILIP_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(MANILIP_ERR_RUNTIME, "unknown error");
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw manilip::InvalidArgument(std::string(name) + " must not be null");
}

std::vector<std::string> split_names(const char* csv) {
  std::vector<std::string> out;
  if (csv == nullptr) return out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

extern "C" {

const char* manilip_version(void) { return "0.1.0"; }

const char* manilip_last_error(void) { return g_last_error.c_str(); }

const char* manilip_last_stage(void) { return g_last_stage.c_str(); }

manilip_status manilip_two_moons(int labeled_per_class, int unlabeled_per_class, double noise, uint64_t seed,
                                 manilip_dataset** out) {
  return guarded([&] {
    require(out, "out");
    *out = new manilip_dataset{manilip::two_moons(labeled_per_class, unlabeled_per_class, noise, seed)};
  });
}

manilip_status manilip_navigation_dataset(manilip_dataset** out) {
  return guarded([&] {
    require(out, "out");
    *out = new manilip_dataset{manilip::navigation_dataset(manilip::NavEnv::with_default_obstacles())};
  });
}

manilip_status manilip_load_csv(const char* path, const char* features_csv, const char* targets_csv,
                                const char* unlabeled_flag, manilip_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    manilip::CsvSchema schema{split_names(features_csv), split_names(targets_csv),
                              unlabeled_flag ? unlabeled_flag : ""};
    *out = new manilip_dataset{manilip::load_csv(path, schema)};
  });
}

manilip_status manilip_dataset_shape(const manilip_dataset* data, int* n_labeled, int* n_unlabeled, int* input_dim,
                                     int* output_dim) {
  return guarded([&] {
    require(data, "data");
    if (n_labeled) *n_labeled = data->data.n_labeled;
    if (n_unlabeled) *n_unlabeled = data->data.n_unlabeled;
    if (input_dim) *input_dim = data->data.input_dim();
    if (output_dim) *output_dim = data->data.output_dim();
  });
}

manilip_status manilip_dataset_points(const manilip_dataset* data, double* out, size_t capacity) {
  return guarded([&] {
    require(data, "data");
    require(out, "out");
    const auto& p = data->data.points;
    if (capacity < static_cast<size_t>(p.size())) throw manilip::InvalidArgument("output buffer too small");
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j) out[i * p.cols() + j] = p(i, j);
  });
}

void manilip_dataset_free(manilip_dataset* data) { delete data; }

manilip_status manilip_laplacian_build(const manilip_dataset* data, double t, int d, double threshold,
                                       int degree_convention, manilip_laplacian** out) {
  return guarded([&] {
    require(data, "data");
    require(out, "out");
    if (degree_convention != 0 && degree_convention != 1)
      throw manilip::InvalidArgument("degree_convention must be 0 or 1");
    manilip::LaplacianConfig cfg;
    cfg.t = t;
    cfg.d = d;
    cfg.threshold = threshold;
    cfg.degree_convention = degree_convention == 0 ? manilip::DegreeConvention::literal
                                                   : manilip::DegreeConvention::leave_one_out_symmetric;
    *out = new manilip_laplacian{manilip::build_laplacian(data->data.points, cfg)};
  });
}

manilip_status manilip_laplacian_info(const manilip_laplacian* lap, int* n, long* nonzeros, int* components) {
  return guarded([&] {
    require(lap, "lap");
    if (n) *n = lap->matrix.n;
    if (nonzeros) *nonzeros = static_cast<long>(lap->matrix.nonzeros());
    if (components) *components = manilip::connected_components(lap->matrix).count;
  });
}

void manilip_laplacian_free(manilip_laplacian* lap) { delete lap; }

manilip_status manilip_train(const manilip_dataset* data, const char* method, const char* params_json, uint64_t seed,
                             manilip_model** out) {
  return guarded([&] {
    require(data, "data");
    require(method, "method");
    require(out, "out");
    manilip::TrainConfig cfg;
    if (params_json != nullptr && std::strlen(params_json) > 0) {
      try {
        manilip::apply_train_json(cfg, nlohmann::json::parse(params_json));
      } catch (const manilip::ConfigError& e) {
        throw manilip::InvalidArgument(e.what());
      }
    }
    cfg.method = manilip::parse_method(method);
    cfg.seed = seed;
    *out = new manilip_model{manilip::train(cfg, data->data), cfg};
  });
}

manilip_status manilip_model_summary(const manilip_model* model, double* final_loss, double* lipschitz, double* mu,
                                     int* epochs) {
  return guarded([&] {
    require(model, "model");
    if (final_loss) *final_loss = model->report.final_mean_loss;
    if (lipschitz) *lipschitz = model->report.final_lipschitz;
    if (mu) *mu = model->report.dual.mu;
    if (epochs) *epochs = static_cast<int>(model->report.history.size());
  });
}

manilip_status manilip_model_evaluate(const manilip_model* model, const manilip_dataset* data, double* metric) {
  return guarded([&] {
    require(model, "model");
    require(data, "data");
    require(metric, "metric");
    const auto nbrs = manilip::build_neighborhoods(data->data.points, model->config.neighborhoods);
    *metric = manilip::evaluate(model->report.model, data->data, nbrs, model->config.epsilon).metric;
  });
}

manilip_status manilip_model_predict(const manilip_model* model, const double* inputs, size_t n, double* outputs) {
  return guarded([&] {
    require(model, "model");
    if (n == 0) return;
    require(inputs, "inputs");
    require(outputs, "outputs");
    const auto& params = model->report.model;
    const int in = params.input_dim();
    const int o = params.output_dim();
    manilip::Mat x(static_cast<Eigen::Index>(n), in);
    for (size_t i = 0; i < n; ++i)
      for (int j = 0; j < in; ++j) x(i, j) = inputs[i * in + j];
    const manilip::Mat y = manilip::mlp_forward_batch(params, x);
    for (size_t i = 0; i < n; ++i)
      for (int j = 0; j < o; ++j) outputs[i * o + j] = y(i, j);
  });
}

void manilip_model_free(manilip_model* model) { delete model; }

manilip_status manilip_run_experiment(const char* config_path, const char* out_dir, const uint64_t* seeds,
                                      size_t n_seeds, const char* const* methods, size_t n_methods) {
  return guarded([&] {
    if (config_path == nullptr) throw manilip::ConfigError("no config path given");
    manilip::ExperimentConfig cfg = manilip::load_experiment_config(config_path);
    if (out_dir != nullptr && *out_dir != '\0') cfg.output_dir = out_dir;
    if (seeds != nullptr && n_seeds > 0) cfg.seeds.assign(seeds, seeds + n_seeds);
    if (methods != nullptr && n_methods > 0) {
      cfg.methods.clear();
      for (size_t i = 0; i < n_methods; ++i) {
        try {
          cfg.methods.push_back(manilip::parse_method(methods[i] ? methods[i] : ""));
        } catch (const manilip::InvalidArgument& e) {
          throw manilip::ConfigError(e.what());
        }
      }
    }
    manilip::run_experiment(cfg);
  });
}

}  // extern "C"

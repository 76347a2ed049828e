/* C interface to the manilip library. Every call returns a manilip_status;
 * on failure manilip_last_error() describes what went wrong on this thread. */
#ifndef MANILIP_H
#define MANILIP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MANILIP_API __declspec(dllexport)
#else
#define MANILIP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum manilip_status {
  MANILIP_OK = 0,
  MANILIP_ERR_INVALID_ARGUMENT = 1,
  MANILIP_ERR_CONSTRUCTION = 2, /* graph point without neighbors */
  MANILIP_ERR_NO_PATH = 3,
  MANILIP_ERR_PARSE = 4,
  MANILIP_ERR_IO = 5,
  MANILIP_ERR_CONFIG = 6,
  MANILIP_ERR_RUNTIME = 7
} manilip_status;

typedef struct manilip_dataset manilip_dataset;
typedef struct manilip_model manilip_model;
typedef struct manilip_laplacian manilip_laplacian;

MANILIP_API const char* manilip_version(void);

/* Message for the most recent failure on the calling thread; "" if none. */
MANILIP_API const char* manilip_last_error(void);

/* Stage named by the last failed manilip_run_experiment call ("config",
 * "dataset", "graph", "training", "evaluation", "output"); "" otherwise. */
MANILIP_API const char* manilip_last_stage(void);

/* Datasets */
MANILIP_API manilip_status manilip_two_moons(int labeled_per_class, int unlabeled_per_class, double noise,
                                             uint64_t seed, manilip_dataset** out);
MANILIP_API manilip_status manilip_navigation_dataset(manilip_dataset** out);
MANILIP_API manilip_status manilip_load_csv(const char* path, const char* features_csv, const char* targets_csv,
                                            const char* unlabeled_flag, manilip_dataset** out);
MANILIP_API manilip_status manilip_dataset_shape(const manilip_dataset* data, int* n_labeled, int* n_unlabeled,
                                                 int* input_dim, int* output_dim);
/* Row-major copy of the n x input_dim point matrix into `out` (capacity in doubles). */
MANILIP_API manilip_status manilip_dataset_points(const manilip_dataset* data, double* out, size_t capacity);
MANILIP_API void manilip_dataset_free(manilip_dataset* data);

/* Graph Laplacian over the dataset points. degree_convention: 0 literal, 1 leave-one-out symmetric. */
MANILIP_API manilip_status manilip_laplacian_build(const manilip_dataset* data, double t, int d, double threshold,
                                                   int degree_convention, manilip_laplacian** out);
MANILIP_API manilip_status manilip_laplacian_info(const manilip_laplacian* lap, int* n, long* nonzeros,
                                                  int* components);
MANILIP_API void manilip_laplacian_free(manilip_laplacian* lap);

/* Training. `method` is erm | ambient | manifold_reg | manifold_lipschitz.
 * `params_json` may be NULL or a JSON object with training parameters. */
MANILIP_API manilip_status manilip_train(const manilip_dataset* data, const char* method, const char* params_json,
                                         uint64_t seed, manilip_model** out);
MANILIP_API manilip_status manilip_model_summary(const manilip_model* model, double* final_loss,
                                                 double* lipschitz, double* mu, int* epochs);
/* Evaluates on the dataset: accuracy for classification, MSE otherwise. */
MANILIP_API manilip_status manilip_model_evaluate(const manilip_model* model, const manilip_dataset* data,
                                                  double* metric);
/* inputs: n x input_dim row-major; outputs: n x output_dim row-major. */
MANILIP_API manilip_status manilip_model_predict(const manilip_model* model, const double* inputs, size_t n,
                                                 double* outputs);
MANILIP_API void manilip_model_free(manilip_model* model);

/* Runs the experiment described by the JSON file at `config_path`.
 * Any of out_dir / seeds / methods may be NULL (or zero-length) to keep the
 * configured value. Returns MANILIP_ERR_CONFIG for configuration problems. */
MANILIP_API manilip_status manilip_run_experiment(const char* config_path, const char* out_dir,
                                                  const uint64_t* seeds, size_t n_seeds,
                                                  const char* const* methods, size_t n_methods);

#ifdef __cplusplus
}
#endif

#endif

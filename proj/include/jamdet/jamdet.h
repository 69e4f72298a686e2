#ifndef JAMDET_H
#define JAMDET_H

/*
 * C interface to the jamdet toolkit: dataset synthesis, STL decomposition,
 * RMSE features, classifiers and accuracy sweeps.
 *
 * Every fallible call returns a jd_status. On failure the message is
 * available from jd_last_error() (thread-local, valid until the next call on
 * the same thread). Strings returned through char** are heap-allocated and
 * must be released with jd_string_free(). Handles are released with their
 * matching *_free function; passing NULL to any *_free is a no-op.
 *
 * Configuration is passed as JSON objects; unknown keys are rejected.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(__GNUC__)
#define JD_API __attribute__((visibility("default")))
#else
#define JD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum jd_status {
    JD_OK = 0,
    JD_ERR_CONFIG = 1, /* invalid argument, configuration or file schema */
    JD_ERR_IO = 2,     /* unreadable / unwritable file */
    JD_ERR_DOMAIN = 3  /* numeric or domain failure */
} jd_status;

typedef struct jd_dataset jd_dataset;
typedef struct jd_features jd_features;
typedef struct jd_model jd_model;
typedef struct jd_report jd_report;

JD_API const char* jd_version(void);
JD_API const char* jd_last_error(void);
JD_API void jd_string_free(char* s);

/* --- datasets ---
 * spec_json keys: preset ("paper"), total_blocks, blocks_per_scenario,
 * fft_size, good_snr, bad_snr, bs_distances_m, jammer_distances_m,
 * power_ratios, occupancy_min, occupancy_max, slot_occupancy,
 * uav_altitude_m, seed, allow_nonpaper, channel {n_rays, rician_k_db,
 * path_loss_exponent, ref_distance_m, shadow_sigma_db, carrier_freq_hz,
 * bandwidth_hz, max_delay_s}. NULL or "{}" gives the defaults. */

/* Validates spec_json and returns the fully resolved spec as JSON. */
JD_API jd_status jd_spec_resolve(const char* spec_json, char** resolved_json);

/* Streams the dataset to `path` and writes the "<path>.meta.json" sidecar.
 * Nothing is left at either path on failure. */
JD_API jd_status jd_generate(const char* spec_json, const char* path, uint64_t* blocks_written);

/* In-memory dataset (for small specs and tests). */
JD_API jd_status jd_dataset_generate(const char* spec_json, jd_dataset** out);
JD_API jd_status jd_dataset_load(const char* path, jd_dataset** out);
JD_API jd_status jd_dataset_save(const jd_dataset* dataset, const char* path);
JD_API jd_status jd_dataset_export_csv(const jd_dataset* dataset, const char* path);
JD_API void jd_dataset_free(jd_dataset* dataset);
JD_API uint64_t jd_dataset_block_count(const jd_dataset* dataset);
JD_API uint32_t jd_dataset_fft_size(const jd_dataset* dataset);
JD_API uint64_t jd_dataset_scenario_count(const jd_dataset* dataset);

/* Jammed minus unjammed mean block power (dB) per channel quality. */
JD_API jd_status jd_dataset_mean_power_difference(const jd_dataset* dataset, double* good_db, double* bad_db);

/* --- STL ---
 * stl_json keys: period, seasonal_span, trend_span, lowpass_span,
 * seasonal_degree, trend_degree, lowpass_degree, seasonal_jump, trend_jump,
 * lowpass_jump, inner_iterations, outer_iterations. For triples the defaults
 * follow the fft size of the dataset. */

/* Output arrays must each hold n values. */
JD_API jd_status jd_stl_decompose(const double* series, size_t n, const char* stl_json, double* trend, double* seasonal,
                           double* residual);

/* CSV "original,trend,seasonal,residual" for one normalized triple. */
JD_API jd_status jd_decompose_triple(const jd_dataset* dataset, uint32_t scenario_id, uint32_t triple_index,
                              const char* stl_json, char** csv);

/* --- features --- */

/* Streams the dataset file scenario by scenario. threads == 0 uses all cores.
 * Triples that cannot be scored are skipped and counted. */
JD_API jd_status jd_features_extract(const char* dataset_path, const char* stl_json, unsigned threads, jd_features** out);
/* Rows loaded from CSV carry no scenario ids; splits over them are per row. */
JD_API jd_status jd_features_load(const char* path, jd_features** out);
JD_API jd_status jd_features_save(const jd_features* features, const char* path);
JD_API void jd_features_free(jd_features* features);
JD_API size_t jd_features_count(const jd_features* features);
JD_API size_t jd_features_failures(const jd_features* features);
JD_API jd_status jd_features_get(const jd_features* features, size_t index, double* rmse, int* jamming);
/* Scenario-level stratified split. */
JD_API jd_status jd_features_split(const jd_features* features, double train_fraction, uint64_t seed, jd_features** train,
                            jd_features** test);

/* --- models ---
 * kind: "threshold", "logreg" or "svm".
 * hyper_json keys: lr, epochs, l2 (logreg); c, epochs, lr, seed (svm). */

JD_API jd_status jd_model_train(const jd_features* features, const char* kind, const char* hyper_json, jd_model** out);
JD_API jd_status jd_model_load(const char* path, jd_model** out);
JD_API jd_status jd_model_save(const jd_model* model, const char* path);
JD_API jd_status jd_model_to_json(const jd_model* model, char** json);
JD_API void jd_model_free(jd_model* model);

/* --- evaluation --- */

JD_API jd_status jd_evaluate(const jd_model* model, const jd_features* features, jd_report** out);
JD_API double jd_report_accuracy(const jd_report* report);
JD_API jd_status jd_report_to_json(const jd_report* report, char** json);
JD_API jd_status jd_report_to_table(const jd_report* report, char** table);
JD_API void jd_report_free(jd_report* report);

/* Per-cell train/test accuracy grid.
 * sweep_json keys: bs_distances_m, jammer_distances_m, power_ratios,
 * train_fraction, seed, fix {power_ratio, jammer_distance_m, bs_distance_m}.
 * Either output pointer may be NULL. */
JD_API jd_status jd_sweep(const jd_features* features, const char* kind, const char* hyper_json, const char* sweep_json,
                   char** csv, char** json, double* mean_accuracy);

#ifdef __cplusplus
}
#endif

#endif

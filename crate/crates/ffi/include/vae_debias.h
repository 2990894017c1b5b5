#ifndef VAE_DEBIAS_H
#define VAE_DEBIAS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define VD_ATTRIBUTE_SEX 1

#define VD_ATTRIBUTE_AGE 2

#define VD_OBJECTIVE_CONFUSION 0

#define VD_OBJECTIVE_REVERSAL 1

#define VD_ADVERSARY_INPUT_MEAN 0

#define VD_ADVERSARY_INPUT_SAMPLE 1

#define VD_KL_MEAN 0

#define VD_KL_SUM 1

#define VD_SPACE_RECONSTRUCTION 0

#define VD_SPACE_LATENT 1

/**
 * Result of every fallible call.
 */
typedef enum VdStatus {
  VD_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  VD_STATUS_NULL_ARGUMENT = 1,
  /**
   * An argument was out of range or not valid UTF-8.
   */
  VD_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Configuration or input data failed validation.
   */
  VD_STATUS_VALIDATION = 3,
  VD_STATUS_IO = 4,
  /**
   * Training or evaluation produced a non-finite value.
   */
  VD_STATUS_NUMERIC = 5,
  /**
   * A checkpoint was written by an unsupported format version.
   */
  VD_STATUS_VERSION = 6,
  /**
   * A checkpoint could not be parsed.
   */
  VD_STATUS_CORRUPT = 7,
  /**
   * An internal panic was caught at the boundary.
   */
  VD_STATUS_PANIC = 8,
} VdStatus;

/**
 * Trained model and the standardization it was fit with.
 */
typedef struct VdCheckpoint VdCheckpoint;

/**
 * Loaded or generated embedding dataset.
 */
typedef struct VdDataset VdDataset;

/**
 * Synthetic generator settings. Start from [`vd_synth_config_default`].
 */
typedef struct VdSynthConfig {
  size_t n_train;
  size_t n_test;
  size_t dimension;
  size_t sex_signal_dims;
  size_t age_signal_dims;
  size_t task_signal_dims;
  size_t overlap_dims;
  double sex_strength;
  double age_strength;
  double task_strength;
  double task_group_bias;
  double noise_sigma;
  size_t nuisance_rank;
  double residual_sigma;
  double age_min;
  double age_max;
  double male_fraction;
  double risk_sharpness;
  double threshold_1y;
  double threshold_2y;
  uint64_t seed;
} VdSynthConfig;

/**
 * Training settings. Start from [`vd_train_config_default`].
 */
typedef struct VdTrainConfig {
  size_t epochs;
  size_t batch_size;
  double lr_vae;
  double lr_adv;
  size_t latent_dim;
  double beta_kl;
  double lambda_adv;
  size_t adv_steps;
  uint64_t seed;
  /**
   * Bitwise OR of `VD_ATTRIBUTE_*`.
   */
  uint32_t attributes;
  /**
   * Width of the single hidden layer of each adversary branch; 0 for a linear adversary.
   */
  size_t adversary_hidden;
  /**
   * One of `VD_OBJECTIVE_*`.
   */
  uint32_t objective;
  /**
   * One of `VD_ADVERSARY_INPUT_*`.
   */
  uint32_t adversary_input;
  /**
   * One of `VD_KL_*`.
   */
  uint32_t kl_reduction;
} VdTrainConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *vd_version(void);

/**
 * Message for the calling thread's last failed call, or null after a
 * success. Valid until the thread's next call into the library.
 */
const char *vd_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void vd_string_free(char *s);

struct VdSynthConfig vd_synth_config_default(void);

struct VdTrainConfig vd_train_config_default(void);

/**
 * # Safety
 * `config` must point to a valid config and `out` to writable storage.
 */
enum VdStatus vd_synth_generate(const struct VdSynthConfig *config, struct VdDataset **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum VdStatus vd_dataset_load_csv(const char *path, struct VdDataset **out);

/**
 * # Safety
 * `dataset` must be a live handle and `path` a NUL-terminated string.
 */
enum VdStatus vd_dataset_write_csv(const struct VdDataset *dataset, const char *path);

/**
 * Number of records, or 0 for a null handle.
 *
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t vd_dataset_len(const struct VdDataset *dataset);

/**
 * Feature dimension, or 0 for a null handle.
 *
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t vd_dataset_dimension(const struct VdDataset *dataset);

/**
 * Copies all features row-major into `out`, which must hold exactly
 * `len * dimension` values.
 *
 * # Safety
 * `dataset` must be a live handle and `out` valid for `out_len` writes.
 */
enum VdStatus vd_dataset_features(const struct VdDataset *dataset, double *out, size_t out_len);

/**
 * # Safety
 * `dataset` must be null or a handle not yet freed.
 */
void vd_dataset_free(struct VdDataset *dataset);

/**
 * # Safety
 * `dataset` must be a live handle, `config` valid and `out` writable.
 */
enum VdStatus vd_train(const struct VdDataset *dataset,
                       const struct VdTrainConfig *config,
                       struct VdCheckpoint **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum VdStatus vd_checkpoint_load(const char *path, struct VdCheckpoint **out);

/**
 * # Safety
 * `checkpoint` must be a live handle and `path` a NUL-terminated string.
 */
enum VdStatus vd_checkpoint_save(const struct VdCheckpoint *checkpoint, const char *path);

/**
 * Latent width, or 0 for a null handle.
 *
 * # Safety
 * `checkpoint` must be null or a live handle.
 */
size_t vd_checkpoint_latent_dim(const struct VdCheckpoint *checkpoint);

/**
 * # Safety
 * `checkpoint` must be null or a handle not yet freed.
 */
void vd_checkpoint_free(struct VdCheckpoint *checkpoint);

/**
 * Debiased copy of `dataset`. `space` is one of `VD_SPACE_*`.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum VdStatus vd_transform(const struct VdCheckpoint *checkpoint,
                           const struct VdDataset *dataset,
                           uint32_t space,
                           bool stochastic,
                           struct VdDataset **out);

/**
 * Sex, age and both task probes on one dataset, as JSON.
 *
 * # Safety
 * `dataset` must be a live handle and `out_json` writable.
 */
enum VdStatus vd_probe_report_json(const struct VdDataset *dataset, char **out_json);

/**
 * Before/after probe and EOD report, as JSON.
 *
 * # Safety
 * Handles must be live and `out_json` writable.
 */
enum VdStatus vd_fairness_report_json(const struct VdDataset *original,
                                      const struct VdDataset *debiased,
                                      char **out_json);

/**
 * Label-flipping grid with the default fractions, groups and tasks, as CSV.
 *
 * # Safety
 * Handles must be live and `out_csv` writable.
 */
enum VdStatus vd_poison_sweep_csv(const struct VdDataset *original,
                                  const struct VdDataset *debiased,
                                  uint64_t seed,
                                  char **out_csv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VAE_DEBIAS_H */

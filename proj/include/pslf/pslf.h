/* PSLF shared-library interface: opaque handles plus integer status
 * codes. Every function that can fail returns a pslf_status; the
 * thread-local message behind pslf_last_error() describes the most
 * recent failure on the calling thread. */

#ifndef PSLF_H
#define PSLF_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pslf_status {
  PSLF_OK = 0,
  PSLF_ERROR_CONFIG = 1, /* bad flag, key, value or hyperparameter */
  PSLF_ERROR_DATA = 2,   /* unreadable/malformed dataset or size mismatch */
  PSLF_ERROR_NUMERIC = 3 /* solver failure or divergence */
} pslf_status;

typedef struct pslf_dataset pslf_dataset;
typedef struct pslf_partition pslf_partition;
typedef struct pslf_config pslf_config;
typedef struct pslf_report pslf_report;

const char* pslf_version(void);
const char* pslf_last_error(void);

/* format: "ml1m", "csv", "tsv" or "delim=<s>;cols=<u>,<i>,<r>[;header]" */
pslf_status pslf_dataset_load(const char* path, const char* format,
                              pslf_dataset** out);
pslf_status pslf_dataset_stats(const pslf_dataset* dataset, uint64_t* users,
                               uint64_t* items, uint64_t* known,
                               double* density);
/* Writes ids_users.tsv / ids_items.tsv (dense index <tab> raw id). */
pslf_status pslf_dataset_write_id_maps(const pslf_dataset* dataset,
                                       const char* directory);
void pslf_dataset_free(pslf_dataset* dataset);

pslf_status pslf_partition_create(const pslf_dataset* dataset,
                                  double train_fraction,
                                  double validation_fraction,
                                  double test_fraction, uint64_t seed,
                                  pslf_partition** out);
pslf_status pslf_partition_sizes(const pslf_partition* partition,
                                 uint64_t* train_size,
                                 uint64_t* validation_size,
                                 uint64_t* test_size);
/* Writes train.idx / validation.idx / test.idx, one source entry index
 * per line, so the split is exactly replayable. */
pslf_status pslf_partition_write_manifest(const pslf_partition* partition,
                                          const char* directory);
void pslf_partition_free(pslf_partition* partition);

/* Keys mirror the CLI flags one-to-one: optimizer, f, lambda, gamma,
 * tau, cg-max-iters, cg-norm, kp, ki, kd, lr, adam-beta1, adam-beta2,
 * sam-rho, sam-mode, max-epochs, early-stop, seed. */
pslf_config* pslf_config_create(void);
pslf_status pslf_config_set(pslf_config* config, const char* key,
                            const char* value);
pslf_status pslf_config_get(const pslf_config* config, const char* key,
                            char* buffer, size_t buffer_size);
void pslf_config_free(pslf_config* config);

pslf_status pslf_train(const pslf_partition* partition,
                       const pslf_config* config, pslf_report** out);

/* Scalar keys: test_rmse, best_validation_rmse, best_epoch, epochs_run,
 * train_seconds, cg_iterations_total, stop_reason (0 = early_stop,
 * 1 = max_epochs, 2 = solver_error). */
pslf_status pslf_report_scalar(const pslf_report* report, const char* key,
                               double* out);
/* Full run document as JSON; free the string with pslf_string_free. */
pslf_status pslf_report_json(const pslf_report* report, char** out_json);
void pslf_report_free(pslf_report* report);

void pslf_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* PSLF_H */

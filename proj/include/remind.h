/* C interface to the manifold decoding library.
 *
 * All heavy operations take a JSON configuration document (the same schema the
 * CLI assembles from its flags); outputs land under the config's "out"
 * directory. Functions return REMIND_OK on success; on failure they return a
 * status code and remind_last_error() describes the problem (thread-local).
 */
#ifndef REMIND_H
#define REMIND_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum remind_status {
  REMIND_OK = 0,
  REMIND_E_USAGE = 1,    /* bad flags, bad config, contradictory settings */
  REMIND_E_IO = 2,       /* file system failure */
  REMIND_E_DATA = 3,     /* malformed dataset / checkpoint / metrics content */
  REMIND_E_NUMERIC = 4,  /* numeric failure at run time */
  REMIND_E_INTERNAL = 5
} remind_status;

typedef struct remind_model remind_model;
typedef struct remind_dataset remind_dataset;

const char* remind_version(void);

/* Message for the most recent failure on this thread; empty after success. */
const char* remind_last_error(void);

/* Commands (see the CLI for the schema). Each writes run.json and its outputs
 * under the config's "out" directory. */
remind_status remind_generate(const char* config_json);
remind_status remind_pretrain(const char* config_json);
remind_status remind_finetune(const char* config_json);
remind_status remind_eval(const char* config_json);
remind_status remind_xval(const char* config_json);
remind_status remind_corrupt(const char* config_json);

/* Renders a metrics.json file as an aligned text table. The returned string is
 * owned by the caller; release it with remind_string_free. */
remind_status remind_report_render(const char* metrics_json_path, char** text_out);
void remind_string_free(char* text);

/* Opaque handles for in-process use. */
remind_status remind_dataset_open(const char* manifest_path, remind_dataset** out);
void remind_dataset_close(remind_dataset* dataset);
int64_t remind_dataset_size(const remind_dataset* dataset);

/* Creates a model from {"model": {...}, "seed": N} (missing fields take their
 * defaults; channels/samples must be explicit here). */
remind_status remind_model_create(const char* config_json, remind_model** out);
remind_status remind_model_load(const char* checkpoint_path, remind_model** out);
remind_status remind_model_save(const remind_model* model, const char* checkpoint_path);
void remind_model_close(remind_model* model);

remind_status remind_model_dims(const remind_model* model, uint32_t* channels, uint32_t* samples,
                                uint32_t* segments, uint32_t* classes);

/* Class probabilities for one dataset entry; probs_len must equal the class
 * count. layout_path names the electrode layout file. */
remind_status remind_model_classify(const remind_model* model, const remind_dataset* dataset,
                                    int64_t index, const char* layout_path, double jitter,
                                    double* probs_out, int64_t probs_len);

#ifdef __cplusplus
}
#endif

#endif /* REMIND_H */

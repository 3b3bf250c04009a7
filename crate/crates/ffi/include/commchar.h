#ifndef COMMCHAR_H
#define COMMCHAR_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CommcharStatus {
  COMMCHAR_STATUS_OK = 0,
  COMMCHAR_STATUS_NULL_ARGUMENT = 1,
  COMMCHAR_STATUS_INVALID_UTF8 = 2,
  COMMCHAR_STATUS_IO = 3,
  COMMCHAR_STATUS_PARSE = 4,
  COMMCHAR_STATUS_CONFIG = 5,
  COMMCHAR_STATUS_INVALID_SUPPORT = 6,
  COMMCHAR_STATUS_CONSISTENCY = 7,
  COMMCHAR_STATUS_GRAPH = 8,
  COMMCHAR_STATUS_MINING = 9,
  COMMCHAR_STATUS_SELECTION = 10,
  COMMCHAR_STATUS_PANIC = 11,
} CommcharStatus;

/**
 * Parsed pipeline configuration.
 */
typedef struct CommcharConfig CommcharConfig;

/**
 * Sequence database read from its text form.
 */
typedef struct CommcharDatabase CommcharDatabase;

/**
 * Loaded dynamic attributed network.
 */
typedef struct CommcharNetwork CommcharNetwork;

/**
 * Characterization report of a pipeline run.
 */
typedef struct CommcharReport CommcharReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *commchar_last_error(void);

/**
 * Library version as a static string.
 */
const char *commchar_version(void);

/**
 * Releases a string returned by the library.
 *
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void commchar_string_free(char *s);

/**
 * Reads a TOML configuration file. Relative paths inside it resolve
 * against the file's directory.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer.
 */
enum CommcharStatus commchar_config_load(const char *path, struct CommcharConfig **out);

/**
 * Parses a TOML configuration held in memory.
 *
 * # Safety
 * `toml` must be a nul-terminated string and `out` a valid pointer.
 */
enum CommcharStatus commchar_config_parse(const char *toml, struct CommcharConfig **out);

/**
 * Overrides the minimum support, given as a decimal or a fraction.
 *
 * # Safety
 * `config` must be a live handle and `min_sup` a nul-terminated string.
 */
enum CommcharStatus commchar_config_set_min_sup(struct CommcharConfig *config, const char *min_sup);

/**
 * # Safety
 * `config` must be null or a live handle.
 */
void commchar_config_free(struct CommcharConfig *config);

/**
 * Loads the network named by the configuration's input section.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum CommcharStatus commchar_network_load(const struct CommcharConfig *config,
                                          struct CommcharNetwork **out);

/**
 * # Safety
 * `net` must be a live handle.
 */
size_t commchar_network_node_count(const struct CommcharNetwork *net);

/**
 * # Safety
 * `net` must be a live handle.
 */
size_t commchar_network_slice_count(const struct CommcharNetwork *net);

/**
 * # Safety
 * `net` must be null or a live handle.
 */
void commchar_network_free(struct CommcharNetwork *net);

/**
 * Runs community detection, measures, mining and selection on `net`.
 *
 * # Safety
 * `config` and `net` must be live handles and `out` a valid pointer.
 */
enum CommcharStatus commchar_characterize(const struct CommcharConfig *config,
                                          const struct CommcharNetwork *net,
                                          struct CommcharReport **out);

/**
 * Number of characterized communities.
 *
 * # Safety
 * `report` must be a live handle.
 */
size_t commchar_report_community_count(const struct CommcharReport *report);

/**
 * Modularity of the detected partition.
 *
 * # Safety
 * `report` must be a live handle.
 */
double commchar_report_modularity(const struct CommcharReport *report);

/**
 * Report as pretty JSON; free with [`commchar_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` a valid pointer.
 */
enum CommcharStatus commchar_report_json(const struct CommcharReport *report, char **out);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
void commchar_report_free(struct CommcharReport *report);

/**
 * Reads a sequence database file.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer.
 */
enum CommcharStatus commchar_database_load(const char *path, struct CommcharDatabase **out);

/**
 * # Safety
 * `db` must be a live handle.
 */
size_t commchar_database_len(const struct CommcharDatabase *db);

/**
 * # Safety
 * `db` must be null or a live handle.
 */
void commchar_database_free(struct CommcharDatabase *db);

/**
 * Mines the closed (or maximal) patterns of one community and returns them
 * as JSON lines; free with [`commchar_string_free`].
 *
 * # Safety
 * `db` must be a live handle, `min_sup` a nul-terminated string and `out`
 * a valid pointer.
 */
enum CommcharStatus commchar_mine(const struct CommcharDatabase *db,
                                  uint32_t community,
                                  const char *min_sup,
                                  bool maximal,
                                  char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMMCHAR_H */

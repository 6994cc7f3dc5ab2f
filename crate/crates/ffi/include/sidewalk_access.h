#ifndef SIDEWALK_ACCESS_H
#define SIDEWALK_ACCESS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every `sa_*` call.
 */
typedef enum SaStatus {
  SA_STATUS_OK = 0,
  SA_STATUS_NULL_ARGUMENT = 1,
  SA_STATUS_INVALID_UTF8 = 2,
  /**
   * Survey document failed schema validation.
   */
  SA_STATUS_INVALID_SURVEY = 3,
  /**
   * Any other malformed input: geometry, labels, graph document,
   * profiles, parameters.
   */
  SA_STATUS_INVALID_INPUT = 4,
  SA_STATUS_UNKNOWN_PROFILE = 5,
  SA_STATUS_UNSNAPPABLE = 6,
  SA_STATUS_DISCONNECTED = 7,
  /**
   * Analysis could not be completed on a valid survey.
   */
  SA_STATUS_ANALYSIS_FAILED = 8,
  SA_STATUS_PANIC = 99,
} SaStatus;

/**
 * Score granularity for [`sa_scores`].
 */
typedef enum SaLevel {
  SA_LEVEL_SEGMENT = 0,
  SA_LEVEL_NEIGHBORHOOD = 1,
} SaLevel;

/**
 * Built sidewalk graph with its labels.
 */
typedef struct SaGraph SaGraph;

/**
 * Set of group profiles; `shortest` is always available in addition.
 */
typedef struct SaProfiles SaProfiles;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Error record of the last failed call on this thread, or NULL after a
 * successful one. Owned by the library; valid until the next `sa_*` call
 * on the same thread.
 */
const char *sa_last_error_message(void);

/**
 * Releases a string returned through an out parameter. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void sa_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *sa_version(void);

/**
 * Validates and analyzes a survey document. Writes the profile document
 * and the analysis report.
 *
 * # Safety
 * `survey_json` must be a NUL-terminated string; out pointers must be
 * valid for writes.
 */
enum SaStatus sa_analyze_survey(const char *survey_json,
                                bool include_other,
                                char **profiles_out,
                                char **report_out);

/**
 * Builds a graph from sidewalk GeoJSON and a label list.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be valid for writes.
 */
enum SaStatus sa_graph_build(const char *sidewalks_geojson,
                             const char *labels_json,
                             double merge_eps_m,
                             double snap_max_m,
                             struct SaGraph **out);

/**
 * Loads a graph document written by `sidewalk-access graph`.
 *
 * # Safety
 * `graph_json` must be NUL-terminated; `out` must be valid for writes.
 */
enum SaStatus sa_graph_load(const char *graph_json, struct SaGraph **out);

/**
 * # Safety
 * `graph` must be NULL or a live handle from this library.
 */
void sa_graph_free(struct SaGraph *graph);

/**
 * Node and edge counts.
 *
 * # Safety
 * `graph` must be a live handle; out pointers must be valid for writes.
 */
enum SaStatus sa_graph_size(const struct SaGraph *graph, size_t *nodes, size_t *edges);

/**
 * Loads a profile document (the `profiles.json` output of analysis, or a
 * list of custom profiles).
 *
 * # Safety
 * `profiles_json` must be NUL-terminated; `out` must be valid for writes.
 */
enum SaStatus sa_profiles_load(const char *profiles_json, struct SaProfiles **out);

/**
 * # Safety
 * `profiles` must be NULL or a live handle from this library.
 */
void sa_profiles_free(struct SaProfiles *profiles);

/**
 * Number of loaded profiles, not counting `shortest`.
 *
 * # Safety
 * `profiles` must be a live handle; `count` must be valid for writes.
 */
enum SaStatus sa_profiles_count(const struct SaProfiles *profiles, size_t *count);

/**
 * Scores segments or neighborhoods for one profile as GeoJSON. `level`
 * is an [`SaLevel`] value; `neighborhoods_geojson` may be NULL for
 * segment scores.
 *
 * # Safety
 * Handles must be live; strings NUL-terminated; `out` valid for writes.
 */
enum SaStatus sa_scores(const struct SaGraph *graph,
                        const struct SaProfiles *profiles,
                        const char *profile_id,
                        uint32_t level,
                        const char *neighborhoods_geojson,
                        double percentile,
                        bool severity_scaled,
                        char **out);

/**
 * Routes between two WGS84 points for one profile; writes a GeoJSON
 * FeatureCollection with a single route feature.
 *
 * # Safety
 * Handles must be live; `profile_id` NUL-terminated; `out` valid for
 * writes.
 */
enum SaStatus sa_route(const struct SaGraph *graph,
                       const struct SaProfiles *profiles,
                       const char *profile_id,
                       double from_lat,
                       double from_lon,
                       double to_lat,
                       double to_lon,
                       double max_snap_m,
                       bool severity_scaled,
                       char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIDEWALK_ACCESS_H */

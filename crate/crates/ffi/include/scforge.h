#ifndef SCFORGE_H
#define SCFORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ScfBuildMethod {
  SCF_BUILD_METHOD_RANDOM = 0,
  SCF_BUILD_METHOD_MET = 1,
  SCF_BUILD_METHOD_PEG = 2,
} ScfBuildMethod;

typedef enum ScfStatus {
  SCF_STATUS_OK = 0,
  SCF_STATUS_NULL_ARGUMENT = 1,
  SCF_STATUS_INVALID_PARAMETER = 2,
  SCF_STATUS_PARSE = 3,
  SCF_STATUS_IO = 4,
  SCF_STATUS_CONSTRUCTION = 5,
  SCF_STATUS_CONFIG = 6,
  SCF_STATUS_LP = 7,
  SCF_STATUS_UTF8 = 8,
  SCF_STATUS_PANIC = 9,
} ScfStatus;

/*
 Opaque SC-LDPC or SC-RA ensemble.
 */
typedef struct ScfEnsemble ScfEnsemble;

/*
 Opaque Tanner graph instance.
 */
typedef struct ScfGraph ScfGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *scf_version(void);

/*
 Message of the last failure on this thread, or NULL.
 */
const char *scf_last_error(void);

/*
 Regular (l, r) SC-LDPC ensemble with `positions` variable positions,
 coupling width `w` and `m` variables per position.

 # Safety
 `out` must be valid for writes.
 */
enum ScfStatus scf_ensemble_sc_ldpc(size_t l,
                                    size_t r,
                                    size_t positions,
                                    size_t w,
                                    size_t m,
                                    bool met,
                                    struct ScfEnsemble **out);

/*
 Regular SC-RA ensemble with check degree `q + 2`.

 # Safety
 `out` must be valid for writes.
 */
enum ScfStatus scf_ensemble_sc_ra(size_t q, size_t positions, size_t m, struct ScfEnsemble **out);

/*
 # Safety
 `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum ScfStatus scf_ensemble_load(const char *path, struct ScfEnsemble **out);

/*
 # Safety
 `e` must come from this library; `path` must be a NUL-terminated string.
 */
enum ScfStatus scf_ensemble_save(const struct ScfEnsemble *e, const char *path);

/*
 # Safety
 `e` must be NULL or come from this library and not be used afterwards.
 */
void scf_ensemble_free(struct ScfEnsemble *e);

/*
 # Safety
 `e` must come from this library; `out` must be valid for writes.
 */
enum ScfStatus scf_ensemble_positions(const struct ScfEnsemble *e, size_t *out);

/*
 Design rate.

 # Safety
 `e` must come from this library; `out` must be valid for writes.
 */
enum ScfStatus scf_ensemble_rate(const struct ScfEnsemble *e, double *out);

/*
 BP threshold bracket: decoding succeeds at `lo` and fails at `hi`.

 # Safety
 `e` must come from this library; `lo` and `hi` must be valid for writes.
 */
enum ScfStatus scf_ensemble_threshold(const struct ScfEnsemble *e, double *lo, double *hi);

/*
 Local degree distribution design with default parameters. `alg` is 2
 (maximum rate), 3 (minimum iterations) or 4 (minimum iterations with
 non-uniform checks). The result is a new ensemble.

 # Safety
 `e` must come from this library; `out` must be valid for writes.
 */
enum ScfStatus scf_design(const struct ScfEnsemble *e, uint8_t alg, struct ScfEnsemble **out);

/*
 Finite-length instance. SC-RA ensembles accept only `SCF_BUILD_METHOD_PEG`.

 # Safety
 `e` must come from this library; `out` must be valid for writes.
 */
enum ScfStatus scf_graph_build(const struct ScfEnsemble *e,
                               enum ScfBuildMethod method,
                               uint64_t seed,
                               struct ScfGraph **out);

/*
 # Safety
 `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum ScfStatus scf_graph_load(const char *path, struct ScfGraph **out);

/*
 Writes the text form to `path` and the alist form to `path.alist`.

 # Safety
 `g` must come from this library; `path` must be a NUL-terminated string.
 */
enum ScfStatus scf_graph_save(const struct ScfGraph *g, const char *path);

/*
 # Safety
 `g` must be NULL or come from this library and not be used afterwards.
 */
void scf_graph_free(struct ScfGraph *g);

/*
 Variable, check and edge counts. Any output pointer may be NULL.

 # Safety
 `g` must come from this library; non-NULL outputs must be valid for writes.
 */
enum ScfStatus scf_graph_size(const struct ScfGraph *g,
                              size_t *vars,
                              size_t *checks,
                              size_t *edges);

/*
 Peels the erasure pattern `erased` (one byte per variable, nonzero means
 erased) and stores the number of variables left unresolved.

 # Safety
 `g` must come from this library; `erased` must point to `n` bytes and
 `residual` be valid for writes.
 */
enum ScfStatus scf_graph_peel(const struct ScfGraph *g,
                              const uint8_t *erased,
                              size_t n,
                              size_t *residual);

/*
 Block erasure count over `trials` independent channel draws at erasure
 probability `eps`. Reproducible for a given `seed`.

 # Safety
 `g` must come from this library; `errors` must be valid for writes.
 */
enum ScfStatus scf_simulate(const struct ScfGraph *g,
                            double eps,
                            uint64_t trials,
                            uint64_t seed,
                            uint64_t *errors);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCFORGE_H */

#ifndef PAULIKERN_H
#define PAULIKERN_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every API call.
 */
typedef enum PkStatus {
  PK_OK = 0,
  PK_NULL_ARGUMENT = 1,
  PK_INVALID_ARGUMENT = 2,
  PK_DIM_MISMATCH = 3,
  PK_EMPTY_SPAN = 4,
  PK_RANK_ZERO = 5,
  PK_NOT_SYMMETRIC = 6,
  PK_INDEX_OUT_OF_RANGE = 7,
  PK_DIVERGED = 8,
  PK_INVALID_OVERLAP = 9,
  PK_BAD_RANKS = 10,
  PK_EMPTY_KERNEL = 11,
  PK_LEVEL_COUNT = 12,
  PK_QUADRATURE_FAILURE = 13,
  PK_JSON_ERROR = 14,
  PK_UTF8_ERROR = 15,
  PK_INTERNAL_PANIC = 16,
} PkStatus;

/*
 Forbidden relative-motion states of the toy model.
 */
typedef enum PkForbiddenState {
  PK_FS0_S = 0,
  PK_FS2_S = 1,
} PkForbiddenState;

/*
 Opaque dense symmetric operator.
 */
typedef struct PkOperator PkOperator;

/*
 Opaque family of projectors on a common space.
 */
typedef struct PkProjectorSet PkProjectorSet;

/*
 Opaque three-body toy model (projector set plus Hamiltonian).
 */
typedef struct PkToyModel PkToyModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message describing the most recent error on this thread. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *pk_last_error_message(void);

/*
 Frees a string returned by this library.
 */
void pk_string_free(char *s);

/*
 Builds a seeded random ensemble of projectors: `ranks` holds one rank
 per projector. Identical seeds give identical sets.
 */
enum PkStatus pk_set_random(size_t dim,
                            const size_t *ranks,
                            size_t n_proj,
                            uint64_t seed,
                            struct PkProjectorSet **out);

/*
 Three rank-1 projectors with exact pairwise overlap `c`.
 */
enum PkStatus pk_set_equal_overlap(size_t dim, double c, struct PkProjectorSet **out);

/*
 Parses the projector-set JSON schema
 `{"dim": n, "projectors": [{"span": [[..], ..]}, ..]}`.
 */
enum PkStatus pk_set_from_json(const char *json, struct PkProjectorSet **out);

/*
 Serializes a set to its JSON schema; free the string with
 `pk_string_free`.
 */
enum PkStatus pk_set_to_json(const struct PkProjectorSet *set, char **out);

void pk_set_free(struct PkProjectorSet *set);

/*
 Basis dimension, or 0 for a null handle.
 */
size_t pk_set_dim(const struct PkProjectorSet *set);

/*
 Number of projectors, or 0 for a null handle.
 */
size_t pk_set_count(const struct PkProjectorSet *set);

/*
 Rank of one member.
 */
enum PkStatus pk_set_rank(const struct PkProjectorSet *set, size_t index, size_t *out);

/*
 Ascending spectrum of the projector sum. `out` must hold `dim` values.
 */
enum PkStatus pk_sum_spectrum(const struct PkProjectorSet *set, double *out, size_t out_len);

/*
 Dimension of the allowed subspace `ker P` at the given eigenvalue
 cutoff.
 */
enum PkStatus pk_kernel_dim(const struct PkProjectorSet *set, double threshold, size_t *out);

/*
 The complete projector, defined spectrally; always exists.
 */
enum PkStatus pk_complete_projector(const struct PkProjectorSet *set,
                                    double threshold,
                                    struct PkOperator **out);

/*
 `1 - (1-P)^m` with a Frobenius-norm guard; fails with `PkDiverged`
 once the spectrum of `P` reaches 2 and the powers blow up.
 */
enum PkStatus pk_power_limit(const struct PkProjectorSet *set,
                             uint64_t m,
                             double guard,
                             struct PkOperator **out);

/*
 Frobenius residual of the order-`m` expansion identity.
 */
enum PkStatus pk_expansion_residual(const struct PkProjectorSet *set, uint32_t m, double *out);

/*
 Kernel comparison between `P` and the complete projector: dimensions
 from both routes and the worst cross-residual.
 */
enum PkStatus pk_kernel_identity_check(const struct PkProjectorSet *set,
                                       double threshold,
                                       size_t *out_kernel_dim_sum,
                                       size_t *out_kernel_dim_complete,
                                       double *out_max_residual);

/*
 Worst absorption residual over the family: each member satisfies
 `P_i G = G P_i = P_i` with `G` the complete projector.
 */
enum PkStatus pk_commutation_max_residual(const struct PkProjectorSet *set,
                                          double threshold,
                                          double *out);

/*
 Dimension of an operator handle, or 0 for null.
 */
size_t pk_operator_dim(const struct PkOperator *op);

/*
 Copies the entries row-major into `out` (`dim * dim` values).
 */
enum PkStatus pk_operator_entries(const struct PkOperator *op, double *out, size_t out_len);

void pk_operator_free(struct PkOperator *op);

/*
 Builds the three-identical-particle toy model. `fs` lists the
 forbidden states carried by every pair.
 */
enum PkStatus pk_toy_build(size_t nmax,
                           const enum PkForbiddenState *fs,
                           size_t fs_len,
                           double rotation_cos,
                           double depth,
                           double range,
                           struct PkToyModel **out);

/*
 Clones the model's projector set into a standalone handle.
 */
enum PkStatus pk_toy_set(const struct PkToyModel *toy, struct PkProjectorSet **out);

/*
 Clones the model's Hamiltonian into a standalone handle.
 */
enum PkStatus pk_toy_hamiltonian(const struct PkToyModel *toy, struct PkOperator **out);

/*
 Basis size of the model.
 */
size_t pk_toy_dim(const struct PkToyModel *toy);

void pk_toy_free(struct PkToyModel *toy);

/*
 Pseudopotential sweep: fills `out_energies` (`n_lambda * levels`,
 row-major by grid point), `out_projected` (`levels`) and `out_slopes`
 (`levels`; NaN when a level has no measurable tail).
 */
enum PkStatus pk_opp_sweep(const struct PkOperator *h,
                           const struct PkProjectorSet *set,
                           const double *lambdas,
                           size_t n_lambda,
                           size_t levels,
                           double threshold,
                           double *out_energies,
                           double *out_projected,
                           double *out_slopes);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PAULIKERN_H */

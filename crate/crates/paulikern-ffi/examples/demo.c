/* Minimal driver for the C API: builds an equal-overlap family, checks
 * the expansion identity and the kernel match, then sizes the allowed
 * space of the toy model. Compile against include/paulikern.h and link
 * libpaulikern_ffi. */

#include <stdio.h>
#include <stdlib.h>

#include "paulikern.h"

static void die(const char *what, PkStatus status) {
    fprintf(stderr, "%s failed (%d): %s\n", what, (int)status, pk_last_error_message());
    exit(1);
}

int main(void) {
    PkProjectorSet *set = NULL;
    PkStatus status = pk_set_equal_overlap(6, 0.4, &set);
    if (status != PK_OK) die("pk_set_equal_overlap", status);

    double spectrum[6];
    status = pk_sum_spectrum(set, spectrum, 6);
    if (status != PK_OK) die("pk_sum_spectrum", status);
    printf("largest eigenvalue of P: %.12f\n", spectrum[5]);

    double residual = 0.0;
    status = pk_expansion_residual(set, 8, &residual);
    if (status != PK_OK) die("pk_expansion_residual", status);
    printf("expansion identity residual at order 8: %.3e\n", residual);
    if (residual > 1e-10 * 6) die("expansion residual too large", PK_OK);

    size_t dim_p = 0, dim_complete = 0;
    double cross = 0.0;
    status = pk_kernel_identity_check(set, 1e-10, &dim_p, &dim_complete, &cross);
    if (status != PK_OK) die("pk_kernel_identity_check", status);
    printf("kernel dims: %zu vs %zu, cross residual %.3e\n", dim_p, dim_complete, cross);
    if (dim_p != dim_complete) die("kernel dims differ", PK_OK);

    pk_set_free(set);

    PkForbiddenState fs[1] = {PK_FS0_S};
    PkToyModel *toy = NULL;
    status = pk_toy_build(6, fs, 1, -0.5, 32.0, 0.3, &toy);
    if (status != PK_OK) die("pk_toy_build", status);
    PkProjectorSet *toy_set = NULL;
    status = pk_toy_set(toy, &toy_set);
    if (status != PK_OK) die("pk_toy_set", status);
    size_t kdim = 0;
    status = pk_kernel_dim(toy_set, 1e-10, &kdim);
    if (status != PK_OK) die("pk_kernel_dim", status);
    printf("toy model: dim %zu, allowed subspace %zu\n", pk_toy_dim(toy), kdim);

    pk_set_free(toy_set);
    pk_toy_free(toy);
    puts("demo ok");
    return 0;
}

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "boostlab.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "check failed at line %d: %s (%s)\n",    \
                    __LINE__, #cond, bl_last_error());               \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    const double entries[] = {1, -1, -1, 1, 1, 1};
    BlMatrix *m = NULL;
    CHECK(bl_matrix_new(3, 2, entries, &m) == BL_STATUS_OK);
    CHECK(bl_matrix_rows(m) == 3 && bl_matrix_cols(m) == 2);

    BlTrace *t = NULL;
    CHECK(bl_run(m, 100, BL_VARIANT_PLAIN, NAN, &t) == BL_STATUS_OK);
    CHECK(bl_trace_len(t) == 100);
    double loss = 0;
    CHECK(bl_trace_loss(t, 100, &loss) == BL_STATUS_OK);
    CHECK(fabs(loss - 2.0 / 3.0 * sqrt(1.01)) < 1e-9);
    BlRound r;
    CHECK(bl_trace_round(t, 2, &r) == BL_STATUS_OK);
    CHECK(fabs(r.delta - 0.5) < 1e-12 && isnan(r.loss_z));
    CHECK(bl_trace_round(t, 0, &r) == BL_STATUS_INVALID_ARGUMENT);
    double w[2];
    CHECK(bl_trace_weights(t, w, 2) == BL_STATUS_OK);
    CHECK(bl_trace_weights(t, w, 1) == BL_STATUS_DIMENSION_MISMATCH);
    char *csv = NULL;
    CHECK(bl_trace_csv(t, &csv) == BL_STATUS_OK);
    CHECK(strncmp(csv, "t,j,r,delta", 11) == 0);
    bl_string_free(csv);

    BlDecomposition *d = NULL;
    CHECK(bl_decompose(m, 0, &d) == BL_STATUS_OK);
    double gamma = 0;
    CHECK(bl_decomposition_gamma(d, &gamma) == BL_STATUS_OK && fabs(gamma - 1) < 1e-9);
    CHECK(bl_decomposition_zero_count(d) == 1 && bl_decomposition_in_zero_set(d, 2));
    char *json = NULL;
    CHECK(bl_decomposition_json(d, m, &json) == BL_STATUS_OK);
    CHECK(strstr(json, "\"regime\":\"general\"") != NULL);
    bl_string_free(json);

    BlMatrix *bad = NULL;
    CHECK(bl_matrix_from_dataset("triangular:0", 0, &bad) != BL_STATUS_OK);
    CHECK(bad == NULL && strlen(bl_last_error()) > 0);

    bl_decomposition_free(d);
    bl_trace_free(t);
    bl_matrix_free(m);
    printf("ok %s\n", bl_version());
    return 0;
}

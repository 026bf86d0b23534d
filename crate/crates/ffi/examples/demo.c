/* Maximize a toy mixed objective through the C API. */
#include <stdio.h>
#include "hybridopt.h"

static int objective(void *user_data, const double *d, size_t nd, const double *c, size_t nc, double *value) {
    (void)user_data; (void)nd; (void)nc;
    *value = d[0] - (c[0] - 0.25) * (c[0] - 0.25);
    return 0;
}

static int check(enum HoStatus s) {
    if (s != HO_STATUS_OK) {
        char msg[256];
        ho_last_error_message(msg, sizeof msg);
        fprintf(stderr, "error %d: %s\n", (int)s, msg);
        return 1;
    }
    return 0;
}

int main(void) {
    size_t sizes[] = {3};
    double domains[] = {0.0, 1.0, 2.0};
    double lower[] = {0.0}, upper[] = {1.0};
    HoHybrid *h = NULL;
    if (check(ho_hybrid_new_callback(1, sizes, domains, 1, lower, upper, objective, NULL, 2, 0.1, 42, &h)))
        return 1;
    double best = 0.0;
    for (int i = 0; i < 50; i++)
        if (check(ho_hybrid_step(h, &best)))
            return 1;
    double d[1], c[1], v;
    if (check(ho_hybrid_best(h, d, 1, c, 1, &v)))
        return 1;
    printf("best %.6f at d=%g c=%.4f\n", v, d[0], c[0]);
    ho_hybrid_free(h);
    return 0;
}

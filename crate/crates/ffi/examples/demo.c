/* Evaluate m(-k^2) for a box potential through the C interface. */
#include <stdio.h>
#include <stdlib.h>

#include "weylbc.h"

int main(void) {
    WeylbcPotential *q = NULL;
    WeylbcAmplitude *a = NULL;
    char message[256];

    if (weylbc_potential_from_json("{\"kind\":\"box\",\"c\":1,\"w\":1}", &q) != WEYLBC_STATUS_OK) {
        weylbc_last_error(message, sizeof message);
        fprintf(stderr, "%s\n", message);
        return 1;
    }
    if (weylbc_amplitude_solve(q, 8.0, 0.005, WEYLBC_METHOD_MARCH, 1e-8, &a) != WEYLBC_STATUS_OK) {
        weylbc_last_error(message, sizeof message);
        fprintf(stderr, "%s\n", message);
        weylbc_potential_free(q);
        return 1;
    }
    for (double k = 8.0; k <= 12.0; k += 2.0) {
        WeylbcMEvaluation e;
        double re, im;
        if (weylbc_m_from_amplitude(a, q, k, 0.0, 1e-8, false, &e) != WEYLBC_STATUS_OK ||
            weylbc_m_riccati(q, k, 0.0, 1e-3, &re, &im) != WEYLBC_STATUS_OK) {
            weylbc_last_error(message, sizeof message);
            fprintf(stderr, "%s\n", message);
            break;
        }
        printf("%.17g,%.17g,%.17g,%.3g\n", k, e.re_m, re, e.tail_bound);
    }
    weylbc_amplitude_free(a);
    weylbc_potential_free(q);
    return 0;
}

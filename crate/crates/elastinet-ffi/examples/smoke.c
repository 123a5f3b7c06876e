#include <stdio.h>
#include "elastinet.h"

static const char *THETA =
    "{\"dimension\": 2, \"edges\": ["
    "{\"id\": \"E1\", \"v0\": \"A\", \"v1\": \"B\", \"dir0_rad\": \"2*pi/3\", \"dir1_rad\": \"pi/3\"},"
    "{\"id\": \"E2\", \"v0\": \"A\", \"v1\": \"B\", \"dir0_rad\": 0, \"dir1_rad\": \"pi\"},"
    "{\"id\": \"E3\", \"v0\": \"A\", \"v1\": \"B\", \"dir0_rad\": \"4*pi/3\", \"dir1_rad\": \"5*pi/3\"}]}";

int main(void) {
    EnGraph *g = NULL;
    if (en_graph_from_json(THETA, &g) != EN_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", en_last_error());
        return 1;
    }
    EnMinimizeOptions opts = en_minimize_options_default();
    opts.samples = 32;
    EnNetwork *n = NULL;
    EnMinimizeSummary s;
    EnStatus st = en_minimize_relaxed(g, 1.0, 1.0, &opts, &n, &s);
    if (st != EN_STATUS_OK) {
        fprintf(stderr, "minimize: %s\n", en_last_error());
        return 1;
    }
    printf("energy %.6f converged %d verdict %d\n", s.energy, (int)s.converged, (int)s.verdict);
    en_network_free(n);
    en_graph_free(g);
    return s.energy >= 16.59 ? 0 : 1;
}

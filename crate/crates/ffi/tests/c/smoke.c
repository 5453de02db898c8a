#include "scforge.h"

int main(void) {
    ScfEnsemble *e = NULL;
    ScfGraph *g = NULL;
    size_t vars = 0;
    uint64_t errors = 0;
    if (scf_ensemble_sc_ldpc(3, 6, 6, 3, 30, false, &e) != SCF_STATUS_OK) return 1;
    if (scf_graph_build(e, SCF_BUILD_METHOD_RANDOM, 1, &g) != SCF_STATUS_OK) return 1;
    if (scf_graph_size(g, &vars, NULL, NULL) != SCF_STATUS_OK) return 1;
    if (scf_simulate(g, 0.3, 100, 7, &errors) != SCF_STATUS_OK) return 1;
    scf_graph_free(g);
    scf_ensemble_free(e);
    return vars == 180 ? 0 : 1;
}

#include <math.h>
#include <stdio.h>
#include "pfmix.h"

int main(void) {
    PfmixConfig *cfg = NULL;
    PfmixRun *run = NULL;
    PfmixStatsRow row;

    if (pfmix_config_new(PFMIX_SCENARIO_HANGING_BLOCK, &cfg) != PFMIX_STATUS_OK) return 1;
    if (pfmix_config_set_steps(cfg, 1) != PFMIX_STATUS_OK) return 2;
    if (pfmix_config_set_nu(cfg, 2.0) != PFMIX_STATUS_INVALID_CONFIG) return 3;
    if (pfmix_run(cfg, &run) != PFMIX_STATUS_OK) {
        fprintf(stderr, "%s\n", pfmix_last_error());
        return 4;
    }
    if (pfmix_run_num_rows(run) != 1) return 5;
    if (pfmix_run_row(run, 0, &row) != PFMIX_STATUS_OK) return 6;
    if (pfmix_run_row(run, 1, &row) != PFMIX_STATUS_OUT_OF_RANGE) return 7;
    if (pfmix_run_row(run, 0, NULL) != PFMIX_STATUS_NULL_POINTER) return 8;
    printf("dofs %llu u_y %.6e\n", (unsigned long long)row.dofs, row.u_y_point);
    if (row.dofs != 2804 || !(row.u_y_point < 0.0) || !isnan(row.cod_max)) return 9;
    pfmix_run_free(run);
    pfmix_config_free(cfg);
    return 0;
}

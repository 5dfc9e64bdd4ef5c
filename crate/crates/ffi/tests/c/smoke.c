#include <math.h>
#include <stdio.h>
#include "gou_ruin.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "line %d: %s\n", __LINE__, #cond); return 1; } } while (0)

int main(void) {
    GouBrownianDriftParams p = { 1.0, -0.1, 2.0, 0.0, 0.01 };
    GouModel *m = NULL;
    CHECK(gou_model_brownian_drift(&p, &m) == GOU_STATUS_OK);

    GouProfile prof;
    CHECK(gou_cramer_profile(m, &prof) == GOU_STATUS_OK);
    CHECK(fabs(prof.w - 1.0) < 1e-8 && fabs(prof.mu_star - 1.0) < 1e-8);

    double c;
    CHECK(gou_laplace_exponent(m, 1.0, &c) == GOU_STATUS_OK);
    CHECK(fabs(c) < 1e-12);

    GouConditions cond;
    CHECK(gou_check_conditions(m, &cond) == GOU_STATUS_OK);
    CHECK(cond.cond_a == GOU_VERDICT_VERIFIED && cond.cond_c == GOU_VERDICT_VERIFIED);

    GouRuinConfig cfg = gou_ruin_config_default(500, 3);
    cfg.h = 1.0 / 32.0;
    double z[2] = { 0.5, 1.0 };
    GouRuinPoint pts[2];
    CHECK(gou_estimate_ruin_curve(m, &cfg, z, 2, pts) == GOU_STATUS_OK);
    CHECK(pts[1].n_ruined <= pts[0].n_ruined && pts[0].n_paths == 500);

    CHECK(gou_laplace_exponent(NULL, 1.0, &c) == GOU_STATUS_NULL_POINTER);
    CHECK(gou_last_error_message() != NULL);

    gou_model_free(m);
    printf("ok w=%.6f psi(0.5)=%.4f\n", prof.w, pts[0].psi_hat);
    return 0;
}

#include <math.h>
#include <stdio.h>
#include <string.h>
#include "punctlab.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (%s)\n", #cond, pl_last_error() ? pl_last_error() : ""); return 1; } } while (0)

int main(void) {
    PlExpr *f = NULL;
    CHECK(pl_expr_parse("z^2", &f) == PL_STATUS_OK);
    PlSpherePoint v;
    PlComplex z = {1.0, 1.0};
    CHECK(pl_expr_eval(f, z, false, 0, &v) == PL_STATUS_OK);
    CHECK(!v.infinite && fabs(v.value.re) < 1e-15 && fabs(v.value.im - 2.0) < 1e-15);
    pl_expr_free(f);

    PlExpr *g = NULL;
    CHECK(pl_expr_parse("exp(", &g) == PL_STATUS_SYNTAX);
    CHECK(g == NULL && pl_last_error() != NULL);

    double len = 0.0;
    CHECK(pl_punctured_circle_length(exp(-2.0 * M_PI), &len) == PL_STATUS_OK);
    CHECK(fabs(len - 1.0) < 1e-12);

    PlExpr *e = NULL;
    CHECK(pl_expr_parse("exp(1/z)", &e) == PL_STATUS_OK);
    double radii[] = {1e-1, 1e-2, 1e-3};
    char *json = NULL;
    CHECK(pl_julia_json(e, radii, 3, &json) == PL_STATUS_OK);
    CHECK(strstr(json, "\"verdict\"") != NULL);
    pl_string_free(json);
    pl_expr_free(e);
    printf("ok %s\n", pl_version());
    return 0;
}

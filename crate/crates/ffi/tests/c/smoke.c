#include <math.h>
#include <stdio.h>
#include "franka_ik.h"

int main(void) {
    const double r[9] = {0.6688331, 0.31705344, 0.672413, -0.6398146, -0.21507724,
                         0.7378205, 0.3785493, -0.92369843, 0.0590046};
    const double t[3] = {0.61674948, 0.32278029, 0.56790512};
    FikSolutionSet *set = NULL;
    FikOptions opts = fik_options_default();
    if (fik_solve(NULL, r, t, FIK_LOCK_Q7, -21.32455095 * M_PI / 180.0, &opts, &set) != FIK_STATUS_OK) {
        fprintf(stderr, "solve failed: %s\n", fik_last_error());
        return 1;
    }
    size_t n = fik_solution_set_len(set);
    for (size_t i = 0; i < n; ++i) {
        double q[7], rot[9], pos[3], jac[42];
        if (fik_solution_set_joints(set, i, q) != FIK_STATUS_OK) return 2;
        if (fik_solution_set_jacobian(set, i, jac) != FIK_STATUS_OK) return 2;
        if (fik_fk(NULL, q, rot, pos, NULL) != FIK_STATUS_OK) return 3;
        for (int k = 0; k < 3; ++k)
            if (fabs(pos[k] - t[k]) > 1e-6) return 4;
    }
    if (fik_solution_set_joints(set, 0, NULL) != FIK_STATUS_NULL_POINTER) return 5;
    double q[7];
    if (fik_solution_set_joints(set, n, q) != FIK_STATUS_INDEX_OUT_OF_RANGE) return 5;
    printf("%zu %d\n", n, (int)fik_solution_set_singularity(set));
    fik_solution_set_free(set);
    return 0;
}

#pragma once

#include <Eigen/Dense>

#include <vector>

namespace hdrelay {

// maximize c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0
struct LinearProgram {
    Eigen::VectorXd c;
    Eigen::MatrixXd a_ub;
    Eigen::VectorXd b_ub;
    Eigen::MatrixXd a_eq;
    Eigen::VectorXd b_eq;
};

struct LpSolution {
    bool feasible = false;
    bool bounded = true;
    double value = 0.0;
    Eigen::VectorXd x;
};

// Dense two-phase simplex with Bland's rule. Intended for the small
// state-probability programs that appear inside the rate searches.
LpSolution solve_lp(const LinearProgram& lp);

}  // namespace hdrelay

#include "hdrelay/lp.hpp"

#include "hdrelay/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hdrelay {

namespace {

constexpr double kEps = 1e-11;       // reduced-cost tolerance
constexpr double kPivotEps = 1e-9;   // smallest usable pivot element
constexpr double kZero = 1e-14;      // round-off flushed after each pivot

class Tableau {
public:
    Tableau(Eigen::MatrixXd t, std::vector<int> basis)
        : t_(std::move(t)), basis_(std::move(basis)), initial_(basis_) {}

    // Optimises the objective stored in the last row (reduced costs, maximisation:
    // a negative entry means the column improves the objective).
    bool run(const std::vector<bool>& allowed) {
        const Eigen::Index m = t_.rows() - 1;
        const Eigen::Index rhs = t_.cols() - 1;
        for (int iter = 0; iter < 100000; ++iter) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < rhs; ++j)
                if (allowed[j] && t_(m, j) < -kEps) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            const Eigen::Index leave = leaving_row(enter);
            if (leave < 0) return false;  // unbounded
            pivot(leave, enter);
        }
        throw NumericalError("simplex iteration limit reached");
    }

    // Lexicographic ratio test: ties on the ratio are broken with the rows of
    // B^-1 (the columns of the starting basis), then by basis index.
    Eigen::Index leaving_row(Eigen::Index enter) const {
        const Eigen::Index m = t_.rows() - 1;
        const Eigen::Index rhs = t_.cols() - 1;
        std::vector<Eigen::Index> rows;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < m; ++i) {
            if (t_(i, enter) <= kPivotEps) continue;
            best = std::min(best, std::max(0.0, t_(i, rhs)) / t_(i, enter));
        }
        const double tie = 1e-12 * std::max(1.0, best);
        for (Eigen::Index i = 0; i < m; ++i)
            if (t_(i, enter) > kPivotEps && std::max(0.0, t_(i, rhs)) / t_(i, enter) <= best + tie) rows.push_back(i);
        for (std::size_t k = 0; k < initial_.size() && rows.size() > 1; ++k) {
            const Eigen::Index col = initial_[k];
            double lo = std::numeric_limits<double>::infinity();
            for (auto i : rows) lo = std::min(lo, t_(i, col) / t_(i, enter));
            std::erase_if(rows, [&](Eigen::Index i) { return t_(i, col) / t_(i, enter) > lo + 1e-12 * std::max(1.0, std::abs(lo)); });
        }
        if (rows.empty()) return -1;
        return *std::min_element(rows.begin(), rows.end(),
                                 [&](Eigen::Index a, Eigen::Index b) { return basis_[a] < basis_[b]; });
    }

    void pivot(Eigen::Index r, Eigen::Index c) {
        t_.row(r) /= t_(r, c);
        for (Eigen::Index i = 0; i < t_.rows(); ++i)
            if (i != r && t_(i, c) != 0.0) t_.row(i) -= t_(i, c) * t_.row(r);
        t_ = t_.unaryExpr([](double v) { return std::abs(v) < kZero ? 0.0 : v; });
        t_.col(c).setZero();
        t_(r, c) = 1.0;
        basis_[r] = static_cast<int>(c);
    }

    Eigen::MatrixXd& t() { return t_; }
    std::vector<int>& basis() { return basis_; }

private:
    Eigen::MatrixXd t_;
    std::vector<int> basis_;
    std::vector<int> initial_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    const Eigen::Index n = lp.c.size();
    const Eigen::Index mu = lp.a_ub.rows();
    const Eigen::Index me = lp.a_eq.rows();
    if ((mu > 0 && lp.a_ub.cols() != n) || (me > 0 && lp.a_eq.cols() != n) || lp.b_ub.size() != mu ||
        lp.b_eq.size() != me)
        throw ValidationError("inconsistent linear program dimensions");

    const Eigen::Index m = mu + me;
    // columns: x (n), slack/surplus (mu), artificial (m), rhs
    const Eigen::Index n_slack = mu;
    const Eigen::Index art0 = n + n_slack;
    const Eigen::Index cols = art0 + m + 1;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, cols);
    std::vector<int> basis(m);
    std::vector<bool> artificial_used(m, false);

    for (Eigen::Index i = 0; i < mu; ++i) {
        const double sign = lp.b_ub(i) < 0 ? -1.0 : 1.0;
        t.row(i).head(n) = sign * lp.a_ub.row(i);
        t(i, n + i) = sign;
        t(i, cols - 1) = sign * lp.b_ub(i);
        if (sign > 0) {
            basis[i] = static_cast<int>(n + i);
        } else {
            t(i, art0 + i) = 1.0;
            basis[i] = static_cast<int>(art0 + i);
            artificial_used[i] = true;
        }
    }
    for (Eigen::Index e = 0; e < me; ++e) {
        const Eigen::Index i = mu + e;
        const double sign = lp.b_eq(e) < 0 ? -1.0 : 1.0;
        t.row(i).head(n) = sign * lp.a_eq.row(e);
        t(i, cols - 1) = sign * lp.b_eq(e);
        t(i, art0 + i) = 1.0;
        basis[i] = static_cast<int>(art0 + i);
        artificial_used[i] = true;
    }

    LpSolution sol;
    std::vector<bool> allowed(cols - 1, true);
    for (Eigen::Index i = 0; i < m; ++i)
        if (!artificial_used[i]) allowed[art0 + i] = false;

    // phase 1: maximise -sum(artificials)
    for (Eigen::Index i = 0; i < m; ++i)
        if (artificial_used[i]) t.row(m) -= t.row(i);
    for (Eigen::Index i = 0; i < m; ++i)
        if (artificial_used[i]) t(m, art0 + i) = 0.0;
    Tableau tab(std::move(t), std::move(basis));
    tab.run(allowed);
    if (tab.t()(m, cols - 1) < -1e-9) return sol;

    // drive remaining artificials out of the basis
    for (Eigen::Index i = 0; i < m; ++i) {
        if (tab.basis()[i] < art0) continue;
        for (Eigen::Index j = 0; j < art0; ++j)
            if (std::abs(tab.t()(i, j)) > 1e-9) {
                tab.pivot(i, j);
                break;
            }
    }
    for (Eigen::Index j = art0; j < cols - 1; ++j) allowed[j] = false;

    // phase 2
    auto& T = tab.t();
    T.row(m).setZero();
    T.row(m).head(n) = -lp.c.transpose();
    for (Eigen::Index i = 0; i < m; ++i) {
        const int b = tab.basis()[i];
        if (b < n && lp.c(b) != 0.0) T.row(m) += lp.c(b) * T.row(i);
    }
    if (!tab.run(allowed)) {
        sol.feasible = true;
        sol.bounded = false;
        return sol;
    }
    sol.feasible = true;
    sol.x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i)
        if (tab.basis()[i] < n) sol.x(tab.basis()[i]) = std::max(0.0, T(i, cols - 1));
    sol.value = lp.c.dot(sol.x);
    return sol;
}

}  // namespace hdrelay

#include "hdrelay/cutset.hpp"

#include "hdrelay/error.hpp"

#include <cmath>
#include <limits>

namespace hdrelay {

void InputCorrelations::validate(int num_relays) const {
    if (per_state.empty()) return;
    if (per_state.size() != num_states(num_relays)) throw ValidationError("need one correlation matrix per state");
    const Eigen::Index n = num_relays + 1;
    for (const auto& r : per_state) {
        if (r.rows() != n || r.cols() != n) throw ValidationError("correlation matrix must be (N+1)x(N+1)");
        for (Eigen::Index i = 0; i < n; ++i) {
            if (r(i, i) != 1.0) throw ValidationError("correlation diagonal must be one");
            for (Eigen::Index j = 0; j < n; ++j) {
                if (r(i, j) != r(j, i)) throw ValidationError("correlation matrix must be symmetric");
                if (!(r(i, j) >= 0.0 && r(i, j) <= 1.0)) throw ValidationError("correlation outside [0,1]");
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-12) throw ValidationError("input covariance is not positive semidefinite");
    }
}

std::vector<NodeMask> cutset_cuts(int num_relays) {
    std::vector<NodeMask> out;
    for (NodeMask r = 0; r < (NodeMask{1} << num_relays); ++r) out.push_back(1u | (r << 1));
    return out;
}

Eigen::MatrixXd cutset_coefficients(const NetworkConfig& config, const InputCorrelations& corr) {
    config.validate();
    corr.validate(config.num_relays);
    const int n = config.num_relays;
    const int nodes = config.num_nodes();
    const Eigen::MatrixXd h = build_gains(config);
    const auto cuts = cutset_cuts(n);
    const auto ns = num_states(n);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cuts.size()), static_cast<Eigen::Index>(ns));
    for (std::size_t c = 0; c < cuts.size(); ++c) {
        for (std::size_t s = 0; s < ns; ++s) {
            const StateVector m(n, static_cast<std::uint32_t>(s));
            std::vector<int> tx, rx;
            for (int i = 0; i < nodes; ++i) {
                const bool in_s = i <= n && ((cuts[c] >> i) & 1u);
                if (in_s && m.transmits(i)) tx.push_back(i);
                if (!in_s && m.listens(i)) rx.push_back(i);
            }
            if (tx.empty() || rx.empty()) continue;
            Eigen::MatrixXd g(rx.size(), tx.size());
            for (std::size_t a = 0; a < rx.size(); ++a)
                for (std::size_t b = 0; b < tx.size(); ++b)
                    g(a, b) = h(tx[b], rx[a]) * std::sqrt(config.power(tx[b]) / config.noise(rx[a]));
            Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(tx.size(), tx.size());
            if (!corr.independent())
                for (std::size_t a = 0; a < tx.size(); ++a)
                    for (std::size_t b = 0; b < tx.size(); ++b) sigma(a, b) = corr.per_state[s](tx[a], tx[b]);
            const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(rx.size(), rx.size()) + g * sigma * g.transpose();
            Eigen::LLT<Eigen::MatrixXd> llt(k);
            if (llt.info() != Eigen::Success) throw NumericalError("cut-set matrix is not positive definite");
            double ld = 0.0;
            for (Eigen::Index i = 0; i < k.rows(); ++i) ld += 2.0 * std::log2(llt.matrixLLT()(i, i));
            out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(s)) = ld;
        }
    }
    return out;
}

CutsetValue cutset_bound(const NetworkConfig& config, const StateDistribution& dist, const InputCorrelations& corr) {
    dist.validate();
    if (dist.num_relays != config.num_relays) throw ValidationError("state distribution does not match relay count");
    const Eigen::MatrixXd coeff = cutset_coefficients(config, corr);
    const Eigen::Map<const Eigen::VectorXd> p(dist.pmf.data(), static_cast<Eigen::Index>(dist.pmf.size()));
    const Eigen::VectorXd v = coeff * p;
    const auto cuts = cutset_cuts(config.num_relays);
    CutsetValue out{std::numeric_limits<double>::infinity(), cuts.front()};
    for (Eigen::Index c = 0; c < v.size(); ++c)
        if (v(c) < out.bits) {
            out.bits = v(c);
            out.binding = cuts[static_cast<std::size_t>(c)];
        }
    return out;
}

}  // namespace hdrelay

#pragma once

#include "hdrelay/entropy.hpp"
#include "hdrelay/network.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hdrelay {

// Jointly Gaussian inputs: one correlation matrix over nodes 0..N per state.
// An empty list means independent inputs in every state.
struct InputCorrelations {
    std::vector<Eigen::MatrixXd> per_state;

    bool independent() const { return per_state.empty(); }
    // Throws ValidationError for entries outside [0,1] or indefinite matrices.
    void validate(int num_relays) const;
};

// Source-side sets S (bit i = node i) with s in S and d not in S.
std::vector<NodeMask> cutset_cuts(int num_relays);

// coeff(c, s): mutual information across cut c in state s.
Eigen::MatrixXd cutset_coefficients(const NetworkConfig& config, const InputCorrelations& corr);

struct CutsetValue {
    double bits = 0.0;
    NodeMask binding = 1;
};

CutsetValue cutset_bound(const NetworkConfig& config, const StateDistribution& dist,
                         const InputCorrelations& corr);

}  // namespace hdrelay

#pragma once

#include "hdrelay/entropy.hpp"
#include "hdrelay/network.hpp"

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace hdrelay {

inline constexpr double kInfiniteNoise = std::numeric_limits<double>::infinity();

struct QuantizationParams {
    std::vector<double> nhat;  // relay q stored at [q-1]; +inf = relay effectively off

    static QuantizationParams all_off(int num_relays) {
        return {std::vector<double>(num_relays, kInfiniteNoise)};
    }
    double at(int relay) const { return nhat.at(relay - 1); }
    bool off(int relay) const { return at(relay) == kInfiniteNoise; }
    void validate(int num_relays) const;
};

struct CovMatrix {
    std::vector<int> labels;  // destination first, then listening relays
    Eigen::MatrixXd entries;

    double log2_det() const;
};

// Rows: destination and every relay of `quantizers` that listens in `state`
// and has finite quantization noise (an infinite-noise row decouples and
// cancels from every determinant ratio). Entries sum over messages whose owner
// is in `unknown_senders`.
CovMatrix cov_from_table(const NetworkConfig& config, const MessageAmplitudeTable& table,
                         const MessageMask& unknown_messages, const QuantizationParams& quant,
                         StateVector state, NodeMask quantizers);

// CF layout: source message plus one broadcast message per relay. The source
// share is nu(0,0,1), relay l broadcasts with omega(l).
CovMatrix build_cov_matrix(const NetworkConfig& config, const PowerAllocation& alloc,
                           const QuantizationParams& quant, StateVector state,
                           NodeMask unknown_senders, NodeMask quantizers);

// Both sides of the quantization constraint of relay q (source-coding side
// lhs must not exceed channel-coding side rhs).
struct FeasibilitySides {
    double lhs = 0.0;
    double rhs = 0.0;
};

FeasibilitySides cf_constraint_sides(const NetworkConfig& config, const PowerAllocation& alloc,
                                     const QuantizationParams& quant, const StateDistribution& dist,
                                     int relay);

QuantizationParams solve_quantization_noise(const NetworkConfig& config, const PowerAllocation& alloc,
                                            const StateDistribution& dist);

double cf_rate(const NetworkConfig& config, const PowerAllocation& alloc,
               const QuantizationParams& quant, const StateDistribution& dist);

// Per-state coefficients for fixed (alloc, quant): rate = rate.p and,
// for every relay with finite noise, constraint[i].p <= 0.
struct CfStateCoefficients {
    Eigen::VectorXd rate;
    std::vector<int> relays;
    std::vector<Eigen::VectorXd> constraint;
};

CfStateCoefficients cf_state_coefficients(const NetworkConfig& config, const PowerAllocation& alloc,
                                          const QuantizationParams& quant);

// Receive-power scale at relay q used to bracket its quantization noise.
double cf_noise_scale(const NetworkConfig& config, const PowerAllocation& alloc, int relay);

}  // namespace hdrelay

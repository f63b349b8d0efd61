#pragma once

#include "hdrelay/network.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace hdrelay {

struct BindingCut {
    int level = 1;
    int receiver = 0;
    friend bool operator==(const BindingCut&, const BindingCut&) = default;
};

struct RateBreakdown {
    std::vector<double> per_level;
    double total = 0.0;
    std::vector<BindingCut> binding;

    // "k1:l3;k2:l3"
    std::string binding_label() const;
};

// Messages still unknown when receiver l decodes level k from the source
// (after subtracting levels < k already decoded); `known` is the complement.
MessageMask df_known_source(std::span<const MessageId> layout, int num_relays, int num_levels,
                            int receiver, int level);
// Same for the term contributed by relay j.
MessageMask df_known_relay(std::span<const MessageId> layout, int num_relays, int num_levels,
                           int relay, int receiver, int level);

// Fixed-schedule cut coefficients. Row r = cuts[r] = (level k, receiver l);
// column s = state with mask s. rate of cut = coeff.row(r) . pmf.
struct DfCutMatrix {
    int num_levels = 1;
    std::vector<BindingCut> cuts;
    Eigen::MatrixXd coeff;
};

// Alloc and states are expressed in decoding order (config.relay_order applied).
DfCutMatrix df_cut_matrix(const NetworkConfig& config, const PowerAllocation& alloc, int num_levels);

RateBreakdown df_rate(const NetworkConfig& config, const PowerAllocation& alloc,
                      const StateDistribution& dist, int num_levels);

// Evaluates a rate breakdown from per-cut values.
RateBreakdown df_breakdown(const std::vector<BindingCut>& cuts, std::span<const double> values,
                           int num_levels);

StateDistribution apply_reuse_constraint(const StateDistribution& dist, int k);

// Largest number of simultaneous transmitters allowed with reuse factor k.
inline int reuse_cap(int num_relays, int k) { return (num_relays + 1) / k; }

}  // namespace hdrelay

#pragma once

#include "hdrelay/df.hpp"
#include "hdrelay/network.hpp"

namespace hdrelay {

// Two-relay alternating protocol. Phase 1 (share p1): relay 2 transmits its
// quantization index, relay 1 listens. Phase 2 (share p2): relay 1 forwards,
// relay 2 listens. The source transmits in both phases.
struct CombinedParams {
    double p1 = 0.5;
    double p2 = 0.5;
    double nu_s_s1 = 1.0;  // source, fresh DF message, phase 1
    double nu_s_s2 = 0.0;  // source, fresh CF-assisted message, phase 2
    double nu_s_11 = 0.0;  // source support of relay 1's message, phase 2
    double nu_1_11 = 1.0;  // relay 1, phase 2
    double omega_2 = 1.0;  // relay 2 broadcast, phase 1
    bool decode_interference = true;
    double nhat_2 = kQuantizationUnset;

    static constexpr double kQuantizationUnset = -1.0;

    void validate() const;
};

struct QuantizationFeasibility {
    double rhat_1 = 0.0;  // broadcast rate supported towards the destination
    double rhat_2 = 0.0;  // towards relay 1 (only when it decodes the index)
    double nhat_lower = 0.0;
};

QuantizationFeasibility quantization_feasibility(const NetworkConfig& config, const CombinedParams& params);

// per_level = {R_DF, R_CF}. If params.nhat_2 is unset the lower bound is used.
RateBreakdown combined_rate(const NetworkConfig& config, const CombinedParams& params);

}  // namespace hdrelay

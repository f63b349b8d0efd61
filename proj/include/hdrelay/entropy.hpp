#pragma once

#include "hdrelay/network.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace hdrelay {

struct MixtureComponent {
    double weight = 0.0;
    double variance = 1.0;
};

struct MixtureSpec {
    std::vector<MixtureComponent> components;
    void validate() const;
};

// Differential entropy in bits of the complex circular Gaussian mixture whose
// squared-magnitude density is an exponential mixture.
double mixture_entropy(const MixtureSpec& mix);

inline constexpr double kEntropyTolerance = 1e-10;

// stage 0: variance before decoding the level, stage 1: after.
// nullopt only when the receiver transmits.
using VarianceFn = std::function<std::optional<double>(StateVector, int stage)>;

// Bitmask of nodes whose state is known at the receiver; bit i is node i.
using NodeMask = std::uint32_t;

inline NodeMask node_range(int first, int last) {
    NodeMask m = 0;
    for (int i = first; i <= last; ++i) m |= NodeMask{1} << i;
    return m;
}

double q_mutual(int level, int sender, int receiver, NodeMask known, const StateDistribution& dist,
                const VarianceFn& variance);

}  // namespace hdrelay

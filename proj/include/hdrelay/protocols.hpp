#pragma once

#include "hdrelay/cf.hpp"
#include "hdrelay/combined.hpp"
#include "hdrelay/cutset.hpp"
#include "hdrelay/df.hpp"
#include "hdrelay/network.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hdrelay {

enum class Protocol { SingleHop, DF, PDF, DFNoReuse, CF, Combined, Cutset };

std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& name);
const std::vector<std::string>& protocol_names();

struct SearchOptions {
    KnowledgeMode schedule = KnowledgeMode::FixedSchedule;
    long budget = 4000;
    std::uint64_t seed = 1;
    bool parallel = true;
    bool normalize_power = false;  // single hop only: source uses (N+1)P
};

struct ProtocolResult {
    double rate = 0.0;
    RateBreakdown breakdown;
    std::string binding;
    long evaluations = 0;
    KnowledgeMode schedule = KnowledgeMode::FixedSchedule;
    std::vector<int> relay_order;
    std::optional<StateDistribution> state_dist;
    std::optional<PowerAllocation> alloc;
    std::optional<QuantizationParams> quant;
    std::optional<CombinedParams> combined;
};

// Every relay numbering for N <= 3, identity otherwise.
// "TLT=0.25 TTL=0.75" (states with mass above 1e-9)
std::string describe_schedule(const StateDistribution& d);

std::vector<std::vector<int>> relay_orders(int num_relays);

ProtocolResult single_hop_rate(const NetworkConfig& config, bool normalized);

// reuse_k = 1: full reuse; reuse_k = N+1: one transmitter at a time.
ProtocolResult optimize_df(const NetworkConfig& config, int num_levels, int reuse_k, const SearchOptions& opt);
ProtocolResult optimize_cf(const NetworkConfig& config, const SearchOptions& opt);
ProtocolResult optimize_combined(const NetworkConfig& config, const SearchOptions& opt);
ProtocolResult optimize_cutset(const NetworkConfig& config, const SearchOptions& opt);

ProtocolResult run_protocol(Protocol protocol, const NetworkConfig& config, const SearchOptions& opt);

// Best schedule for fixed per-state coefficients: maximise the sum over groups
// of min over that group's rows of coeff.row(r).p, p restricted to `allowed`.
struct ScheduleSolution {
    double value = 0.0;
    std::vector<double> pmf;  // full length, zeros outside `allowed`
};
ScheduleSolution maximin_schedule(const Eigen::MatrixXd& coeff, const std::vector<int>& row_group, int groups,
                                  const std::vector<std::uint32_t>& allowed);

}  // namespace hdrelay

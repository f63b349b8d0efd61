#pragma once

#include "hdrelay/network.hpp"
#include "hdrelay/protocols.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hdrelay {

enum class SweepKind { TwoRelayDistance, SingleRelayDistance, RelayCount, PathLoss, SinglePoint };

std::string to_string(SweepKind k);
SweepKind parse_sweep_kind(const std::string& name);

struct SweepSpec {
    SweepKind kind = SweepKind::SinglePoint;
    std::optional<double> start, stop, step;  // kind-specific defaults when absent
    double snr_db = 10.0;
    double theta = 4.0;
    std::vector<Protocol> protocols{Protocol::DF};
    Combining combining = Combining::NonCoherent;
    KnowledgeMode schedule = KnowledgeMode::FixedSchedule;
    bool normalize_power = false;
    std::uint64_t seed = 1;
    long budget = 4000;
    int n_relays = 2;  // SinglePoint only
    double r = 0.5;    // SinglePoint only

    void validate() const;
    // Values of the swept variable (r, N or theta depending on kind).
    std::vector<double> grid() const;
};

// key = value lines, '#' starts a comment.
SweepSpec parse_config(std::istream& in, const std::string& origin = "<config>");
SweepSpec load_config(const std::filesystem::path& path);

// Network for one grid point; theta overrides spec.theta for PathLoss.
NetworkConfig point_network(const SweepSpec& spec, double value, int num_relays);

struct ResultRow {
    double r = 0.0;
    int n = 0;
    double theta = 4.0;
    double snr_db = 10.0;
    std::string protocol;
    std::string schedule;
    std::string combining;
    double rate_bpcu = 0.0;  // NaN marks a failed point
    std::string binding;
    long evals = 0;
    std::uint64_t seed = 0;

    bool failed() const;
    friend bool operator==(const ResultRow& a, const ResultRow& b);
};

using ResultTable = std::vector<ResultRow>;

inline constexpr const char* kCsvHeader = "r,N,theta,snr_db,protocol,schedule,combining,rate_bpcu,binding,evals,seed";

ResultTable run_sweep(const SweepSpec& spec, bool parallel = true);

std::string format_csv(const ResultTable& table);
ResultTable parse_csv(const std::string& text);
std::string format_svg(const ResultTable& table, SweepKind kind);

struct OutputFlags {
    bool plot = false;
};

// Writes results.csv (and results.svg) into `dir`; returns the written paths.
std::vector<std::filesystem::path> emit_outputs(const ResultTable& table, const std::filesystem::path& dir,
                                                SweepKind kind, OutputFlags flags);

}  // namespace hdrelay

#include "hdrelay/error.hpp"
#include "hdrelay/experiments.hpp"
#include "hdrelay/protocols.hpp"
#include "hdrelay/selftest.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

using namespace hdrelay;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

int cmd_rate(const std::string& protocol_name, const std::string& config_path, std::optional<double> r,
             std::optional<double> snr_db, std::optional<double> theta, std::optional<int> n_relays,
             std::optional<std::string> schedule, std::optional<std::string> combining,
             std::optional<std::uint64_t> seed, std::optional<long> budget) {
    SweepSpec spec = load_config(config_path);
    spec.kind = SweepKind::SinglePoint;
    spec.start.reset();
    spec.stop.reset();
    spec.step.reset();
    spec.protocols = {parse_protocol(protocol_name)};
    if (r) spec.r = *r;
    if (snr_db) spec.snr_db = *snr_db;
    if (theta) spec.theta = *theta;
    if (n_relays) spec.n_relays = *n_relays;
    if (schedule) spec.schedule = *schedule == "random" ? KnowledgeMode::RandomAccess : KnowledgeMode::FixedSchedule;
    if (combining) spec.combining = *combining == "coherent" ? Combining::Coherent : Combining::NonCoherent;
    if (seed) spec.seed = *seed;
    if (budget) spec.budget = *budget;
    spec.validate();

    const auto table = run_sweep(spec);
    std::cout << format_csv(table);
    const auto& row = table.front();
    if (row.failed()) {
        std::cerr << row.binding << '\n';
        return kExitNumerical;
    }
    return 0;
}

int cmd_sweep(const std::string& kind, const std::string& config_path, const std::string& out_dir, bool plot) {
    SweepSpec spec = load_config(config_path);
    spec.kind = parse_sweep_kind(kind);
    spec.validate();
    const auto table = run_sweep(spec);
    for (const auto& p : emit_outputs(table, out_dir, spec.kind, OutputFlags{plot})) std::cout << p.string() << '\n';
    std::size_t failed = 0;
    for (const auto& row : table) failed += row.failed() ? 1 : 0;
    if (failed > 0) std::cerr << failed << " of " << table.size() << " points failed (recorded in the CSV)\n";
    return 0;
}

int cmd_selftest() {
    bool all = true;
    for (const auto& c : run_selftest()) {
        std::printf("%s  %s  (%s)\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        all = all && c.passed;
    }
    return all ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Achievable rates and cut-set bounds for half-duplex Gaussian relay networks"};
    app.require_subcommand(1);

    auto* rate = app.add_subcommand("rate", "Optimise one protocol at a single network point");
    std::string protocol, config, out_dir, kind;
    std::optional<double> r, snr_db, theta;
    std::optional<int> n_relays;
    std::optional<std::string> schedule, combining;
    std::optional<std::uint64_t> seed;
    std::optional<long> budget;
    rate->add_option("protocol", protocol, "one of: single-hop, df, pdf, df-noreuse, cf, combined, cutset")->required();
    rate->add_option("--config", config, "key/value config file")->required();
    rate->add_option("--r", r, "relay position parameter");
    rate->add_option("--snr-db", snr_db, "source-destination SNR in dB");
    rate->add_option("--theta", theta, "path loss exponent");
    rate->add_option("--n-relays", n_relays, "number of relays");
    rate->add_option("--schedule", schedule, "fixed|random")->check(CLI::IsMember({"fixed", "random"}));
    rate->add_option("--combining", combining, "coherent|noncoherent")->check(CLI::IsMember({"coherent", "noncoherent"}));
    rate->add_option("--seed", seed, "optimizer seed");
    rate->add_option("--budget", budget, "objective evaluations per search branch");

    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write results.csv");
    bool plot = false;
    sweep->add_option("kind", kind, "TwoRelayDistance|SingleRelayDistance|RelayCount|PathLoss|SinglePoint")->required();
    sweep->add_option("--config", config, "key/value config file")->required();
    sweep->add_option("--out", out_dir, "output directory")->required();
    sweep->add_flag("--plot", plot, "also write results.svg");

    app.add_subcommand("selftest", "Run the quick invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (rate->parsed())
            return cmd_rate(protocol, config, r, snr_db, theta, n_relays, schedule, combining, seed, budget);
        if (sweep->parsed()) return cmd_sweep(kind, config, out_dir, plot);
        return cmd_selftest();
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

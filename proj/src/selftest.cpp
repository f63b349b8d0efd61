#include "hdrelay/selftest.hpp"

#include "hdrelay/cf.hpp"
#include "hdrelay/combined.hpp"
#include "hdrelay/entropy.hpp"
#include "hdrelay/optimizer.hpp"
#include "hdrelay/protocols.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace hdrelay {

namespace {

NetworkConfig line(std::vector<double> pos) { return linear_network(pos, 4.0, 10.0, 1.0, Combining::NonCoherent); }

std::string num(double v) {
    std::ostringstream os;
    os.precision(8);
    os << v;
    return os.str();
}

}  // namespace

std::vector<CheckResult> run_selftest() {
    std::vector<CheckResult> out;
    auto check = [&out](const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
        try {
            const auto [ok, detail] = fn();
            out.push_back({name, ok, detail});
        } catch (const std::exception& e) {
            out.push_back({name, false, std::string("exception: ") + e.what()});
        }
    };
    const double c10 = std::log2(11.0);

    check("single hop closed form", [&] {
        const double r = single_hop_rate(line({0.0, 1.0}), false).rate;
        return std::pair{std::abs(r - 3.45943) < 1e-4, num(r)};
    });
    check("gaussian entropy closed form", [] {
        const double h = mixture_entropy({{{1.0, 2.5}}});
        const double ref = std::log2(std::numbers::pi * std::numbers::e * 2.5);
        return std::pair{std::abs(h - ref) < 1e-9, num(h)};
    });
    check("mixture entropy sandwich", [] {
        const MixtureSpec m{{{0.4, 1.0}, {0.6, 7.0}}};
        const double h = mixture_entropy(m);
        const double lo = 0.4 * std::log2(std::numbers::pi * std::numbers::e) +
                          0.6 * std::log2(std::numbers::pi * std::numbers::e * 7.0);
        const double hi = std::log2(std::numbers::pi * std::numbers::e * (0.4 + 0.6 * 7.0));
        return std::pair{lo < h && h < hi, num(lo) + " < " + num(h) + " < " + num(hi)};
    });
    check("silent relay gives direct rate", [&] {
        const auto net = line({0.0, 0.5, 1.0});
        PowerAllocation a(1);
        a.set_nu(kSource, kSource, 1, 1.0);
        const auto d = StateDistribution::point_mass(StateVector(1, 0b01), KnowledgeMode::FixedSchedule);
        const double r = df_rate(net, a, d, 1).total;
        return std::pair{std::abs(r - c10) < 1e-12, num(r)};
    });
    check("relays off in CF gives direct rate", [&] {
        const auto net = line({0.0, 0.3, 0.7, 1.0});
        PowerAllocation a(2);
        a.set_nu(kSource, kSource, 1, 1.0);
        const auto d = StateDistribution::point_mass(StateVector(2, 0b001), KnowledgeMode::FixedSchedule);
        const double r = cf_rate(net, a, QuantizationParams::all_off(2), d);
        return std::pair{std::abs(r - c10) < 1e-12, num(r)};
    });
    check("combined with empty first phase", [&] {
        CombinedParams p;
        p.p1 = 0.0;
        p.p2 = 1.0;
        const auto rb = combined_rate(line({0.0, 0.4, 0.6, 1.0}), p);
        return std::pair{rb.per_level[0] == 0.0, num(rb.per_level[0])};
    });
    check("df below cut-set, one relay", [&] {
        SearchOptions o;
        o.budget = 600;
        const auto net = line({0.0, 0.5, 1.0});
        const double df = optimize_df(net, 1, 1, o).rate;
        const double cs = optimize_cutset(net, o).rate;
        return std::pair{df <= cs + 1e-9 && df > 4.7, num(df) + " <= " + num(cs)};
    });
    check("optimizer determinism", [] {
        SearchSpec s;
        s.dims = {{0.0, 1.0}, {0.0, 1.0}};
        s.budget = 300;
        s.objective = [](int, std::span<const double> x) {
            return -(x[0] - 0.3) * (x[0] - 0.3) - (x[1] - 0.6) * (x[1] - 0.6);
        };
        const auto a = optimize_rate(s);
        const auto b = optimize_rate(s);
        return std::pair{a.params == b.params && a.best == b.best && std::abs(a.params[0] - 0.3) < 1e-4,
                         num(a.params[0]) + "," + num(a.params[1])};
    });
    return out;
}

}  // namespace hdrelay

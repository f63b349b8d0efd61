#include "hdrelay/cutset.hpp"
#include "hdrelay/df.hpp"
#include "hdrelay/error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <array>
#include <cmath>

using namespace hdrelay;

namespace {

struct OneRelay {
    double nu_u1 = 0.0, nu_u2 = 0.0, nu_sv = 0.0, nu_rv = 0.0;
    std::array<double, 4> pmf{};
};

// Hand enumeration for s - relay - d with up to two source levels.
double one_relay_oracle(const NetworkConfig& net, const OneRelay& x, bool coherent) {
    const double P = 10.0, N = 1.0;
    const double hs1 = std::pow(net.distance(0, 1), -2.0), hsd = std::pow(net.distance(0, 2), -2.0),
                 h1d = std::pow(net.distance(1, 2), -2.0);
    double relay_cut = 0.0, dest_cut = 0.0, level2 = 0.0;
    for (int m = 0; m < 4; ++m) {
        const double p = x.pmf[static_cast<std::size_t>(m)];
        if (p == 0.0) continue;
        const bool s_on = m & 1, r_on = m & 2;
        auto u = [&](double h, double nu) { return s_on ? h * h * P * nu : 0.0; };
        double v = 0.0;
        if (coherent) {
            const double amp = (s_on ? hsd * std::sqrt(P * x.nu_sv) : 0.0) + (r_on ? h1d * std::sqrt(P * x.nu_rv) : 0.0);
            v = amp * amp;
        } else {
            v = (s_on ? hsd * hsd * P * x.nu_sv : 0.0) + (r_on ? h1d * h1d * P * x.nu_rv : 0.0);
        }
        if (!r_on) {
            const double u1 = u(hs1, x.nu_u1), u2 = u(hs1, x.nu_u2);
            relay_cut += p * std::log2((N + u1 + u2) / (N + u2));
        }
        const double u1 = u(hsd, x.nu_u1), u2 = u(hsd, x.nu_u2);
        dest_cut += p * (std::log2((N + u1 + u2) / (N + u2)) + std::log2((N + u1 + u2 + v) / (N + u1 + u2)));
        level2 += p * std::log2((N + u2) / N);
    }
    return std::min(relay_cut, dest_cut) + level2;
}

PowerAllocation one_relay_alloc(const OneRelay& x) {
    PowerAllocation a(1);
    a.set_nu(0, 0, 1, x.nu_u1);
    a.set_nu(0, 0, 2, x.nu_u2);
    a.set_nu(0, 1, 1, x.nu_sv);
    a.set_nu(1, 1, 1, x.nu_rv);
    return a;
}

StateDistribution fixed_pmf(int n, std::vector<double> pmf) {
    StateDistribution d;
    d.num_relays = n;
    d.pmf = std::move(pmf);
    return d;
}

}  // namespace

TEST_CASE("no relays gives the direct capacity") {
    const double pos[] = {0.0, 1.0};
    const auto net = linear_network(pos, 4.0, 10.0, 1.0, Combining::NonCoherent);
    PowerAllocation a(0);
    a.set_nu(0, 0, 1, 1.0);
    const auto d = StateDistribution::point_mass(StateVector(0, 1), KnowledgeMode::FixedSchedule);
    CHECK(df_rate(net, a, d, 1).total == doctest::Approx(3.45943).epsilon(1e-5));
}

TEST_CASE("silent relays give the direct capacity") {
    const double pos[] = {0.0, 0.3, 0.6, 1.0};
    const auto net = linear_network(pos, 4.0, 10.0, 1.0, Combining::NonCoherent);
    PowerAllocation a(2);
    a.set_nu(0, 0, 1, 1.0);
    // listening relays sit closer to the source than the destination, so they never bind
    const auto listen = StateDistribution::point_mass(StateVector(2, 0b001), KnowledgeMode::FixedSchedule);
    CHECK(df_rate(net, a, listen, 1).total == doctest::Approx(oracle::cap(10.0)).epsilon(1e-12));
    // a relay that never listens cannot decode
    for (std::uint32_t mask : {0b011u, 0b111u}) {
        const auto d = StateDistribution::point_mass(StateVector(2, mask), KnowledgeMode::FixedSchedule);
        CHECK(df_rate(net, a, d, 1).total == 0.0);
    }
}

TEST_CASE("one relay matches hand enumeration") {
    const double pos[] = {0.0, 0.45, 1.0};
    const OneRelay cases[] = {
        {0.7, 0.0, 0.3, 1.0, {0.0, 0.55, 0.0, 0.45}},
        {0.5, 0.0, 0.5, 0.8, {0.05, 0.4, 0.15, 0.4}},
        {0.4, 0.2, 0.3, 0.9, {0.0, 0.6, 0.0, 0.4}},
        {0.3, 0.3, 0.4, 1.0, {0.1, 0.3, 0.2, 0.4}},
    };
    for (auto c : {Combining::NonCoherent, Combining::Coherent}) {
        const auto net = linear_network(pos, 4.0, 10.0, 1.0, c);
        for (const auto& x : cases) {
            const int levels = x.nu_u2 > 0.0 ? 2 : 1;
            const auto d = fixed_pmf(1, {x.pmf.begin(), x.pmf.end()});
            const double got = df_rate(net, one_relay_alloc(x), d, levels).total;
            CHECK(std::abs(got - one_relay_oracle(net, x, c == Combining::Coherent)) < 1e-10);
        }
    }
}

TEST_CASE("two relay residual variances follow the term lists") {
    const double pos[] = {0.0, 0.3, 0.65, 1.0};
    const auto net = linear_network(pos, 4.0, 10.0, 1.0, Combining::Coherent);
    const auto h = build_gains(net);
    const int L = 2;
    PowerAllocation a(2);
    a.set_nu(0, 0, 1, 0.2);
    a.set_nu(0, 0, 2, 0.1);
    a.set_nu(0, 1, 1, 0.15);
    a.set_nu(0, 2, 1, 0.1);
    a.set_nu(0, 2, 2, 0.2);
    a.set_nu(1, 1, 1, 0.5);
    a.set_nu(1, 2, 1, 0.3);
    a.set_nu(2, 2, 1, 0.4);
    a.set_nu(2, 2, 2, 0.5);
    const double P = 10.0;

    auto src = [&](StateVector s, int k, int l) { return s.transmits(0) ? h(0, l) * h(0, l) * P * a.nu(0, 0, k) : 0.0; };
    // relay j's messages are on air only while relay j transmits
    auto rel = [&](StateVector s, int j, int k, int l) {
        if (!s.transmits(j)) return 0.0;
        double amp = s.transmits(0) ? h(0, l) * std::sqrt(P * a.nu(0, j, k)) : 0.0;
        for (int i = k; i <= j; ++i)
            if (s.transmits(i)) amp += h(i, l) * std::sqrt(P * a.nu(i, j, k));
        return amp * amp;
    };
    auto src_levels = [&](StateVector s, int from, int l) {
        double v = 0.0;
        for (int k = from; k <= L; ++k) v += src(s, k, l);
        return v;
    };
    auto rel_levels = [&](StateVector s, int j, int from, int to, int l) {
        double v = 0.0;
        for (int k = from; k <= std::min({to, j, L}); ++k) v += rel(s, j, k, l);
        return v;
    };
    const auto layout = df_messages(2, L);

    SUBCASE("source term at relay 1") {
        const StateVector s(2, 0b101);
        for (int k = 0; k <= L; ++k) {
            const double expect = src_levels(s, k + 1, 1) + rel_levels(s, 2, 2, 2, 1) + net.noise(1);
            const auto got = residual_variance(net, a, layout, s, 1, df_known_source(layout, 2, L, 1, k));
            CHECK(got.value() == doctest::Approx(expect).epsilon(1e-13));
        }
    }
    SUBCASE("relay terms at the destination") {
        const int l = 3;
        for (std::uint32_t mask : {0b111u, 0b110u, 0b011u}) {
            const StateVector s(2, mask);
            for (int j = 1; j <= 2; ++j)
                for (int k = 0; k <= std::min(j, L); ++k) {
                    double expect = src_levels(s, 1, l) + rel_levels(s, j, k + 1, j, l) + net.noise(l);
                    for (int jp = 1; jp <= j - 1; ++jp) expect += rel_levels(s, jp, 1, jp, l);
                    const auto got = residual_variance(net, a, layout, s, l, df_known_relay(layout, 2, L, j, l, k));
                    CHECK(got.value() == doctest::Approx(expect).epsilon(1e-13));
                }
        }
    }
    SUBCASE("relay term at relay 2") {
        const StateVector s(2, 0b011);
        const int l = 2, j = 1;
        for (int k = 0; k <= 1; ++k) {
            const double expect = src_levels(s, 1, l) + rel_levels(s, j, k + 1, j, l) + net.noise(l);
            const auto got = residual_variance(net, a, layout, s, l, df_known_relay(layout, 2, L, j, l, k));
            CHECK(got.value() == doctest::Approx(expect).epsilon(1e-13));
        }
    }
}

TEST_CASE("reuse constraint") {
    const auto u = StateDistribution::uniform(2, KnowledgeMode::FixedSchedule);
    CHECK(apply_reuse_constraint(u, 1).pmf == u.pmf);

    const auto k3 = apply_reuse_constraint(u, 3);
    for (std::size_t s = 0; s < k3.pmf.size(); ++s)
        if (StateVector(2, static_cast<std::uint32_t>(s)).num_transmitters() > 1) CHECK(k3.pmf[s] == 0.0);

    const auto k2 = apply_reuse_constraint(u, 2);
    CHECK(reuse_cap(2, 2) == 1);
    double total = 0.0;
    for (std::size_t s = 0; s < k2.pmf.size(); ++s) {
        const int t = StateVector(2, static_cast<std::uint32_t>(s)).num_transmitters();
        if (t >= 2) CHECK(k2.pmf[s] == 0.0);
        else CHECK(k2.pmf[s] == doctest::Approx(0.25));
        total += k2.pmf[s];
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK(k2.reuse_factor == 2);

    const auto all_on = StateDistribution::point_mass(StateVector(2, 0b111), KnowledgeMode::FixedSchedule);
    CHECK_THROWS_AS(apply_reuse_constraint(all_on, 3), InfeasibleError);
}

TEST_CASE("binding cut attains the minimum") {
    const double pos[] = {0.0, 0.4, 0.7, 1.0};
    const auto net = linear_network(pos, 4.0, 10.0, 1.0, Combining::NonCoherent);
    PowerAllocation a(2);
    a.set_nu(0, 0, 1, 0.5);
    a.set_nu(0, 0, 2, 0.2);
    a.set_nu(0, 1, 1, 0.1);
    a.set_nu(0, 2, 1, 0.1);
    a.set_nu(1, 1, 1, 0.6);
    a.set_nu(1, 2, 1, 0.4);
    a.set_nu(2, 2, 1, 0.5);
    a.set_nu(2, 2, 2, 0.5);
    const auto d = fixed_pmf(2, {0.0, 0.3, 0.1, 0.2, 0.0, 0.2, 0.0, 0.2});
    const auto cm = df_cut_matrix(net, a, 2);
    Eigen::Map<const Eigen::VectorXd> p(d.pmf.data(), static_cast<Eigen::Index>(d.pmf.size()));
    const Eigen::VectorXd values = cm.coeff * p;
    const auto rb = df_rate(net, a, d, 2);
    REQUIRE(rb.per_level.size() == 2);
    REQUIRE(rb.binding.size() == 2);
    double total = 0.0;
    for (int k = 1; k <= 2; ++k) {
        double mn = INFINITY;
        double at_binding = NAN;
        for (std::size_t r = 0; r < cm.cuts.size(); ++r) {
            if (cm.cuts[r].level != k) continue;
            mn = std::min(mn, values(static_cast<Eigen::Index>(r)));
            if (cm.cuts[r] == rb.binding[static_cast<std::size_t>(k - 1)]) at_binding = values(static_cast<Eigen::Index>(r));
        }
        CHECK(rb.per_level[static_cast<std::size_t>(k - 1)] == doctest::Approx(std::max(0.0, mn)));
        CHECK(at_binding == mn);
        total += rb.per_level[static_cast<std::size_t>(k - 1)];
    }
    CHECK(rb.total == doctest::Approx(total));
    CHECK(rb.binding_label().find("k1:l") == 0);
}

TEST_CASE("random access with a point mass equals the fixed schedule") {
    const double pos[] = {0.0, 0.5, 1.0};
    const auto net = linear_network(pos, 4.0, 10.0, 1.0, Combining::NonCoherent);
    const OneRelay x{0.6, 0.0, 0.4, 1.0, {}};
    for (std::uint32_t mask : {0b01u, 0b11u}) {
        const auto f = StateDistribution::point_mass(StateVector(1, mask), KnowledgeMode::FixedSchedule);
        const auto r = StateDistribution::point_mass(StateVector(1, mask), KnowledgeMode::RandomAccess);
        CHECK(df_rate(net, one_relay_alloc(x), r, 1).total ==
              doctest::Approx(df_rate(net, one_relay_alloc(x), f, 1).total).epsilon(1e-9));
    }
}

TEST_CASE("random access rate is finite and non-negative for mixed schedules") {
    const double pos[] = {0.0, 0.5, 1.0};
    const auto net = linear_network(pos, 4.0, 10.0, 1.0, Combining::NonCoherent);
    const OneRelay x{0.6, 0.0, 0.4, 1.0, {}};
    const auto d = [] {
        auto u = StateDistribution::uniform(1, KnowledgeMode::RandomAccess);
        u.pmf = {0.0, 0.5, 0.0, 0.5};
        return u;
    }();
    const auto rb = df_rate(net, one_relay_alloc(x), d, 1);
    CHECK(std::isfinite(rb.total));
    CHECK(rb.total >= 0.0);
}

TEST_CASE("df stays below the cut-set bound for the same schedule") {
    const double pos[] = {0.0, 0.5, 1.0};
    const auto net = linear_network(pos, 4.0, 10.0, 1.0, Combining::NonCoherent);
    const OneRelay x{0.6, 0.0, 0.4, 1.0, {0.0, 0.55, 0.0, 0.45}};
    const auto d = fixed_pmf(1, {x.pmf.begin(), x.pmf.end()});
    CHECK(df_rate(net, one_relay_alloc(x), d, 1).total <= cutset_bound(net, d, {}).bits + 1e-12);
}

TEST_CASE("invalid inputs") {
    const double pos[] = {0.0, 0.5, 1.0};
    const auto net = linear_network(pos, 4.0, 10.0, 1.0, Combining::NonCoherent);
    PowerAllocation a(1);
    a.set_nu(0, 0, 1, 1.0);
    const auto d = StateDistribution::uniform(1, KnowledgeMode::FixedSchedule);
    CHECK_THROWS_AS(df_rate(net, a, d, 3), ValidationError);
    CHECK_THROWS_AS(df_rate(net, PowerAllocation(2), d, 1), ValidationError);
    a.set_nu(0, 1, 1, 0.5);
    CHECK_THROWS_AS(df_rate(net, a, d, 1), ValidationError);
}

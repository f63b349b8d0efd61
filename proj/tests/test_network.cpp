#include "hdrelay/error.hpp"
#include "hdrelay/network.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace hdrelay;

namespace {

NetworkConfig line(std::vector<double> pos, Combining c = Combining::NonCoherent, double theta = 4.0) {
    return linear_network(pos, theta, 10.0, 1.0, c);
}

MessageMask only(std::span<const MessageId> layout, std::initializer_list<MessageId> ids) {
    MessageMask m(layout.size(), false);
    for (const auto& id : ids) m[static_cast<std::size_t>(find_message(layout, id))] = true;
    return m;
}

}  // namespace

TEST_CASE("gains follow the power law") {
    const auto net = line({0.0, 0.5, 0.75, 1.0});
    const auto h = build_gains(net);
    CHECK(h(0, 3) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(h(0, 1) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(h(2, 3) == doctest::Approx(16.0).epsilon(1e-15));
    CHECK(h(1, 0) == h(0, 1));
}

TEST_CASE("gain strictly decreases with distance") {
    for (double theta : {2.0, 3.0, 4.0, 6.0}) {
        double prev = INFINITY;
        for (double d = 0.01; d < 5.0; d *= 1.3) {
            const auto h = build_gains(line({0.0, d}, Combining::NonCoherent, theta));
            CHECK(h(0, 1) < prev);
            prev = h(0, 1);
        }
    }
}

TEST_CASE("zero distance is floored, negative distance rejected") {
    const auto net = line({0.0, 0.0, 1.0});
    CHECK(net.distance(0, 1) == kDistanceFloor);
    CHECK(std::isfinite(build_gains(net)(0, 1)));

    auto bad = line({0.0, 0.5, 1.0});
    bad.distance(0, 1) = bad.distance(1, 0) = -0.1;
    CHECK_THROWS_AS(build_gains(bad), DomainError);
}

TEST_CASE("config validation") {
    auto net = line({0.0, 0.5, 1.0});
    CHECK_NOTHROW(net.validate());
    auto asym = net;
    asym.distance(0, 1) = 0.3;
    CHECK_THROWS_AS(asym.validate(), ValidationError);
    auto neg_power = net;
    neg_power.tx_power[1] = -1.0;
    CHECK_THROWS_AS(neg_power.validate(), ValidationError);
    auto zero_noise = net;
    zero_noise.noise_power[0] = 0.0;
    CHECK_THROWS_AS(zero_noise.validate(), ValidationError);
    auto bad_order = line({0.0, 0.3, 0.6, 1.0});
    bad_order.relay_order = {1, 1};
    CHECK_THROWS_AS(bad_order.validate(), ValidationError);
}

TEST_CASE("relay order relabels nodes") {
    auto net = line({0.0, 0.2, 0.7, 1.0});
    net.relay_order = {2, 1};
    const auto r = apply_relay_order(net);
    CHECK(r.distance(0, 1) == doctest::Approx(0.7));
    CHECK(r.distance(0, 2) == doctest::Approx(0.2));
    CHECK(r.distance(1, 3) == doctest::Approx(0.3));
    CHECK(r.relay_order == std::vector<int>{1, 2});
}

TEST_CASE("state vectors") {
    const StateVector s(2, 0b101);
    CHECK(s.transmits(0));
    CHECK(s.listens(1));
    CHECK(s.transmits(2));
    CHECK(s.listens(3));
    CHECK(s.num_transmitters() == 2);
    CHECK(s.to_string() == "TLT");
    const std::vector<NodeState> v{NodeState::Transmit, NodeState::Listen, NodeState::Transmit};
    CHECK(StateVector::from_states(v) == s);
}

TEST_CASE("state distribution validation") {
    auto d = StateDistribution::uniform(1, KnowledgeMode::FixedSchedule);
    CHECK_NOTHROW(d.validate());
    d.pmf[0] += 1e-9;
    CHECK_THROWS_AS(d.validate(), ValidationError);
    auto r = StateDistribution::point_mass(StateVector(2, 0b111), KnowledgeMode::FixedSchedule);
    r.reuse_factor = 2;
    CHECK_THROWS_AS(r.validate(), ValidationError);
}

TEST_CASE("power allocation caps per node") {
    PowerAllocation a(2);
    a.set_nu(0, 0, 1, 0.6);
    a.set_nu(0, 1, 1, 0.4);
    CHECK_NOTHROW(a.validate());
    a.set_nu(0, 2, 1, 0.1);
    CHECK_THROWS_AS(a.validate(), ValidationError);
}

TEST_CASE("single source sender amplitude") {
    const auto net = line({0.0, 1.0});
    PowerAllocation a(0);
    a.set_nu(0, 0, 1, 1.0);
    const auto layout = df_messages(0, 1);
    const auto t = amplitude_table(net, a, layout, StateVector(0, 0b1));
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].amp[1] == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("coherent co-senders add amplitudes, non-coherent add powers") {
    // relay 1 and source at equal distance from the destination, equal amplitude
    const double pos[] = {0.0, 0.0, 1.0};
    for (auto c : {Combining::Coherent, Combining::NonCoherent}) {
        auto net = linear_network(pos, 4.0, 10.0, 1.0, c);
        PowerAllocation a(1);
        a.set_nu(0, 1, 1, 0.5);
        a.set_nu(1, 1, 1, 0.5);
        const auto layout = df_messages(1, 1);
        const auto t = amplitude_table(net, a, layout, StateVector(1, 0b11));
        const int v = find_message(layout, {MessageKind::RelayLevel, 1, 1});
        const double amp2 = 0.5 * 10.0;
        CHECK(t.power(v, 2) == doctest::Approx(c == Combining::Coherent ? 4.0 * amp2 : 2.0 * amp2));
    }
}

TEST_CASE("coherent power dominates non-coherent") {
    const double pos[] = {0.0, 0.3, 0.6, 1.0};
    PowerAllocation a(2);
    a.set_nu(0, 2, 1, 0.3);
    a.set_nu(1, 2, 1, 0.4);
    a.set_nu(2, 2, 1, 0.5);
    const auto layout = df_messages(2, 1);
    const int v = find_message(layout, {MessageKind::RelayLevel, 2, 1});
    for (std::uint32_t mask = 0; mask < 8; ++mask) {
        const StateVector s(2, mask);
        const auto tc = amplitude_table(linear_network(pos, 4, 10, 1, Combining::Coherent), a, layout, s);
        const auto tn = amplitude_table(linear_network(pos, 4, 10, 1, Combining::NonCoherent), a, layout, s);
        for (int rx = 1; rx <= 3; ++rx) {
            CHECK(tc.power(v, rx) >= tn.power(v, rx) - 1e-12);
            const int active = (mask & 1) + ((mask >> 1) & 1) + ((mask >> 2) & 1);
            if (s.listens(rx) && active <= 1 && s.transmits(2)) CHECK(tc.power(v, rx) == doctest::Approx(tn.power(v, rx)));
        }
    }
}

TEST_CASE("listening nodes contribute nothing, transmitting receivers hear nothing") {
    const auto net = line({0.0, 0.4, 0.7, 1.0});
    PowerAllocation a(2);
    a.set_nu(0, 0, 1, 0.5);
    a.set_nu(1, 1, 1, 1.0);
    a.set_nu(2, 2, 1, 1.0);
    const auto layout = df_messages(2, 1);
    const auto t = amplitude_table(net, a, layout, StateVector(2, 0b011));  // relay 2 listens
    const int v2 = find_message(layout, {MessageKind::RelayLevel, 2, 1});
    for (int rx = 0; rx <= 3; ++rx) CHECK(t.power(v2, rx) == 0.0);
    MessageMask all(layout.size(), true);
    CHECK(received_power(t, all, 1) == 0.0);
    CHECK(second_order_stats(t, all, 1, 3).covariance == 0.0);
}

TEST_CASE("second order stats: single sender") {
    const auto net = line({0.0, 0.5, 1.0});
    PowerAllocation a(1);
    a.set_nu(0, 0, 1, 1.0);
    const auto layout = df_messages(1, 1);
    const auto t = amplitude_table(net, a, layout, StateVector(1, 0b01));
    const auto st = second_order_stats(t, MessageMask(layout.size(), true), 2, 1);
    CHECK(st.power_a == doctest::Approx(10.0));
    CHECK(st.power_b == doctest::Approx(160.0));
    CHECK(st.covariance == doctest::Approx(40.0));
    const auto none = second_order_stats(t, MessageMask(layout.size(), false), 2, 1);
    CHECK(none.power_a == 0.0);
    CHECK(none.covariance == 0.0);
}

TEST_CASE("second order stats: row-wise sums") {
    MessageAmplitudeTable t;
    t.num_nodes = 3;
    t.messages = {{MessageKind::SourceLevel, 0, 1}, {MessageKind::SourceLevel, 0, 2}};
    // nodes: 0 unused, 1 relay, 2 destination
    t.rows = {{0, 0, {0.0, 2.0, 1.0}}, {1, 0, {0.0, -1.0, 3.0}}};
    const auto st = second_order_stats(t, MessageMask{true, true}, 2, 1);
    CHECK(st.power_a == doctest::Approx(10.0));
    CHECK(st.covariance == doctest::Approx(-1.0));
}

TEST_CASE("covariance matrix is consistent and PSD") {
    const auto net = line({0.0, 0.35, 0.65, 1.0}, Combining::Coherent);
    PowerAllocation a(2);
    a.set_nu(0, 0, 1, 0.3);
    a.set_nu(0, 1, 1, 0.2);
    a.set_nu(0, 2, 1, 0.2);
    a.set_nu(1, 1, 1, 0.6);
    a.set_nu(1, 2, 1, 0.3);
    a.set_nu(2, 2, 1, 0.9);
    const auto layout = df_messages(2, 1);
    for (std::uint32_t mask = 0; mask < 8; ++mask) {
        const auto t = amplitude_table(net, a, layout, StateVector(2, mask));
        for (std::uint32_t sel = 0; sel < (1u << layout.size()); ++sel) {
            MessageMask m(layout.size());
            for (std::size_t i = 0; i < layout.size(); ++i) m[i] = (sel >> i) & 1u;
            for (int x = 1; x <= 3; ++x)
                for (int y = 1; y <= 3; ++y) {
                    const auto st = second_order_stats(t, m, x, y);
                    CHECK(second_order_stats(t, m, x, x).covariance == doctest::Approx(st.power_a));
                    CHECK(st.power_a * st.power_b - st.covariance * st.covariance >= -1e-9);
                }
        }
    }
}

TEST_CASE("residual variance simple cases") {
    const auto net = line({0.0, 0.5, 1.0});
    PowerAllocation a(1);
    a.set_nu(0, 0, 1, 0.5);
    const auto layout = df_messages(1, 1);
    const StateVector s(1, 0b01);
    CHECK(residual_variance(net, a, layout, s, 2, MessageMask(layout.size(), true)).value() == 1.0);
    // unknown interferer received with power 5 at the destination (h = 1)
    CHECK(residual_variance(net, a, layout, s, 2, MessageMask(layout.size(), false)).value() == doctest::Approx(6.0));
    CHECK_FALSE(residual_variance(net, a, layout, StateVector(1, 0b11), 1, MessageMask(layout.size(), true)).has_value());
}

TEST_CASE("message layout and naming") {
    const auto df = df_messages(2, 2);
    CHECK(df.size() == 2 + 1 + 2);
    CHECK(to_string(MessageId{MessageKind::SourceLevel, 0, 1}) == "U1");
    CHECK(to_string(MessageId{MessageKind::RelayLevel, 2, 1}) == "V2.1");
    CHECK(to_string(MessageId{MessageKind::Broadcast, 2, 1}) == "W2");
    CHECK(co_senders({MessageKind::RelayLevel, 2, 1}) == std::vector<int>{0, 1, 2});
    CHECK(co_senders({MessageKind::RelayLevel, 2, 2}) == std::vector<int>{0, 2});
    CHECK(owner({MessageKind::RelayLevel, 2, 2}) == 2);
    CHECK(find_message(df, {MessageKind::RelayLevel, 1, 2}) == -1);
}

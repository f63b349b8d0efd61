#include "hdrelay/combined.hpp"

#include "hdrelay/cf.hpp"
#include "hdrelay/error.hpp"

#include <cmath>
#include <numbers>

namespace hdrelay {

namespace {

double cap(double snr) { return std::log2(1.0 + snr); }

constexpr std::uint32_t kPhase1 = 0b101;  // s and relay 2 transmit
constexpr std::uint32_t kPhase2 = 0b011;  // s and relay 1 transmit

struct Phases {
    NetworkConfig cfg;
    MessageAmplitudeTable one;  // messages: x_s1, w_2
    MessageAmplitudeTable two;  // messages: x_s2, v_1
    int d = 3;

    Phases(const NetworkConfig& config, const CombinedParams& p) : cfg(apply_relay_order(config)) {
        if (config.num_relays != 2) throw ValidationError("combined protocol needs exactly two relays");
        p.validate();
        const Eigen::MatrixXd h = build_gains(cfg);
        PowerAllocation a1(2);
        a1.set_nu(kSource, kSource, 1, p.nu_s_s1);
        a1.set_omega(2, p.omega_2);
        const std::vector<MessageId> l1{{MessageKind::SourceLevel, 0, 1}, {MessageKind::Broadcast, 2, 1}};
        one = amplitude_table(cfg, h, a1, l1, StateVector(2, kPhase1));

        PowerAllocation a2(2);
        a2.set_nu(kSource, kSource, 2, p.nu_s_s2);
        a2.set_nu(kSource, 1, 1, p.nu_s_11);
        a2.set_nu(1, 1, 1, p.nu_1_11);
        const std::vector<MessageId> l2{{MessageKind::SourceLevel, 0, 2}, {MessageKind::RelayLevel, 1, 1}};
        two = amplitude_table(cfg, h, a2, l2, StateVector(2, kPhase2));
    }

    static double pw(const MessageAmplitudeTable& t, MessageMask m, int rx) { return received_power(t, m, rx); }
};

const MessageMask kFirst{true, false};
const MessageMask kSecond{false, true};
const MessageMask kBoth{true, true};

}  // namespace

void CombinedParams::validate() const {
    auto unit = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(std::string(name) + " must lie in [0,1]");
    };
    unit(p1, "p1");
    unit(p2, "p2");
    if (std::abs(p1 + p2 - 1.0) > 1e-12) throw ValidationError("p1 + p2 must equal one");
    unit(nu_s_s1, "nu_s_s1");
    unit(nu_s_s2, "nu_s_s2");
    unit(nu_s_11, "nu_s_11");
    unit(nu_1_11, "nu_1_11");
    unit(omega_2, "omega_2");
    if (nu_s_s2 + nu_s_11 > 1.0 + 1e-9) throw ValidationError("source fractions of phase 2 exceed one");
    if (!(nhat_2 >= 0.0) && nhat_2 != kQuantizationUnset) throw ValidationError("nhat_2 must be >= 0");
}

QuantizationFeasibility quantization_feasibility(const NetworkConfig& config, const CombinedParams& params) {
    const Phases ph(config, params);
    const auto& c = ph.cfg;
    QuantizationFeasibility q;
    const double vsd1 = Phases::pw(ph.one, kFirst, ph.d);
    const double vs11 = Phases::pw(ph.one, kFirst, 1);
    const double v2d = Phases::pw(ph.one, kSecond, ph.d);
    const double v21 = Phases::pw(ph.one, kSecond, 1);
    q.rhat_1 = params.p1 * cap(v2d / (c.noise(ph.d) + vsd1));

    auto bound = [&](double bracket, double rhat) {
        if (rhat <= 0.0) return kInfiniteNoise;
        if (params.p2 <= 0.0) return 0.0;
        return bracket / std::expm1(rhat / params.p2 * std::numbers::ln2);
    };
    const auto st = second_order_stats(ph.two, kBoth, 2, ph.d);
    const double bracket = st.power_a + c.noise(2) - st.covariance * st.covariance / (st.power_b + c.noise(ph.d));
    q.nhat_lower = bound(bracket, q.rhat_1);
    if (params.decode_interference) {
        q.rhat_2 = params.p1 * cap(v21 / (c.noise(1) + vs11));
        q.nhat_lower = std::max(q.nhat_lower, bound(Phases::pw(ph.two, kFirst, 2) + c.noise(2), q.rhat_2));
    }
    return q;
}

RateBreakdown combined_rate(const NetworkConfig& config, const CombinedParams& params) {
    const Phases ph(config, params);
    const auto& c = ph.cfg;
    const auto feas = quantization_feasibility(config, params);
    double nhat = params.nhat_2 == CombinedParams::kQuantizationUnset ? feas.nhat_lower : params.nhat_2;
    if (nhat < feas.nhat_lower * (1.0 - 1e-9))
        throw ValidationError("nhat_2 is below its feasibility bound");

    const double nd = c.noise(ph.d);
    const double vsd1 = Phases::pw(ph.one, kFirst, ph.d);
    const double vs11 = Phases::pw(ph.one, kFirst, 1);
    const double v21 = Phases::pw(ph.one, kSecond, 1);
    const double relay_cut = params.p1 * cap(vs11 / (c.noise(1) + (params.decode_interference ? 0.0 : v21)));

    double dest_cut = params.p1 * cap(vsd1 / nd);
    double r_cf = 0.0;
    if (params.p2 > 0.0) {
        QuantizationParams q{{kInfiniteNoise, nhat}};
        const NodeMask relay2 = NodeMask{1} << 2;
        const StateVector m(2, kPhase2);
        const double k1 = cov_from_table(c, ph.two, kBoth, q, m, relay2).log2_det();
        const double k2 = cov_from_table(c, ph.two, kFirst, q, m, relay2).log2_det();
        dest_cut += params.p2 * (k1 - k2);
        const double at_relay = nhat == kInfiniteNoise ? 0.0 : Phases::pw(ph.two, kFirst, 2) / (c.noise(2) + nhat);
        r_cf = params.p2 * cap(at_relay + Phases::pw(ph.two, kFirst, ph.d) / nd);
    }

    RateBreakdown rb;
    const bool dest_binds = dest_cut <= relay_cut;
    rb.per_level = {std::max(0.0, std::min(dest_cut, relay_cut)), std::max(0.0, r_cf)};
    rb.binding = {{1, dest_binds ? ph.d : 1}, {2, ph.d}};
    rb.total = rb.per_level[0] + rb.per_level[1];
    return rb;
}

}  // namespace hdrelay

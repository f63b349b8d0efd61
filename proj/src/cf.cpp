#include "hdrelay/cf.hpp"

#include "hdrelay/error.hpp"

#include <cmath>

namespace hdrelay {

void QuantizationParams::validate(int num_relays) const {
    if (static_cast<int>(nhat.size()) != num_relays) throw ValidationError("need one quantization noise per relay");
    for (double v : nhat)
        if (!(v >= 0.0)) throw ValidationError("quantization noise must be >= 0");
}

double CovMatrix::log2_det() const {
    Eigen::LLT<Eigen::MatrixXd> llt(entries);
    if (llt.info() != Eigen::Success) throw NumericalError("covariance matrix is not positive definite");
    const auto& l = llt.matrixLLT();
    double s = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log2(l(i, i));
    return 2.0 * s;
}

CovMatrix cov_from_table(const NetworkConfig& config, const MessageAmplitudeTable& table,
                         const MessageMask& unknown_messages, const QuantizationParams& quant,
                         StateVector state, NodeMask quantizers) {
    CovMatrix k;
    k.labels.push_back(config.destination());
    for (int j = 1; j <= config.num_relays; ++j)
        if (((quantizers >> j) & 1u) && state.listens(j) && !quant.off(j)) k.labels.push_back(j);
    const auto n = static_cast<Eigen::Index>(k.labels.size());
    k.entries = Eigen::MatrixXd::Zero(n, n);
    for (const auto& row : table.rows) {
        if (!unknown_messages[row.message]) continue;
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b) k.entries(a, b) += row.amp[k.labels[a]] * row.amp[k.labels[b]];
    }
    k.entries(0, 0) += config.noise(config.destination());
    for (Eigen::Index a = 1; a < n; ++a) k.entries(a, a) += quant.at(k.labels[a]) + config.noise(k.labels[a]);
    return k;
}

namespace {

struct CfContext {
    NetworkConfig cfg;
    int n = 0;
    std::vector<MessageId> layout;
    std::vector<MessageAmplitudeTable> tables;

    CfContext(const NetworkConfig& config, const PowerAllocation& alloc)
        : cfg(apply_relay_order(config)), n(config.num_relays), layout(cf_messages(config.num_relays)) {
        alloc.validate();
        if (alloc.num_relays() != n) throw ValidationError("allocation does not match relay count");
        const Eigen::MatrixXd h = build_gains(cfg);
        for (std::size_t s = 0; s < num_states(n); ++s)
            tables.push_back(amplitude_table(cfg, h, alloc, layout, StateVector(n, static_cast<std::uint32_t>(s))));
    }

    MessageMask owned_by(NodeMask nodes) const {
        MessageMask m(layout.size());
        for (std::size_t i = 0; i < layout.size(); ++i) m[i] = ((nodes >> owner(layout[i])) & 1u) != 0;
        return m;
    }

    double logdet(std::size_t s, NodeMask unknown, NodeMask quantizers, const QuantizationParams& q) const {
        return cov_from_table(cfg, tables[s], owned_by(unknown), q, StateVector(n, static_cast<std::uint32_t>(s)), quantizers)
            .log2_det();
    }

    double power_at(std::size_t s, NodeMask owners, int rx) const {
        return received_power(tables[s], owned_by(owners), rx);
    }

    double rate_term(std::size_t s, const QuantizationParams& q) const {
        const NodeMask relays = node_range(1, n);
        return logdet(s, NodeMask{1}, relays, q) - logdet(s, 0, relays, q);
    }

    // Source-coding side of relay q in a state where q listens.
    double lhs_term(std::size_t s, int q, const QuantizationParams& quant) const {
        const NodeMask up = node_range(0, q - 1);
        const NodeMask down = node_range(q, n);
        const NodeMask down1 = node_range(q + 1, n);
        const double nq = quant.at(q);
        const double vd = power_at(s, down, q);
        const double vu = power_at(s, up, q);
        return std::log2(1.0 + vd / (vu + nq + cfg.noise(q))) + logdet(s, up, down, quant) - std::log2(nq) -
               logdet(s, up, down1, quant);
    }

    // Channel-coding side of relay q in a state where q transmits.
    double rhs_term(std::size_t s, int q, const QuantizationParams& quant) const {
        const NodeMask down1 = node_range(q + 1, n);
        return logdet(s, node_range(0, q), down1, quant) - logdet(s, node_range(0, q - 1), down1, quant);
    }
};

FeasibilitySides sides(const CfContext& ctx, const QuantizationParams& quant, const StateDistribution& dist, int q) {
    FeasibilitySides fs;
    for (std::size_t s = 0; s < dist.pmf.size(); ++s) {
        const double p = dist.pmf[s];
        if (p <= 0.0) continue;
        if (StateVector(ctx.n, static_cast<std::uint32_t>(s)).listens(q))
            fs.lhs += p * ctx.lhs_term(s, q, quant);
        else
            fs.rhs += p * ctx.rhs_term(s, q, quant);
    }
    return fs;
}

void require_fixed(const StateDistribution& dist, const NetworkConfig& config) {
    dist.validate();
    if (dist.num_relays != config.num_relays) throw ValidationError("state distribution does not match relay count");
    if (dist.knowledge_mode != KnowledgeMode::FixedSchedule)
        throw ValidationError("compress-and-forward requires a fixed schedule");
}

}  // namespace

CovMatrix build_cov_matrix(const NetworkConfig& config, const PowerAllocation& alloc,
                           const QuantizationParams& quant, StateVector state, NodeMask unknown_senders,
                           NodeMask quantizers) {
    config.validate();
    quant.validate(config.num_relays);
    if (quantizers & 1u) throw ValidationError("quantizers must be relays");
    const auto layout = cf_messages(config.num_relays);
    const auto table = amplitude_table(config, alloc, layout, state);
    MessageMask unknown(layout.size());
    for (std::size_t i = 0; i < layout.size(); ++i) unknown[i] = ((unknown_senders >> owner(layout[i])) & 1u) != 0;
    return cov_from_table(config, table, unknown, quant, state, quantizers);
}

double cf_noise_scale(const NetworkConfig& config, const PowerAllocation& alloc, int relay) {
    const NetworkConfig cfg = apply_relay_order(config);
    const Eigen::MatrixXd h = build_gains(cfg);
    double v = cfg.noise(relay);
    v += alloc.nu(kSource, kSource, 1) * cfg.power(kSource) * h(kSource, relay) * h(kSource, relay);
    for (int j = 1; j <= cfg.num_relays; ++j)
        if (j != relay) v += alloc.omega(j) * cfg.power(j) * h(j, relay) * h(j, relay);
    return v;
}

FeasibilitySides cf_constraint_sides(const NetworkConfig& config, const PowerAllocation& alloc,
                                     const QuantizationParams& quant, const StateDistribution& dist, int relay) {
    require_fixed(dist, config);
    quant.validate(config.num_relays);
    if (relay < 1 || relay > config.num_relays) throw ValidationError("relay index out of range");
    if (quant.off(relay)) return {};
    const CfContext ctx(config, alloc);
    return sides(ctx, quant, dist, relay);
}

QuantizationParams solve_quantization_noise(const NetworkConfig& config, const PowerAllocation& alloc,
                                            const StateDistribution& dist) {
    require_fixed(dist, config);
    const CfContext ctx(config, alloc);
    auto quant = QuantizationParams::all_off(ctx.n);
    for (int q = ctx.n; q >= 1; --q) {
        double listen_mass = 0.0;
        for (std::size_t s = 0; s < dist.pmf.size(); ++s)
            if (StateVector(ctx.n, static_cast<std::uint32_t>(s)).listens(q)) listen_mass += dist.pmf[s];
        if (listen_mass <= 0.0) continue;

        const double scale = cf_noise_scale(config, alloc, q);
        double lo = std::log(1e-12 * scale), hi = std::log(1e12 * scale);
        auto excess = [&](double log_nhat) {
            quant.nhat[q - 1] = std::exp(log_nhat);
            const auto fs = sides(ctx, quant, dist, q);
            return fs.lhs - fs.rhs;
        };
        // rhs does not depend on this relay's own noise
        quant.nhat[q - 1] = std::exp(hi);
        if (sides(ctx, quant, dist, q).rhs <= 0.0 || excess(hi) > 0.0) {
            quant.nhat[q - 1] = kInfiniteNoise;
            continue;
        }
        if (excess(lo) <= 0.0) {
            quant.nhat[q - 1] = std::exp(lo);
            continue;
        }
        for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            (excess(mid) > 0.0 ? lo : hi) = mid;
        }
        quant.nhat[q - 1] = std::exp(hi);
    }
    return quant;
}

double cf_rate(const NetworkConfig& config, const PowerAllocation& alloc, const QuantizationParams& quant,
               const StateDistribution& dist) {
    require_fixed(dist, config);
    quant.validate(config.num_relays);
    const CfContext ctx(config, alloc);
    double r = 0.0;
    for (std::size_t s = 0; s < dist.pmf.size(); ++s)
        if (dist.pmf[s] > 0.0) r += dist.pmf[s] * ctx.rate_term(s, quant);
    return r;
}

CfStateCoefficients cf_state_coefficients(const NetworkConfig& config, const PowerAllocation& alloc,
                                          const QuantizationParams& quant) {
    quant.validate(config.num_relays);
    const CfContext ctx(config, alloc);
    const auto ns = static_cast<Eigen::Index>(num_states(ctx.n));
    CfStateCoefficients out;
    out.rate = Eigen::VectorXd::Zero(ns);
    for (Eigen::Index s = 0; s < ns; ++s) out.rate(s) = ctx.rate_term(static_cast<std::size_t>(s), quant);
    for (int q = ctx.n; q >= 1; --q) {
        if (quant.off(q)) continue;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(ns);
        for (Eigen::Index s = 0; s < ns; ++s) {
            const auto su = static_cast<std::size_t>(s);
            g(s) = StateVector(ctx.n, static_cast<std::uint32_t>(s)).listens(q) ? ctx.lhs_term(su, q, quant)
                                                                                : -ctx.rhs_term(su, q, quant);
        }
        out.relays.push_back(q);
        out.constraint.push_back(std::move(g));
    }
    return out;
}

}  // namespace hdrelay

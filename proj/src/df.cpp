#include "hdrelay/df.hpp"

#include "hdrelay/entropy.hpp"
#include "hdrelay/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hdrelay {

std::string RateBreakdown::binding_label() const {
    std::string s;
    for (const auto& b : binding) {
        if (!s.empty()) s += ';';
        s += "k" + std::to_string(b.level) + ":l" + std::to_string(b.receiver);
    }
    return s;
}

MessageMask df_known_source(std::span<const MessageId> layout, int num_relays, int num_levels,
                            int receiver, int level) {
    MessageMask known(layout.size(), true);
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto& m = layout[i];
        if (m.kind == MessageKind::SourceLevel && m.level > level) known[i] = false;
        if (m.kind == MessageKind::RelayLevel && m.origin > receiver && m.origin <= num_relays &&
            m.level > receiver && m.level <= std::min(m.origin, num_levels))
            known[i] = false;
    }
    return known;
}

MessageMask df_known_relay(std::span<const MessageId> layout, int num_relays, int num_levels,
                           int relay, int receiver, int level) {
    MessageMask known(layout.size(), true);
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto& m = layout[i];
        if (m.kind == MessageKind::SourceLevel) known[i] = false;
        if (m.kind != MessageKind::RelayLevel) continue;
        if (m.origin < relay) known[i] = false;
        if (m.origin == relay && m.level > level) known[i] = false;
        if (m.origin > receiver && m.origin <= num_relays && m.level > receiver &&
            m.level <= std::min(m.origin, num_levels))
            known[i] = false;
    }
    return known;
}

namespace {

struct DfContext {
    NetworkConfig cfg;
    int n = 0;
    int levels = 1;
    std::vector<MessageId> layout;
    std::vector<Eigen::MatrixXd> powers;  // per state mask

    DfContext(const NetworkConfig& config, const PowerAllocation& alloc, int num_levels)
        : cfg(apply_relay_order(config)), n(config.num_relays), levels(num_levels),
          layout(df_messages(config.num_relays, num_levels)) {
        alloc.validate();
        if (alloc.num_relays() != n) throw ValidationError("allocation does not match relay count");
        const Eigen::MatrixXd h = build_gains(cfg);
        const auto ns = num_states(n);
        powers.reserve(ns);
        for (std::size_t s = 0; s < ns; ++s)
            powers.push_back(message_powers(amplitude_table(cfg, h, alloc, layout, StateVector(n, static_cast<std::uint32_t>(s)))));
    }

    double variance(std::size_t state, const MessageMask& known, int rx) const {
        double v = cfg.noise(rx);
        for (std::size_t i = 0; i < known.size(); ++i)
            if (!known[i]) v += powers[state](static_cast<Eigen::Index>(i), rx);
        return v;
    }

    std::vector<BindingCut> cuts() const {
        std::vector<BindingCut> out;
        for (int k = 1; k <= levels; ++k)
            for (int l = k; l <= n + 1; ++l) out.push_back({k, l});
        return out;
    }

    // (sender, before-known, after-known) for every term of cut (k, l)
    struct Term {
        int sender;
        MessageMask before;
        MessageMask after;
        NodeMask known_states;
    };
    std::vector<Term> terms(int k, int l) const {
        std::vector<Term> out;
        out.push_back({kSource, df_known_source(layout, n, levels, l, k - 1),
                       df_known_source(layout, n, levels, l, k),
                       k == 1 ? node_range(1, n) : node_range(0, n)});
        for (int j = k; j <= l - 1; ++j)
            out.push_back({j, df_known_relay(layout, n, levels, j, l, k - 1),
                           df_known_relay(layout, n, levels, j, l, k),
                           k == 1 ? node_range(j + 1, n) : node_range(j, n)});
        return out;
    }
};

}  // namespace

DfCutMatrix df_cut_matrix(const NetworkConfig& config, const PowerAllocation& alloc, int num_levels) {
    const DfContext ctx(config, alloc, num_levels);
    DfCutMatrix out;
    out.num_levels = num_levels;
    out.cuts = ctx.cuts();
    const auto ns = num_states(ctx.n);
    out.coeff = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out.cuts.size()), static_cast<Eigen::Index>(ns));
    for (std::size_t r = 0; r < out.cuts.size(); ++r) {
        const auto [k, l] = out.cuts[r];
        for (const auto& t : ctx.terms(k, l))
            for (std::size_t s = 0; s < ns; ++s) {
                if (StateVector(ctx.n, static_cast<std::uint32_t>(s)).transmits(l)) continue;
                out.coeff(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) +=
                    std::log2(ctx.variance(s, t.before, l) / ctx.variance(s, t.after, l));
            }
    }
    return out;
}

RateBreakdown df_breakdown(const std::vector<BindingCut>& cuts, std::span<const double> values,
                           int num_levels) {
    RateBreakdown rb;
    rb.per_level.assign(num_levels, std::numeric_limits<double>::infinity());
    rb.binding.resize(num_levels);
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const int k = cuts[i].level;
        if (values[i] < rb.per_level[k - 1]) {
            rb.per_level[k - 1] = values[i];
            rb.binding[k - 1] = cuts[i];
        }
    }
    rb.total = 0.0;
    for (auto& r : rb.per_level) {
        r = std::max(0.0, r);
        rb.total += r;
    }
    return rb;
}

RateBreakdown df_rate(const NetworkConfig& config, const PowerAllocation& alloc,
                      const StateDistribution& dist, int num_levels) {
    config.validate();
    dist.validate();
    if (dist.num_relays != config.num_relays) throw ValidationError("state distribution does not match relay count");
    if (num_levels < 1 || num_levels > config.num_relays + 1) throw ValidationError("num_levels must be in [1, N+1]");

    if (dist.knowledge_mode == KnowledgeMode::FixedSchedule) {
        const auto cm = df_cut_matrix(config, alloc, num_levels);
        const Eigen::Map<const Eigen::VectorXd> p(dist.pmf.data(), static_cast<Eigen::Index>(dist.pmf.size()));
        const Eigen::VectorXd v = cm.coeff * p;
        return df_breakdown(cm.cuts, std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), num_levels);
    }

    const DfContext ctx(config, alloc, num_levels);
    const auto cuts = ctx.cuts();
    std::vector<double> values;
    for (const auto& [k, l] : cuts) {
        double v = 0.0;
        for (const auto& t : ctx.terms(k, l)) {
            const VarianceFn fn = [&ctx, &t, l = l](StateVector m, int stage) -> std::optional<double> {
                if (m.transmits(l)) return std::nullopt;
                return ctx.variance(m.mask(), stage == 0 ? t.before : t.after, l);
            };
            v += q_mutual(k, t.sender, l, t.known_states, dist, fn);
        }
        values.push_back(v);
    }
    return df_breakdown(cuts, values, num_levels);
}

StateDistribution apply_reuse_constraint(const StateDistribution& dist, int k) {
    if (k < 1) throw ValidationError("reuse factor must be >= 1");
    StateDistribution out = dist;
    const int cap = reuse_cap(dist.num_relays, k);
    double mass = 0.0;
    for (std::size_t i = 0; i < out.pmf.size(); ++i) {
        if (out.state(i).num_transmitters() > cap) out.pmf[i] = 0.0;
        mass += out.pmf[i];
    }
    if (!(mass > 0.0)) throw InfeasibleError("reuse constraint removes every state with positive probability");
    for (auto& p : out.pmf) p /= mass;
    out.reuse_factor = k;
    return out;
}

}  // namespace hdrelay

#include "hdrelay/network.hpp"

#include "hdrelay/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace hdrelay {

std::string to_string(Combining c) { return c == Combining::Coherent ? "coherent" : "noncoherent"; }

std::string to_string(KnowledgeMode k) {
    return k == KnowledgeMode::FixedSchedule ? "fixed" : "random";
}

void NetworkConfig::validate() const {
    if (num_relays < 0 || num_relays > 20) throw ValidationError("num_relays out of range");
    const int n = num_nodes();
    if (distance.rows() != n || distance.cols() != n)
        throw ValidationError("distance matrix must be (N+2)x(N+2)");
    for (int i = 0; i < n; ++i) {
        if (distance(i, i) != 0.0) throw ValidationError("distance diagonal must be zero");
        for (int j = 0; j < n; ++j) {
            if (distance(i, j) != distance(j, i)) throw ValidationError("distance must be symmetric");
            if (i != j && !(distance(i, j) > 0.0))
                throw DomainError("non-positive distance between nodes " + std::to_string(i) +
                                  " and " + std::to_string(j));
        }
    }
    if (!(path_loss_exponent > 0.0) || !std::isfinite(path_loss_exponent))
        throw ValidationError("path loss exponent must be positive");
    if (static_cast<int>(tx_power.size()) != num_relays + 1)
        throw ValidationError("tx_power needs N+1 entries");
    for (double p : tx_power)
        if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("tx power must be >= 0");
    if (static_cast<int>(noise_power.size()) != num_relays + 1)
        throw ValidationError("noise_power needs N+1 entries");
    for (double v : noise_power)
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("noise power must be > 0");
    std::vector<int> order = relay_order;
    std::sort(order.begin(), order.end());
    std::vector<int> ident(num_relays);
    std::iota(ident.begin(), ident.end(), 1);
    if (order != ident) throw ValidationError("relay_order must be a permutation of 1..N");
}

NetworkConfig linear_network(std::span<const double> positions, double theta, double power,
                             double noise, Combining combining) {
    if (positions.size() < 2) throw ValidationError("need at least source and destination");
    NetworkConfig c;
    c.num_relays = static_cast<int>(positions.size()) - 2;
    const int n = c.num_nodes();
    c.distance = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) c.distance(i, j) = std::max(std::abs(positions[i] - positions[j]), kDistanceFloor);
    c.path_loss_exponent = theta;
    c.tx_power.assign(c.num_relays + 1, power);
    c.noise_power.assign(c.num_relays + 1, noise);
    c.combining = combining;
    c.relay_order.resize(c.num_relays);
    std::iota(c.relay_order.begin(), c.relay_order.end(), 1);
    c.validate();
    return c;
}

NetworkConfig apply_relay_order(const NetworkConfig& config) {
    config.validate();
    const int n = config.num_nodes();
    // map[new index] = old index
    std::vector<int> map(n);
    map[0] = 0;
    map[n - 1] = n - 1;
    for (int i = 1; i <= config.num_relays; ++i) map[i] = config.relay_order[i - 1];
    NetworkConfig out = config;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.distance(i, j) = config.distance(map[i], map[j]);
    for (int i = 0; i <= config.num_relays; ++i) out.tx_power[i] = config.tx_power[map[i]];
    for (int l = 1; l <= config.num_relays + 1; ++l) out.noise_power[l - 1] = config.noise_power[map[l] - 1];
    std::iota(out.relay_order.begin(), out.relay_order.end(), 1);
    return out;
}

Eigen::MatrixXd build_gains(const NetworkConfig& config) {
    const int n = config.num_nodes();
    if (config.distance.rows() != n || config.distance.cols() != n)
        throw ValidationError("distance matrix must be (N+2)x(N+2)");
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = config.distance(i, j);
            if (!(d > 0.0)) throw DomainError("non-positive distance");
            h(i, j) = std::pow(d, -config.path_loss_exponent / 2.0);
        }
    return h;
}

StateVector::StateVector(int num_relays, std::uint32_t transmit_mask)
    : num_relays_(num_relays), mask_(transmit_mask) {
    if (num_relays < 0 || num_relays > 30) throw ValidationError("bad relay count");
    if ((transmit_mask >> (num_relays + 1)) != 0) throw ValidationError("state mask out of range");
}

StateVector StateVector::from_states(std::span<const NodeState> states) {
    if (states.empty()) throw ValidationError("state vector needs N+1 entries");
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < states.size(); ++i)
        if (states[i] == NodeState::Transmit) mask |= 1u << i;
    return StateVector(static_cast<int>(states.size()) - 1, mask);
}

int StateVector::num_transmitters() const { return std::popcount(mask_); }

std::string StateVector::to_string() const {
    std::string s;
    for (int i = 0; i <= num_relays_; ++i) s += transmits(i) ? 'T' : 'L';
    return s;
}

StateDistribution StateDistribution::point_mass(StateVector s, KnowledgeMode mode) {
    StateDistribution d;
    d.num_relays = s.num_relays();
    d.pmf.assign(num_states(s.num_relays()), 0.0);
    d.pmf[s.mask()] = 1.0;
    d.knowledge_mode = mode;
    return d;
}

StateDistribution StateDistribution::uniform(int num_relays, KnowledgeMode mode) {
    StateDistribution d;
    d.num_relays = num_relays;
    const auto n = num_states(num_relays);
    d.pmf.assign(n, 1.0 / static_cast<double>(n));
    d.knowledge_mode = mode;
    return d;
}

void StateDistribution::validate() const {
    if (pmf.size() != num_states(num_relays)) throw ValidationError("pmf size must be 2^(N+1)");
    double sum = 0.0;
    for (double p : pmf) {
        if (!(p >= 0.0)) throw ValidationError("negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("pmf must sum to one");
    if (reuse_factor) {
        if (*reuse_factor < 1) throw ValidationError("reuse factor must be >= 1");
        const int cap = (num_relays + 1) / *reuse_factor;
        for (std::size_t i = 0; i < pmf.size(); ++i)
            if (pmf[i] > 0.0 && state(i).num_transmitters() > cap)
                throw ValidationError("state " + state(i).to_string() + " violates reuse factor");
    }
}

int owner(const MessageId& m) { return m.kind == MessageKind::SourceLevel ? kSource : m.origin; }

std::vector<int> co_senders(const MessageId& m) {
    switch (m.kind) {
        case MessageKind::SourceLevel: return {kSource};
        case MessageKind::Broadcast: return {m.origin};
        case MessageKind::RelayLevel: {
            std::vector<int> s{kSource};
            for (int j = m.level; j <= m.origin; ++j) s.push_back(j);
            return s;
        }
    }
    return {};
}

std::string to_string(const MessageId& m) {
    switch (m.kind) {
        case MessageKind::SourceLevel: return "U" + std::to_string(m.level);
        case MessageKind::RelayLevel: return "V" + std::to_string(m.origin) + "." + std::to_string(m.level);
        case MessageKind::Broadcast: return "W" + std::to_string(m.origin);
    }
    return "?";
}

std::vector<MessageId> df_messages(int num_relays, int num_levels) {
    if (num_levels < 1 || num_levels > num_relays + 1)
        throw ValidationError("num_levels must be in [1, N+1]");
    std::vector<MessageId> out;
    for (int k = 1; k <= num_levels; ++k) out.push_back({MessageKind::SourceLevel, 0, k});
    for (int j = 1; j <= num_relays; ++j)
        for (int k = 1; k <= std::min(j, num_levels); ++k) out.push_back({MessageKind::RelayLevel, j, k});
    return out;
}

std::vector<MessageId> cf_messages(int num_relays) {
    std::vector<MessageId> out{{MessageKind::SourceLevel, 0, 1}};
    for (int j = 1; j <= num_relays; ++j) out.push_back({MessageKind::Broadcast, j, 1});
    return out;
}

int find_message(std::span<const MessageId> layout, const MessageId& m) {
    for (std::size_t i = 0; i < layout.size(); ++i)
        if (layout[i] == m) return static_cast<int>(i);
    return -1;
}

PowerAllocation::PowerAllocation(int num_relays)
    : n_(num_relays),
      nu_(static_cast<std::size_t>(num_relays + 1) * (num_relays + 1) * (num_relays + 1), 0.0),
      omega_(num_relays + 1, 0.0) {}

std::size_t PowerAllocation::index(int sender, int origin, int level) const {
    if (sender < 0 || sender > n_ || origin < 0 || origin > n_ || level < 1 || level > n_ + 1)
        throw ValidationError("power fraction index out of range");
    const auto m = static_cast<std::size_t>(n_ + 1);
    return (static_cast<std::size_t>(sender) * m + origin) * m + (level - 1);
}

double PowerAllocation::node_total(int node) const {
    double s = omega_.at(node);
    const auto m = static_cast<std::size_t>(n_ + 1);
    for (std::size_t i = 0; i < m * m; ++i) s += nu_[node * m * m + i];
    return s;
}

void PowerAllocation::validate() const {
    for (double v : nu_)
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("power fraction outside [0,1]");
    for (double v : omega_)
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("broadcast fraction outside [0,1]");
    for (int l = 0; l <= n_; ++l)
        if (node_total(l) > 1.0 + 1e-9)
            throw ValidationError("power fractions of node " + std::to_string(l) + " exceed one");
}

double message_fraction(const PowerAllocation& alloc, const MessageId& m, int sender) {
    switch (m.kind) {
        case MessageKind::SourceLevel: return sender == kSource ? alloc.nu(kSource, kSource, m.level) : 0.0;
        case MessageKind::RelayLevel: return alloc.nu(sender, m.origin, m.level);
        case MessageKind::Broadcast: return sender == m.origin ? alloc.omega(m.origin) : 0.0;
    }
    return 0.0;
}

double MessageAmplitudeTable::power(int message, int receiver) const {
    double s = 0.0;
    for (const auto& r : rows)
        if (r.message == message) s += r.amp[receiver] * r.amp[receiver];
    return s;
}

MessageAmplitudeTable amplitude_table(const NetworkConfig& config, const Eigen::MatrixXd& gains,
                                      const PowerAllocation& alloc,
                                      std::span<const MessageId> layout, StateVector state) {
    if (alloc.num_relays() != config.num_relays || state.num_relays() != config.num_relays)
        throw ValidationError("allocation/state size does not match network");
    MessageAmplitudeTable t;
    t.messages.assign(layout.begin(), layout.end());
    t.num_nodes = config.num_nodes();
    const bool coherent = config.combining == Combining::Coherent;
    for (std::size_t mi = 0; mi < layout.size(); ++mi) {
        const MessageId& m = layout[mi];
        const bool on_air = state.transmits(owner(m));
        AmplitudeRow folded{static_cast<int>(mi), -1, std::vector<double>(t.num_nodes, 0.0)};
        for (int sender : co_senders(m)) {
            AmplitudeRow row{static_cast<int>(mi), sender, std::vector<double>(t.num_nodes, 0.0)};
            const double frac = message_fraction(alloc, m, sender);
            if (on_air && state.transmits(sender) && frac > 0.0) {
                const double a = std::sqrt(frac * config.power(sender));
                for (int rx = 1; rx < t.num_nodes; ++rx)
                    if (rx != sender && state.listens(rx)) row.amp[rx] = gains(sender, rx) * a;
            }
            if (coherent) {
                for (int rx = 0; rx < t.num_nodes; ++rx) folded.amp[rx] += row.amp[rx];
            } else {
                t.rows.push_back(std::move(row));
            }
        }
        if (coherent) t.rows.push_back(std::move(folded));
    }
    return t;
}

MessageAmplitudeTable amplitude_table(const NetworkConfig& config, const PowerAllocation& alloc,
                                      std::span<const MessageId> layout, StateVector state) {
    return amplitude_table(config, build_gains(config), alloc, layout, state);
}

ReceiveStats second_order_stats(const MessageAmplitudeTable& table, const MessageMask& senders,
                                int receiver_a, int receiver_b) {
    ReceiveStats s;
    for (const auto& r : table.rows) {
        if (r.message >= static_cast<int>(senders.size()) || !senders[r.message]) continue;
        const double a = r.amp[receiver_a];
        const double b = r.amp[receiver_b];
        s.power_a += a * a;
        s.power_b += b * b;
        s.covariance += a * b;
    }
    return s;
}

Eigen::MatrixXd message_powers(const MessageAmplitudeTable& table) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(table.messages.size()), table.num_nodes);
    for (const auto& r : table.rows)
        for (int rx = 0; rx < table.num_nodes; ++rx) p(r.message, rx) += r.amp[rx] * r.amp[rx];
    return p;
}

std::optional<double> residual_variance(const NetworkConfig& config, const PowerAllocation& alloc,
                                        std::span<const MessageId> layout, StateVector state,
                                        int decoder, const MessageMask& known) {
    if (decoder < 1 || decoder > config.destination()) throw ValidationError("decoder must be a receiver");
    if (state.transmits(decoder)) return std::nullopt;
    if (known.size() != layout.size()) throw ValidationError("known mask does not match layout");
    const auto table = amplitude_table(config, alloc, layout, state);
    MessageMask unknown(known.size());
    for (std::size_t i = 0; i < known.size(); ++i) unknown[i] = !known[i];
    return received_power(table, unknown, decoder) + config.noise(decoder);
}

}  // namespace hdrelay

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hdrelay {

inline constexpr int kSource = 0;
inline constexpr double kDistanceFloor = 1e-3;

enum class Combining { Coherent, NonCoherent };
enum class NodeState : std::uint8_t { Listen, Transmit };
enum class KnowledgeMode { FixedSchedule, RandomAccess };

std::string to_string(Combining c);
std::string to_string(KnowledgeMode k);

// Nodes: 0 = source, 1..N relays, N+1 = destination.
struct NetworkConfig {
    int num_relays = 0;
    Eigen::MatrixXd distance;
    double path_loss_exponent = 4.0;
    std::vector<double> tx_power;     // nodes 0..N
    std::vector<double> noise_power;  // receivers 1..N+1, stored at [l-1]
    Combining combining = Combining::NonCoherent;
    std::vector<int> relay_order;     // decoding position i holds physical relay relay_order[i-1]

    int destination() const { return num_relays + 1; }
    int num_nodes() const { return num_relays + 2; }
    double power(int node) const { return tx_power.at(node); }
    double noise(int receiver) const { return noise_power.at(receiver - 1); }

    void validate() const;
};

// Collinear nodes at the given positions (source first, destination last).
// Pairwise distances are floored at kDistanceFloor.
NetworkConfig linear_network(std::span<const double> positions, double theta, double power,
                             double noise, Combining combining);

// Relabels relays so that decoding position i is physical relay relay_order[i-1];
// the result carries the identity order.
NetworkConfig apply_relay_order(const NetworkConfig& config);

Eigen::MatrixXd build_gains(const NetworkConfig& config);

class StateVector {
public:
    StateVector() = default;
    StateVector(int num_relays, std::uint32_t transmit_mask);
    static StateVector from_states(std::span<const NodeState> states);

    int num_relays() const { return num_relays_; }
    int size() const { return num_relays_ + 1; }
    std::uint32_t mask() const { return mask_; }
    // The destination (node N+1) always listens.
    bool transmits(int node) const { return node <= num_relays_ && ((mask_ >> node) & 1u) != 0; }
    bool listens(int node) const { return !transmits(node); }
    NodeState operator[](int node) const {
        return transmits(node) ? NodeState::Transmit : NodeState::Listen;
    }
    int num_transmitters() const;
    std::string to_string() const;

    friend bool operator==(const StateVector&, const StateVector&) = default;

private:
    int num_relays_ = 0;
    std::uint32_t mask_ = 0;
};

inline std::size_t num_states(int num_relays) { return std::size_t{1} << (num_relays + 1); }

struct StateDistribution {
    int num_relays = 0;
    std::vector<double> pmf;  // indexed by StateVector::mask()
    KnowledgeMode knowledge_mode = KnowledgeMode::FixedSchedule;
    std::optional<int> reuse_factor;

    static StateDistribution point_mass(StateVector s, KnowledgeMode mode);
    static StateDistribution uniform(int num_relays, KnowledgeMode mode);

    double prob(StateVector s) const { return pmf.at(s.mask()); }
    StateVector state(std::size_t index) const {
        return StateVector(num_relays, static_cast<std::uint32_t>(index));
    }
    void validate() const;
};

enum class MessageKind { SourceLevel, RelayLevel, Broadcast };

// SourceLevel: U_s^level (origin 0). RelayLevel: V_origin^level.
// Broadcast: CF quantization index of relay `origin` (level 1).
struct MessageId {
    MessageKind kind = MessageKind::SourceLevel;
    int origin = 0;
    int level = 1;
    friend bool operator==(const MessageId&, const MessageId&) = default;
};

// The node whose transmit state gates the message.
int owner(const MessageId& m);
std::vector<int> co_senders(const MessageId& m);
std::string to_string(const MessageId& m);

std::vector<MessageId> df_messages(int num_relays, int num_levels);
std::vector<MessageId> cf_messages(int num_relays);
int find_message(std::span<const MessageId> layout, const MessageId& m);

class PowerAllocation {
public:
    PowerAllocation() = default;
    explicit PowerAllocation(int num_relays);

    int num_relays() const { return n_; }
    // Share of node `sender` on level `level` of the message stack originating at `origin`.
    double nu(int sender, int origin, int level) const { return nu_[index(sender, origin, level)]; }
    void set_nu(int sender, int origin, int level, double v) { nu_[index(sender, origin, level)] = v; }
    // Broadcast share of relay l (CF).
    double omega(int relay) const { return omega_.at(relay); }
    void set_omega(int relay, double v) { omega_.at(relay) = v; }

    double node_total(int node) const;
    void validate() const;

private:
    std::size_t index(int sender, int origin, int level) const;

    int n_ = 0;
    std::vector<double> nu_;
    std::vector<double> omega_;
};

// Fraction of `sender`'s power spent on message m under alloc.
double message_fraction(const PowerAllocation& alloc, const MessageId& m, int sender);

struct AmplitudeRow {
    int message = 0;
    int sender = -1;  // -1 when coherent co-senders are folded into one row
    std::vector<double> amp;  // per node index, zero for transmitting receivers
};

struct MessageAmplitudeTable {
    std::vector<MessageId> messages;
    std::vector<AmplitudeRow> rows;
    int num_nodes = 0;

    double power(int message, int receiver) const;
};

// Boolean mask over the messages of a layout.
using MessageMask = std::vector<bool>;

MessageAmplitudeTable amplitude_table(const NetworkConfig& config, const Eigen::MatrixXd& gains,
                                      const PowerAllocation& alloc,
                                      std::span<const MessageId> layout, StateVector state);
MessageAmplitudeTable amplitude_table(const NetworkConfig& config, const PowerAllocation& alloc,
                                      std::span<const MessageId> layout, StateVector state);

struct ReceiveStats {
    double power_a = 0.0;
    double power_b = 0.0;
    double covariance = 0.0;
};

// Sums over messages selected by `senders` (empty mask selects nothing).
ReceiveStats second_order_stats(const MessageAmplitudeTable& table, const MessageMask& senders,
                                int receiver_a, int receiver_b);
inline double received_power(const MessageAmplitudeTable& table, const MessageMask& senders,
                             int receiver) {
    return second_order_stats(table, senders, receiver, receiver).power_a;
}

// Per-message receive power matrix (messages x nodes).
Eigen::MatrixXd message_powers(const MessageAmplitudeTable& table);

// Interference-plus-noise at `decoder` after subtracting `known`.
// std::nullopt means the decoder transmits in `state` and has no output.
std::optional<double> residual_variance(const NetworkConfig& config, const PowerAllocation& alloc,
                                        std::span<const MessageId> layout, StateVector state,
                                        int decoder, const MessageMask& known);

}  // namespace hdrelay

// include/hijacksim/attack/attacker.hpp
// Off-path inference engine. Finds the victim, its client port, the server's
// RCV.NXT and an acceptable ACK value from encrypted frame sizes alone, then
// resets the connection or injects data.
//
// Provides:
//   - Attacker::arp_scan / probe_and_observe
//   - Attacker::infer_port / infer_port_sack
//   - Attacker::infer_seq / refine_seq
//   - Attacker::locate_challenge_window / find_ack_lower_boundary
//   - derive_usable_ack
//   - Attacker::full_attack

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hijacksim/attack/probe_channel.hpp"
#include "hijacksim/core/types.hpp"
#include "hijacksim/tcp/endpoint.hpp"
#include "hijacksim/tcp/seq_space.hpp"

namespace hijacksim::attack {

/// Expected observable sizes. An unset entry matches any size that is not
/// one of the set entries.
struct ResponseAlphabet {
    std::optional<std::uint32_t> rst = 56;
    std::optional<std::uint32_t> ack = 68;
    std::optional<std::uint32_t> sack = 80;
};

enum class PortMethod { Auto, SynAck, Sack };

std::string_view to_string(PortMethod m);

struct InferenceConfig {
    int k_verify = 3;
    VirtualTime observe_timeout = from_millis(45);
    std::uint32_t port_lo = 32768;
    std::uint32_t port_hi = 60999;
    std::uint32_t port_start_offset = 0;
    double probe_pacing = 40.0;  // segments per virtual second
    int sniffer_count = 1;
    PortMethod port_method = PortMethod::Auto;
    // Passive listen before the port sweep, used to estimate background noise.
    double flood_listen_s = 2.0;
    double flood_threshold_pps = 5.0;
    // Give up on the port sweep when this many ports produced only foreign sizes.
    int alphabet_check_probes = 32;
    bool calibrate_alphabet = false;
    std::uint32_t ack_probe_seq_offset = 2;
    int max_reinference = 2;
    // Sequential test used for symbols that also occur as background noise.
    double noisy_error_rate = 1e-3;
    double assumed_loss = 0.2;
    int noisy_round_cap = 30;
    ResponseAlphabet alphabet;

    /// Throws ConfigError.
    void validate() const;
    std::uint32_t port_count() const { return port_hi - port_lo + 1; }
};

struct Observation {
    int saw_rst = 0;
    int saw_ack = 0;
    int saw_sack = 0;
    int other = 0;
    VirtualTime t_start{0};
    VirtualTime t_end{0};

    int total() const { return saw_rst + saw_ack + saw_sack + other; }
};

enum class Verdict { Hit, Miss, Ambiguous, NoResponse };

enum class InferStatus { Found, NotFound, Inconclusive, Failed };

template <class T>
struct Inferred {
    InferStatus status = InferStatus::Failed;
    T value{};
    std::string reason;

    bool ok() const { return status == InferStatus::Found; }
};

enum class OutcomeKind { Success, Failure, Inconclusive };

std::string_view to_string(OutcomeKind k);

struct Outcome {
    OutcomeKind kind = OutcomeKind::Failure;
    std::optional<Phase> phase;
    std::string reason;
};

struct AttackReport {
    std::optional<HostInfo> victim;
    std::optional<std::uint16_t> port_found;
    std::optional<std::uint32_t> rcv_nxt_found;
    std::optional<std::uint32_t> ack_lower_found;
    std::optional<std::uint32_t> ack_usable;
    std::uint64_t probes_sent = 0;
    std::uint64_t bytes_sent = 0;  // Ethernet view: IP length + 14
    VirtualTime virtual_time{0};
    std::map<Phase, VirtualTime> phase_times;
    std::map<Phase, std::uint64_t> phase_probes;
    Outcome outcome;
    PortMethod port_method_used = PortMethod::SynAck;
    int reinferences = 0;

    double bandwidth_kbps() const;
};

struct AttackTarget {
    Ipv4Address server_ip;
    std::uint16_t server_port = 0;
    std::optional<Ipv4Address> victim_ip;  // pick this host from the ARP scan when set
    tcp::SeqSpace space;
};

enum class ActionKind { Reset, Inject };

struct ActionSpec {
    ActionKind kind = ActionKind::Reset;
    std::vector<std::uint8_t> payload;
};

/// lower + half - 1, i.e. SND.UNA itself when lower is the first challenge
/// value. Adding a full half lands one past SND.UNA, which is already ahead
/// of SND.NXT when nothing is in flight.
std::uint32_t derive_usable_ack(std::uint32_t lower, tcp::SeqSpace space = {});

/// Offsets from the base of the half-space below a challenge value.
struct AckBracket {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
};

class Attacker {
public:
    Attacker(ProbeChannel& channel, InferenceConfig cfg, AttackTarget target, std::uint64_t seed);

    /// Union of k_verify ARP sweeps, in discovery order.
    std::vector<HostInfo> arp_scan();
    void set_victim(const HostInfo& victim);

    /// Sends seg up to k_verify times and reports whether a victim-bound frame
    /// of expected_len was seen within observe_timeout of a send.
    bool probe_and_observe(const tcp::SegmentMeta& seg, std::uint32_t expected_len, const ProbeTag& tag);

    Inferred<std::uint16_t> infer_port();
    Inferred<std::uint16_t> infer_port_sack();
    Inferred<std::uint32_t> infer_seq(const tcp::FourTuple& tuple);
    Inferred<std::uint32_t> locate_challenge_window(const tcp::FourTuple& tuple, std::uint32_t seq_ok);
    /// resume carries the bisection bracket across calls; {0, 0} starts afresh.
    Inferred<std::uint32_t> find_ack_lower_boundary(const tcp::FourTuple& tuple, std::uint32_t seq_ok,
                                                    std::uint32_t ack_challenge, AckBracket* resume = nullptr);
    /// Re-centres a sequence estimate using probes whose ACK is known to be
    /// in the challenge window.
    Inferred<std::uint32_t> refine_seq(const tcp::FourTuple& tuple, std::uint32_t guess, std::uint32_t ack_lower);

    /// Listens passively and returns victim-bound frames per second by size.
    std::map<std::uint32_t, double> listen(double seconds);

    AttackReport full_attack(const ActionSpec& action);

    const AttackReport& report() const { return report_; }
    const InferenceConfig& config() const { return cfg_; }
    tcp::FourTuple tuple_for(std::uint16_t port) const;

private:
    enum class Mode { Exclusive, PositiveDominates };
    enum class Sym { Rst, Ack, Sack, Other };

    struct ProbeSpec {
        std::vector<tcp::SegmentMeta> segments;
        Sym positive = Sym::Ack;
        std::optional<Sym> negative;
        Mode mode = Mode::PositiveDominates;
        ProbeTag tag;
        int max_rounds = 0;  // 0 = k_verify
    };

    Verdict probe(const ProbeSpec& spec, Observation* obs_out = nullptr);
    Observation observe_round(const ProbeSpec& spec);
    void transmit(const tcp::SegmentMeta& seg, const ProbeTag& tag);
    Sym classify(std::uint32_t len) const;
    bool noisy(Sym s) const;
    void enter_phase(Phase p);
    void close_phase();

    tcp::SegmentMeta syn_ack_probe(std::uint16_t port);
    tcp::SegmentMeta data_probe(const tcp::FourTuple& tuple, std::uint32_t seq, std::uint32_t ack);
    bool behind(const tcp::FourTuple& tuple, std::uint32_t seq, std::uint32_t ack, Phase phase, const char* kind);
    // RCV.NXT near guess, given a "seq is behind RCV.NXT" predicate.
    Inferred<std::uint32_t> gallop(std::uint32_t guess, const std::function<bool(std::uint32_t)>& behind_pred);
    Inferred<std::uint16_t> sweep_ports(bool sack_method);
    void calibrate(const tcp::FourTuple& closed);
    Outcome run_action(const tcp::FourTuple& tuple, const ActionSpec& action);
    void run_phases(const ActionSpec& action);

    ProbeChannel& ch_;
    InferenceConfig cfg_;
    AttackTarget target_;
    Rng rng_;
    AttackReport report_;
    std::optional<HostInfo> victim_;
    tcp::SeqSpace space_;

    VirtualTime next_send_{0};
    Phase phase_ = Phase::Scan;
    VirtualTime phase_start_{0};
    bool phase_open_ = false;

    // Background rate per symbol, from the passive listen.
    std::map<Sym, double> noise_pps_;
    bool listened_ = false;
    // Response latency gate learned from clean responses.
    VirtualTime lat_min_{0};
    VirtualTime lat_max_{0};
    int latency_count_ = 0;
    std::optional<std::pair<VirtualTime, VirtualTime>> gate_;
    // Lengths seen during the most recent probe.
    std::vector<std::uint32_t> last_lengths_;
    bool seq_positive_seen_ = false;
};

}  // namespace hijacksim::attack

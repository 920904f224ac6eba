#include <gtest/gtest.h>

#include "../support.hpp"
#include "hijacksim/attack/attacker.hpp"
#include "hijacksim/harness/run.hpp"

using namespace hijacksim;
using namespace hijacksim::attack;
using hijacksim::testing::quiet_config;
using hijacksim::testing::Rig;

namespace {

harness::ScenarioConfig narrow(std::uint64_t seed, std::uint32_t lo = 40000, std::uint32_t hi = 40200) {
    auto c = quiet_config(seed);
    c.inference.port_lo = lo;
    c.inference.port_hi = hi;
    return c;
}

// Only valid on a fresh rig where nothing else has been sent.
std::uint64_t seq_probes(const Attacker& a) { return a.report().probes_sent; }

}  // namespace

TEST(DeriveUsableAck, IsSndUnaForFirstChallengeValue) {
    const tcp::SeqSpace sp;
    const std::uint32_t snd_una = 123456789;
    const std::uint32_t lower = sp.add(sp.sub(snd_una, sp.half()), 1);
    EXPECT_EQ(derive_usable_ack(lower, sp), snd_una);
}

TEST(ProbeAndObserve, DetectionProbabilityUnderLoss) {
    auto c = narrow(21);
    c.channel.loss_prob = 0.5;
    c.true_client_port = 40010;
    Rig rig(c);
    tcp::SegmentMeta syn;
    syn.tuple = rig.tuple();
    syn.flags = tcp::TcpFlags::syn_ack();
    int hits = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) hits += rig.atk->probe_and_observe(syn, 68, {Phase::Port, "test", 0});
    // 1 - 0.5^3
    EXPECT_NEAR(hits / static_cast<double>(n), 0.875, 0.03);
}

TEST(ProbeAndObserve, WrongLengthNeverMatches) {
    auto c = narrow(22);
    c.true_client_port = 40010;
    Rig rig(c);
    tcp::SegmentMeta syn;
    syn.tuple = rig.tuple();
    syn.flags = tcp::TcpFlags::syn_ack();
    EXPECT_TRUE(rig.atk->probe_and_observe(syn, 68, {}));
    EXPECT_FALSE(rig.atk->probe_and_observe(syn, 56, {}));
    syn.tuple.client_port = 40011;
    EXPECT_TRUE(rig.atk->probe_and_observe(syn, 56, {}));
}

TEST(InferPort, FindsTruePortWithinBudget) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rig rig(narrow(seed));
        const auto r = rig.atk->infer_port();
        ASSERT_TRUE(r.ok()) << r.reason;
        EXPECT_EQ(r.value, rig.cfg.true_client_port.value_or(rig.sim->truth().true_port));
        EXPECT_LE(rig.atk->report().probes_sent, 201u + 3u);
    }
}

TEST(InferPort, SackMethodFindsTruePort) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rig rig(narrow(seed));
        const auto r = rig.atk->infer_port_sack();
        ASSERT_TRUE(r.ok()) << r.reason;
        EXPECT_EQ(r.value, rig.sim->truth().true_port);
    }
}

TEST(InferPort, NoResponsesIsFailure) {
    auto c = narrow(5);
    c.channel.loss_prob = 1.0;
    Rig rig(c);
    const auto r = rig.atk->infer_port();
    EXPECT_EQ(r.status, InferStatus::Failed);
}

// Every x of a 2^10 space: the pair (x, x + half) has an old-duplicate
// member except at the two residues touching rcv_nxt + half.
TEST(SackPair, ResidueStructure) {
    const tcp::SeqSpace sp(10);
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        auto s = hijacksim::testing::random_state(sp, rng);
        int without = 0;
        for (std::uint32_t x = 0; x < sp.size(); ++x) {
            const auto a = tcp::classify_seq(s, x, 1);
            const auto b = tcp::classify_seq(s, sp.add(x, sp.half()), 1);
            if (a != tcp::SeqClass::OldDuplicate && b != tcp::SeqClass::OldDuplicate) {
                ++without;
                EXPECT_TRUE(x == s.rcv_nxt || x == sp.add(s.rcv_nxt, sp.half()));
            }
        }
        EXPECT_EQ(without, 2);
    }
}

TEST(InferSeq, ExhaustiveSmallSpace) {
    for (std::uint32_t r = 0; r < 256; ++r) {
        auto c = narrow(r + 1);
        c.seq_bits = 8;
        c.server.rcv_nxt = r;
        c.true_client_port = 40000;
        Rig rig(c);
        const auto got = rig.atk->infer_seq(rig.tuple());
        ASSERT_TRUE(got.ok());
        ASSERT_EQ(got.value, r);
        ASSERT_LE(seq_probes(*rig.atk), 9u * 3u);
    }
}

TEST(InferSeq, FullSpaceRandom) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto c = narrow(seed);
        c.true_client_port = 40000;
        Rig rig(c);
        const auto got = rig.atk->infer_seq(rig.tuple());
        EXPECT_EQ(got.value, rig.conn().rcv_nxt);
        EXPECT_LE(seq_probes(*rig.atk), 33u * 3u);
    }
}

TEST(AckInference, LowerBoundaryAndUsableAck) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto c = narrow(seed);
        c.true_client_port = 40000;
        Rig rig(c);
        const auto& s = rig.conn();
        const auto sp = s.space;
        const std::uint32_t seq_ok = sp.add(s.rcv_nxt, 2);
        const auto win = rig.atk->locate_challenge_window(rig.tuple(), seq_ok);
        ASSERT_TRUE(win.ok());
        EXPECT_EQ(tcp::classify_ack(s, win.value), tcp::AckClass::Challenge);
        const auto lower = rig.atk->find_ack_lower_boundary(rig.tuple(), seq_ok, win.value);
        ASSERT_TRUE(lower.ok());
        EXPECT_EQ(lower.value, sp.add(sp.sub(s.snd_una, sp.half()), 1));
        EXPECT_EQ(tcp::classify_ack(s, derive_usable_ack(lower.value, sp)), tcp::AckClass::Acceptable);
    }
}

TEST(RefineSeq, RecoversFromNearbyGuess) {
    auto c = narrow(4);
    c.true_client_port = 40000;
    Rig rig(c);
    const auto& s = rig.conn();
    const auto sp = s.space;
    const std::uint32_t lower = sp.add(sp.sub(s.snd_una, sp.half()), 1);
    for (std::int64_t d : {-1000, -3, 0, 1, 77, 5000}) {
        const std::uint32_t guess = d < 0 ? sp.sub(s.rcv_nxt, -d) : sp.add(s.rcv_nxt, d);
        const auto got = rig.atk->refine_seq(rig.tuple(), guess, lower);
        ASSERT_TRUE(got.ok()) << d;
        EXPECT_EQ(got.value, s.rcv_nxt) << d;
    }
}

TEST(FullAttack, LosslessResetSucceeds) {
    const auto r = harness::run_scenario(narrow(9));
    EXPECT_EQ(r.report.outcome.kind, OutcomeKind::Success) << r.report.outcome.reason;
    EXPECT_FALSE(r.truth.connection_open);
    EXPECT_EQ(r.report.port_found, r.truth.port);
}

TEST(FullAttack, InjectLandsAtStreamOffset) {
    auto c = narrow(10);
    c.action.kind = ActionKind::Inject;
    const std::string payload = "GET /evil HTTP/1.1\r\n\r\n";
    c.action.payload.assign(payload.begin(), payload.end());
    const auto r = harness::run_scenario(c);
    ASSERT_EQ(r.report.outcome.kind, OutcomeKind::Success) << r.report.outcome.reason;
    ASSERT_GE(r.truth.stream_tail.size(), payload.size());
    EXPECT_EQ(std::string(r.truth.stream_tail.begin(), r.truth.stream_tail.begin() + payload.size()), payload);
}

TEST(FullAttack, FloodSwitchesToSackMethod) {
    auto c = narrow(11);
    c.inference.flood_listen_s = 2.0;
    c.channel.background = wifi::BackgroundSpec{};
    c.channel.background->rate_pps = 100;
    const auto r = harness::run_scenario(c);
    EXPECT_EQ(r.report.port_method_used, PortMethod::Sack);
    EXPECT_EQ(r.report.outcome.kind, OutcomeKind::Success) << r.report.outcome.reason;
}

TEST(FullAttack, ApIsolationStopsScan) {
    auto c = narrow(12);
    c.channel.ap_isolation = true;
    const auto r = harness::run_scenario(c);
    EXPECT_EQ(r.report.outcome.kind, OutcomeKind::Failure);
    EXPECT_EQ(r.report.outcome.phase, Phase::Scan);
}

TEST(FullAttack, UnknownVictimIpPicksFirstHost) {
    auto c = narrow(13);
    c.victim_ip_known = false;
    const auto r = harness::run_scenario(c);
    EXPECT_EQ(r.report.outcome.kind, OutcomeKind::Success);
}

TEST(FullAttack, EvictionStillSucceeds) {
    auto c = narrow(14);
    c.channel.channels = {1, 6};
    c.channel.contention_hi = from_millis(50);
    c.channel.eviction.enabled = true;
    c.inference.flood_listen_s = 2.5;  // outlasts the re-association gap
    const auto r = harness::run_scenario(c);
    EXPECT_EQ(r.report.outcome.kind, OutcomeKind::Success) << r.report.outcome.reason;
}

TEST(FullAttack, LiveTrafficSlowShiftSucceeds) {
    auto c = narrow(15);
    c.live_traffic = harness::LiveTraffic{1.0, 1};
    const auto r = harness::run_scenario(c);
    EXPECT_NE(r.truth.rcv_nxt_final, r.truth.rcv_nxt_initial);
    EXPECT_EQ(r.report.outcome.kind, OutcomeKind::Success) << r.report.outcome.reason;
}

TEST(FullAttack, FastShiftFailsStale) {
    auto c = narrow(16);
    c.live_traffic = harness::LiveTraffic{20000.0, 1000};
    const auto r = harness::run_scenario(c);
    EXPECT_EQ(r.report.outcome.kind, OutcomeKind::Failure);
    EXPECT_EQ(r.report.outcome.reason, "stale");
    EXPECT_EQ(r.report.reinferences, c.inference.max_reinference);
    EXPECT_TRUE(r.truth.connection_open);
}

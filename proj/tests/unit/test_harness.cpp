#include <gtest/gtest.h>

#include <sstream>

#include "../support.hpp"
#include "hijacksim/harness/event_queue.hpp"
#include "hijacksim/harness/run.hpp"
#include "hijacksim/harness/sweep.hpp"

using namespace hijacksim;
using namespace hijacksim::harness;
using hijacksim::testing::quiet_config;

namespace {

ScenarioConfig narrow(std::uint64_t seed) {
    auto c = quiet_config(seed);
    c.inference.port_lo = 40000;
    c.inference.port_hi = 40100;
    return c;
}

std::string dump_all(const RunResult& r) {
    std::ostringstream os;
    write_summary(os, r);
    wifi::write_trace(os, r.trace);
    write_probe_log(os, r.probe_log);
    return os.str();
}

}  // namespace

TEST(EventQueue, OrdersByTimeThenInsertion) {
    EventQueue<int> q;
    q.push(VirtualTime{5}, 1);
    q.push(VirtualTime{3}, 2);
    q.push(VirtualTime{5}, 3);
    q.push(VirtualTime{3}, 4);
    std::vector<int> got;
    while (!q.empty()) got.push_back(q.pop().payload);
    EXPECT_EQ(got, (std::vector<int>{2, 4, 1, 3}));
    EXPECT_EQ(q.floor(), VirtualTime{5});
    EXPECT_THROW(q.push(VirtualTime{4}, 0), std::logic_error);
    EXPECT_NO_THROW(q.push(VirtualTime{5}, 0));
    EXPECT_THROW(EventQueue<int>{}.pop(), std::logic_error);
}

TEST(Config, EmptyObjectIsValid) {
    const auto c = parse_config("{}");
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.seq_bits, 32u);
    EXPECT_EQ(c.inference.k_verify, 3);
}

TEST(Config, UnknownKeyRejected) {
    EXPECT_THROW(parse_config(R"({"sede": 3})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"channel": {"los_prob": 0.1}})"), ConfigError);
    EXPECT_THROW(parse_config("{"), ConfigError);
    EXPECT_THROW(parse_config(R"({"seq_bits": 4})"), ConfigError);
}

TEST(Config, CanonicalRoundTrip) {
    auto c = narrow(77);
    c.padding = defense::BucketPadding{{64, 96, 128, 256}};
    c.live_traffic = LiveTraffic{};
    c.channel.background = wifi::BackgroundSpec{};
    const auto j = to_json(c);
    EXPECT_EQ(to_json(from_json(j)), j);
}

TEST(Config, OverrideFillsNullSection) {
    const auto c = with_override(ScenarioConfig{}, "channel.background.rate_pps", 40);
    ASSERT_TRUE(c.channel.background);
    EXPECT_DOUBLE_EQ(c.channel.background->rate_pps, 40.0);
    EXPECT_THROW(with_override(ScenarioConfig{}, "channel.nope", 1), ConfigError);
    EXPECT_EQ(parse_scalar("0.25"), nlohmann::json(0.25));
    EXPECT_EQ(parse_scalar("synack"), nlohmann::json("synack"));
}

TEST(Config, MaterializeIsSeedStable) {
    const auto a = materialize(narrow(5));
    const auto b = materialize(narrow(5));
    EXPECT_EQ(a.state.rcv_nxt, b.state.rcv_nxt);
    EXPECT_EQ(a.true_port, b.true_port);
    EXPECT_GE(a.true_port, 40000);
    EXPECT_LE(a.true_port, 40100);
    EXPECT_EQ(a.state.rcv_wnd, 65535u);
}

TEST(Run, Deterministic) {
    const auto c = narrow(31);
    EXPECT_EQ(dump_all(run_scenario(c)), dump_all(run_scenario(c)));
}

TEST(Run, DurationLimitIsTimeout) {
    auto c = narrow(32);
    c.duration_limit_s = 0.001;
    const auto r = run_scenario(c);
    EXPECT_EQ(r.report.outcome.kind, attack::OutcomeKind::Failure);
    EXPECT_EQ(r.report.outcome.reason, "timeout");
}

TEST(Run, TraceIsCausal) {
    auto c = narrow(33);
    c.channel.loss_prob = 0.1;
    c.channel.contention_hi = from_millis(20);
    const auto r = run_scenario(c);
    for (std::size_t i = 1; i < r.trace.frames.size(); ++i) ASSERT_LE(r.trace.frames[i - 1].t, r.trace.frames[i].t);
    for (std::size_t i = 1; i < r.probe_log.size(); ++i) ASSERT_LE(r.probe_log[i - 1].t, r.probe_log[i].t);
}

TEST(Run, ReplayMatchesProbeLog) {
    auto c = narrow(34);
    c.channel.loss_prob = 0.1;
    const auto r = run_scenario(c);
    std::stringstream ss;
    wifi::write_trace(ss, r.trace);
    const auto windows = classify_windows(wifi::read_trace(ss));
    ASSERT_EQ(windows.size(), r.probe_log.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        EXPECT_EQ(windows[i].t, r.probe_log[i].t);
        EXPECT_EQ(windows[i].lengths, r.probe_log[i].window.lengths);
        EXPECT_EQ(windows[i].symbol, r.probe_log[i].window.symbol);
    }
}

TEST(Run, SummaryRoundTrip) {
    const auto r = run_scenario(narrow(35));
    std::stringstream ss;
    write_summary(ss, r);
    const auto j = read_summary(ss);
    EXPECT_EQ(j["outcome"], "success");
    EXPECT_EQ(j["probes_sent"], r.report.probes_sent);
    std::stringstream bad("#hijacksim-summary v1\n{");
    EXPECT_THROW(read_summary(bad), ConfigError);
}

TEST(Run, LiveTrafficAdvancesReceiveSequence) {
    auto c = narrow(36);
    c.live_traffic = LiveTraffic{200.0, 100};
    const auto r = run_scenario(c);
    EXPECT_GT(static_cast<std::uint32_t>(r.truth.rcv_nxt_final - r.truth.rcv_nxt_initial), 0u);
}

TEST(Ecdf, Basics) {
    const auto a = ecdf({3, 1, 2});
    ASSERT_EQ(a.size(), 3u);
    EXPECT_DOUBLE_EQ(a[0].first, 1);
    EXPECT_NEAR(a[0].second, 1.0 / 3, 1e-12);
    EXPECT_DOUBLE_EQ(a[2].second, 1.0);
    const auto b = ecdf({5, 5, 5});
    ASSERT_EQ(b.size(), 1u);
    EXPECT_DOUBLE_EQ(b[0].second, 1.0);
    EXPECT_THROW(ecdf({}), std::invalid_argument);
}

TEST(Sweep, ThreadCountDoesNotMatter) {
    const auto base = narrow(40);
    const std::vector<nlohmann::json> values{0.0, 0.2};
    auto a = run_sweep(base, "channel.loss_prob", values, 4, {1, false});
    auto b = run_sweep(base, "channel.loss_prob", values, 4, {8, false});
    std::ostringstream sa, sb;
    write_sweep(sa, a);
    write_sweep(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(Sweep, SingleTrialMatchesRun) {
    const auto base = narrow(41);
    const auto cells = run_sweep(base, "channel.loss_prob", {0.0}, 1, {1, true});
    ASSERT_EQ(cells.size(), 1u);
    const auto cfg = trial_config(base, "channel.loss_prob", 0.0, 0);
    const auto r = run_scenario(cfg);
    EXPECT_EQ(cells[0].runs[0].summary, summary_json(r));
    EXPECT_DOUBLE_EQ(cells[0].mean_probes, static_cast<double>(r.report.probes_sent));
}

TEST(Sweep, RejectsBadInput) {
    EXPECT_THROW(run_sweep(narrow(1), "channel.loss_prob", {}, 1), ConfigError);
    EXPECT_THROW(run_sweep(narrow(1), "channel.loss_prob", {0.0}, 0), ConfigError);
    EXPECT_THROW(run_sweep(narrow(1), "no.such.key", {0.0}, 1), ConfigError);
    EXPECT_THROW(run_sweep(narrow(1), "channel.loss_prob", {2.0}, 1), ConfigError);
}

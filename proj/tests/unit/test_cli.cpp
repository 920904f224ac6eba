#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hijacksim/cli/commands.hpp"
#include "hijacksim/harness/run.hpp"
#include "hijacksim/harness/sweep.hpp"
#include "hijacksim/wifi/trace.hpp"

using namespace hijacksim;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({"seed": 5, "inference": {"port_range": [40000, 40100], "flood_listen_s": 0}})";

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("hijacksim-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) {
        const auto p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

    int cli(std::vector<std::string> args) {
        args.insert(args.begin(), "hijacksim");
        std::vector<const char*> argv;
        for (auto& a : args) argv.push_back(a.c_str());
        out_.str("");
        err_.str("");
        return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

}  // namespace

TEST_F(CliTest, RunWritesThreeFiles) {
    const auto cfg = write("s.json", kSmall);
    const auto out = (dir_ / "o").string();
    EXPECT_EQ(cli({"run", "--config", cfg, "--out", out}), cli::kExitOk) << err_.str();
    for (const char* ext : {".summary", ".trace", ".probelog"}) EXPECT_TRUE(fs::exists(fs::path(out) / ("scenario" + std::string(ext))));
}

TEST_F(CliTest, SetAndSeedOverrides) {
    const auto cfg = write("s.json", kSmall);
    const auto out = (dir_ / "o").string();
    EXPECT_EQ(cli({"run", "--config", cfg, "--out", out, "--set", "id=named", "--seed", "9"}), cli::kExitOk);
    std::ifstream in(fs::path(out) / "named.summary");
    const auto j = harness::read_summary(in);
    EXPECT_EQ(j["seed"], 9);
}

TEST_F(CliTest, DefendedRunExitsTwo) {
    const auto cfg = write("s.json", kSmall);
    const auto out = (dir_ / "o").string();
    EXPECT_EQ(cli({"run", "--config", cfg, "--out", out, "--set", "defenses.uniform_response.enabled=true"}),
              cli::kExitAttackFailed);
    std::ifstream in(fs::path(out) / "scenario.summary");
    EXPECT_EQ(harness::read_summary(in)["outcome"], "inconclusive");
}

TEST_F(CliTest, MalformedConfigWritesNothing) {
    const auto cfg = write("bad.json", R"({"seed": 1, "typo_key": 2})");
    const auto out = dir_ / "o";
    EXPECT_EQ(cli({"run", "--config", cfg, "--out", out.string()}), cli::kExitUsage);
    EXPECT_FALSE(fs::exists(out) && !fs::is_empty(out));
    EXPECT_NE(err_.str().find("typo_key"), std::string::npos);
    EXPECT_EQ(cli({"run", "--config", (dir_ / "missing.json").string()}), cli::kExitUsage);
    EXPECT_EQ(cli({"frobnicate"}), cli::kExitUsage);
}

TEST_F(CliTest, OutDirFromEnvironment) {
    ::setenv(cli::kOutEnv, "/tmp/envout", 1);
    EXPECT_EQ(cli::resolve_out_dir(""), "/tmp/envout");
    EXPECT_EQ(cli::resolve_out_dir("x"), "x");
    ::unsetenv(cli::kOutEnv);
    EXPECT_EQ(cli::resolve_out_dir(""), "out");
}

TEST_F(CliTest, SweepRows) {
    const auto cfg = write("s.json", kSmall);
    const auto out = dir_ / "sw";
    EXPECT_EQ(cli({"sweep", "--config", cfg, "--axis", "channel.loss_prob", "--values", "0,0.1,0.2", "--trials", "2",
                   "--out", out.string()}),
              cli::kExitOk)
        << err_.str();
    const auto text = slurp(out / "sweep.csv");
    EXPECT_EQ(text.rfind(harness::kSweepHeader, 0), 0u);
    EXPECT_EQ(line_count(out / "sweep.csv"), 2u + 3u);
    EXPECT_EQ(cli({"sweep", "--config", cfg, "--axis", "channel.loss_prob", "--values", "", "--out", out.string()}),
              cli::kExitUsage);
}

TEST_F(CliTest, ReplayEmptyAndCorrupt) {
    const auto empty = write("empty.trace", "");
    EXPECT_EQ(cli({"replay", "--trace", empty}), cli::kExitOk) << err_.str();
    EXPECT_EQ(out_.str().rfind(harness::kReplayHeader, 0), 0u);

    std::ostringstream t;
    t << wifi::kTraceHeader << "\n" << wifi::kTraceColumns << "\n10,1,02:00:00:00:00:07,02:00:00:00:ff:00,data,56,0\nxx\n";
    const auto bad = write("bad.trace", t.str());
    EXPECT_EQ(cli({"replay", "--trace", bad}), cli::kExitUsage);
    EXPECT_NE(err_.str().find("line 4"), std::string::npos) << err_.str();
}

TEST_F(CliTest, ReplayOfRunMatchesProbeLog) {
    const auto cfg = write("s.json", kSmall);
    const auto out = dir_ / "o";
    ASSERT_EQ(cli({"run", "--config", cfg, "--out", out.string()}), cli::kExitOk);
    ASSERT_EQ(cli({"replay", "--trace", (out / "scenario.trace").string()}), cli::kExitOk) << err_.str();
    // Same number of windows as logged probes.
    std::istringstream rep(out_.str());
    std::size_t rows = 0;
    for (std::string line; std::getline(rep, line);) ++rows;
    EXPECT_EQ(rows, line_count(out / "scenario.probelog"));
}

TEST_F(CliTest, ReportTables) {
    const auto sdir = dir_ / "summaries";
    fs::create_directories(sdir);
    EXPECT_EQ(cli({"report", sdir.string()}), cli::kExitUsage);

    const auto cfg = write("s.json", kSmall);
    ASSERT_EQ(cli({"run", "--config", cfg, "--out", sdir.string()}), cli::kExitOk);
    ASSERT_EQ(cli({"report", sdir.string()}), cli::kExitOk) << err_.str();
    EXPECT_EQ(line_count(sdir / "ecdf.csv"), 3u);
    const auto phases = slurp(sdir / "phases.csv");
    EXPECT_EQ(phases.rfind(cli::kPhasesHeader, 0), 0u);
    EXPECT_NE(phases.find("\nport,"), std::string::npos);
}

TEST_F(CliTest, Defend) {
    const auto cfg = write("s.json", kSmall);
    const auto def = write("d.json", R"({"seed": 5, "inference": {"port_range": [40000, 40100], "flood_listen_s": 0},
                                         "defenses": {"padding": {"mode": "fixed", "target": 128}}})");
    EXPECT_EQ(cli({"defend", "--config", cfg, "--defended", def, "--trials", "2", "--out", (dir_ / "d").string()}),
              cli::kExitOk)
        << err_.str();
}

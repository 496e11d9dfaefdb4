#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fstirap/cli.hpp"

using namespace fstirap;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    args.insert(args.begin(), "fstirap");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() / ("fstirap_cli_" + std::to_string(::getpid()) + "_"
                                            + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
        ::unsetenv("FSTIRAP_WORKERS");
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path(name)) << text;
        return path(name);
    }

    fs::path dir_;
};

} // namespace

TEST_F(CliTest, SimulateWritesTrajectoryAndCleanJson)
{
    const auto r = run({"simulate", "--omega0T", "20", "--tau", "0.7", "--trajectory", path("t.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = json::parse(r.out);
    EXPECT_EQ(doc["status"], "ok");
    EXPECT_NEAR(doc["summary"]["final_populations"][2].get<double>(), 0.5, 0.005);
    EXPECT_EQ(doc["config"]["pulses"]["omega0"], 20.0);
    EXPECT_TRUE(fs::exists(path("t.csv")));
}

TEST_F(CliTest, ZeroFieldKeepsGroundState)
{
    const auto r = run({"simulate", "--omega0T", "0", "--trajectory", ""});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["summary"]["final_populations"][0], 1.0);
}

TEST_F(CliTest, P3SetsAlpha)
{
    const auto r = run({"simulate", "--p3", "0.25", "--omega0T", "60", "--trajectory", ""});
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = json::parse(r.out);
    EXPECT_NEAR(doc["config"]["pulses"]["alpha"].get<double>(), std::asin(0.5), 1e-15);
    EXPECT_NEAR(doc["summary"]["final_populations"][2].get<double>(), 0.25, 0.01);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence)
{
    const auto cfg = write("c.json", R"({"pulses": {"omega0T": 10, "tau": 0.5}, "output": {"trajectory": ""}})");
    const auto r = run({"simulate", "--config", cfg, "--omega0T", "30"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = json::parse(r.out);
    EXPECT_EQ(doc["config"]["pulses"]["omega0"], 30.0);
    EXPECT_EQ(doc["config"]["pulses"]["tau"], 0.5);
}

TEST_F(CliTest, AlphaFlagOverridesFileP3)
{
    const auto cfg = write("c.json", R"({"pulses": {"p3": 0.9}, "output": {"trajectory": ""}})");
    const auto r = run({"simulate", "--config", cfg, "--alpha", "0.5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["config"]["pulses"]["alpha"], 0.5);
}

TEST_F(CliTest, UnknownConfigKeysRejected)
{
    auto r = run({"simulate", "--config", write("a.json", R"({"pulses": {"omega": 3}})")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("pulses.omega"), std::string::npos);

    r = run({"simulate", "--config", write("b.json", R"({"sweep": {}})")});
    EXPECT_EQ(r.code, 2);

    r = run({"darkstate", "--config", write("c.json", R"({"pulses": {"tau": 1}})")});
    EXPECT_EQ(r.code, 2);

    r = run({"simulate", "--config", write("d.json", R"({"pulses": {"tau": "long"}})")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("expected a number"), std::string::npos);
}

TEST_F(CliTest, SyntaxErrorReportsLineAndColumn)
{
    const auto r = run({"simulate", "--config", write("bad.json", "{\n  \"pulses\": {\n    \"tau\": ,\n  }\n}\n")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("bad.json:3:"), std::string::npos) << r.err;
}

TEST_F(CliTest, SeedRejected)
{
    EXPECT_EQ(run({"simulate", "--seed", "1"}).code, 2);
    EXPECT_EQ(run({"simulate", "--config", write("s.json", R"({"seed": 4})")}).code, 2);
}

TEST_F(CliTest, InvalidValuesAreConfigErrors)
{
    EXPECT_EQ(run({"simulate", "--tau", "-1"}).code, 2);
    EXPECT_EQ(run({"simulate", "--J", "2", "--Jp", "3"}).code, 2);
    EXPECT_EQ(run({"simulate", "--p3", "1.5"}).code, 2);
    EXPECT_EQ(run({"simulate", "--alpha", "0.2", "--p3", "0.5"}).code, 2);
    EXPECT_EQ(run({"simulate", "--kind", "four_state"}).code, 2);
    EXPECT_EQ(run({"bogus"}).code, 2);
}

TEST_F(CliTest, IntegrationFailureExitCode)
{
    const auto r = run({"simulate", "--max-steps", "5", "--trajectory", path("p.csv")});
    EXPECT_EQ(r.code, 3);
    const json doc = json::parse(r.out);
    EXPECT_EQ(doc["status"], "integration_failure");
    EXPECT_TRUE(doc["partial"].get<bool>());
    EXPECT_TRUE(fs::exists(path("p.csv")));
}

TEST_F(CliTest, DarkStateExactAnnotations)
{
    const auto r = run({"darkstate", "--J", "2", "--Jp", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json amps = json::parse(r.out)["dark_state"]["amplitudes"];
    ASSERT_EQ(amps.size(), 5u);
    EXPECT_EQ(amps[0]["exact"], "+sqrt(1/8)");
    EXPECT_EQ(amps[2]["exact"], "-sqrt(3/4)");
    EXPECT_EQ(amps[4]["exact"], "+sqrt(1/8)");
    EXPECT_FALSE(amps[1].contains("exact"));

    const auto phased = run({"darkstate", "--J", "2", "--Jp", "1", "--beta", "0.5"});
    EXPECT_FALSE(json::parse(phased.out)["dark_state"]["amplitudes"][0].contains("exact"));
}

TEST_F(CliTest, DiagnoseExitCodes)
{
    auto r = run({"diagnose", "--omega0T", "40", "--tau", "0.7", "--delta", "88"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["status"], "adiabatic");

    r = run({"diagnose", "--omega0T", "40", "--tau", "0.2"});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(json::parse(r.out)["status"], "not_adiabatic");

    r = run({"diagnose", "--omega0T", "1"});
    EXPECT_EQ(r.code, 4);
    EXPECT_EQ(json::parse(r.out)["status"], "no_adiabatic_window");

    r = run({"diagnose", "--shape", "truncated"});
    EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, SweepWritesCsvAndSidecar)
{
    const auto r = run({"sweep", "--x-count", "3", "--y-count", "2", "--workers", "2", "--observables",
                        "populations,max_p2", "--csv", path("s.csv"), "--json", path("s.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json doc = json::parse(r.out);
    EXPECT_EQ(doc["cells"], 6);
    EXPECT_EQ(doc["failed_cells"], 0);
    std::ifstream csv(path("s.csv"));
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "tau,omega0,P1,P2,P3,max_p2,status,message");
    std::ifstream side(path("s.json"));
    const json sidecar = json::parse(side);
    EXPECT_EQ(sidecar["metadata"]["workers"], 2);
    EXPECT_TRUE(sidecar.contains("config"));
}

TEST_F(CliTest, WorkersPrecedence)
{
    const std::vector<std::string> base{"sweep", "--x-count", "2", "--y-count", "2", "--csv", path("w.csv"), "--json",
                                        path("w.json")};
    auto workers_used = [&](std::vector<std::string> extra) {
        auto args = base;
        args.insert(args.end(), extra.begin(), extra.end());
        const auto r = run(args);
        EXPECT_EQ(r.code, 0) << r.err;
        std::ifstream side(path("w.json"));
        return json::parse(side)["metadata"]["workers"].get<int>();
    };
    const auto cfg = write("w_cfg.json", R"({"workers": 3})");
    EXPECT_EQ(workers_used({"--config", cfg}), 3);
    ::setenv("FSTIRAP_WORKERS", "2", 1);
    EXPECT_EQ(workers_used({"--config", cfg}), 2);
    EXPECT_EQ(workers_used({"--config", cfg, "--workers", "1"}), 1);
    ::setenv("FSTIRAP_WORKERS", "zero", 1);
    EXPECT_EQ(run(base).code, 2);
    ::unsetenv("FSTIRAP_WORKERS");
}

TEST_F(CliTest, SweepCountBelowTwoRejected)
{
    EXPECT_EQ(run({"sweep", "--x-count", "1", "--csv", path("a.csv"), "--json", path("a.json")}).code, 2);
}

TEST_F(CliTest, OscillationScanReported)
{
    const auto r = run({"sweep", "--oscillation-scan", "--x-lo", "0.15", "--y-count", "3", "--csv", path("o.csv"),
                        "--json", path("o.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(json::parse(r.out)["oscillation"]["insufficient_resolution"].get<bool>());
}

TEST_F(CliTest, DarkStateReferenceExamples)
{
    auto r = run({"darkstate", "--J", "1", "--Jp", "0", "--ratio", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    json amps = json::parse(r.out)["dark_state"]["amplitudes"];
    EXPECT_DOUBLE_EQ(amps[0]["re"].get<double>(), 1.0);
    EXPECT_DOUBLE_EQ(amps[2]["abs"].get<double>(), 0.0);

    r = run({"darkstate", "--J", "3", "--Jp", "3", "--ratio", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    amps = json::parse(r.out)["dark_state"]["amplitudes"];
    const std::vector<std::string> expected{"+sqrt(5/16)", "+sqrt(3/16)", "+sqrt(3/16)", "+sqrt(5/16)"};
    for (std::size_t i = 0; i < expected.size(); ++i)
        EXPECT_EQ(amps[2 * i]["exact"], expected[i]);
}

TEST_F(CliTest, SweepRerunIsBitwiseIdentical)
{
    auto csv_of = [&](const std::string& name, const std::string& workers) {
        const auto r = run({"sweep", "--x-count", "3", "--y-count", "3", "--workers", workers, "--csv", path(name),
                            "--json", path(name + ".json")});
        EXPECT_EQ(r.code, 0) << r.err;
        std::ifstream in(path(name));
        std::stringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const std::string a = csv_of("a.csv", "1");
    EXPECT_EQ(a, csv_of("b.csv", "1"));
    EXPECT_EQ(a, csv_of("c.csv", "3"));
}

TEST_F(CliTest, ShippedConfigsParse)
{
    const fs::path configs = fs::path(FSTIRAP_SOURCE_DIR) / "configs";
    int parsed = 0;
    for (const auto& entry : fs::directory_iterator(configs)) {
        const json doc = cli::load_config_file(entry.path().string());
        const std::string name = entry.path().filename().string();
        const auto command = name.rfind("sweep", 0) == 0       ? cli::Command::Sweep
                             : name.rfind("darkstate", 0) == 0 ? cli::Command::DarkState
                             : name.rfind("diagnose", 0) == 0  ? cli::Command::Diagnose
                                                               : cli::Command::Simulate;
        EXPECT_NO_THROW(cli::parse_config(doc, command)) << name;
        ++parsed;
    }
    EXPECT_GE(parsed, 5);
}

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dqpt/parallel.hpp"
#include "dqpt_cli/commands.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = fs::path(DQPT_SOURCE_DIR) / "configs";

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("dqpt_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(std::vector<std::string> args) {
        out_.str("");
        err_.str("");
        return dqpt::cli::run(args, out_, err_);
    }

    fs::path write(const std::string& name, const std::string& text) {
        const auto p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), {}};
    }

    static json load_json(const fs::path& p) { return json::parse(slurp(p)); }

    fs::path dir_;
    std::ostringstream out_, err_;
};

const char* kSshBase = R"(model:
  h0: {kind: ssh, j1: 1.0, j2: 0.8}
  h1: {kind: ssh, j1: 0.4, j2: 0.8}
  h2: {kind: ssh, j1: 1.0, j2: 0.8}
temperature: {T: 3.0}
grid: {N: 200}
)";

}  // namespace

TEST_F(Cli, RateCurveWritesInfLiteralAndSidecar) {
    ASSERT_EQ(run({"rate-curve", (kConfigs / "kitaev_resonant.yaml").string(), "-o", dir_.string()}), 0)
        << err_.str();
    const auto csv = slurp(dir_ / "rate.csv");
    EXPECT_EQ(csv.rfind("t,g\n", 0), 0u);
    EXPECT_NE(csv.find(",inf\n"), std::string::npos);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    const auto side = load_json(dir_ / "rate.json");
    EXPECT_EQ(side["tau_source"], "tau_star");
    EXPECT_TRUE(side["tau_match"]["matched"].get<bool>());
    EXPECT_EQ(side["n_modes"], 1000);
    EXPECT_EQ(side["kinks_before_tau"], 2);
    EXPECT_TRUE(side["second_quench_reached"].get<bool>());
    EXPECT_TRUE(side.contains("units"));
    EXPECT_TRUE(side.contains("convergence"));
}

TEST_F(Cli, DecimalsCarryAtLeastTwelveSignificantDigits) {
    const auto cfg = write("c.yaml", std::string(kSshBase) + "tau: 8.0\ntime: {t_max: 3.0, n_steps: 7}\n");
    ASSERT_EQ(run({"rate-curve", cfg.string(), "-o", dir_.string()}), 0) << err_.str();
    std::istringstream csv(slurp(dir_ / "rate.csv"));
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
        const auto g = line.substr(line.find(',') + 1);
        const auto mantissa = g.substr(0, g.find('e'));
        EXPECT_GE(mantissa.size(), 13u) << g;  // d.ddd... plus sign-free digits
    }
}

TEST_F(Cli, SecondQuenchNotReached) {
    const auto cfg = write("c.yaml", std::string(kSshBase) + "tau: 8.0\ntime: {t_max: 5.0, n_steps: 51}\n");
    ASSERT_EQ(run({"rate-curve", cfg.string(), "-o", dir_.string()}), 0) << err_.str();
    EXPECT_FALSE(load_json(dir_ / "rate.json")["second_quench_reached"].get<bool>());
}

TEST_F(Cli, SymbolicTauAgreesWithCritical) {
    const auto cfg = write("c.yaml", std::string(kSshBase) + "tau: \"tau_star:n=2,kc=0\"\ntime: {t_max: 30, n_steps: 11}\n");
    ASSERT_EQ(run({"rate-curve", cfg.string(), "-o", dir_.string()}), 0) << err_.str();
    ASSERT_EQ(run({"critical", cfg.string(), "-o", dir_.string()}), 0) << err_.str();
    const auto side = load_json(dir_ / "rate.json");
    const auto crit = load_json(dir_ / "critical.json");
    EXPECT_EQ(side["tau"].get<double>(), crit["critical_momenta"][0]["tau_star"][2].get<double>());
}

TEST_F(Cli, CriticalSshTable) {
    const auto cfg = write("c.yaml", std::string(kSshBase) + "tau: 8.0\n");
    ASSERT_EQ(run({"critical", cfg.string(), "-o", dir_.string()}), 0) << err_.str();
    const auto j = load_json(dir_ / "critical.json");
    ASSERT_EQ(j["critical_momenta"].size(), 1u);
    EXPECT_NEAR(j["critical_momenta"][0]["cos_k"].get<double>(), -13.0 / 14.0, 1e-14);
    EXPECT_EQ(j["critical_momenta"][0]["tau_star"].size(), 3u);
    EXPECT_TRUE(j["metamorphic_possible"].get<bool>());
}

TEST_F(Cli, CriticalWithoutCriticalMomentum) {
    const auto cfg = write("c.yaml", R"(model:
  h0: {kind: ssh, j1: 1.0, j2: 0.5}
  h1: {kind: ssh, j1: 1.0, j2: 0.5}
  h2: {kind: ssh, j1: 1.2, j2: 0.5}
temperature: {beta: inf}
)");
    ASSERT_EQ(run({"critical", cfg.string(), "-o", dir_.string()}), 0) << err_.str();
    const auto j = load_json(dir_ / "critical.json");
    EXPECT_TRUE(j["critical_momenta"].empty());
    EXPECT_FALSE(j["metamorphic_possible"].get<bool>());
    EXPECT_EQ(j["temperature"]["beta"], "inf");
}

TEST_F(Cli, NearTauStarWarns) {
    const auto cfg = write("c.yaml", std::string(kSshBase) + "tau: 10.4\ntime: {t_max: 12, n_steps: 13}\n");
    ASSERT_EQ(run({"rate-curve", cfg.string(), "-o", dir_.string()}), 0) << err_.str();
    EXPECT_NE(err_.str().find("warning"), std::string::npos);
}

TEST_F(Cli, PhaseDiagramCsv) {
    const auto cfg = write("c.yaml", "diagram:\n  model: ssh\n  r1: {min: 0.5, max: 2.0, n: 4}\n  r2: {min: 0.5, max: 2.0, n: 3}\n");
    ASSERT_EQ(run({"phase-diagram", cfg.string(), "-o", dir_.string()}), 0) << err_.str();
    std::istringstream csv(slurp(dir_ / "diagram.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "x,y,exists");
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 12);
    const auto missing = write("d.yaml", "output: x\n");
    EXPECT_EQ(run({"phase-diagram", missing.string(), "-o", dir_.string()}), 2);
}

TEST_F(Cli, DeviationZeroOffsetIsRejected) {
    const auto cfg = write("c.yaml", std::string(kSshBase) + "deviation: {kc: 0, n: 1, epsilons: [0.0]}\n");
    EXPECT_EQ(run({"deviation", cfg.string(), "-o", dir_.string()}), 3);
}

TEST_F(Cli, DeviationMirroredOffsetsAreNearlySymmetric) {
    ASSERT_EQ(run({"deviation", (kConfigs / "ssh_deviation.yaml").string(), "-o", dir_.string()}), 0) << err_.str();
    std::istringstream csv(slurp(dir_ / "deviation.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "epsilon,g_i");
    std::vector<std::pair<double, double>> rows;
    while (std::getline(csv, line)) {
        const auto c = line.find(',');
        rows.emplace_back(std::stod(line.substr(0, c)), std::stod(line.substr(c + 1)));
    }
    ASSERT_EQ(rows.size(), 122u);
    const double w = 0.4535573676110728;
    for (std::size_t i = 0; i < 61; ++i) {
        ASSERT_EQ(rows[i].first, -rows[i + 61].first);
        // |ln|cos(pi/2 + x)| - ln|cos(pi/2 - x)|| = 0 exactly for the resonant branch, O(eps) otherwise
        EXPECT_LE(std::abs(rows[i].second - rows[i + 61].second), 2e-3 * w * std::abs(rows[i].first) + 1e-15);
    }
    for (std::size_t i = 1; i < 61; ++i) EXPECT_LT(rows[i].second, rows[i - 1].second);
    const auto side = load_json(dir_ / "deviation.json");
    EXPECT_NEAR(side["slope_vs_minus_ln_eps"].get<double>() / side["expected_slope"].get<double>(), 1.0, 0.01);
}

TEST_F(Cli, OracleCheckOutcomes) {
    const auto cfg = write("c.yaml", "oracle: {draws: 300, seed: 5}\n");
    EXPECT_EQ(run({"oracle-check", cfg.string(), "-o", dir_.string()}), 0) << err_.str();
    EXPECT_TRUE(load_json(dir_ / "oracle.json")["passed"].get<bool>());
    EXPECT_EQ(run({"oracle-check", cfg.string(), "-o", dir_.string(), "--inject-fault"}), 1);
    EXPECT_EQ(run({"oracle-check", cfg.string(), "-o", dir_.string(), "--draws", "0"}), 3);
}

TEST_F(Cli, ByteIdenticalReruns) {
    const auto cfg = write("c.yaml", std::string(kSshBase) + "tau: 8.0\ntime: {t_max: 20, n_steps: 401}\n");
    const auto a = dir_ / "a", b = dir_ / "b";
    ASSERT_EQ(run({"rate-curve", cfg.string(), "-o", a.string(), "--threads", "1"}), 0);
    ASSERT_EQ(run({"rate-curve", cfg.string(), "-o", b.string(), "--threads", "5"}), 0);
    EXPECT_EQ(slurp(a / "rate.csv"), slurp(b / "rate.csv"));
    EXPECT_EQ(slurp(a / "rate.json"), slurp(b / "rate.json"));
    const auto ocfg = write("o.yaml", "oracle: {draws: 200, seed: 9}\n");
    ASSERT_EQ(run({"oracle-check", ocfg.string(), "-o", a.string()}), 0);
    ASSERT_EQ(run({"oracle-check", ocfg.string(), "-o", b.string(), "--threads", "3"}), 0);
    EXPECT_EQ(slurp(a / "oracle.json"), slurp(b / "oracle.json"));
}

TEST_F(Cli, BatchWritesManifestAndKeepsGoing) {
    const auto cfg = write("c.yaml", std::string(kSshBase) +
                                         "tau: 8.0\ntime: {t_max: 12, n_steps: 25}\n"
                                         "batch:\n  - {tau: 3.0}\n  - {h1.j1: -1.0}\n  - {h1.j2: 0.6, T: 0}\n");
    ASSERT_EQ(run({"rate-curve", cfg.string(), "-o", dir_.string()}), 0) << err_.str();
    const auto m = load_json(dir_ / "batch_manifest.json")["items"];
    ASSERT_EQ(m.size(), 3u);
    EXPECT_TRUE(m[0].contains("file"));
    EXPECT_TRUE(m[1].contains("error"));
    EXPECT_TRUE(fs::exists(dir_ / m[2]["file"].get<std::string>()));
}

TEST_F(Cli, TabulatedStageFromCsv) {
    std::ostringstream table;
    table << "k,e,delta,nx,ny,nz\n";
    const auto grid = dqpt::MomentumGrid::uniform(64);
    for (double k : grid.points()) {
        const auto s = dqpt::ssh_bloch({0.4, 0.8}, k);
        table << dqpt::cli::format_real(k) << ',' << s.e << ',' << dqpt::cli::format_real(s.delta) << ','
              << dqpt::cli::format_real(s.nhat[0]) << ',' << dqpt::cli::format_real(s.nhat[1]) << ','
              << dqpt::cli::format_real(s.nhat[2]) << '\n';
    }
    write("h1.csv", table.str());
    const auto cfg = write("c.yaml", R"(model:
  h0: {kind: ssh, j1: 1.0, j2: 0.8}
  h1: {kind: tabulated, file: h1.csv}
  h2: {kind: ssh, j1: 1.0, j2: 0.8}
temperature: {T: 3.0}
tau: 8.0
grid: {N: 64}
time: {t_max: 10, n_steps: 11}
)");
    ASSERT_EQ(run({"rate-curve", cfg.string(), "-o", dir_.string()}), 0) << err_.str();
    ASSERT_EQ(run({"critical", cfg.string(), "-o", dir_.string()}), 0) << err_.str();
    const auto j = load_json(dir_ / "critical.json");
    EXPECT_EQ(j["method"], "bisection");
    ASSERT_FALSE(j["critical_momenta"].empty());
    const auto off = write("off.yaml", R"(model:
  h0: {kind: ssh, j1: 1.0, j2: 0.8}
  h1: {kind: tabulated, file: h1.csv}
  h2: {kind: ssh, j1: 1.0, j2: 0.8}
temperature: {T: 3.0}
tau: 8.0
grid: {N: 100}
time: {t_max: 10, n_steps: 11}
)");
    EXPECT_EQ(run({"rate-curve", off.string(), "-o", dir_.string()}), 3);
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run({}), 2);
    EXPECT_EQ(run({"frobnicate"}), 2);
    EXPECT_EQ(run({"critical", (dir_ / "missing.yaml").string()}), 2);
    EXPECT_EQ(run({"critical", write("bad.yaml", "model: [unclosed\n").string()}), 2);
    EXPECT_EQ(run({"critical", write("unk.yaml", "modle: {}\n").string()}), 2);
    EXPECT_EQ(run({"critical", write("tau.yaml", std::string(kSshBase) + "tau: \"tau_star:n=x\"\n").string()}), 2);
    EXPECT_EQ(run({"critical", write("neg.yaml", R"(model:
  h0: {kind: ssh, j1: 1.0, j2: 0.8}
  h1: {kind: ssh, j1: -0.4, j2: 0.8}
  h2: {kind: ssh, j1: 1.0, j2: 0.8}
)").string(), "-o", dir_.string()}), 3);
    EXPECT_EQ(run({"rate-curve", write("t.yaml", R"(model:
  h0: {kind: ssh, j1: 1.0, j2: 0.8}
  h1: {kind: ssh, j1: 0.4, j2: 0.8}
  h2: {kind: ssh, j1: 1.0, j2: 0.8}
temperature: {T: -1}
tau: 8.0
)").string(), "-o", dir_.string()}), 3);
    EXPECT_EQ(run({"rate-curve", write("t2.yaml", std::string(kSshBase) + "tau: -8.0\n").string(), "-o", dir_.string()}), 3);
    EXPECT_EQ(run({"rate-curve", write("kc.yaml", std::string(kSshBase) + "tau: \"tau_star:n=0,kc=4\"\n").string(),
                   "-o", dir_.string()}), 3);
    EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(Cli, ToolBinaryExitCodes) {
    const std::string tool = DQPT_TOOL_PATH;
    const auto cfg = write("c.yaml", "oracle: {draws: 50, seed: 1}\n");
    const auto code = [&](const std::string& args) {
        const int s = std::system((tool + " " + args + " > /dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    EXPECT_EQ(code("oracle-check " + cfg.string() + " -o " + dir_.string()), 0);
    EXPECT_EQ(code("oracle-check " + cfg.string() + " -o " + dir_.string() + " --inject-fault"), 1);
    EXPECT_EQ(code("nope"), 2);
    EXPECT_EQ(code("oracle-check " + cfg.string() + " -o " + dir_.string() + " --draws 0"), 3);
}

TEST(Threads, EnvironmentFallback) {
    ::setenv("DQPT_THREADS", "3", 1);
    EXPECT_EQ(dqpt::resolve_threads(0), 3u);
    EXPECT_EQ(dqpt::resolve_threads(2), 2u);
    ::unsetenv("DQPT_THREADS");
    EXPECT_GE(dqpt::resolve_threads(0), 1u);
}

#include <json.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string out; // stdout and stderr
};

CliRun run(const std::string& args) {
    const std::string cmd = std::string(LQMLE_CLI) + " " + args + " 2>&1";
    CliRun r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    while (std::size_t k = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, k);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string config(const char* name) { return std::string(LQMLE_CONFIGS) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    fs::path dir;
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("lqmle_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string path(const char* name) const { return (dir / name).string(); }
};

} // namespace

TEST_F(Cli, CheckStationarityPoint) {
    const CliRun r = run("check-stationarity " + config("stationarity_arch1.json"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("member=true"), std::string::npos) << r.out;
    const auto pos = r.out.find("margin=");
    ASSERT_NE(pos, std::string::npos);
    EXPECT_NEAR(std::stod(r.out.substr(pos + 7)), 1.0 - std::sqrt(0.2) * std::sqrt(M_PI / 2.0), 1e-9);
}

TEST_F(Cli, CheckStationarityOfUnitRootFails) {
    std::ofstream(path("ar1.json")) << R"({"model": {"family": "arma", "p": 1, "box": {"ar1": [-1.5, 1.5]}},
                                         "theta": [1.0], "noise": "laplace"})";
    const CliRun r = run("check-stationarity " + path("ar1.json"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("member=false"), std::string::npos) << r.out;
}

TEST_F(Cli, ZeroSampleSizeIsAConfigError) {
    for (const char* set : {"sizes=0", "sizes=[0]"}) {
        const CliRun r = run("simulate " + config("simulate_arch1.json") + " --set " + set + " --out " + path("x.csv"));
        EXPECT_EQ(r.code, 2) << r.out;
        EXPECT_NE(r.out.find("sizes"), std::string::npos) << r.out;
        EXPECT_FALSE(fs::exists(path("x.csv")));
    }
}

TEST_F(Cli, MissingConfigIsAnIoError) {
    const CliRun r = run("simulate " + path("nope.json"));
    EXPECT_EQ(r.code, 1) << r.out;
}

TEST_F(Cli, BadArgumentsExitWithTwo) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("experiment " + config("arch1.json") + " --workers 0").code, 2);
    EXPECT_EQ(run("--version").code, 0);
}

TEST_F(Cli, SimulateThenFit) {
    const std::string data = path("arch1_laplace.csv");
    CliRun r = run("simulate " + config("simulate_arch1.json") + " --out " + data);
    ASSERT_EQ(r.code, 0) << r.out;
    ASSERT_TRUE(fs::exists(data));
    ASSERT_TRUE(fs::exists(data + ".manifest.json"));
    const auto manifest = nlohmann::json::parse(slurp(data + ".manifest.json"));
    EXPECT_EQ(manifest["command"], "simulate");
    EXPECT_EQ(manifest["seed"], 7);

    // identical seeds give identical files
    r = run("simulate " + config("simulate_arch1.json") + " --out " + path("again.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(slurp(data), slurp(path("again.csv")));

    const std::string res = path("fit.json");
    r = run("fit " + config("fit_arch1.json") + " --data " + data + " --out " + res);
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = nlohmann::json::parse(slurp(res));
    EXPECT_TRUE(j["converged"].get<bool>());
    EXPECT_NEAR(j["theta_hat"]["omega"].get<double>(), 0.4, 0.1);
    EXPECT_NEAR(j["theta_hat"]["alpha1"].get<double>(), 0.2, 0.1);
    const auto ci = j["intervals"]["omega"];
    EXPECT_LT(ci[0].get<double>(), j["theta_hat"]["omega"].get<double>());
    EXPECT_GT(ci[1].get<double>(), j["theta_hat"]["omega"].get<double>());
    EXPECT_TRUE(fs::exists(res + ".manifest.json"));

    r = run("fit " + config("fit_arch1.json") + " --data " + path("missing.csv"));
    EXPECT_EQ(r.code, 1) << r.out;
}

TEST_F(Cli, ExperimentThenTable) {
    const std::string csv = path("rmse.csv");
    CliRun r = run("experiment " + config("arch1.json") +
                " --set sizes=[200] --set replications=3 --set noises=[\\\"laplace\\\"] --set optim.n_starts=2"
                " --workers 2 --out " +
                csv);
    ASSERT_EQ(r.code, 0) << r.out;
    const std::string text = slurp(csv);
    EXPECT_EQ(text.rfind("model,component,n,noise,contrast,rmse,reps,failures\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * 2);
    EXPECT_TRUE(fs::exists(csv + ".manifest.json"));

    r = run("table " + csv + " --out " + path("table.txt"));
    ASSERT_EQ(r.code, 0) << r.out;
    const std::string table = slurp(path("table.txt"));
    EXPECT_NE(table.find("laplace GQL/LQL"), std::string::npos) << table;
    EXPECT_NE(table.find("alpha1"), std::string::npos) << table;
}

TEST_F(Cli, ArmaExperimentReproducesPublishedCell) {
    const std::string csv = path("arma.csv");
    const CliRun r = run("experiment " + config("arma11.json") +
                         " --set sizes=[1000] --set noises=[\\\"laplace\\\"] --set contrasts=[\\\"lql\\\"] --out " + csv);
    ASSERT_EQ(r.code, 0) << r.out;
    double rmse = -1.0;
    std::istringstream in(slurp(csv));
    for (std::string line; std::getline(in, line);)
        if (line.rfind("\"arma(1,1)\",ma1,1000,laplace,lql,", 0) == 0) rmse = std::stod(line.substr(line.rfind("lql,") + 4));
    // published 0.024; window as in the acceptance suite
    EXPECT_GE(rmse, 0.017) << slurp(csv);
    EXPECT_LE(rmse, 0.031) << slurp(csv);
}

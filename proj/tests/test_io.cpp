#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "l1rls/io/commands.hpp"
#include "l1rls/validation.hpp"

using namespace l1rls;
using namespace l1rls::io;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("l1rls_io_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path path(const std::string& name) const { return dir_ / name; }

    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name), std::ios::binary) << text;
        return path(name);
    }

    fs::path write_json(const std::string& name, const json& j) const { return write(name, j.dump(2)); }

    fs::path dir_;
};

// Eight taps, short horizon: every command finishes in well under a second.
json small_config_json() {
    return {{"filter", {{"taps", 8}, {"lambda", 0.98}, {"delta", 0.2}, {"epsilon", 0.1}}},
            {"signal",
             {{"rho", 0.6},
              {"sigma_s2", 0.64},
              {"sigma_z2", 0.09},
              {"w_star", {0.9, 0.5, 0.0, 0.0, 0.0, 0.0, -0.5, -0.9}}}},
            {"run", {{"n_iters", 200}, {"n_runs", 120}, {"seed", 7}}},
            {"capture", {{"instants", {50, 200}}, {"pairs", {{1, 3}, {4, 8}}}, {"samples", 120}}},
            {"compare", {{"db_tolerance", 1.0}, {"from_n", 20}, {"mean_w_tolerance", 0.02},
                         {"terminal_window", 50}, {"terminal_mse_db", 0.5}}}};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string data_rows(const std::string& csv) {
    return csv.substr(csv.find('\n') + 1);
}

json without_timing(json manifest) {
    manifest.erase("duration_s");
    manifest.erase("output_dir");
    return manifest;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
    const fs::path log = fs::temp_directory_path() / "l1rls_cli_output.txt";
    const std::string cmd = std::string("\"") + L1RLS_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    if (output) *output = slurp(log);
    fs::remove(log);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

TEST(Config, ReferenceFileMatchesPreset) {
    const auto doc = load_config(std::string(L1RLS_SOURCE_DIR) + "/configs/reference.json");
    EXPECT_EQ(config_hash(doc), config_hash(preset_document()));
}

TEST(Config, RoundTripPreservesHash) {
    const auto doc = config_from_json(small_config_json());
    const auto again = parse_config(config_to_json(doc).dump());
    EXPECT_EQ(config_hash(doc), config_hash(again));
    EXPECT_EQ(again.experiment.w_star, doc.experiment.w_star);
    EXPECT_EQ(again.compare.from_n, 20u);
    auto other = doc;
    other.experiment.seed = 8;
    EXPECT_NE(config_hash(other), config_hash(doc));
}

TEST(Config, MissingFieldIsNamed) {
    json j = small_config_json();
    j["filter"].erase("lambda");
    try {
        config_from_json(j);
        FAIL() << "expected ConfigFileError";
    } catch (const ConfigFileError& e) {
        EXPECT_EQ(e.field(), "filter.lambda");
    }
}

TEST(Config, SyntaxErrorReportsLine) {
    try {
        parse_config("{\n  \"filter\": {\n    \"taps\": 8,,\n  }\n}");
        FAIL() << "expected ConfigFileError";
    } catch (const ConfigFileError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Config, WrongTypesAndValuesRejected) {
    json j = small_config_json();
    j["signal"]["w_star"] = {1.0, 2.0};
    EXPECT_THROW(config_from_json(j), ConfigFileError);
    j = small_config_json();
    j["filter"]["lambda"] = "high";
    EXPECT_THROW(config_from_json(j), ConfigFileError);
    j = small_config_json();
    j["run"]["n_runs"] = -3;
    EXPECT_THROW(config_from_json(j), ConfigFileError);
    j = small_config_json();
    j["capture"]["pairs"] = {{1, 9}};
    j["capture"]["instants"] = {10};
    EXPECT_THROW(config_from_json(j), ConfigFileError);
}

TEST(Config, OverridesRevalidate) {
    const auto doc = config_from_json(small_config_json());
    const auto o = apply_overrides(doc, {99, 10});
    EXPECT_EQ(o.experiment.seed, 99u);
    EXPECT_EQ(o.experiment.n_runs, 10u);
    EXPECT_THROW(apply_overrides(doc, {std::nullopt, 0}), ConfigFileError);
}

// ---------------------------------------------------------------------------
// CSV

TEST_F(IoTest, TrajectoryCsvRoundTripIsExact) {
    TrajectoryRecord rec(Provenance::theoretical, 5, 3);
    for (Eigen::Index t = 0; t < 5; ++t)
        for (Eigen::Index i = 0; i < 3; ++i) rec.mean_w(t, i) = std::sin(1.0 + static_cast<double>(t * 3 + i)) / 3.0;
    for (std::size_t t = 0; t < 5; ++t) {
        rec.msd[t] = 1.0 / (3.0 + static_cast<double>(t));
        rec.mse[t] = 0.09 + 1e-17 * static_cast<double>(t);
        rec.emse[t] = std::exp(-static_cast<double>(t)) * 1e-300;
    }
    const auto p = write("t.csv", trajectory_csv(rec, "1.2.3", "abc"));
    const auto loaded = read_trajectory_csv(p.string());
    EXPECT_EQ(loaded.header.provenance, "theoretical");
    EXPECT_EQ(loaded.header.config_hash, "abc");
    EXPECT_EQ(loaded.header.tool_version, "1.2.3");
    EXPECT_EQ(loaded.record.mean_w, rec.mean_w);
    EXPECT_EQ(loaded.record.msd, rec.msd);
    EXPECT_EQ(loaded.record.mse, rec.mse);
    EXPECT_EQ(loaded.record.emse, rec.emse);
}

TEST_F(IoTest, CsvSchemaViolationsRejected) {
    EXPECT_THROW(read_trajectory_csv(write("a.csv", "n,mean_w_1,msd,mse,emse\n1,0,1,1,1\n").string()), SchemaError);
    EXPECT_THROW(read_trajectory_csv(write("b.csv", "# l1rls x schema=1 provenance=empirical config_hash=h\n"
                                                    "n,w1,msd,mse,emse\n1,0,1,1,1\n")
                                         .string()),
                 SchemaError);
    EXPECT_THROW(read_trajectory_csv(write("c.csv", "# l1rls x schema=1 provenance=empirical config_hash=h\n"
                                                    "n,mean_w_1,msd,mse,emse\n1,0,1,1\n")
                                         .string()),
                 SchemaError);
    EXPECT_THROW(read_trajectory_csv(path("missing.csv").string()), SchemaError);
}

// ---------------------------------------------------------------------------
// Commands

TEST_F(IoTest, SimulateIsByteReproducible) {
    const auto doc = config_from_json(small_config_json());
    std::ostringstream log;
    const auto a = simulate(doc, path("a"), log);
    const auto b = simulate(doc, path("b"), log);
    EXPECT_EQ(slurp(path("a") / "empirical.csv"), slurp(path("b") / "empirical.csv"));
    EXPECT_EQ(a.csv, slurp(path("a") / "empirical.csv"));
    const json ma = json::parse(slurp(path("a") / "manifest.json"));
    const json mb = json::parse(slurp(path("b") / "manifest.json"));
    EXPECT_EQ(without_timing(ma), without_timing(mb));
    EXPECT_EQ(ma["outputs"]["empirical"], "empirical.csv");
}

TEST_F(IoTest, ManifestConfigReproducesOutputs) {
    auto doc = config_from_json(small_config_json());
    std::ostringstream log;
    simulate(apply_overrides(doc, {123, 30}), path("first"), log);
    const json manifest = json::parse(slurp(path("first") / "manifest.json"));
    const auto snapshot = write_json("snapshot.json", manifest["config"]);
    simulate(load_config(snapshot.string()), path("second"), log);
    EXPECT_EQ(slurp(path("first") / "empirical.csv"), slurp(path("second") / "empirical.csv"));
}

TEST_F(IoTest, PredictIgnoresSeed) {
    auto j = small_config_json();
    std::ostringstream log;
    predict(config_from_json(j), path("a"), log);
    j["run"]["seed"] = 12345;
    predict(config_from_json(j), path("b"), log);
    EXPECT_EQ(data_rows(slurp(path("a") / "theoretical.csv")), data_rows(slurp(path("b") / "theoretical.csv")));
}

TEST_F(IoTest, PredictWithoutAttractorMatchesRlsRecursion) {
    auto j = small_config_json();
    j["filter"]["delta"] = 0.0;
    const auto doc = config_from_json(j);
    std::ostringstream log;
    const auto out = predict(doc, path("p"), log);
    const auto& c = doc.experiment;
    const Eigen::MatrixXd r = rx_toeplitz(c.rho, c.sigma_x2(), 8);
    Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(8, 8) / c.epsilon;
    Eigen::MatrixXd k = c.w_star * c.w_star.transpose();
    for (std::size_t t = 0; t < c.n_iters; ++t) {
        const Eigen::MatrixXd next = c.lambda * phi + r;
        const Eigen::MatrixXd inv = next.inverse();
        k = inv * (c.lambda * c.lambda * phi * k * phi + c.sigma_z2 * r) * inv;
        phi = next;
        EXPECT_NEAR(out.record.msd[t], k.trace(), 1e-12 * k.trace());
    }
}

TEST_F(IoTest, CompareIdenticalInputsPasses) {
    const auto doc = config_from_json(small_config_json());
    std::ostringstream log;
    predict(doc, path("p"), log);
    const auto res = compare(path("p") / "theoretical.csv", path("p") / "theoretical.csv", path("c"), doc.compare, log);
    EXPECT_TRUE(res.report.pass);
    for (const auto& d : res.report.deviations) EXPECT_EQ(d.max_abs, 0.0) << d.channel;
    EXPECT_FALSE(res.report.warnings.empty());  // provenance of the first file is not empirical
    for (const char* f : {"compare_report.json", "compare_report.txt", "compare_manifest.json",
                          "fig2a_mean_weights.svg", "fig2b_mse_emse.svg", "fig2c_msd.svg"})
        EXPECT_TRUE(fs::exists(path("c") / f)) << f;
    const json report = json::parse(slurp(path("c") / "compare_report.json"));
    EXPECT_EQ(report["verdict"], "pass");
}

TEST_F(IoTest, CompareRejectsMismatchedLengths) {
    auto j = small_config_json();
    std::ostringstream log, err;
    predict(config_from_json(j), path("a"), log);
    j["run"]["n_iters"] = 150;
    j["capture"]["instants"] = {50, 150};
    predict(config_from_json(j), path("b"), log);
    EXPECT_EQ(cmd_compare(path("a") / "theoretical.csv", path("b") / "theoretical.csv", path("c"), std::nullopt, log,
                          err),
              kExitConfig);
    EXPECT_NE(err.str().find("lengths differ"), std::string::npos);
}

TEST_F(IoTest, NormalityOutputsAreDeterministic) {
    const auto doc = config_from_json(small_config_json());
    std::ostringstream log;
    const auto a = normality(doc, path("a"), log);
    normality(doc, path("b"), log);
    ASSERT_EQ(a.reports.size(), 2u);
    for (const char* f : {"samples_n50_i1_j3.csv", "hist_n50_i1_j3.csv", "fig1_n50_i1_j3.svg",
                          "samples_n200_i4_j8.csv", "normality_report.json", "normality_report.txt"}) {
        ASSERT_TRUE(fs::exists(path("a") / f)) << f;
        EXPECT_EQ(slurp(path("a") / f), slurp(path("b") / f)) << f;
    }
    const json rep = json::parse(slurp(path("a") / "normality_report.json"));
    EXPECT_EQ(rep["sets"].size(), 2u);
    EXPECT_EQ(rep["sets"][0]["samples"], 120);
}

TEST_F(IoTest, NormalityRequiresEnoughRuns) {
    auto j = small_config_json();
    j["capture"]["samples"] = 500;
    std::ostringstream log, err;
    EXPECT_EQ(cmd_normality(write_json("c.json", j), path("out"), {}, log, err), kExitConfig);
    EXPECT_NE(err.str().find("capture.samples"), std::string::npos);
}

TEST_F(IoTest, ReproduceRefusesPopulatedDirectory) {
    write("keep.txt", "x");
    std::ostringstream log, err;
    EXPECT_EQ(cmd_reproduce_figures(dir_, {}, log, err), kExitConfig);
    EXPECT_NE(err.str().find("--overwrite"), std::string::npos);
    EXPECT_EQ(slurp(path("keep.txt")), "x");
}

TEST_F(IoTest, NumericalFailureExitsWithRuntimeCode) {
    auto j = small_config_json();
    j["signal"]["sigma_s2"] = 1e300;
    std::ostringstream log, err;
    EXPECT_EQ(cmd_simulate(write_json("c.json", j), path("out"), {}, log, err), kExitRuntime);
    EXPECT_NE(err.str().find("run 0"), std::string::npos) << err.str();
}

// ---------------------------------------------------------------------------
// Command-line binary

TEST_F(IoTest, CliExitCodes) {
    const auto good = write_json("good.json", small_config_json());
    auto j = small_config_json();
    j["filter"].erase("lambda");
    const auto missing = write_json("missing.json", j);
    j = small_config_json();
    j["signal"]["w_star"] = {1.0, 0.0, 0.0};
    const auto short_w = write_json("short.json", j);
    const auto broken = write("broken.json", std::string("{ \"filter\": "));

    std::string out;
    EXPECT_EQ(run_cli("--version", &out), 0);
    EXPECT_EQ(run_cli("", &out), 2);
    EXPECT_EQ(run_cli("simulate --config \"" + missing.string() + "\" --out \"" + path("m").string() + "\"", &out), 2);
    EXPECT_NE(out.find("filter.lambda"), std::string::npos) << out;
    EXPECT_EQ(run_cli("predict --config \"" + short_w.string() + "\" --out \"" + path("s").string() + "\"", &out), 2);
    EXPECT_NE(out.find("w_star"), std::string::npos) << out;
    EXPECT_EQ(run_cli("simulate --config \"" + broken.string() + "\" --out \"" + path("b").string() + "\"", &out), 2);
    EXPECT_EQ(run_cli("simulate --config \"" + path("nope.json").string() + "\" --out x", &out), 2);
    EXPECT_EQ(run_cli("simulate --config \"" + good.string() + "\" --out \"" + path("g").string() + "\" --runs 0", &out),
              2);

    EXPECT_EQ(run_cli("simulate --config \"" + good.string() + "\" --out \"" + path("run").string() + "\"", &out), 0);
    EXPECT_EQ(run_cli("predict --config \"" + good.string() + "\" --out \"" + path("run").string() + "\"", &out), 0);
    EXPECT_EQ(run_cli("compare \"" + (path("run") / "empirical.csv").string() + "\" \"" +
                          (path("run") / "theoretical.csv").string() + "\" --out \"" + path("cmp").string() +
                          "\" --config \"" + good.string() + "\"",
                      &out),
              0);
    EXPECT_TRUE(fs::exists(path("cmp") / "compare_report.json"));
    EXPECT_EQ(run_cli("compare \"" + (path("run") / "empirical.csv").string() + "\" \"" +
                          path("absent.csv").string() + "\" --out \"" + path("cmp2").string() + "\"",
                      &out),
              2);
}

TEST_F(IoTest, CliSeedOverrideRecordedInManifest) {
    const auto good = write_json("good.json", small_config_json());
    std::string out;
    ASSERT_EQ(run_cli("simulate --config \"" + good.string() + "\" --out \"" + path("a").string() +
                          "\" --seed 99 --runs 15",
                      &out),
              0)
        << out;
    const json m = json::parse(slurp(path("a") / "manifest.json"));
    EXPECT_EQ(m["config"]["run"]["seed"], 99);
    EXPECT_EQ(m["config"]["run"]["n_runs"], 15);
    EXPECT_EQ(m["command"], "simulate");
}

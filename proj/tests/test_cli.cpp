/*
 * Copyright 2026 The cfhybrid Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfhybrid.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cfhybrid;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        root_ = new fs::path(fs::temp_directory_path() / ("cfhybrid-cli-" + std::to_string(::getpid())));
        fs::remove_all(*root_);
        const auto d = dir("data"), m = dir("model"), e = dir("eval");
        ASSERT_EQ(run({"synth", "--n", "900", "--out", d}).code, 0);
        ASSERT_EQ(run({"train", "--data", d + "/cohort.csv", "--schema", d + "/schema.json", "--out", m, "--n-trees",
                       "60"})
                      .code,
                  0);
        ASSERT_EQ(run({"evaluate", "--data", d + "/cohort.csv", "--schema", d + "/schema.json", "--model",
                       m + "/model.json", "--split", m + "/split.json", "--n-boot", "200", "--out", e})
                      .code,
                  0);
    }
    static void TearDownTestSuite() {
        fs::remove_all(*root_);
        delete root_;
    }

    static std::string dir(const std::string& name) { return (*root_ / name).string(); }

    static std::vector<std::string> explain_args(const std::string& out) {
        const auto d = dir("data"), m = dir("model");
        return {"explain", "--data", d + "/cohort.csv", "--schema", d + "/schema.json", "--model", m + "/model.json",
                "--out", out};
    }

    /// Row with the highest predicted risk.
    static std::size_t top_row() {
        const auto t = load_dataset(dir("data") + "/cohort.csv", dir("data") + "/schema.json");
        const auto model = model_from_json(json::parse(slurp(dir("model") + "/model.json")));
        const auto s = model.class_probabilities(t.dataset.rows(), 1);
        return static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
    }

    static inline fs::path* root_ = nullptr;
};

}  // namespace

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"synth"}).code, 1);
    EXPECT_EQ(run({"synth", "--out", dir("x"), "--bogus", "1"}).code, 1);
    EXPECT_EQ(run({"synth", "--out", dir("x"), "--planted", "HTN"}).code, 1);
}

TEST_F(CliTest, SynthOutputs) {
    for (const char* f : {"timelines.jsonl", "cohort.csv", "schema.json", "matching.json", "manifest.json"})
        EXPECT_TRUE(fs::exists(*root_ / "data" / f)) << f;
    const auto matching = json::parse(slurp(*root_ / "data" / "matching.json"));
    EXPECT_EQ(matching["ratio"], 6);
    EXPECT_EQ(matching["order"], "match-then-split");
    const auto manifest = json::parse(slurp(*root_ / "data" / "manifest.json"));
    EXPECT_EQ(manifest["command"], "synth");
    EXPECT_EQ(manifest["seeds"]["cohort"], 7);
    EXPECT_EQ(manifest["outputs"].size(), 4u);
    for (const char* k : {"tool", "version", "args", "inputs", "config_hash", "timestamp", "elapsed_ms"})
        EXPECT_TRUE(manifest.contains(k)) << k;
}

TEST_F(CliTest, TrainAndEvaluateOutputs) {
    const auto cv = json::parse(slurp(*root_ / "model" / "cv.json"));
    EXPECT_EQ(cv["aurocs"].size(), 5u);
    const auto split = json::parse(slurp(*root_ / "model" / "split.json"));
    EXPECT_GT(split["train"].size(), split["test"].size());
    const auto ev = json::parse(slurp(*root_ / "eval" / "eval.json"));
    EXPECT_EQ(ev["split"], "test");
    EXPECT_EQ(ev["n"], split["test"].size());
    EXPECT_GT(ev["auroc"].get<double>(), 0.6);
    EXPECT_EQ(slurp(*root_ / "eval" / "roc.csv").substr(0, 24), "fpr,tpr,threshold\n0,0,in");
    const auto imp = slurp(*root_ / "eval" / "importance.csv");
    EXPECT_EQ(imp.substr(0, 19), "feature,importance\n");
    EXPECT_EQ(imp.substr(19, 20), "HTN@-365:0.presence,");
}

TEST_F(CliTest, ExplainHighRiskRow) {
    const auto out = dir("explain-top");
    auto args = explain_args(out);
    for (auto a : {"--row", "", "--p-min", "0", "--p-max", "0.4", "--fix", "age,sex"}) args.push_back(a);
    args[args.size() - 7] = std::to_string(top_row());
    const auto r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = json::parse(slurp(out + "/report.json"));
    EXPECT_GE(report["counterfactuals"].size(), 1u);
    EXPECT_EQ(report["query"]["fixed"], json({"age", "sex"}));
    EXPECT_FALSE(report["stages"]["enumeration"].contains("elapsed_ms"));
    EXPECT_TRUE(fs::exists(out + "/manifest.json"));
}

TEST_F(CliTest, ExplainDefaultsBandToEvaluationThreshold) {
    const auto out = dir("explain-eval");
    auto args = explain_args(out);
    for (auto a : {"--row", "0", "--eval"}) args.push_back(a);
    args.push_back(dir("eval") + "/eval.json");
    const auto r = run(args);
    ASSERT_TRUE(r.code == 0 || r.code == 3) << r.err;
    const auto report = json::parse(slurp(out + "/report.json"));
    const auto ev = json::parse(slurp(dir("eval") + "/eval.json"));
    EXPECT_EQ(report["query"]["p_max"], ev["threshold"]);
    EXPECT_EQ(report["query"]["band_source"], "youden-threshold");
}

TEST_F(CliTest, ExplainExitCodes) {
    auto bad_band = explain_args(dir("e1"));
    for (auto a : {"--row", "0", "--p-min", "0.6", "--p-max", "0.2"}) bad_band.push_back(a);
    EXPECT_EQ(run(bad_band).code, 1);

    auto unreachable = explain_args(dir("e2"));
    for (auto a : {"--row", "0", "--p-min", "0.9999", "--p-max", "1", "--generations", "3"}) unreachable.push_back(a);
    const auto r = run(unreachable);
    EXPECT_EQ(r.code, 3) << r.err;
    EXPECT_EQ(json::parse(slurp(dir("e2") + "/report.json"))["stage_used"], "none");

    auto no_row = explain_args(dir("e3"));
    EXPECT_EQ(run(no_row).code, 1);
    auto bad_row = explain_args(dir("e3"));
    for (auto a : {"--row", "999999"}) bad_row.push_back(a);
    EXPECT_EQ(run(bad_row).code, 1);
    auto bad_fix = explain_args(dir("e3"));
    for (auto a : {"--row", "0", "--fix", "nope"}) bad_fix.push_back(a);
    EXPECT_EQ(run(bad_fix).code, 1);

    auto missing = explain_args(dir("e4"));
    missing[2] = dir("nope.csv");
    missing.push_back("--row");
    missing.push_back("0");
    EXPECT_EQ(run(missing).code, 2);

    auto budget = explain_args(dir("e5"));
    for (auto a : {"--row", "0", "--budget-ms", "0"}) budget.push_back(a);
    EXPECT_EQ(run(budget).code, 2);
}

TEST_F(CliTest, ModelSchemaMismatchIsADataError) {
    const auto csv = dir("other.csv");
    std::ofstream(csv) << "a,b,label\n1,2,0\n3,4,1\n5,6,0\n";
    auto args = std::vector<std::string>{"explain", "--data", csv, "--model", dir("model") + "/model.json", "--row",
                                         "0", "--out", dir("e6")};
    EXPECT_EQ(run(args).code, 2);
}

TEST_F(CliTest, ExplainInstanceFile) {
    const auto t = load_dataset(dir("data") + "/cohort.csv", dir("data") + "/schema.json");
    const auto inst = instance_to_json(t.dataset.schema(), t.dataset.row(top_row()));
    std::ofstream(dir("instance.json")) << inst.dump();
    auto args = explain_args(dir("e7"));
    for (auto a : {"--p-max", "0.4", "--instance"}) args.push_back(a);
    args.push_back(dir("instance.json"));
    EXPECT_EQ(run(args).code, 0);
}

TEST_F(CliTest, ConfigFileAndDataDir) {
    const auto cfg = dir("explain-config.json");
    std::ofstream(cfg) << json{{"p-max", 0.4}, {"row", top_row()}, {"fix", {"age", "sex"}}, {"k", 2}}.dump();
    setenv("CFHYBRID_DATA_DIR", root_->c_str(), 1);
    const auto r = run({"explain", "--config", "explain-config.json", "--data", "data/cohort.csv", "--schema",
                        "data/schema.json", "--model", "model/model.json", "--out", "e8"});
    unsetenv("CFHYBRID_DATA_DIR");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = json::parse(slurp(dir("e8") + "/report.json"));
    EXPECT_EQ(report["query"]["k"], 2);
    EXPECT_EQ(report["query"]["fixed"], json({"age", "sex"}));
    EXPECT_LE(report["counterfactuals"].size(), 2u);
}

TEST_F(CliTest, EvaluateSeparableData) {
    const auto csv = dir("sep.csv");
    {
        std::ofstream out(csv);
        out << "x1,x2,label\n";
        Rng rng(3);
        for (int i = 0; i < 500; ++i) {
            const double a = rng.uniform(), b = rng.uniform();
            if (std::abs(a + b - 1) < 0.05) continue;
            out << a << ',' << b << ',' << (a + b > 1) << '\n';
        }
    }
    ASSERT_EQ(run({"train", "--data", csv, "--out", dir("sep-model")}).code, 0);
    ASSERT_EQ(run({"evaluate", "--data", csv, "--model", dir("sep-model") + "/model.json", "--split",
                   dir("sep-model") + "/split.json", "--out", dir("sep-eval")})
                  .code,
              0);
    const auto ev = json::parse(slurp(dir("sep-eval") + "/eval.json"));
    EXPECT_GE(ev["auroc"].get<double>(), 0.95);
    EXPECT_EQ(run({"evaluate", "--data", csv, "--model", dir("sep-model") + "/model.json", "--out", dir("x")}).code, 1);
}

TEST_F(CliTest, ReplayReproducesOutputs) {
    const auto out = dir("replay");
    auto args = explain_args(out);
    for (auto a : {"--row", "5", "--p-max", "0.3", "--seed", "4"}) args.push_back(a);
    const auto first = run(args);
    ASSERT_TRUE(first.code == 0 || first.code == 3);
    const auto report = slurp(out + "/report.json");
    fs::copy_file(out + "/manifest.json", dir("replay-manifest.json"));
    fs::remove_all(out);
    EXPECT_EQ(run({"replay", dir("replay-manifest.json")}).code, first.code);
    EXPECT_EQ(slurp(out + "/report.json"), report);
}

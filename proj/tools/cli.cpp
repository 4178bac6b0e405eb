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

#include "cli.hpp"

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cfhybrid.hpp"
#include "cfhybrid/service.hpp"

namespace cfhybrid::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kDataDirEnv = "CFHYBRID_DATA_DIR";

/// Relative paths are resolved against $CFHYBRID_DATA_DIR when it is set.
std::string resolve(const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute()) return path;
    const char* dir = std::getenv(kDataDirEnv);
    if (dir && *dir) return (fs::path(dir) / path).string();
    return path;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::data, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::data, "cannot write '" + path.string() + "'");
    out << content;
}

json read_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail(ErrorKind::data, "'" + path + "': " + e.what());
    }
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Run record written next to every command's outputs. Only `timestamp` and
/// `elapsed_ms` vary between identical runs.
class Manifest {
public:
    Manifest(std::string command, std::vector<std::string> args)
        : start_(std::chrono::steady_clock::now()) {
        j_["tool"] = "cfhybrid";
        j_["version"] = std::string(kVersion);
        j_["command"] = std::move(command);
        j_["args"] = args;
        std::string joined;
        for (const auto& a : args) joined += a + '\x1f';
        j_["config_hash"] = hex64(fnv1a(joined));
        j_["inputs"] = json::object();
        j_["outputs"] = json::array();
        j_["seeds"] = json::object();
    }

    void input(const std::string& path) { j_["inputs"][path] = hex64(fnv1a(read_file(path))); }
    void output(const fs::path& path) { j_["outputs"].push_back(path.string()); }
    void seed(const std::string& name, std::uint64_t value) { j_["seeds"][name] = value; }
    void note(const std::string& key, json value) { j_[key] = std::move(value); }

    void write(const fs::path& dir) {
        j_["timestamp"] = utc_timestamp();
        j_["elapsed_ms"] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
        write_file(dir / "manifest.json", j_.dump(2) + "\n");
    }

private:
    json j_;
    std::chrono::steady_clock::time_point start_;
};

void emit(Manifest& m, const fs::path& path, const std::string& content) {
    write_file(path, content);
    m.output(path);
}

/// Moves `--config FILE` out of the argument list and appends the file's
/// keys as flags that were not already given on the command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    std::optional<std::string> config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw CLI::ParseError("--config requires a file", kExitUsage);
            config = args[++i];
        } else if (args[i].starts_with("--config=")) {
            config = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (!config) return out;
    const json j = read_json(resolve(*config));
    if (!j.is_object()) fail(ErrorKind::data, "config file must hold a JSON object");
    auto given = [&](const std::string& flag) {
        for (const auto& a : out)
            if (a == flag || a.starts_with(flag + "=")) return true;
        return false;
    };
    for (const auto& [key, value] : j.items()) {
        const std::string flag = "--" + key;
        if (given(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back(flag);
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
            out.push_back(flag);
            out.push_back(joined);
        } else {
            out.push_back(flag);
            out.push_back(value.is_string() ? value.get<std::string>() : value.dump());
        }
    }
    return out;
}

struct Loaded {
    LoadedTable table;
    GbmModel model;
};

LoadedTable load_table(Manifest& m, const std::string& data, const std::string& schema) {
    const auto d = resolve(data);
    const auto s = resolve(schema);
    m.input(d);
    if (!s.empty()) m.input(s);
    return load_dataset(d, s);
}

GbmModel load_model(Manifest& m, const std::string& path, const FeatureSchema& schema) {
    const auto p = resolve(path);
    m.input(p);
    auto model = model_from_json(read_json(p));
    model.check_schema(schema);
    return model;
}

std::vector<std::string> split_names(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string name;
        while (std::getline(ss, name, ','))
            if (!name.empty()) out.push_back(name);
    }
    return out;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::size_t n = 2744;
    std::uint64_t seed = 7;
    std::string out;
    int match_ratio = 6;
    int age_bin = 10;
    int eci_band = 2;
    double noise = 0.3;
    std::optional<double> intercept;
    std::vector<std::string> planted;
};

int cmd_synth(const SynthArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    Manifest m("synth", args);
    m.seed("cohort", a.seed);
    cohort::CohortConfig cfg;
    cfg.n = a.n;
    cfg.seed = a.seed;
    cfg.noise = a.noise;
    if (a.intercept) cfg.intercept = *a.intercept;
    for (const auto& p : split_names(a.planted)) {
        const auto eq = p.find('=');
        auto coef = eq == std::string::npos ? std::nullopt : parse_double(std::string_view(p).substr(eq + 1));
        if (!coef) fail(ErrorKind::invalid_argument, "--planted expects CODE=COEF, got '" + p + "'");
        cfg.coefficients[p.substr(0, eq)] = *coef;
    }
    const auto gen = cohort::generate_cohort(cfg);

    std::vector<std::size_t> keep;
    json matching = {{"ratio", a.match_ratio}, {"order", "match-then-split"}};
    if (a.match_ratio > 0) {
        std::vector<cohort::EventTimeline> cases, pool;
        std::vector<std::size_t> case_idx, pool_idx;
        for (std::size_t i = 0; i < gen.timelines.size(); ++i) {
            if (gen.labels[i] == 1) {
                cases.push_back(gen.timelines[i]);
                case_idx.push_back(i);
            } else {
                pool.push_back(gen.timelines[i]);
                pool_idx.push_back(i);
            }
        }
        const auto r = cohort::match_controls(cases, pool, {a.match_ratio, a.age_bin, a.eci_band});
        json pairs = json::array();
        json under = json::array();
        for (std::size_t c = 0; c < cases.size(); ++c) {
            keep.push_back(case_idx[c]);
            json ctrl = json::array();
            for (auto k : r.controls[c]) {
                keep.push_back(pool_idx[k]);
                ctrl.push_back(pool[k].patient_id);
            }
            pairs.push_back({{"case", cases[c].patient_id}, {"controls", ctrl}});
        }
        for (auto c : r.under_matched) under.push_back(cases[c].patient_id);
        std::sort(keep.begin(), keep.end());
        matching["cases"] = cases.size();
        matching["matched_controls"] = r.matched_count();
        matching["under_matched"] = under;
        matching["age_bin"] = a.age_bin;
        matching["eci_band"] = a.eci_band;
        matching["pairs"] = pairs;
    } else {
        keep.resize(gen.timelines.size());
        std::iota(keep.begin(), keep.end(), std::size_t{0});
        matching["order"] = "unmatched";
    }

    std::vector<cohort::EventTimeline> timelines;
    std::vector<int> labels;
    for (auto i : keep) {
        timelines.push_back(gen.timelines[i]);
        labels.push_back(gen.labels[i]);
    }
    const auto data = cohort::featurize_cohort(timelines, cohort::WindowSpec::standard(), labels);

    const fs::path dir = resolve(a.out);
    std::ostringstream jsonl, csv;
    cohort::write_jsonl(jsonl, timelines);
    write_dataset_csv(csv, data, "label");
    emit(m, dir / "timelines.jsonl", jsonl.str());
    emit(m, dir / "cohort.csv", csv.str());
    emit(m, dir / "schema.json", schema_to_json(data.schema(), "label").dump(2) + "\n");
    emit(m, dir / "matching.json", matching.dump(2) + "\n");
    m.write(dir);

    const auto cases = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    out << "synth: " << data.size() << " patients (" << cases << " cases), " << data.schema().size()
        << " features -> " << dir.string() << "\n";
    if (a.match_ratio > 0)
        out << "matching 1:" << a.match_ratio << ": " << matching["matched_controls"].get<std::size_t>()
            << " controls, " << matching["under_matched"].size() << " under-matched cases\n";
    return kExitOk;
}

struct TrainArgs {
    std::string data, schema, out;
    std::uint64_t seed = 42;
    double test_fraction = 0.3;
    int folds = 5;
    GbmConfig gbm;
};

int cmd_train(TrainArgs a, const std::vector<std::string>& args, std::ostream& out) {
    Manifest m("train", args);
    m.seed("split", a.seed);
    a.gbm.seed = a.seed;
    const auto table = load_table(m, a.data, a.schema);
    const auto& data = table.dataset;
    if (!data.has_labels()) fail(ErrorKind::data, "training data has no label column");
    const auto split = stratified_split(data.labels(), a.test_fraction, a.seed);
    const auto train = data.subset(split.train);
    const auto cv = cross_validate(train, a.gbm, a.folds);
    const auto model = train_gbm(train, a.gbm);

    const fs::path dir = resolve(a.out);
    emit(m, dir / "model.json", model_to_json(model).dump() + "\n");
    json sj = {{"seed", a.seed}, {"test_fraction", a.test_fraction}, {"train", split.train}, {"test", split.test}};
    emit(m, dir / "split.json", sj.dump() + "\n");
    json cj = {{"folds", a.folds}, {"aurocs", cv.aurocs}, {"mean_auroc", cv.mean()}, {"fold_of", cv.fold_of},
               {"purpose", "performance-estimate"}};
    emit(m, dir / "cv.json", cj.dump(2) + "\n");
    m.note("gbm", {{"n_trees", a.gbm.n_trees},
                   {"max_depth", a.gbm.max_depth},
                   {"learning_rate", a.gbm.learning_rate},
                   {"l2_leaf_penalty", a.gbm.l2_leaf_penalty},
                   {"min_samples_leaf", a.gbm.min_samples_leaf}});
    m.write(dir);
    out << "train: " << split.train.size() << " rows, " << a.folds << "-fold CV AUROC " << format_double(cv.mean())
        << " -> " << (dir / "model.json").string() << "\n";
    return kExitOk;
}

struct EvaluateArgs {
    std::string data, schema, model, split, out;
    std::string on = "test";
    int n_boot = 1000;
    double level = 0.95;
    std::uint64_t seed = 42;
};

int cmd_evaluate(const EvaluateArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    Manifest m("evaluate", args);
    m.seed("bootstrap", a.seed);
    const auto table = load_table(m, a.data, a.schema);
    const auto& data = table.dataset;
    if (!data.has_labels()) fail(ErrorKind::data, "evaluation data has no label column");
    const auto model = load_model(m, a.model, data.schema());

    std::vector<std::size_t> rows;
    if (a.on == "all") {
        rows.resize(data.size());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
    } else {
        if (a.split.empty()) fail(ErrorKind::invalid_argument, "--on " + a.on + " needs --split");
        const auto sp = resolve(a.split);
        m.input(sp);
        rows = read_json(sp).at(a.on).get<std::vector<std::size_t>>();
    }
    const auto subset = data.subset(rows);
    const auto scores = model.class_probabilities(subset.rows(), 1);
    auto report = evaluate_scores(scores, subset.labels(), a.n_boot, a.level, a.seed);
    report.split = a.on;

    const fs::path dir = resolve(a.out);
    emit(m, dir / "eval.json", to_json(report).dump(2) + "\n");
    std::ostringstream roc;
    write_roc_csv(roc, report.roc);
    emit(m, dir / "roc.csv", roc.str());

    const auto imp = feature_importance(model);
    std::vector<std::size_t> order(imp.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return imp[x] > imp[y]; });
    std::ostringstream ic;
    ic << "feature,importance\n";
    for (auto j : order) ic << csv_escape(data.schema()[j].name) << ',' << format_double(imp[j]) << '\n';
    emit(m, dir / "importance.csv", ic.str());
    m.write(dir);

    out << "evaluate (" << a.on << ", n=" << report.n << "): AUROC " << format_double(report.auroc) << " ("
        << report.ci_level * 100 << "% CI " << format_double(report.ci_low) << "-" << format_double(report.ci_high)
        << "), threshold " << format_double(report.operating.threshold) << ", sensitivity "
        << format_double(report.operating.sensitivity) << ", specificity "
        << format_double(report.operating.specificity) << "\n";
    return kExitOk;
}

struct ExplainArgs {
    std::string data, schema, model, eval, instance, out;
    std::optional<std::size_t> row;
    std::size_t target_class = 1;
    double p_min = 0.0;
    std::optional<double> p_max;
    std::vector<std::string> fix;
    std::size_t k = 5;
    double alpha = 1.0, beta = 1.0;
    std::size_t m_max = 16;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::optional<long> budget_ms;
    std::size_t population = 40, generations = 60;
};

int cmd_explain(const ExplainArgs& a, const std::vector<std::string>& args, std::ostream& out) {
    Manifest m("explain", args);
    m.seed("query", a.seed);
    const auto table = load_table(m, a.data, a.schema);
    const auto& data = table.dataset;
    const auto model = load_model(m, a.model, data.schema());

    CfQuery q;
    json query_json;
    if (a.row) {
        if (*a.row >= data.size()) fail(ErrorKind::invalid_argument, "--row out of range");
        q.x0 = data.row(*a.row);
        query_json["row"] = *a.row;
    } else if (!a.instance.empty()) {
        const auto p = resolve(a.instance);
        m.input(p);
        q.x0 = instance_from_json(data.schema(), read_json(p));
        query_json["instance"] = p;
    } else {
        fail(ErrorKind::invalid_argument, "explain needs --row or --instance");
    }
    double p_max = 0.5;
    std::string band_source = "default";
    if (a.p_max) {
        p_max = *a.p_max;
        band_source = "flag";
    } else if (!a.eval.empty()) {
        const auto p = resolve(a.eval);
        m.input(p);
        p_max = read_json(p).at("threshold").get<double>();
        band_source = "youden-threshold";
    }
    q.target_class = a.target_class;
    q.p_min = a.p_min;
    q.p_max = p_max;
    q.k = a.k;
    q.alpha = a.alpha;
    q.beta = a.beta;
    q.m_max = a.m_max;
    q.seed = a.seed;
    std::vector<std::string> fixed_names = split_names(a.fix);
    for (const auto& name : fixed_names) q.fixed.push_back(data.schema().require_index(name));

    HybridOptions ho;
    ho.threads = a.threads;
    ho.moc.population = a.population;
    ho.moc.generations = a.generations;
    if (a.budget_ms) ho.stage_budget = std::chrono::milliseconds(*a.budget_ms);
    const auto report = generate(q, model, data, ho);

    query_json.update({{"target_class", q.target_class},
                       {"p_min", q.p_min},
                       {"p_max", q.p_max},
                       {"band_source", band_source},
                       {"fixed", fixed_names},
                       {"k", q.k},
                       {"alpha", q.alpha},
                       {"beta", q.beta},
                       {"m_max", q.m_max},
                       {"seed", q.seed}});
    json rj = to_json(report, q.x0, data.schema(), false);
    rj["query"] = query_json;

    const fs::path dir = resolve(a.out);
    emit(m, dir / "report.json", rj.dump(2) + "\n");
    m.note("elapsed_ms_by_stage", {{"enumeration", report.enumeration.elapsed_ms},
                                   {"nice", report.nice.elapsed_ms},
                                   {"moc", report.moc.elapsed_ms}});
    m.write(dir);

    out << "explain: p(target)=" << format_double(report.p_origin) << ", m=" << report.m
        << ", stage=" << to_string(report.stage_used) << ", " << report.counterfactuals.size() << " counterfactual(s)\n";
    const auto& schema = data.schema();
    for (const auto& cf : report.counterfactuals) {
        out << "  score " << format_double(cf.score) << "  p " << format_double(report.p_origin) << " -> "
            << format_double(cf.p_target) << " :";
        for (auto j : cf.changed)
            out << ' ' << schema[j].name << ' ' << schema[j].format(q.x0[j]) << "->" << schema[j].format(cf.x_prime[j]);
        out << '\n';
    }
    return report.stage_used == Stage::none ? kExitNoCounterfactual : kExitOk;
}

struct ServeArgs {
    std::string data, schema, model, eval, static_dir;
    std::string host = "127.0.0.1";
    int port = 8080;
    long timeout_ms = 30000;
    unsigned threads = 1;
};

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
    const auto table = load_dataset(resolve(a.data), resolve(a.schema));
    auto model = model_from_json(read_json(resolve(a.model)));
    std::optional<EvalReport> metrics;
    if (!a.eval.empty()) metrics = eval_report_from_json(read_json(resolve(a.eval)));
    ServiceOptions so;
    so.request_timeout = std::chrono::milliseconds(a.timeout_ms);
    so.static_dir = a.static_dir;
    so.threads = a.threads;
    ApiService service(table.dataset, std::move(model), std::move(metrics), so);
    httplib::Server server;
    service.bind(server);
    out << "serving on http://" << a.host << ":" << a.port << "\n" << std::flush;
    if (!server.listen(a.host, a.port)) {
        err << "error: cannot listen on " << a.host << ":" << a.port << "\n";
        return kExitData;
    }
    return kExitOk;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument:
        case ErrorKind::constraint: return kExitUsage;
        default: return kExitData;
    }
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"cfhybrid: hybrid counterfactual explanations for tabular risk models", "cfhybrid"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "generate a synthetic cohort, match controls and featurize");
    s->add_option("--n", synth.n, "patients to generate")->check(CLI::Range(20, 10000000));
    s->add_option("--seed", synth.seed, "generator seed");
    s->add_option("--out", synth.out, "output directory")->required();
    s->add_option("--match-ratio", synth.match_ratio, "controls per case (0 disables matching)")->check(CLI::Range(0, 100));
    s->add_option("--age-bin", synth.age_bin, "years per matching age group");
    s->add_option("--eci-band", synth.eci_band, "ECI points per matching band");
    s->add_option("--noise", synth.noise, "sd of logit noise");
    s->add_option("--intercept", synth.intercept, "label model intercept");
    s->add_option("--planted", synth.planted, "planted coefficient CODE=COEF (repeatable)");

    TrainArgs train;
    auto* t = app.add_subcommand("train", "fit the gradient-boosted model with cross-validation");
    t->add_option("--data", train.data, "cohort CSV")->required();
    t->add_option("--schema", train.schema, "schema JSON");
    t->add_option("--out", train.out, "output directory")->required();
    t->add_option("--seed", train.seed, "split / fold seed");
    t->add_option("--test-fraction", train.test_fraction, "held-out fraction");
    t->add_option("--folds", train.folds, "cross-validation folds");
    t->add_option("--n-trees", train.gbm.n_trees);
    t->add_option("--max-depth", train.gbm.max_depth);
    t->add_option("--learning-rate", train.gbm.learning_rate);
    t->add_option("--l2", train.gbm.l2_leaf_penalty, "L2 penalty on leaf values");
    t->add_option("--min-leaf", train.gbm.min_samples_leaf);

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "AUROC, bootstrap CI, Youden threshold, ROC and importance reports");
    e->add_option("--data", ev.data)->required();
    e->add_option("--schema", ev.schema);
    e->add_option("--model", ev.model)->required();
    e->add_option("--split", ev.split, "split.json written by train");
    e->add_option("--on", ev.on, "rows to evaluate")->check(CLI::IsMember({"test", "train", "all"}));
    e->add_option("--n-boot", ev.n_boot)->check(CLI::Range(100, 1000000));
    e->add_option("--level", ev.level);
    e->add_option("--seed", ev.seed);
    e->add_option("--out", ev.out)->required();

    ExplainArgs ex;
    auto* x = app.add_subcommand("explain", "search counterfactuals for one instance");
    x->add_option("--data", ex.data)->required();
    x->add_option("--schema", ex.schema);
    x->add_option("--model", ex.model)->required();
    x->add_option("--eval", ex.eval, "eval.json; its threshold is the default p-max");
    x->add_option("--row", ex.row, "row index in --data");
    x->add_option("--instance", ex.instance, "instance JSON file");
    x->add_option("--target-class", ex.target_class);
    x->add_option("--p-min", ex.p_min);
    x->add_option("--p-max", ex.p_max);
    x->add_option("--fix", ex.fix, "fixed features, comma separated");
    x->add_option("--k", ex.k);
    x->add_option("--alpha", ex.alpha);
    x->add_option("--beta", ex.beta);
    x->add_option("--m-max", ex.m_max);
    x->add_option("--seed", ex.seed);
    x->add_option("--threads", ex.threads);
    x->add_option("--budget-ms", ex.budget_ms, "per-stage wall-clock budget");
    x->add_option("--population", ex.population);
    x->add_option("--generations", ex.generations);
    x->add_option("--out", ex.out, "output directory")->required();

    ServeArgs sv;
    auto* v = app.add_subcommand("serve", "start the HTTP API");
    v->add_option("--data", sv.data)->required();
    v->add_option("--schema", sv.schema);
    v->add_option("--model", sv.model)->required();
    v->add_option("--eval", sv.eval);
    v->add_option("--host", sv.host);
    v->add_option("--port", sv.port);
    v->add_option("--static-dir", sv.static_dir);
    v->add_option("--timeout-ms", sv.timeout_ms);
    v->add_option("--threads", sv.threads);

    std::string manifest_path;
    auto* r = app.add_subcommand("replay", "re-run the command recorded in a manifest");
    r->add_option("manifest", manifest_path)->required();

    std::vector<std::string> args;
    try {
        args = expand_config(raw_args);
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& pe) {
        if (pe.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << pe.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const Error& er) {
        err << "error: " << er.what() << "\n";
        return exit_code_for(er.kind());
    }

    try {
        if (*s) return cmd_synth(synth, args, out);
        if (*t) return cmd_train(train, args, out);
        if (*e) return cmd_evaluate(ev, args, out);
        if (*x) return cmd_explain(ex, args, out);
        if (*v) return cmd_serve(sv, out, err);
        if (*r) {
            const auto mj = read_json(resolve(manifest_path));
            return run(mj.at("args").get<std::vector<std::string>>(), out, err);
        }
    } catch (const Error& er) {
        err << "error: " << er.what() << "\n";
        return exit_code_for(er.kind());
    } catch (const json::exception& je) {
        err << "error: " << je.what() << "\n";
        return kExitData;
    } catch (const fs::filesystem_error& fe) {
        err << "error: " << fe.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace cfhybrid::cli

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <unistd.h>

#include "ltdet/errors.hpp"
#include "ltdet/experiment.hpp"

using namespace ltdet;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
    return out;
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("ltdet_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

ExperimentConfig tiny_config() {
    return experiment_config_from_json(nlohmann::json::parse(R"({
        "dataset": {"num_scenes": 40, "seed": 3},
        "proposals": {"num_background": 100},
        "train": {"epochs": 1, "hidden": 8},
        "seeds": [1, 2, 3]
    })"));
}

}  // namespace

TEST(ExperimentConfig, Defaults) {
    const ExperimentConfig c;
    EXPECT_EQ(c.mode, ExperimentMode::CbsBbh);
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3, 4, 5}));
    EXPECT_DOUBLE_EQ(c.train.lambda, 2.0);
    EXPECT_EQ(c.train.sampler.num_samples, 512u);
    EXPECT_DOUBLE_EQ(c.train.sampler.pos_fraction, 0.25);
    EXPECT_EQ(c.inference.max_detections_per_scene, 500u);
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(split_dataset(make_dataset(c).scenes, c.test_percent).train.size(), 500u);
}

TEST(ExperimentConfig, EmptyJsonKeepsDefaults) {
    const ExperimentConfig c = experiment_config_from_json(nlohmann::json::object());
    EXPECT_EQ(to_json(c), to_json(ExperimentConfig{}));
}

TEST(ExperimentConfig, JsonRoundTrip) {
    const ExperimentConfig c = tiny_config();
    EXPECT_EQ(to_json(experiment_config_from_json(to_json(c))), to_json(c));
}

TEST(ExperimentConfig, ParseErrors) {
    using nlohmann::json;
    EXPECT_THROW(experiment_config_from_json(json{{"bogus", 1}}), ConfigError);
    EXPECT_THROW(experiment_config_from_json(json{{"mode", "focal"}}), ConfigError);
    EXPECT_THROW(experiment_config_from_json(json{{"seeds", json::array()}}), ConfigError);
    EXPECT_THROW(experiment_config_from_json(json{{"lambda", -1.0}}), ConfigError);
    EXPECT_THROW(experiment_config_from_json(json{{"train", {{"epochs", "many"}}}}), ConfigError);
    EXPECT_THROW(experiment_config_from_json(json{{"sampler", {{"pos_fraction", 1.5}}}}),
                 ConfigError);
}

TEST(ExperimentConfig, MissingFileIsConfigError) {
    EXPECT_THROW(load_experiment_config("/nonexistent/ltdet.json"), ConfigError);
}

TEST(ExperimentMode, NamesRoundTrip) {
    for (ExperimentMode m : all_experiment_modes()) {
        EXPECT_EQ(experiment_mode_from_string(to_string(m)), m);
    }
    EXPECT_EQ(all_experiment_modes().size(), 10u);
    EXPECT_EQ(ablation_modes().size(), 8u);
}

TEST(ConfigHash, IgnoresSeedsAndJobsButNotModeOrLambda) {
    ExperimentConfig a;
    ExperimentConfig b = a;
    b.seeds = {9};
    b.jobs = 4;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.mode = ExperimentMode::Rs;
    EXPECT_NE(config_hash(a), config_hash(b));
    b = a;
    b.train.lambda = 3.0;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Split, DisjointDeterministicAndStable) {
    const ExperimentConfig c = tiny_config();
    const Dataset d = make_dataset(c);
    const Split s = split_dataset(d.scenes, 20);
    EXPECT_EQ(s.train.size() + s.test.size(), d.scenes.size());
    std::set<std::uint64_t> train_ids;
    for (const auto& x : s.train) train_ids.insert(x.scene_id);
    for (const auto& x : s.test) {
        EXPECT_FALSE(train_ids.count(x.scene_id));
        EXPECT_TRUE(is_test_scene(x.scene_id, 20));
    }
    // Membership depends only on the scene id.
    ExperimentConfig bigger = c;
    bigger.dataset.num_scenes = 80;
    const Split s2 = split_dataset(make_dataset(bigger).scenes, 20);
    for (std::size_t i = 0; i < s.test.size(); ++i) {
        EXPECT_EQ(s.test[i].scene_id, s2.test[i].scene_id);
    }
}

TEST(Split, TrainCountHelper) {
    for (std::size_t want : {1u, 10u, 500u}) {
        const std::size_t n = scenes_for_train_count(want, 20);
        std::size_t train = 0;
        for (std::uint64_t id = 0; id < n; ++id) train += is_test_scene(id, 20) ? 0 : 1;
        EXPECT_EQ(train, want);
        EXPECT_FALSE(is_test_scene(n - 1, 20));
    }
}

TEST(StatsOf, MeanAndPopulationStd) {
    const MetricStats s = stats_of({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_NEAR(s.stddev, std::sqrt(1.25), 1e-15);
}

TEST(CmdGenerate, ByteIdenticalAndCounts) {
    TempDir tmp;
    ExperimentConfig c = tiny_config();
    cmd_generate(c, tmp.path() / "a.jsonl");
    cmd_generate(c, tmp.path() / "b.jsonl");
    const std::string a = slurp(tmp.path() / "a.jsonl");
    EXPECT_EQ(a, slurp(tmp.path() / "b.jsonl"));
    EXPECT_EQ(lines_of(a).size(), 41u);
    const Dataset back = load_dataset(tmp.path() / "a.jsonl");
    EXPECT_EQ(back.scenes.size(), 40u);

    c.dataset.num_scenes = 0;
    cmd_generate(c, tmp.path() / "empty.jsonl");
    EXPECT_EQ(lines_of(slurp(tmp.path() / "empty.jsonl")).size(), 1u);

    c.dataset.num_scenes = 500;
    cmd_generate(c, tmp.path() / "five_hundred.jsonl");
    EXPECT_EQ(lines_of(slurp(tmp.path() / "five_hundred.jsonl")).size(), 501u);
}

TEST(CmdGenerate, CorruptDatasetReportsLine) {
    TempDir tmp;
    cmd_generate(tiny_config(), tmp.path() / "d.jsonl");
    auto lines = lines_of(slurp(tmp.path() / "d.jsonl"));
    lines[3] = "{\"scene_id\": ";
    std::ofstream out(tmp.path() / "bad.jsonl");
    for (const auto& l : lines) out << l << "\n";
    out.close();
    try {
        load_dataset(tmp.path() / "bad.jsonl");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
}

TEST(CmdRun, FilesPerSeedAggregateAndDeterminism) {
    TempDir tmp;
    const ExperimentConfig c = tiny_config();
    const Dataset d = make_dataset(c);
    const auto results = cmd_run(c, d, tmp.path() / "a");
    cmd_run(c, d, tmp.path() / "b");
    ASSERT_EQ(results.size(), 3u);
    for (std::uint64_t seed : c.seeds) {
        for (const char* ext : {".report.json", ".report.csv", ".detections.txt", ".checkpoint.json"}) {
            const std::string name = "run_cbs+bbh_seed" + std::to_string(seed) + ext;
            ASSERT_TRUE(fs::exists(tmp.path() / "a" / name)) << name;
            EXPECT_EQ(slurp(tmp.path() / "a" / name), slurp(tmp.path() / "b" / name)) << name;
        }
    }
    const auto agg = lines_of(slurp(tmp.path() / "a" / "run_cbs+bbh_aggregate.csv"));
    ASSERT_EQ(agg.size(), 3u);
    const auto header = split_csv(agg[0]);
    const auto mean = split_csv(agg[1]);
    EXPECT_EQ(mean[0], config_hash(c));
    EXPECT_EQ(mean[2], "mean");
    const auto col = static_cast<std::size_t>(
        std::find(header.begin(), header.end(), "AP") - header.begin());
    double sum = 0.0;
    for (const RunResult& r : results) sum += r.report.ap;
    EXPECT_NEAR(std::stod(mean[col]), sum / 3.0, 1e-6);
}

TEST(CmdRun, ModesShareTheEvaluationSplit) {
    TempDir tmp;
    ExperimentConfig c = tiny_config();
    c.seeds = {1};
    const Dataset d = make_dataset(c);
    c.mode = ExperimentMode::Rs;
    const auto rs = cmd_run(c, d, tmp.path());
    c.mode = ExperimentMode::CbsBbh;
    const auto cbs = cmd_run(c, d, tmp.path());
    EXPECT_EQ(rs[0].test_scenes, cbs[0].test_scenes);
    EXPECT_EQ(rs[0].report.num_gt, cbs[0].report.num_gt);
    EXPECT_TRUE(fs::exists(tmp.path() / "run_rs_seed1.report.json"));
    EXPECT_TRUE(fs::exists(tmp.path() / "run_cbs+bbh_seed1.report.json"));
    EXPECT_NE(slurp(tmp.path() / "run_rs_seed1.report.json"),
              slurp(tmp.path() / "run_cbs+bbh_seed1.report.json"));
}

TEST(CmdRun, EveryModeRuns) {
    TempDir tmp;
    ExperimentConfig c = tiny_config();
    c.seeds = {1};
    const Dataset d = make_dataset(c);
    for (ExperimentMode m : all_experiment_modes()) {
        c.mode = m;
        const auto r = cmd_run(c, d, tmp.path());
        EXPECT_LE(r[0].max_detections_in_scene, 500u) << to_string(m);
        EXPECT_TRUE(r[0].heads.params.front().all_finite());
    }
}

TEST(CmdEvaluate, RescoresDetectionFile) {
    TempDir tmp;
    ExperimentConfig c = tiny_config();
    c.seeds = {2};
    const Dataset d = make_dataset(c);
    const auto r = cmd_run(c, d, tmp.path());
    const EvalReport e = cmd_evaluate(c, d, tmp.path() / "run_cbs+bbh_seed2.detections.txt",
                                      tmp.path() / "eval");
    EXPECT_NEAR(e.ap, r[0].report.ap, 1e-6);
    EXPECT_NEAR(e.tail_group_ap, r[0].report.tail_group_ap, 1e-6);
    EXPECT_THROW(cmd_evaluate(c, d, tmp.path() / "missing.txt", tmp.path()), DataError);
}

TEST(CmdSweepLambda, SingleLambdaMatchesRun) {
    TempDir tmp;
    ExperimentConfig c = tiny_config();
    c.seeds = {1, 2};
    const Dataset d = make_dataset(c);
    const auto sweep = cmd_sweep_lambda(c, d, {2.0}, tmp.path() / "s");
    const auto run = cmd_run(c, d, tmp.path() / "r");
    ASSERT_EQ(sweep.size(), run.size());
    for (std::size_t i = 0; i < run.size(); ++i) {
        EXPECT_EQ(sweep[i].report.ap, run[i].report.ap);
        EXPECT_EQ(sweep[i].config_hash, run[i].config_hash);
    }
    const auto rows = lines_of(slurp(tmp.path() / "s" / "sweep_lambda.csv"));
    EXPECT_EQ(rows.size(), 2u);
    EXPECT_THROW(cmd_sweep_lambda(c, d, {}, tmp.path()), ConfigError);
    EXPECT_THROW(cmd_sweep_lambda(c, d, {-1.0}, tmp.path()), ConfigError);
}

TEST(CmdSweepLambda, SevenPointGrid) {
    TempDir tmp;
    ExperimentConfig c = tiny_config();
    c.seeds = {1};
    c.dataset.num_scenes = 15;
    const Dataset d = make_dataset(c);
    cmd_sweep_lambda(c, d, {0.5, 1, 2, 3, 4, 5, 6}, tmp.path());
    EXPECT_EQ(lines_of(slurp(tmp.path() / "sweep_lambda.csv")).size(), 8u);
}

TEST(CmdAblate, EightRowsWithConfigEcho) {
    TempDir tmp;
    ExperimentConfig c = tiny_config();
    c.seeds = {1, 2};
    c.dataset.num_scenes = 20;
    const Dataset d = make_dataset(c);
    const auto results = cmd_ablate(c, d, tmp.path());
    EXPECT_EQ(results.size(), 16u);
    const auto rows = lines_of(slurp(tmp.path() / "ablation.csv"));
    ASSERT_EQ(rows.size(), 9u);
    std::map<std::string, std::vector<std::string>> by_mode;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = split_csv(rows[i]);
        by_mode[cells[1]] = cells;
    }
    EXPECT_EQ(by_mode.size(), 8u);
    // Config echo columns: num_samples, pos_fraction, lambda.
    EXPECT_EQ(by_mode["rs"][2], "512");
    EXPECT_EQ(by_mode["rs-dbl"][2], "1024");
    EXPECT_EQ(by_mode["rs"][3], by_mode["rs-dbl"][3]);
    EXPECT_EQ(by_mode["rs"][4], by_mode["rs-dbl"][4]);
    EXPECT_EQ(lines_of(slurp(tmp.path() / "ablation_per_seed.csv")).size(), 17u);
}

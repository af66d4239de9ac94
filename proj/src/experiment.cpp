#include "ltdet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <omp.h>

#include "ltdet/checkpoint.hpp"
#include "ltdet/errors.hpp"

namespace ltdet {

using nlohmann::json;

namespace {

struct ModeInfo {
    ExperimentMode mode;
    const char* name;
    TrainMode train;
    InferenceRoute route;
};

constexpr ModeInfo kModes[] = {
    {ExperimentMode::Rs, "rs", TrainMode::RsSingle, InferenceRoute::Single},
    {ExperimentMode::RsDbl, "rs-dbl", TrainMode::RsDblSingle, InferenceRoute::Single},
    {ExperimentMode::RsDblBbh, "rs-dbl+bbh", TrainMode::RsDblBbh, InferenceRoute::Dual},
    {ExperimentMode::Cbs, "cbs", TrainMode::CbsSingle, InferenceRoute::Single},
    {ExperimentMode::CbsBbh, "cbs+bbh", TrainMode::CbsBbh, InferenceRoute::Dual},
    {ExperimentMode::CesBbh, "ces+bbh", TrainMode::CesBbh, InferenceRoute::Dual},
    {ExperimentMode::CbsBbhAll, "cbs+bbh-all", TrainMode::CbsBbh, InferenceRoute::AllNms},
    {ExperimentMode::Cascade, "cascade", TrainMode::Cascade, InferenceRoute::Cascade},
    {ExperimentMode::OneStageMask, "one-stage-mask", TrainMode::OneStageMask,
     InferenceRoute::Single},
    {ExperimentMode::Mmf, "mmf", TrainMode::Mmf, InferenceRoute::Dual},
};

const ModeInfo& info(ExperimentMode mode) {
    for (const ModeInfo& m : kModes) {
        if (m.mode == mode) {
            return m;
        }
    }
    throw std::logic_error("unknown experiment mode");
}

template <typename T>
void read_if(const json& j, const char* key, T& field) {
    if (j.contains(key)) {
        field = j.at(key).get<T>();
    }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
    if (!j.is_object()) {
        throw ConfigError(std::string(where) + ": expected an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) ==
            known.end()) {
            throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
        }
    }
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string file_stem(ExperimentMode mode, std::uint64_t seed) {
    return "run_" + to_string(mode) + "_seed" + std::to_string(seed);
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
}

std::vector<std::string> class_names(const Dataset& ds) {
    std::vector<std::string> names;
    for (const ClassSpec& s : ds.specs) {
        names.push_back(s.name);
    }
    return names;
}

void write_run_files(const RunResult& r, const Dataset& ds, const std::filesystem::path& out_dir) {
    const std::string stem = file_stem(r.mode, r.seed);
    json report = report_to_json(r.report, class_names(ds));
    report["mode"] = to_string(r.mode);
    report["seed"] = r.seed;
    report["lambda"] = r.lambda;
    report["config_hash"] = r.config_hash;
    report["train_scenes"] = r.train_scenes;
    report["test_scenes"] = r.test_scenes;
    report["max_detections_in_scene"] = r.max_detections_in_scene;
    report["epoch_losses"] = r.heads.epoch_losses;
    write_file_atomic(out_dir / (stem + ".report.json"), report.dump(1) + "\n");

    std::string csv = "config_hash,mode,seed,lambda," + report_csv_header(class_names(ds)) + "\n";
    csv += r.config_hash + "," + to_string(r.mode) + "," + std::to_string(r.seed) + "," +
           fmt6(r.lambda) + "," + report_csv_row(r.report) + "\n";
    write_file_atomic(out_dir / (stem + ".report.csv"), csv);
    write_file_atomic(out_dir / (stem + ".detections.txt"), format_detections(r.detections));
    save_checkpoint(out_dir / (stem + ".checkpoint.json"),
                    Checkpoint{r.heads, r.seed, r.config_hash});
}

// Metric columns shared by aggregate tables.
std::vector<std::pair<std::string, double>> metric_columns(const EvalReport& r,
                                                           const std::vector<std::string>& names) {
    std::vector<std::pair<std::string, double>> cols{{"AP", r.ap}, {"AP50", r.ap50}, {"AP75", r.ap75}};
    for (std::size_t c = 0; c < r.num_gt.size(); ++c) {
        cols.emplace_back(c < names.size() ? names[c] : std::to_string(c), r.class_ap(c));
    }
    cols.emplace_back("head_AP", r.head_group_ap);
    cols.emplace_back("tail_AP", r.tail_group_ap);
    return cols;
}

std::vector<std::string> metric_names(const std::vector<std::string>& names) {
    std::vector<std::string> out{"AP", "AP50", "AP75"};
    out.insert(out.end(), names.begin(), names.end());
    out.push_back("head_AP");
    out.push_back("tail_AP");
    return out;
}

// Per-metric stats across a group of runs.
std::vector<MetricStats> group_stats(const std::vector<const RunResult*>& runs,
                                     const std::vector<std::string>& names) {
    const std::size_t m = metric_names(names).size();
    std::vector<std::vector<double>> values(m);
    for (const RunResult* r : runs) {
        const auto cols = metric_columns(r->report, names);
        for (std::size_t i = 0; i < m; ++i) {
            values[i].push_back(cols[i].second);
        }
    }
    std::vector<MetricStats> out;
    for (const auto& v : values) {
        out.push_back(stats_of(v));
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        out += (i ? sep : "") + parts[i];
    }
    return out;
}

ExperimentConfig with_mode(ExperimentConfig cfg, ExperimentMode mode, double lambda) {
    cfg.mode = mode;
    cfg.train.lambda = lambda;
    return cfg;
}

}  // namespace

SceneConfig default_dataset_config() {
    SceneConfig c;
    c.num_scenes = scenes_for_train_count(500, 20);
    return c;
}

std::string to_string(ExperimentMode mode) { return info(mode).name; }

ExperimentMode experiment_mode_from_string(const std::string& name) {
    for (const ModeInfo& m : kModes) {
        if (name == m.name) {
            return m.mode;
        }
    }
    throw ConfigError("unknown mode '" + name + "'");
}

TrainMode train_mode_for(ExperimentMode mode) { return info(mode).train; }
InferenceRoute inference_route_for(ExperimentMode mode) { return info(mode).route; }

std::vector<ExperimentMode> all_experiment_modes() {
    std::vector<ExperimentMode> out;
    for (const ModeInfo& m : kModes) {
        out.push_back(m.mode);
    }
    return out;
}

std::vector<ExperimentMode> ablation_modes() {
    return {ExperimentMode::Rs,      ExperimentMode::RsDbl,     ExperimentMode::RsDblBbh,
            ExperimentMode::CesBbh,  ExperimentMode::Cbs,       ExperimentMode::CbsBbhAll,
            ExperimentMode::CbsBbh,  ExperimentMode::Mmf};
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) {
        throw ConfigError("config: seeds list must not be empty");
    }
    if (test_percent <= 0 || test_percent >= 100) {
        throw ConfigError("config: test_percent must lie in (0,100)");
    }
    if (jobs < 1) {
        throw ConfigError("config: jobs must be >= 1");
    }
    if (!(centroid_scale > 0.0)) {
        throw ConfigError("config: centroid_scale must be > 0");
    }
    train.validate();
    try {
        validate_config(dataset);
        inference.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (dataset.feature_dim != default_visdrone_spec().front().feature_centroid.size()) {
        throw ConfigError("config: feature_dim must equal number of classes + 1");
    }
}

ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig c;
    try {
        reject_unknown(j, {"dataset", "proposals", "sampler", "assign", "train", "inference", "mode",
                           "lambda", "seeds", "test_percent", "jobs"},
                       "config");
        if (j.contains("dataset")) {
            json d = j.at("dataset");
            if (d.contains("centroid_scale")) {
                c.centroid_scale = d.at("centroid_scale").get<double>();
                d.erase("centroid_scale");
            }
            reject_unknown(d, {"num_scenes", "objects_per_scene", "scene_extent", "object_size",
                               "feature_dim", "feature_noise_sigma", "background_centroid", "seed"},
                           "config.dataset");
            c.dataset = scene_config_from_json(d, c.dataset);
        }
        if (j.contains("proposals")) {
            const json& p = j.at("proposals");
            reject_unknown(p, {"proposals_per_object", "jitter_sigma", "num_background",
                               "feature_noise_sigma"},
                           "config.proposals");
            read_if(p, "proposals_per_object", c.train.proposals.proposals_per_object);
            read_if(p, "jitter_sigma", c.train.proposals.jitter_sigma);
            read_if(p, "num_background", c.train.proposals.num_background);
            read_if(p, "feature_noise_sigma", c.train.proposals.feature_noise_sigma);
        }
        if (j.contains("sampler")) {
            const json& s = j.at("sampler");
            reject_unknown(s, {"num_samples", "pos_fraction"}, "config.sampler");
            read_if(s, "num_samples", c.train.sampler.num_samples);
            read_if(s, "pos_fraction", c.train.sampler.pos_fraction);
        }
        if (j.contains("assign")) {
            const json& a = j.at("assign");
            reject_unknown(a, {"pos_thr", "neg_thr"}, "config.assign");
            read_if(a, "pos_thr", c.train.assign.pos_thr);
            read_if(a, "neg_thr", c.train.assign.neg_thr);
        }
        if (j.contains("train")) {
            const json& t = j.at("train");
            reject_unknown(t, {"epochs", "base_lr", "hidden", "cascade_iou"}, "config.train");
            read_if(t, "epochs", c.train.epochs);
            read_if(t, "base_lr", c.train.base_lr);
            read_if(t, "hidden", c.train.hidden);
            if (t.contains("cascade_iou")) {
                const auto v = t.at("cascade_iou").get<std::vector<double>>();
                if (v.size() != kCascadeStages) {
                    throw ConfigError("config.train.cascade_iou: need 3 thresholds");
                }
                std::copy(v.begin(), v.end(), c.train.cascade_iou.begin());
            }
        }
        if (j.contains("inference")) {
            const json& i = j.at("inference");
            reject_unknown(i, {"score_threshold", "nms_iou", "max_detections_per_scene",
                               "class_agnostic_all_nms"},
                           "config.inference");
            read_if(i, "score_threshold", c.inference.score_threshold);
            read_if(i, "nms_iou", c.inference.nms_iou);
            read_if(i, "max_detections_per_scene", c.inference.max_detections_per_scene);
            read_if(i, "class_agnostic_all_nms", c.inference.class_agnostic_all_nms);
        }
        if (j.contains("mode")) {
            c.mode = experiment_mode_from_string(j.at("mode").get<std::string>());
        }
        read_if(j, "lambda", c.train.lambda);
        read_if(j, "seeds", c.seeds);
        read_if(j, "test_percent", c.test_percent);
        read_if(j, "jobs", c.jobs);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

json to_json(const ExperimentConfig& c) {
    json dataset = to_json(c.dataset);
    dataset["centroid_scale"] = c.centroid_scale;
    const TrainConfig& t = c.train;
    return {{"dataset", dataset},
            {"proposals",
             {{"proposals_per_object", t.proposals.proposals_per_object},
              {"jitter_sigma", t.proposals.jitter_sigma},
              {"num_background", t.proposals.num_background},
              {"feature_noise_sigma", t.proposals.feature_noise_sigma}}},
            {"sampler", {{"num_samples", t.sampler.num_samples}, {"pos_fraction", t.sampler.pos_fraction}}},
            {"assign", {{"pos_thr", t.assign.pos_thr}, {"neg_thr", t.assign.neg_thr}}},
            {"train",
             {{"epochs", t.epochs},
              {"base_lr", t.base_lr},
              {"hidden", t.hidden},
              {"cascade_iou", std::vector<double>(t.cascade_iou.begin(), t.cascade_iou.end())}}},
            {"inference",
             {{"score_threshold", c.inference.score_threshold},
              {"nms_iou", c.inference.nms_iou},
              {"max_detections_per_scene", c.inference.max_detections_per_scene},
              {"class_agnostic_all_nms", c.inference.class_agnostic_all_nms}}},
            {"mode", to_string(c.mode)},
            {"lambda", t.lambda},
            {"seeds", c.seeds},
            {"test_percent", c.test_percent},
            {"jobs", c.jobs}};
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    try {
        return experiment_config_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string config_hash(const ExperimentConfig& cfg) {
    json j = to_json(cfg);
    j.erase("seeds");
    j.erase("jobs");
    return fnv1a_hex(j.dump());
}

bool is_test_scene(std::uint64_t scene_id, int test_percent) {
    return splitmix64(scene_id ^ 0x7e57'5b17ULL) % 100 < static_cast<std::uint64_t>(test_percent);
}

std::size_t scenes_for_train_count(std::size_t train_scenes, int test_percent) {
    std::size_t train = 0;
    std::size_t n = 0;
    while (train < train_scenes) {
        if (!is_test_scene(n, test_percent)) {
            ++train;
        }
        ++n;
    }
    return n;
}

Split split_dataset(const std::vector<Scene>& scenes, int test_percent) {
    Split s;
    for (const Scene& scene : scenes) {
        (is_test_scene(scene.scene_id, test_percent) ? s.test : s.train).push_back(scene);
    }
    return s;
}

Dataset make_dataset(const ExperimentConfig& cfg) {
    Dataset ds;
    ds.specs = default_visdrone_spec(cfg.centroid_scale);
    ds.config = cfg.dataset;
    ds.scenes = generate_dataset(ds.specs, ds.config);
    return ds;
}

RunResult run_once(const ExperimentConfig& cfg, const Dataset& dataset, ExperimentMode mode,
                   std::uint64_t seed) {
    const ExperimentConfig run_cfg = with_mode(cfg, mode, cfg.train.lambda);
    const ClassPartition partition = partition_from_specs(dataset.specs);
    const Split split = split_dataset(dataset.scenes, cfg.test_percent);
    if (split.train.empty() || split.test.empty()) {
        throw DataError("dataset too small for a train/test split");
    }
    TrainConfig tc = cfg.train;
    tc.seed = seed;

    RunResult r;
    r.mode = mode;
    r.seed = seed;
    r.lambda = tc.lambda;
    r.config_hash = config_hash(run_cfg);
    r.train_scenes = split.train.size();
    r.test_scenes = split.test.size();
    r.effective_num_samples = train_mode_for(mode) == TrainMode::RsDblSingle
                                  ? 2 * tc.sampler.num_samples
                                  : tc.sampler.num_samples;
    r.heads = train(split.train, dataset.config, partition, train_mode_for(mode), tc);

    DetectionSetup setup;
    setup.route = inference_route_for(mode);
    setup.scene_config = dataset.config;
    setup.proposals = tc.proposals;
    setup.partition = partition;
    setup.inference = cfg.inference;
    r.detections = detect(r.heads, split.test, setup);
    for (const auto& [id, list] : r.detections) {
        r.max_detections_in_scene = std::max(r.max_detections_in_scene, list.size());
    }
    r.report = evaluate(r.detections, split.test, partition);
    return r;
}

std::vector<RunResult> run_many(const ExperimentConfig& cfg, const Dataset& dataset,
                                const std::vector<RunRequest>& requests) {
    std::vector<RunResult> results(requests.size());
    const auto n = static_cast<std::int64_t>(requests.size());
    std::vector<std::string> errors(requests.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.jobs)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            ExperimentConfig c = cfg;
            c.train.lambda = requests[k].lambda;
            results[k] = run_once(c, dataset, requests[k].mode, requests[k].seed);
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    }
    for (const std::string& e : errors) {
        if (!e.empty()) {
            throw DataError(e);
        }
    }
    return results;
}

MetricStats stats_of(const std::vector<double>& values) {
    MetricStats s;
    if (values.empty()) {
        return s;
    }
    for (double v : values) {
        s.mean += v;
    }
    s.mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) {
        var += (v - s.mean) * (v - s.mean);
    }
    s.stddev = std::sqrt(var / static_cast<double>(values.size()));
    return s;
}

std::filesystem::path cmd_generate(const ExperimentConfig& cfg, const std::filesystem::path& out_path) {
    cfg.validate();
    if (out_path.has_parent_path()) {
        ensure_dir(out_path.parent_path());
    }
    save_dataset(out_path, make_dataset(cfg));
    return out_path;
}

std::vector<RunResult> cmd_run(const ExperimentConfig& cfg, const Dataset& dataset,
                               const std::filesystem::path& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    std::vector<RunRequest> req;
    for (std::uint64_t seed : cfg.seeds) {
        req.push_back({cfg.mode, seed, cfg.train.lambda});
    }
    std::vector<RunResult> results = run_many(cfg, dataset, req);
    const std::vector<std::string> names = class_names(dataset);
    std::vector<const RunResult*> ptrs;
    for (const RunResult& r : results) {
        write_run_files(r, dataset, out_dir);
        ptrs.push_back(&r);
    }
    const std::vector<MetricStats> stats = group_stats(ptrs, names);
    const std::string hash = config_hash(cfg);
    std::string csv = "config_hash,mode,statistic,num_seeds," + join(metric_names(names), ",") + "\n";
    for (const char* which : {"mean", "std"}) {
        csv += hash + "," + to_string(cfg.mode) + "," + which + "," +
               std::to_string(results.size());
        for (const MetricStats& s : stats) {
            csv += "," + fmt6(std::string(which) == "mean" ? s.mean : s.stddev);
        }
        csv += "\n";
    }
    write_file_atomic(out_dir / ("run_" + to_string(cfg.mode) + "_aggregate.csv"), csv);
    return results;
}

std::vector<RunResult> cmd_sweep_lambda(const ExperimentConfig& cfg, const Dataset& dataset,
                                        const std::vector<double>& lambdas,
                                        const std::filesystem::path& out_dir) {
    cfg.validate();
    if (lambdas.empty()) {
        throw ConfigError("sweep-lambda: lambda list must not be empty");
    }
    for (double l : lambdas) {
        if (!(l >= 0.0)) {
            throw ConfigError("sweep-lambda: lambda values must be >= 0");
        }
    }
    ensure_dir(out_dir);
    std::vector<RunRequest> req;
    for (double l : lambdas) {
        for (std::uint64_t seed : cfg.seeds) {
            req.push_back({ExperimentMode::CbsBbh, seed, l});
        }
    }
    std::vector<RunResult> results = run_many(cfg, dataset, req);
    std::string csv = "config_hash,lambda,num_seeds,mean_AP,mean_tail_AP,mean_head_AP,std_AP\n";
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        std::vector<double> ap;
        std::vector<double> tail;
        std::vector<double> head;
        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
            const RunResult& r = results[li * cfg.seeds.size() + s];
            ap.push_back(r.report.ap);
            tail.push_back(r.report.tail_group_ap);
            head.push_back(r.report.head_group_ap);
        }
        const std::string hash =
            config_hash(with_mode(cfg, ExperimentMode::CbsBbh, lambdas[li]));
        csv += hash + "," + fmt6(lambdas[li]) + "," + std::to_string(cfg.seeds.size()) + "," +
               fmt6(stats_of(ap).mean) + "," + fmt6(stats_of(tail).mean) + "," +
               fmt6(stats_of(head).mean) + "," + fmt6(stats_of(ap).stddev) + "\n";
    }
    write_file_atomic(out_dir / "sweep_lambda.csv", csv);
    return results;
}

std::vector<RunResult> cmd_ablate(const ExperimentConfig& cfg, const Dataset& dataset,
                                  const std::filesystem::path& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);
    const std::vector<ExperimentMode> modes = ablation_modes();
    std::vector<RunRequest> req;
    for (ExperimentMode m : modes) {
        for (std::uint64_t seed : cfg.seeds) {
            req.push_back({m, seed, cfg.train.lambda});
        }
    }
    std::vector<RunResult> results = run_many(cfg, dataset, req);
    const std::vector<std::string> names = class_names(dataset);
    const std::string header = "config_hash,mode,num_samples,pos_fraction,lambda,num_seeds," +
                               join(metric_names(names), ",") + ",AP_std,tail_AP_std\n";
    std::string table = header;
    std::string per_seed = "config_hash,mode,seed,num_samples,pos_fraction,lambda," +
                           report_csv_header(names) + ",max_detections_in_scene\n";
    for (std::size_t mi = 0; mi < modes.size(); ++mi) {
        std::vector<const RunResult*> group;
        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
            const RunResult& r = results[mi * cfg.seeds.size() + s];
            group.push_back(&r);
            per_seed += r.config_hash + "," + to_string(r.mode) + "," + std::to_string(r.seed) +
                        "," + std::to_string(r.effective_num_samples) + "," +
                        fmt6(cfg.train.sampler.pos_fraction) + "," + fmt6(r.lambda) + "," +
                        report_csv_row(r.report) + "," + std::to_string(r.max_detections_in_scene) +
                        "\n";
        }
        const std::vector<MetricStats> stats = group_stats(group, names);
        const RunResult& first = *group.front();
        table += first.config_hash + "," + to_string(modes[mi]) + "," +
                 std::to_string(first.effective_num_samples) + "," +
                 fmt6(cfg.train.sampler.pos_fraction) + "," + fmt6(first.lambda) + "," +
                 std::to_string(group.size());
        for (const MetricStats& s : stats) {
            table += "," + fmt6(s.mean);
        }
        table += "," + fmt6(stats.front().stddev) + "," + fmt6(stats.back().stddev) + "\n";
    }
    write_file_atomic(out_dir / "ablation.csv", table);
    write_file_atomic(out_dir / "ablation_per_seed.csv", per_seed);
    return results;
}

EvalReport cmd_evaluate(const ExperimentConfig& cfg, const Dataset& dataset,
                        const std::filesystem::path& detections_path,
                        const std::filesystem::path& out_dir) {
    std::ifstream in(detections_path);
    if (!in) {
        throw DataError("cannot open detections " + detections_path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    DetectionsByScene dets;
    try {
        dets = parse_detections(buf.str());
    } catch (const DataError& e) {
        throw DataError(detections_path.string() + ": " + e.what());
    }
    const Split split = split_dataset(dataset.scenes, cfg.test_percent);
    const ClassPartition partition = partition_from_specs(dataset.specs);
    for (const auto& [id, list] : dets) {
        if (list.size() > cfg.inference.max_detections_per_scene) {
            throw DataError("scene " + std::to_string(id) + " exceeds the per-scene detection cap");
        }
    }
    EvalReport report = evaluate(dets, split.test, partition);
    ensure_dir(out_dir);
    const std::vector<std::string> names = class_names(dataset);
    write_file_atomic(out_dir / "evaluate.report.json", report_to_json(report, names).dump(1) + "\n");
    write_file_atomic(out_dir / "evaluate.report.csv",
                      report_csv_header(names) + "\n" + report_csv_row(report) + "\n");
    return report;
}

}  // namespace ltdet

#include "ltdet/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ltdet {

namespace {

struct RawClass {
    const char* name;
    double percent;
    ClassGroup group;
};

constexpr RawClass kVisDrone[] = {
    {"ped", 23.1, ClassGroup::Head},     {"person", 7.9, ClassGroup::Head},
    {"bicycle", 3.1, ClassGroup::Tail},  {"car", 42.2, ClassGroup::Head},
    {"van", 7.2, ClassGroup::Tail},      {"truck", 3.8, ClassGroup::Tail},
    {"tricycle", 1.4, ClassGroup::Tail}, {"awn", 0.9, ClassGroup::Tail},
    {"bus", 0.7, ClassGroup::Tail},      {"motor", 8.6, ClassGroup::Tail},
};

Feature noisy(const Feature& centre, double sigma, Rng& rng) {
    Feature out(centre.size());
    for (std::size_t i = 0; i < centre.size(); ++i) {
        out[i] = centre[i] + sigma * rng.normal();
    }
    return out;
}

Box random_box(const SceneConfig& config, Rng& rng) {
    const double w = std::min(rng.uniform(config.object_size.min, config.object_size.max),
                              config.extent_width);
    const double h = std::min(rng.uniform(config.object_size.min, config.object_size.max),
                              config.extent_height);
    const double x = rng.uniform(0.0, config.extent_width - w);
    const double y = rng.uniform(0.0, config.extent_height - h);
    return Box(x, y, std::min(x + w, config.extent_width), std::min(y + h, config.extent_height));
}

Scene generate_scene(const std::vector<ClassSpec>& specs, const std::vector<double>& cumulative,
                     const SceneConfig& config, std::uint64_t scene_id) {
    Rng rng = Rng::substream(config.seed, scene_id);
    Scene scene;
    scene.scene_id = scene_id;
    const auto span = static_cast<std::uint64_t>(config.objects_per_scene.max -
                                                 config.objects_per_scene.min + 1);
    const int count = config.objects_per_scene.min + static_cast<int>(rng.below(span));
    scene.objects.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double u = rng.uniform();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::size_t k = std::min<std::size_t>(
            static_cast<std::size_t>(it - cumulative.begin()), specs.size() - 1);
        ObjectInstance obj;
        obj.class_id = specs[k].class_id;
        obj.box = random_box(config, rng);
        obj.feature = noisy(specs[k].feature_centroid, config.feature_noise_sigma, rng);
        scene.objects.push_back(std::move(obj));
    }
    return scene;
}

std::vector<double> cumulative_proportions(const std::vector<ClassSpec>& specs) {
    std::vector<double> cumulative;
    cumulative.reserve(specs.size());
    double acc = 0.0;
    for (const ClassSpec& s : specs) {
        acc += s.proportion;
        cumulative.push_back(acc);
    }
    return cumulative;
}

}  // namespace

std::vector<double> visdrone_raw_percentages() {
    std::vector<double> out;
    for (const RawClass& c : kVisDrone) {
        out.push_back(c.percent);
    }
    return out;
}

std::vector<ClassSpec> default_visdrone_spec(double centroid_scale) {
    const std::size_t num_classes = std::size(kVisDrone);
    const std::size_t dim = num_classes + 1;
    double total = 0.0;
    for (const RawClass& c : kVisDrone) {
        total += c.percent;
    }
    std::vector<ClassSpec> specs;
    for (std::size_t i = 0; i < num_classes; ++i) {
        ClassSpec s;
        s.class_id = static_cast<int>(i);
        s.name = kVisDrone[i].name;
        s.proportion = kVisDrone[i].percent / total;
        s.group = kVisDrone[i].group;
        s.feature_centroid.assign(dim, 0.0);
        s.feature_centroid[i] = centroid_scale;
        specs.push_back(std::move(s));
    }
    return specs;
}

void validate_specs(const std::vector<ClassSpec>& specs) {
    if (specs.empty()) {
        throw std::invalid_argument("class specs: empty");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const ClassSpec& s = specs[i];
        if (s.class_id != static_cast<int>(i)) {
            throw std::invalid_argument("class specs: class ids must be 0..C-1 in order");
        }
        if (!(s.proportion > 0.0 && s.proportion <= 1.0)) {
            throw std::invalid_argument("class specs: proportion outside (0,1] for " + s.name);
        }
        if (s.feature_centroid.size() != specs.front().feature_centroid.size()) {
            throw std::invalid_argument("class specs: centroid dimensions differ");
        }
        total += s.proportion;
        for (std::size_t j = 0; j < i; ++j) {
            if (specs[j].feature_centroid == s.feature_centroid) {
                throw std::invalid_argument("class specs: duplicate centroid for " + s.name);
            }
        }
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("class specs: proportions do not sum to 1");
    }
    const ClassPartition p = partition_from_specs(specs);
    if (p.head_classes.empty() || p.tail_classes.empty()) {
        throw std::invalid_argument("class specs: head and tail groups must both be non-empty");
    }
}

void validate_config(const SceneConfig& c) {
    if (c.objects_per_scene.min < 0 || c.objects_per_scene.min > c.objects_per_scene.max) {
        throw std::invalid_argument("scene config: bad objects_per_scene range");
    }
    if (!(c.object_size.min > 0.0 && c.object_size.min <= c.object_size.max)) {
        throw std::invalid_argument("scene config: bad object_size range");
    }
    if (!(c.extent_width > 0.0 && c.extent_height > 0.0)) {
        throw std::invalid_argument("scene config: extent must be positive");
    }
    if (!(c.feature_noise_sigma > 0.0)) {
        throw std::invalid_argument("scene config: feature_noise_sigma must be > 0");
    }
    if (c.feature_dim == 0) {
        throw std::invalid_argument("scene config: feature_dim must be > 0");
    }
    if (!c.background_centroid.empty() && c.background_centroid.size() != c.feature_dim) {
        throw std::invalid_argument("scene config: background centroid dimension mismatch");
    }
}

ClassPartition partition_from_specs(const std::vector<ClassSpec>& specs) {
    ClassPartition p;
    for (const ClassSpec& s : specs) {
        (s.group == ClassGroup::Head ? p.head_classes : p.tail_classes).insert(s.class_id);
    }
    return p;
}

Feature background_centroid(const SceneConfig& config) {
    if (!config.background_centroid.empty()) {
        return config.background_centroid;
    }
    Feature f(config.feature_dim, 0.0);
    f.back() = 1.0;
    return f;
}

namespace {

void check_inputs(const std::vector<ClassSpec>& specs, const SceneConfig& config) {
    validate_specs(specs);
    validate_config(config);
    if (specs.front().feature_centroid.size() != config.feature_dim) {
        throw std::invalid_argument("generate_dataset: feature_dim mismatch between specs (" +
                                    std::to_string(specs.front().feature_centroid.size()) +
                                    ") and config (" + std::to_string(config.feature_dim) + ")");
    }
}

}  // namespace

std::vector<Scene> generate_dataset(const std::vector<ClassSpec>& specs, const SceneConfig& config) {
    check_inputs(specs, config);
    const std::vector<double> cumulative = cumulative_proportions(specs);
    std::vector<Scene> scenes(config.num_scenes);
    const auto n = static_cast<std::int64_t>(config.num_scenes);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        scenes[static_cast<std::size_t>(i)] =
            generate_scene(specs, cumulative, config, static_cast<std::uint64_t>(i));
    }
    return scenes;
}

std::vector<Scene> generate_dataset_serial(const std::vector<ClassSpec>& specs,
                                           const SceneConfig& config) {
    check_inputs(specs, config);
    const std::vector<double> cumulative = cumulative_proportions(specs);
    std::vector<Scene> scenes;
    scenes.reserve(config.num_scenes);
    for (std::size_t i = 0; i < config.num_scenes; ++i) {
        scenes.push_back(generate_scene(specs, cumulative, config, i));
    }
    return scenes;
}

std::vector<Proposal> generate_proposals(const Scene& scene, const SceneConfig& config,
                                         const ProposalConfig& pc, Rng& rng) {
    if (!(pc.jitter_sigma >= 0.0)) {
        throw std::invalid_argument("generate_proposals: jitter_sigma must be >= 0");
    }
    std::vector<Proposal> out;
    out.reserve(scene.objects.size() * static_cast<std::size_t>(pc.proposals_per_object) +
                pc.num_background);
    for (const ObjectInstance& obj : scene.objects) {
        for (int k = 0; k < pc.proposals_per_object; ++k) {
            const double ax = obj.box.x1() + pc.jitter_sigma * rng.normal();
            const double ay = obj.box.y1() + pc.jitter_sigma * rng.normal();
            const double bx = obj.box.x2() + pc.jitter_sigma * rng.normal();
            const double by = obj.box.y2() + pc.jitter_sigma * rng.normal();
            Box box = Box(std::min(ax, bx), std::min(ay, by), std::max(ax, bx), std::max(ay, by))
                          .clipped(config.extent_width, config.extent_height);
            out.push_back({box, noisy(obj.feature, pc.feature_noise_sigma, rng)});
        }
    }
    const Feature bg = background_centroid(config);
    for (std::size_t i = 0; i < pc.num_background; ++i) {
        Box box = random_box(config, rng);
        out.push_back({box, noisy(bg, config.feature_noise_sigma, rng)});
    }
    return out;
}

}  // namespace ltdet

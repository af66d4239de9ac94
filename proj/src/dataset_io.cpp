#include "ltdet/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include "ltdet/errors.hpp"

namespace ltdet {

using nlohmann::json;

namespace {

const char* group_name(ClassGroup g) { return g == ClassGroup::Head ? "head" : "tail"; }

ClassGroup group_from_name(const std::string& s) {
    if (s == "head") return ClassGroup::Head;
    if (s == "tail") return ClassGroup::Tail;
    throw DataError("unknown class group '" + s + "'");
}

json scene_to_json(const Scene& scene) {
    json objects = json::array();
    for (const ObjectInstance& o : scene.objects) {
        objects.push_back({{"box", {o.box.x1(), o.box.y1(), o.box.x2(), o.box.y2()}},
                           {"class_id", o.class_id},
                           {"feature", o.feature}});
    }
    return {{"scene_id", scene.scene_id}, {"objects", std::move(objects)}};
}

Scene scene_from_json(const json& j, const Dataset& ds) {
    Scene scene;
    scene.scene_id = j.at("scene_id").get<std::uint64_t>();
    const auto num_classes = static_cast<int>(ds.specs.size());
    for (const json& o : j.at("objects")) {
        const auto& b = o.at("box");
        if (!b.is_array() || b.size() != 4) {
            throw DataError("box must have 4 coordinates");
        }
        ObjectInstance obj;
        obj.box = Box(b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>());
        obj.class_id = o.at("class_id").get<int>();
        if (obj.class_id < 0 || obj.class_id >= num_classes) {
            throw DataError("class_id out of range");
        }
        obj.feature = o.at("feature").get<Feature>();
        if (obj.feature.size() != ds.config.feature_dim) {
            throw DataError("feature dimension mismatch");
        }
        scene.objects.push_back(std::move(obj));
    }
    return scene;
}

}  // namespace

json to_json(const ClassSpec& s) {
    return {{"class_id", s.class_id},
            {"name", s.name},
            {"proportion", s.proportion},
            {"group", group_name(s.group)},
            {"feature_centroid", s.feature_centroid}};
}

json to_json(const SceneConfig& c) {
    return {{"num_scenes", c.num_scenes},
            {"objects_per_scene", {c.objects_per_scene.min, c.objects_per_scene.max}},
            {"scene_extent", {c.extent_width, c.extent_height}},
            {"object_size", {c.object_size.min, c.object_size.max}},
            {"feature_dim", c.feature_dim},
            {"feature_noise_sigma", c.feature_noise_sigma},
            {"background_centroid", c.background_centroid},
            {"seed", c.seed}};
}

ClassSpec class_spec_from_json(const json& j) {
    ClassSpec s;
    s.class_id = j.at("class_id").get<int>();
    s.name = j.at("name").get<std::string>();
    s.proportion = j.at("proportion").get<double>();
    s.group = group_from_name(j.at("group").get<std::string>());
    s.feature_centroid = j.at("feature_centroid").get<Feature>();
    return s;
}

SceneConfig scene_config_from_json(const json& j, SceneConfig c) {
    if (j.contains("num_scenes")) c.num_scenes = j["num_scenes"].get<std::size_t>();
    if (j.contains("objects_per_scene")) {
        c.objects_per_scene = {j["objects_per_scene"].at(0).get<int>(),
                               j["objects_per_scene"].at(1).get<int>()};
    }
    if (j.contains("scene_extent")) {
        c.extent_width = j["scene_extent"].at(0).get<double>();
        c.extent_height = j["scene_extent"].at(1).get<double>();
    }
    if (j.contains("object_size")) {
        c.object_size = {j["object_size"].at(0).get<double>(), j["object_size"].at(1).get<double>()};
    }
    if (j.contains("feature_dim")) c.feature_dim = j["feature_dim"].get<std::size_t>();
    if (j.contains("feature_noise_sigma")) c.feature_noise_sigma = j["feature_noise_sigma"].get<double>();
    if (j.contains("background_centroid")) c.background_centroid = j["background_centroid"].get<Feature>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    return c;
}

void write_dataset(std::ostream& out, const Dataset& ds) {
    json specs = json::array();
    for (const ClassSpec& s : ds.specs) {
        specs.push_back(to_json(s));
    }
    const json manifest = {{"format", "ltdet-dataset"},
                           {"version", kDatasetFormatVersion},
                           {"seed", ds.config.seed},
                           {"num_scenes", ds.scenes.size()},
                           {"specs", std::move(specs)},
                           {"config", to_json(ds.config)}};
    out << manifest.dump() << '\n';
    for (const Scene& scene : ds.scenes) {
        out << scene_to_json(scene).dump() << '\n';
    }
}

Dataset read_dataset(std::istream& in) {
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw DataError("dataset line " + std::to_string(line_no) + ": " + what);
    };
    if (!std::getline(in, line)) {
        throw DataError("dataset line 1: missing manifest");
    }
    line_no = 1;
    try {
        const json manifest = json::parse(line);
        if (manifest.at("format").get<std::string>() != "ltdet-dataset") {
            fail("not an ltdet dataset");
        }
        if (manifest.at("version").get<int>() != kDatasetFormatVersion) {
            fail("unsupported format version");
        }
        for (const json& s : manifest.at("specs")) {
            ds.specs.push_back(class_spec_from_json(s));
        }
        ds.config = scene_config_from_json(manifest.at("config"));
        validate_specs(ds.specs);
        validate_config(ds.config);
    } catch (const DataError&) {
        throw;
    } catch (const std::exception& e) {
        fail(e.what());
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            ds.scenes.push_back(scene_from_json(json::parse(line), ds));
        } catch (const std::exception& e) {
            fail(e.what());
        }
    }
    return ds;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot open " + tmp.string() + " for writing");
        }
        out << contents;
        if (!out) {
            throw DataError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw DataError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                        ec.message());
    }
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
    std::ostringstream buf;
    write_dataset(buf, ds);
    write_file_atomic(path, buf.str());
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open dataset " + path.string());
    }
    try {
        return read_dataset(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace ltdet

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltdet/scenes.hpp"

namespace ltdet {

inline constexpr int kDatasetFormatVersion = 1;

struct Dataset {
    std::vector<ClassSpec> specs;
    SceneConfig config;
    std::vector<Scene> scenes;
};

nlohmann::json to_json(const ClassSpec& spec);
nlohmann::json to_json(const SceneConfig& config);
ClassSpec class_spec_from_json(const nlohmann::json& j);
/// Missing keys keep their defaults.
SceneConfig scene_config_from_json(const nlohmann::json& j, SceneConfig base = {});

/// Line 1 is a manifest (format tag, version, specs, config, seed); every
/// further line is one scene record.
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);

/// File variants. Writes go through a temporary file and a rename.
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

/// Writes `contents` to `path` atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace ltdet

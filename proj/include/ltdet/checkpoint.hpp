#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ltdet/training.hpp"

namespace ltdet {

inline constexpr int kCheckpointFormatVersion = 1;

/// 64-bit FNV-1a, lower-case hex.
std::string fnv1a_hex(std::string_view data);

struct Checkpoint {
    TrainedHeads heads;
    std::uint64_t seed = 0;
    std::string config_hash;
};

/// Architecture shape, every weight array row-major, seed, mode, config hash.
nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
/// Throws DataError on malformed input.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ltdet

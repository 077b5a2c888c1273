#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "cirsense/model_meta.hpp"
#include "cirsense/nn/train.hpp"

namespace cirsense::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NnCheckpoint {
  NnModel model;
  ModelMeta meta;
};

/// Layout: "CIRSNNET", u32 version, u64 len + JSON header, u32 crc32(header),
/// u64 parameter count, f64 parameters, u32 crc32(parameter bytes).
std::vector<std::uint8_t> encode_checkpoint(const NnCheckpoint& ckpt);
NnCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const NnCheckpoint& ckpt, const std::filesystem::path& path);
NnCheckpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const nlohmann::json& j);

}  // namespace cirsense::nn

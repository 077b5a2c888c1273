#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cirsense/gbt/ensemble.hpp"
#include "cirsense/model_meta.hpp"

namespace cirsense::gbt {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct GbtCheckpoint {
  Ensemble ensemble;
  ModelMeta meta;
  /// Grid-search table the configuration was picked from (may be empty).
  std::vector<GridScore> grid_table;
};

/// Layout: "CIRSGBTE", u32 version, u64 len + JSON header, u32 crc32(header),
/// then per output: u64 tree count, per tree: u32 node count, per node
/// i32 feature, f64 threshold, i32 left, i32 right, f64 weight,
/// u8 default_left; finally u32 crc32 of the tree section.
std::vector<std::uint8_t> encode_checkpoint(const GbtCheckpoint& ckpt);
GbtCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const GbtCheckpoint& ckpt, const std::filesystem::path& path);
GbtCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cirsense::gbt

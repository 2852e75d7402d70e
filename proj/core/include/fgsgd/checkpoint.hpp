#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "fgsgd/matkernel.hpp"
#include "fgsgd/pom.hpp"
#include "fgsgd/renorm.hpp"
#include "fgsgd/trainer.hpp"

namespace fgsgd {

struct CheckpointMember {
  Coord coord;
  ManifoldSpec spec;
  ScaleState scale;
  Matrix weight;
};

struct CheckpointGroup {
  std::vector<CheckpointMember> members;
};

struct CheckpointLayer {
  int layer = 0;
  Scheme scheme = Scheme::pi;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t subset_count = 0;
  std::uint64_t seed = 0;
  std::vector<CheckpointGroup> groups;
};

/// A trained (or hand-built) set of grouped weights.
///
/// On disk: `checkpoint.json` (manifest: format tag, version, epoch, config,
/// layout file reference, per-member metadata) next to `checkpoint.bin`
/// (magic "FGCK", u32 version, u32 record count, then per record u32 rows,
/// u32 cols, u64 entry count and the row-major little-endian float64 entries).
struct Checkpoint {
  std::size_t epoch = 0;
  nlohmann::json config = nlohmann::json::object();
  std::vector<CheckpointLayer> layers;
};

Checkpoint checkpoint_from_model(const Model& model, std::size_t epoch,
                                 const nlohmann::json& config);

/// Writes `<dir>/checkpoint.json` and `<dir>/checkpoint.bin`; returns the manifest path.
std::filesystem::path save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir);

/// Accepts the manifest path or the directory holding it. Throws InputError on
/// missing files, malformed content, or a checkpoint without any weights.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Rebuilds a model for the given layer shapes; throws ShapeError on mismatch.
Model model_from_checkpoint(const Checkpoint& ckpt, std::span<const LayerShape> shapes);

}  // namespace fgsgd

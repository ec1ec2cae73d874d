#pragma once

#include <filesystem>

#include "mmassoc/config.hpp"
#include "mmassoc/trainer.hpp"

namespace mmassoc {

/// Directory layout: params_visual/, params_audio/, velocity_visual/,
/// velocity_audio/ (one MMT1 tensor per weight), concepts_visual.mmt,
/// concepts_audio.mmt, binding.json and meta.json.
void save_checkpoint(const std::filesystem::path& dir, const TrainerState& state, const ExperimentConfig& config);

struct LoadedCheckpoint
{
  TrainerState state;
  ExperimentConfig config;
};

/// Throws CheckpointMismatch for missing or inconsistent contents.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

/// Throws CheckpointMismatch unless the networks fit the dataset's dims.
void check_compatible(const TrainerState& state, const DataConfig& data);

} // namespace mmassoc

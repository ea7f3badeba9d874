#pragma once

#include <filesystem>
#include <string>

#include "tabprompt/rl.hpp"

namespace tabprompt {

inline constexpr int kCheckpointVersion = 1;

/// Versioned JSON container: parameters with shapes, optimizer moments and
/// step, replay buffer, RNG state, episode counter and the episode log.
/// Doubles round-trip exactly.
std::string checkpoint_to_json(const TrainerCheckpoint& checkpoint);
TrainerCheckpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const TrainerCheckpoint& checkpoint, const std::filesystem::path& path);
TrainerCheckpoint load_checkpoint(const std::filesystem::path& path);

/// One JSON object per episode.
std::string episode_log_to_jsonl(const EpisodeLog& log);
EpisodeLog episode_log_from_jsonl(const std::string& text);

}  // namespace tabprompt

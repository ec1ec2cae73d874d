#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mmassoc {

enum class Scenario { Both, VisualFull, AudioFull };
enum class TrainMode { BaselineCtc, Original, Pooled };

std::string_view to_string(Scenario s);
std::string_view to_string(TrainMode m);
Scenario parse_scenario(std::string_view s);  // throws ConfigError
TrainMode parse_train_mode(std::string_view s); // throws ConfigError

struct DataConfig
{
  int vocab_size = 30;
  int base_len = 10;
  Scenario scenario = Scenario::Both;
  int max_drop = 5;       // scenario both: per-modality drops in [0, max_drop]
  int fixed_missing = 0;  // visual_full / audio_full: exact drops in the partial modality
  int n_train = 2000;
  int n_test = 500;
  int glyph_height = 32;  // visual feature size
  int glyph_width = 8;
  int separator = 2;      // blank columns around every glyph
  int audio_dim = 16;
  int audio_len_min = 10;
  int audio_len_max = 20;
  int audio_gap = 2;      // silent frames around every word
  double visual_noise = 0.1;
  double audio_noise = 0.1;
  int speakers = 12;
  int train_speakers = 9;
  double speaker_distortion = 0.1;
  double duration_warp = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainConfig
{
  int hidden_visual = 40;
  int hidden_audio = 100;
  double learning_rate = 1e-4;
  double momentum = 0.9;
  double concept_learning_rate = 1e-3;

  void validate() const;
};

struct EvalConfig
{
  int resamples = 5;
  int samples = 300;     // per resample, clamped to the split size
  int calibration = 200; // sequences used to freeze the evaluation binding

  void validate() const;
};

struct ExperimentConfig
{
  TrainMode mode = TrainMode::Pooled;
  std::uint64_t seed = 1;
  int epochs = 15;
  int checkpoint_every = 1; // epochs; 0 disables intermediate checkpoints
  TrainConfig train;
  DataConfig data;
  EvalConfig eval;

  void validate() const;
};

// JSON (de)serialization. Parsing rejects unknown keys and reports the
// offending field by its dotted path.
DataConfig data_config_from_json(const std::string& text);
std::string to_json(const DataConfig& c);
ExperimentConfig experiment_config_from_json(const std::string& text);
std::string to_json(const ExperimentConfig& c);

} // namespace mmassoc

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mmassoc/config.hpp"
#include "mmassoc/ctc.hpp"
#include "mmassoc/numerics.hpp"
#include "mmassoc/rng.hpp"

namespace mmassoc {

/// Concept names; the first 30 follow a fixed Spanish object list, larger
/// vocabularies continue with generated names.
std::vector<std::string> vocabulary_names(int size);

/// Per-concept renderings shared by every sample of a dataset.
struct ConceptPrototypes
{
  std::vector<Matrix> glyphs; // width x height, one row per timestep (image column)
  std::vector<Matrix> words;  // frames x audio_dim
  std::vector<Matrix> speaker_transform; // audio_dim x audio_dim
  std::vector<Vector> speaker_offset;

  static ConceptPrototypes generate(const DataConfig& config);
};

struct SemanticPair
{
  Transcript base;
  Transcript visual;
  Transcript audio;
  Transcript shared; // base elements kept in both modalities, in order
};

SemanticPair gen_semantic_pair(Rng& rng, const DataConfig& config);

/// Glyph strip with `separator` blank columns around every glyph, plus noise.
Matrix render_visual(Rng& rng, const Transcript& concepts, const ConceptPrototypes& protos, const DataConfig& config);

/// Concatenated spoken words. Every word picks a speaker from [first_speaker,
/// last_speaker], gets that speaker's affine distortion and a random duration
/// warp; silent gaps surround each word and noise is added on top.
Matrix render_audio(Rng& rng, const Transcript& concepts, const ConceptPrototypes& protos, const DataConfig& config,
                    int first_speaker, int last_speaker);

/// One word as spoken by `speaker` with duration factor `warp` (1 = unchanged).
Matrix speak_word(const ConceptPrototypes& protos, int concept_id, int speaker, double warp);

/// Linear-interpolation resampling along the time axis.
Matrix resample_frames(const Matrix& frames, Index target_len);

enum class Split { Train, Test };
std::string_view to_string(Split s);

struct MultimodalSample
{
  Matrix visual; // T1 x glyph_height
  Matrix audio;  // T2 x audio_dim
  Transcript transcript_visual;
  Transcript transcript_audio;
  Transcript base;
  Transcript shared;

  /// Elements of the base sequence missing from either modality.
  int missing() const;
};

/// Raw (unnormalized) sample; a pure function of (config, split, index).
MultimodalSample generate_sample(const DataConfig& config, const ConceptPrototypes& protos, Split split,
                                 std::size_t index);

struct FeatureStats
{
  Vector mean_visual, std_visual, mean_audio, std_audio;

  void apply(MultimodalSample& s) const;
  std::string to_json() const;
  static FeatureStats from_json(const std::string& text);
};

/// Per-dimension mean and population std over all training frames.
FeatureStats compute_stats(const DataConfig& config, const ConceptPrototypes& protos);

struct SampleRecord
{
  std::string id;
  Split split = Split::Train;
  std::string visual_path; // relative to the dataset directory
  std::string audio_path;
  Transcript transcript_visual;
  Transcript transcript_audio;
  Transcript base;
  Transcript shared;
  Scenario scenario = Scenario::Both;
};

/// Writes config.json, stats.json, manifest.jsonl and tensors/ under `dir`.
void build_dataset(const DataConfig& config, const std::filesystem::path& dir);

struct Dataset
{
  std::filesystem::path dir;
  DataConfig config;
  FeatureStats stats;
  std::vector<SampleRecord> train;
  std::vector<SampleRecord> test;

  const std::vector<SampleRecord>& split(Split s) const { return s == Split::Train ? train : test; }
  /// Loads the normalized tensors of one record.
  MultimodalSample load(const SampleRecord& record) const;
  std::vector<MultimodalSample> load_split(Split s) const;
};

Dataset load_dataset(const std::filesystem::path& dir);

} // namespace mmassoc

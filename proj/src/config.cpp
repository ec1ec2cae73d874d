#include "mmassoc/config.hpp"

#include <set>

#include "json.hpp"
#include "mmassoc/error.hpp"

namespace mmassoc {
namespace {

using json = nlohmann::ordered_json;

void require(bool ok, const std::string& field, const std::string& why)
{
  if (!ok) throw ConfigError(field + ": " + why);
}

void reject_unknown(const json& j, const std::string& prefix, const std::set<std::string>& known)
{
  if (!j.is_object()) throw ConfigError((prefix.empty() ? std::string("config") : prefix) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError(prefix + (prefix.empty() ? "" : ".") + key + ": unknown key");
  }
}

template <typename T>
void read(const json& j, const std::string& prefix, const char* key, T& out)
{
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(prefix + "." + key + ": wrong type");
  }
}

json data_to_json(const DataConfig& c)
{
  return json{{"vocab_size", c.vocab_size},
              {"base_len", c.base_len},
              {"scenario", to_string(c.scenario)},
              {"max_drop", c.max_drop},
              {"fixed_missing", c.fixed_missing},
              {"n_train", c.n_train},
              {"n_test", c.n_test},
              {"glyph_height", c.glyph_height},
              {"glyph_width", c.glyph_width},
              {"separator", c.separator},
              {"audio_dim", c.audio_dim},
              {"audio_len_min", c.audio_len_min},
              {"audio_len_max", c.audio_len_max},
              {"audio_gap", c.audio_gap},
              {"visual_noise", c.visual_noise},
              {"audio_noise", c.audio_noise},
              {"speakers", c.speakers},
              {"train_speakers", c.train_speakers},
              {"speaker_distortion", c.speaker_distortion},
              {"duration_warp", c.duration_warp},
              {"seed", c.seed}};
}

DataConfig data_from_json(const json& j, const std::string& prefix)
{
  DataConfig c;
  std::set<std::string> known;
  const json defaults = data_to_json(c);
  for (const auto& [k, _] : defaults.items()) known.insert(k);
  reject_unknown(j, prefix, known);
  read(j, prefix, "vocab_size", c.vocab_size);
  read(j, prefix, "base_len", c.base_len);
  if (j.contains("scenario")) {
    std::string s;
    read(j, prefix, "scenario", s);
    try {
      c.scenario = parse_scenario(s);
    } catch (const ConfigError&) {
      throw ConfigError(prefix + ".scenario: invalid value '" + s + "'");
    }
  }
  read(j, prefix, "max_drop", c.max_drop);
  read(j, prefix, "fixed_missing", c.fixed_missing);
  read(j, prefix, "n_train", c.n_train);
  read(j, prefix, "n_test", c.n_test);
  read(j, prefix, "glyph_height", c.glyph_height);
  read(j, prefix, "glyph_width", c.glyph_width);
  read(j, prefix, "separator", c.separator);
  read(j, prefix, "audio_dim", c.audio_dim);
  read(j, prefix, "audio_len_min", c.audio_len_min);
  read(j, prefix, "audio_len_max", c.audio_len_max);
  read(j, prefix, "audio_gap", c.audio_gap);
  read(j, prefix, "visual_noise", c.visual_noise);
  read(j, prefix, "audio_noise", c.audio_noise);
  read(j, prefix, "speakers", c.speakers);
  read(j, prefix, "train_speakers", c.train_speakers);
  read(j, prefix, "speaker_distortion", c.speaker_distortion);
  read(j, prefix, "duration_warp", c.duration_warp);
  read(j, prefix, "seed", c.seed);
  return c;
}

json train_to_json(const TrainConfig& c)
{
  return json{{"hidden_visual", c.hidden_visual},
              {"hidden_audio", c.hidden_audio},
              {"learning_rate", c.learning_rate},
              {"momentum", c.momentum},
              {"concept_learning_rate", c.concept_learning_rate}};
}

json eval_to_json(const EvalConfig& c)
{
  return json{{"resamples", c.resamples}, {"samples", c.samples}, {"calibration", c.calibration}};
}

json parse(const std::string& text)
{
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
}

} // namespace

std::string_view to_string(Scenario s)
{
  switch (s) {
  case Scenario::Both: return "both";
  case Scenario::VisualFull: return "visual_full";
  case Scenario::AudioFull: return "audio_full";
  }
  return "?";
}

std::string_view to_string(TrainMode m)
{
  switch (m) {
  case TrainMode::BaselineCtc: return "baseline_ctc";
  case TrainMode::Original: return "original";
  case TrainMode::Pooled: return "pooled";
  }
  return "?";
}

Scenario parse_scenario(std::string_view s)
{
  if (s == "both") return Scenario::Both;
  if (s == "visual_full") return Scenario::VisualFull;
  if (s == "audio_full") return Scenario::AudioFull;
  throw ConfigError("scenario: invalid value '" + std::string(s) + "'");
}

TrainMode parse_train_mode(std::string_view s)
{
  if (s == "baseline_ctc") return TrainMode::BaselineCtc;
  if (s == "original") return TrainMode::Original;
  if (s == "pooled") return TrainMode::Pooled;
  throw ConfigError("mode: invalid value '" + std::string(s) + "'");
}

void DataConfig::validate() const
{
  require(vocab_size >= 2, "data.vocab_size", "must be at least 2");
  require(base_len >= 1, "data.base_len", "must be at least 1");
  require(max_drop >= 0 && max_drop < base_len, "data.max_drop", "must be in [0, base_len)");
  require(fixed_missing >= 0 && fixed_missing < base_len, "data.fixed_missing", "must be in [0, base_len)");
  require(n_train >= 1, "data.n_train", "must be positive");
  require(n_test >= 1, "data.n_test", "must be positive");
  require(glyph_height >= 1, "data.glyph_height", "must be positive");
  require(glyph_width >= 1, "data.glyph_width", "must be positive");
  require(separator >= 0, "data.separator", "must be non-negative");
  require(audio_dim >= 1, "data.audio_dim", "must be positive");
  require(audio_len_min >= 2 && audio_len_max >= audio_len_min, "data.audio_len_min",
          "need 2 <= audio_len_min <= audio_len_max");
  require(audio_gap >= 0, "data.audio_gap", "must be non-negative");
  require(visual_noise >= 0.0, "data.visual_noise", "must be non-negative");
  require(audio_noise >= 0.0, "data.audio_noise", "must be non-negative");
  require(speakers >= 2, "data.speakers", "must be at least 2");
  require(train_speakers >= 1 && train_speakers < speakers, "data.train_speakers", "must be in [1, speakers)");
  require(speaker_distortion >= 0.0, "data.speaker_distortion", "must be non-negative");
  require(duration_warp >= 0.0 && duration_warp < 1.0, "data.duration_warp", "must be in [0, 1)");
}

void TrainConfig::validate() const
{
  require(hidden_visual >= 1, "train.hidden_visual", "must be positive");
  require(hidden_audio >= 1, "train.hidden_audio", "must be positive");
  require(learning_rate >= 0.0, "train.learning_rate", "must be non-negative");
  require(momentum >= 0.0 && momentum < 1.0, "train.momentum", "must be in [0, 1)");
  require(concept_learning_rate >= 0.0, "train.concept_learning_rate", "must be non-negative");
}

void EvalConfig::validate() const
{
  require(resamples >= 1, "eval.resamples", "must be positive");
  require(samples >= 1, "eval.samples", "must be positive");
  require(calibration >= 1, "eval.calibration", "must be positive");
}

void ExperimentConfig::validate() const
{
  require(epochs >= 0, "epochs", "must be non-negative");
  require(checkpoint_every >= 0, "checkpoint_every", "must be non-negative");
  train.validate();
  data.validate();
  eval.validate();
}

DataConfig data_config_from_json(const std::string& text)
{
  const json j = parse(text);
  // Accept either a bare data section or a full experiment file.
  if (j.is_object() && j.contains("data")) return experiment_config_from_json(text).data;
  DataConfig c = data_from_json(j, "data");
  c.validate();
  return c;
}

std::string to_json(const DataConfig& c) { return data_to_json(c).dump(2); }

ExperimentConfig experiment_config_from_json(const std::string& text)
{
  const json j = parse(text);
  reject_unknown(j, "", {"mode", "seed", "epochs", "checkpoint_every", "train", "data", "eval"});
  ExperimentConfig c;
  if (j.contains("mode")) {
    std::string m;
    read(j, "", "mode", m);
    c.mode = parse_train_mode(m);
  }
  read(j, "", "seed", c.seed);
  read(j, "", "epochs", c.epochs);
  read(j, "", "checkpoint_every", c.checkpoint_every);
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, "train", {"hidden_visual", "hidden_audio", "learning_rate", "momentum", "concept_learning_rate"});
    read(t, "train", "hidden_visual", c.train.hidden_visual);
    read(t, "train", "hidden_audio", c.train.hidden_audio);
    read(t, "train", "learning_rate", c.train.learning_rate);
    read(t, "train", "momentum", c.train.momentum);
    read(t, "train", "concept_learning_rate", c.train.concept_learning_rate);
  }
  if (j.contains("data")) c.data = data_from_json(j.at("data"), "data");
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    reject_unknown(e, "eval", {"resamples", "samples", "calibration"});
    read(e, "eval", "resamples", c.eval.resamples);
    read(e, "eval", "samples", c.eval.samples);
    read(e, "eval", "calibration", c.eval.calibration);
  }
  c.validate();
  return c;
}

std::string to_json(const ExperimentConfig& c)
{
  json j{{"mode", to_string(c.mode)},
         {"seed", c.seed},
         {"epochs", c.epochs},
         {"checkpoint_every", c.checkpoint_every},
         {"train", train_to_json(c.train)},
         {"data", data_to_json(c.data)},
         {"eval", eval_to_json(c.eval)}};
  return j.dump(2);
}

} // namespace mmassoc

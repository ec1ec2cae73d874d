#include "mmassoc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "mmassoc/tensor_io.hpp"

namespace mmassoc {
namespace {

using json = nlohmann::ordered_json;

// clang-format off
const char* const kSpanishObjects[] = {
    "oso", "bote", "botella", "bol", "caja", "carro", "gato", "queso", "cigarrillo", "gaseosa",
    "bebida", "pato", "cara", "comida", "hamburguesa", "higiene", "liquido", "locion", "cebolla", "pimenton",
    "pera", "redondo", "sanduche", "cuchara", "te", "telefono", "tomate", "florero", "vehiculo", "madera"};
// clang-format on

std::string read_file(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text)
{
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

/// Keep-mask over `len` positions with exactly `drops` positions removed.
std::vector<bool> drop_positions(Rng& rng, int len, int drops)
{
  std::vector<int> idx(static_cast<std::size_t>(len));
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<bool> keep(static_cast<std::size_t>(len), true);
  for (int k = 0; k < drops; ++k) {
    const int j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(len - k)));
    std::swap(idx[k], idx[j]);
    keep[idx[k]] = false;
  }
  return keep;
}

Transcript select(const Transcript& base, const std::vector<bool>& keep)
{
  Transcript out;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (keep[i]) out.push_back(base[i]);
  }
  return out;
}

std::string sample_id(Split split, std::size_t index)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%06zu", split == Split::Train ? "train" : "test", index);
  return buf;
}

json vec_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vec_from_json(const json& j)
{
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

} // namespace

std::vector<std::string> vocabulary_names(int size)
{
  std::vector<std::string> names;
  for (int i = 0; i < size; ++i) {
    names.push_back(i < 30 ? std::string(kSpanishObjects[i]) : "concept_" + std::to_string(i));
  }
  return names;
}

ConceptPrototypes ConceptPrototypes::generate(const DataConfig& config)
{
  config.validate();
  ConceptPrototypes p;
  const int C = config.vocab_size;

  for (int c = 0; c < C; ++c) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      Rng rng = Rng::derive(config.seed, "glyph", static_cast<std::uint64_t>(c) * 1000 + attempt);
      Matrix g(config.glyph_width, config.glyph_height);
      for (Index k = 0; k < g.size(); ++k) g.data()[k] = rng.uniform() < 0.5 ? 1.0 : 0.0;
      const bool duplicate = std::any_of(p.glyphs.begin(), p.glyphs.end(), [&g](const Matrix& o) { return o == g; });
      if (!duplicate) {
        p.glyphs.push_back(std::move(g));
        break;
      }
    }
  }

  constexpr int kComponents = 3;
  for (int c = 0; c < C; ++c) {
    Rng rng = Rng::derive(config.seed, "word", static_cast<std::uint64_t>(c));
    const int len = rng.between(config.audio_len_min, config.audio_len_max);
    Matrix w = Matrix::Zero(len, config.audio_dim);
    for (int d = 0; d < config.audio_dim; ++d) {
      for (int k = 0; k < kComponents; ++k) {
        const double amp = rng.normal() / std::sqrt(static_cast<double>(kComponents));
        const double freq = rng.uniform(0.5, 2.5);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (int t = 0; t < len; ++t) {
          const double tau = static_cast<double>(t) / static_cast<double>(len - 1);
          w(t, d) += amp * std::sin(2.0 * std::numbers::pi * freq * tau + phase);
        }
      }
    }
    p.words.push_back(std::move(w));
  }

  for (int s = 0; s < config.speakers; ++s) {
    Rng rng = Rng::derive(config.seed, "speaker", static_cast<std::uint64_t>(s));
    Matrix a = Matrix::Identity(config.audio_dim, config.audio_dim);
    const double scale = config.speaker_distortion / std::sqrt(static_cast<double>(config.audio_dim));
    for (Index k = 0; k < a.size(); ++k) a.data()[k] += scale * rng.normal();
    Vector b(config.audio_dim);
    for (Index k = 0; k < b.size(); ++k) b(k) = config.speaker_distortion * rng.normal();
    p.speaker_transform.push_back(std::move(a));
    p.speaker_offset.push_back(std::move(b));
  }
  return p;
}

SemanticPair gen_semantic_pair(Rng& rng, const DataConfig& config)
{
  config.validate();
  const int L = config.base_len;
  SemanticPair pair;
  pair.base.resize(static_cast<std::size_t>(L));
  for (int& s : pair.base) s = static_cast<int>(rng.below(static_cast<std::uint64_t>(config.vocab_size)));

  std::vector<bool> keep_v, keep_a;
  switch (config.scenario) {
  case Scenario::Both:
    for (;;) {
      keep_v = drop_positions(rng, L, rng.between(0, config.max_drop));
      keep_a = drop_positions(rng, L, rng.between(0, config.max_drop));
      bool overlap = false;
      for (int i = 0; i < L; ++i) overlap = overlap || (keep_v[i] && keep_a[i]);
      if (overlap) break;
    }
    break;
  case Scenario::VisualFull:
    keep_v.assign(static_cast<std::size_t>(L), true);
    keep_a = drop_positions(rng, L, config.fixed_missing);
    break;
  case Scenario::AudioFull:
    keep_v = drop_positions(rng, L, config.fixed_missing);
    keep_a.assign(static_cast<std::size_t>(L), true);
    break;
  }

  std::vector<bool> keep_both(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) keep_both[i] = keep_v[i] && keep_a[i];
  pair.visual = select(pair.base, keep_v);
  pair.audio = select(pair.base, keep_a);
  pair.shared = select(pair.base, keep_both);
  return pair;
}

Matrix render_visual(Rng& rng, const Transcript& concepts, const ConceptPrototypes& protos, const DataConfig& config)
{
  const Index sep = config.separator;
  Index T = sep;
  for (int c : concepts) {
    if (c < 0 || c >= static_cast<int>(protos.glyphs.size())) throw InvalidArgument("render_visual: unknown concept");
    T += protos.glyphs[c].rows() + sep;
  }
  Matrix x = Matrix::Zero(T, config.glyph_height);
  Index t = sep;
  for (int c : concepts) {
    x.middleRows(t, protos.glyphs[c].rows()) = protos.glyphs[c];
    t += protos.glyphs[c].rows() + sep;
  }
  if (config.visual_noise > 0.0) {
    for (Index k = 0; k < x.size(); ++k) x.data()[k] += config.visual_noise * rng.normal();
  }
  return x;
}

Matrix resample_frames(const Matrix& frames, Index target_len)
{
  if (frames.rows() < 1 || target_len < 1) throw InvalidArgument("resample_frames: empty");
  if (target_len == frames.rows()) return frames;
  Matrix out(target_len, frames.cols());
  const double scale =
      target_len > 1 ? static_cast<double>(frames.rows() - 1) / static_cast<double>(target_len - 1) : 0.0;
  for (Index t = 0; t < target_len; ++t) {
    const double pos = scale * static_cast<double>(t);
    const Index lo = std::min<Index>(static_cast<Index>(std::floor(pos)), frames.rows() - 1);
    const Index hi = std::min<Index>(lo + 1, frames.rows() - 1);
    const double frac = pos - static_cast<double>(lo);
    out.row(t) = (1.0 - frac) * frames.row(lo) + frac * frames.row(hi);
  }
  return out;
}

Matrix speak_word(const ConceptPrototypes& protos, int concept_id, int speaker, double warp)
{
  if (concept_id < 0 || concept_id >= static_cast<int>(protos.words.size())) {
    throw InvalidArgument("speak_word: unknown concept");
  }
  if (speaker < 0 || speaker >= static_cast<int>(protos.speaker_transform.size())) {
    throw InvalidArgument("speak_word: unknown speaker");
  }
  const Matrix& word = protos.words[concept_id];
  const Index len = std::max<Index>(2, std::lround(static_cast<double>(word.rows()) * warp));
  const Matrix frames = resample_frames(word, len);
  return (frames * protos.speaker_transform[speaker].transpose()).rowwise() +
         protos.speaker_offset[speaker].transpose();
}

Matrix render_audio(Rng& rng, const Transcript& concepts, const ConceptPrototypes& protos, const DataConfig& config,
                    int first_speaker, int last_speaker)
{
  std::vector<Matrix> words;
  Index T = config.audio_gap;
  for (int c : concepts) {
    const int speaker = rng.between(first_speaker, last_speaker);
    const double warp = 1.0 + config.duration_warp * rng.uniform(-1.0, 1.0);
    words.push_back(speak_word(protos, c, speaker, warp));
    T += words.back().rows() + config.audio_gap;
  }
  Matrix x = Matrix::Zero(T, config.audio_dim);
  Index t = config.audio_gap;
  for (const Matrix& w : words) {
    x.middleRows(t, w.rows()) = w;
    t += w.rows() + config.audio_gap;
  }
  if (config.audio_noise > 0.0) {
    for (Index k = 0; k < x.size(); ++k) x.data()[k] += config.audio_noise * rng.normal();
  }
  return x;
}

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

int MultimodalSample::missing() const
{
  return static_cast<int>(2 * base.size() - transcript_visual.size() - transcript_audio.size());
}

MultimodalSample generate_sample(const DataConfig& config, const ConceptPrototypes& protos, Split split,
                                 std::size_t index)
{
  Rng rng = Rng::derive(config.seed, to_string(split), index);
  const SemanticPair pair = gen_semantic_pair(rng, config);
  MultimodalSample s;
  s.visual = render_visual(rng, pair.visual, protos, config);
  if (split == Split::Train) {
    s.audio = render_audio(rng, pair.audio, protos, config, 0, config.train_speakers - 1);
  } else {
    s.audio = render_audio(rng, pair.audio, protos, config, config.train_speakers, config.speakers - 1);
  }
  s.transcript_visual = pair.visual;
  s.transcript_audio = pair.audio;
  s.base = pair.base;
  s.shared = pair.shared;
  return s;
}

void FeatureStats::apply(MultimodalSample& s) const
{
  if (s.visual.cols() != mean_visual.size() || s.audio.cols() != mean_audio.size()) {
    throw InvalidArgument("FeatureStats::apply: feature size mismatch");
  }
  s.visual = ((s.visual.rowwise() - mean_visual.transpose()).array().rowwise() / std_visual.transpose().array())
                 .matrix();
  s.audio =
      ((s.audio.rowwise() - mean_audio.transpose()).array().rowwise() / std_audio.transpose().array()).matrix();
}

std::string FeatureStats::to_json() const
{
  json j{{"mean_v", vec_json(mean_visual)},
         {"std_v", vec_json(std_visual)},
         {"mean_a", vec_json(mean_audio)},
         {"std_a", vec_json(std_audio)}};
  return j.dump(2);
}

FeatureStats FeatureStats::from_json(const std::string& text)
{
  try {
    const json j = json::parse(text);
    return {vec_from_json(j.at("mean_v")), vec_from_json(j.at("std_v")), vec_from_json(j.at("mean_a")),
            vec_from_json(j.at("std_a"))};
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed stats file: ") + e.what());
  }
}

FeatureStats compute_stats(const DataConfig& config, const ConceptPrototypes& protos)
{
  using Acc = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  Acc sum_v = Acc::Zero(config.glyph_height), sq_v = Acc::Zero(config.glyph_height);
  Acc sum_a = Acc::Zero(config.audio_dim), sq_a = Acc::Zero(config.audio_dim);
  long double n_v = 0, n_a = 0;
  auto accumulate = [](const Matrix& x, Acc& sum, Acc& sq, long double& n) {
    for (Index t = 0; t < x.rows(); ++t) {
      for (Index d = 0; d < x.cols(); ++d) {
        const long double v = x(t, d);
        sum(d) += v;
        sq(d) += v * v;
      }
    }
    n += x.rows();
  };
  for (int i = 0; i < config.n_train; ++i) {
    const MultimodalSample s = generate_sample(config, protos, Split::Train, static_cast<std::size_t>(i));
    accumulate(s.visual, sum_v, sq_v, n_v);
    accumulate(s.audio, sum_a, sq_a, n_a);
  }
  auto finish = [](const Acc& sum, const Acc& sq, long double n, Vector& mean, Vector& sd) {
    mean.resize(sum.size());
    sd.resize(sum.size());
    for (Index d = 0; d < sum.size(); ++d) {
      const long double mu = sum(d) / n;
      const long double var = std::max<long double>(sq(d) / n - mu * mu, 0.0L);
      mean(d) = static_cast<double>(mu);
      const double s = static_cast<double>(std::sqrt(var));
      sd(d) = s > 1e-12 ? s : 1.0;
    }
  };
  FeatureStats stats;
  finish(sum_v, sq_v, n_v, stats.mean_visual, stats.std_visual);
  finish(sum_a, sq_a, n_a, stats.mean_audio, stats.std_audio);
  return stats;
}

void build_dataset(const DataConfig& config, const std::filesystem::path& dir)
{
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir / "tensors", ec);
  if (ec) throw IoError("cannot create " + (dir / "tensors").string() + ": " + ec.message());

  const ConceptPrototypes protos = ConceptPrototypes::generate(config);
  const FeatureStats stats = compute_stats(config, protos);

  json meta{{"data", json::parse(to_json(config))}, {"vocabulary", vocabulary_names(config.vocab_size)}};
  write_file(dir / "config.json", meta.dump(2) + "\n");
  write_file(dir / "stats.json", stats.to_json() + "\n");

  std::ofstream manifest(dir / "manifest.jsonl", std::ios::binary | std::ios::trunc);
  if (!manifest) throw IoError("cannot write " + (dir / "manifest.jsonl").string());
  for (Split split : {Split::Train, Split::Test}) {
    const int n = split == Split::Train ? config.n_train : config.n_test;
    for (int i = 0; i < n; ++i) {
      MultimodalSample s = generate_sample(config, protos, split, static_cast<std::size_t>(i));
      stats.apply(s);
      const std::string id = sample_id(split, static_cast<std::size_t>(i));
      const std::string vpath = "tensors/" + id + "_v.mmt";
      const std::string apath = "tensors/" + id + "_a.mmt";
      try {
        write_tensor(dir / vpath, s.visual);
        write_tensor(dir / apath, s.audio);
      } catch (const TensorError& e) {
        throw IoError(e.what());
      }
      json line{{"id", id},
                {"split", to_string(split)},
                {"visual_path", vpath},
                {"audio_path", apath},
                {"transcript_v", s.transcript_visual},
                {"transcript_a", s.transcript_audio},
                {"base", s.base},
                {"shared", s.shared},
                {"scenario", to_string(config.scenario)},
                {"seed", config.seed}};
      manifest << line.dump() << '\n';
    }
  }
  if (!manifest) throw IoError("write failed: manifest.jsonl");
}

MultimodalSample Dataset::load(const SampleRecord& record) const
{
  MultimodalSample s;
  try {
    s.visual = read_tensor(dir / record.visual_path);
    s.audio = read_tensor(dir / record.audio_path);
  } catch (const TensorError& e) {
    throw IoError(e.what());
  }
  if (s.visual.cols() != config.glyph_height || s.audio.cols() != config.audio_dim) {
    throw IoError("tensor feature size does not match dataset config: " + record.id);
  }
  s.transcript_visual = record.transcript_visual;
  s.transcript_audio = record.transcript_audio;
  s.base = record.base;
  s.shared = record.shared;
  return s;
}

std::vector<MultimodalSample> Dataset::load_split(Split s) const
{
  std::vector<MultimodalSample> out;
  out.reserve(split(s).size());
  for (const auto& r : split(s)) out.push_back(load(r));
  return out;
}

Dataset load_dataset(const std::filesystem::path& dir)
{
  Dataset ds;
  ds.dir = dir;
  const json meta = [&] {
    try {
      return json::parse(read_file(dir / "config.json"));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("malformed dataset config: ") + e.what());
    }
  }();
  if (!meta.contains("data")) throw IoError("dataset config lacks a data section");
  ds.config = data_config_from_json(meta.at("data").dump());
  ds.stats = FeatureStats::from_json(read_file(dir / "stats.json"));

  std::ifstream in(dir / "manifest.jsonl");
  if (!in) throw IoError("cannot read " + (dir / "manifest.jsonl").string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      SampleRecord r;
      r.id = j.at("id").get<std::string>();
      r.split = j.at("split").get<std::string>() == "train" ? Split::Train : Split::Test;
      r.visual_path = j.at("visual_path").get<std::string>();
      r.audio_path = j.at("audio_path").get<std::string>();
      r.transcript_visual = j.at("transcript_v").get<Transcript>();
      r.transcript_audio = j.at("transcript_a").get<Transcript>();
      r.base = j.value("base", Transcript{});
      r.shared = j.value("shared", Transcript{});
      r.scenario = parse_scenario(j.at("scenario").get<std::string>());
      (r.split == Split::Train ? ds.train : ds.test).push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("malformed manifest line: ") + e.what());
    }
  }
  return ds;
}

} // namespace mmassoc

#include "mmassoc/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mmassoc/tensor_io.hpp"

namespace mmassoc {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

Matrix as_column(const Vector& v) { return Eigen::Map<const Matrix>(v.data(), v.size(), 1); }

void save_params(const fs::path& dir, const LstmParams& p)
{
  fs::create_directories(dir);
  for (const auto& [name, d] : {std::pair<const char*, const DirectionParams*>{"fwd", &p.fwd}, {"rev", &p.rev}}) {
    for (Gate g : kGates) {
      const std::string sfx(gate_suffix(g));
      write_tensor(dir / (std::string(name) + "_W_x" + sfx + ".mmt"), d->w_x_gate(g));
      write_tensor(dir / (std::string(name) + "_W_h" + sfx + ".mmt"), d->w_h_gate(g));
      write_tensor(dir / (std::string(name) + "_b_" + sfx + ".mmt"), as_column(d->b_gate(g)));
    }
  }
  write_tensor(dir / "W_hz.mmt", p.w_out);
  write_tensor(dir / "b_z.mmt", as_column(p.b_out));
}

Matrix read_shaped(const fs::path& path, Index rows, Index cols)
{
  Matrix m;
  try {
    m = read_tensor(path);
  } catch (const TensorError& e) {
    throw CheckpointMismatch(e.what());
  }
  if (m.rows() != rows || m.cols() != cols) throw CheckpointMismatch("unexpected tensor shape: " + path.string());
  return m;
}

LstmParams load_params(const fs::path& dir, Index n, Index hidden, Index outputs)
{
  LstmParams p = LstmParams::zeros(n, hidden, outputs);
  for (const auto& [name, d] : {std::pair<const char*, DirectionParams*>{"fwd", &p.fwd}, {"rev", &p.rev}}) {
    for (Gate g : kGates) {
      const std::string sfx(gate_suffix(g));
      d->w_x_gate(g) = read_shaped(dir / (std::string(name) + "_W_x" + sfx + ".mmt"), hidden, n);
      d->w_h_gate(g) = read_shaped(dir / (std::string(name) + "_W_h" + sfx + ".mmt"), hidden, hidden);
      d->b_gate(g) = read_shaped(dir / (std::string(name) + "_b_" + sfx + ".mmt"), hidden, 1).col(0);
    }
  }
  p.w_out = read_shaped(dir / "W_hz.mmt", outputs, 2 * hidden);
  p.b_out = read_shaped(dir / "b_z.mmt", outputs, 1).col(0);
  return p;
}

std::string read_file(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CheckpointMismatch("missing checkpoint file: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text)
{
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
}

} // namespace

void save_checkpoint(const fs::path& dir, const TrainerState& state, const ExperimentConfig& config)
{
  try {
    fs::create_directories(dir);
    save_params(dir / "params_visual", state.visual.params);
    save_params(dir / "params_audio", state.audio.params);
    save_params(dir / "velocity_visual", state.visual.velocity);
    save_params(dir / "velocity_audio", state.audio.velocity);
    write_tensor(dir / "concepts_visual.mmt", state.visual.concepts.gamma);
    write_tensor(dir / "concepts_audio.mmt", state.audio.concepts.gamma);
  } catch (const TensorError& e) {
    throw IoError(e.what());
  } catch (const fs::filesystem_error& e) {
    throw IoError(e.what());
  }

  json binding{{"visual", state.visual.last_assignment.perm}, {"audio", state.audio.last_assignment.perm}};
  write_file(dir / "binding.json", binding.dump(2) + "\n");

  json meta{{"format", "mmassoc-checkpoint-1"},
            {"dims",
             {{"concepts", state.visual.concepts.concepts()},
              {"visual_input", state.visual.params.input_size()},
              {"visual_hidden", state.visual.params.hidden()},
              {"audio_input", state.audio.params.input_size()},
              {"audio_hidden", state.audio.params.hidden()}}},
            {"epoch", state.epoch},
            {"step", state.step},
            {"skipped", state.skipped},
            {"seed", config.seed},
            {"config", json::parse(to_json(config))}};
  write_file(dir / "meta.json", meta.dump(2) + "\n");
}

LoadedCheckpoint load_checkpoint(const fs::path& dir)
{
  LoadedCheckpoint ck;
  json meta, binding;
  try {
    meta = json::parse(read_file(dir / "meta.json"));
    binding = json::parse(read_file(dir / "binding.json"));
    ck.config = experiment_config_from_json(meta.at("config").dump());
    const auto& d = meta.at("dims");
    const Index C = d.at("concepts").get<Index>();
    const Index nv = d.at("visual_input").get<Index>(), hv = d.at("visual_hidden").get<Index>();
    const Index na = d.at("audio_input").get<Index>(), ha = d.at("audio_hidden").get<Index>();
    auto& s = ck.state;
    s.visual.params = load_params(dir / "params_visual", nv, hv, C + 1);
    s.audio.params = load_params(dir / "params_audio", na, ha, C + 1);
    s.visual.velocity = load_params(dir / "velocity_visual", nv, hv, C + 1);
    s.audio.velocity = load_params(dir / "velocity_audio", na, ha, C + 1);
    s.visual.concepts.gamma = read_shaped(dir / "concepts_visual.mmt", C, C);
    s.audio.concepts.gamma = read_shaped(dir / "concepts_audio.mmt", C, C);
    s.visual.last_assignment.perm = binding.at("visual").get<std::vector<int>>();
    s.audio.last_assignment.perm = binding.at("audio").get<std::vector<int>>();
    for (const Assignment* a : {&s.visual.last_assignment, &s.audio.last_assignment}) {
      if (!a->perm.empty() && (a->size() != C || !a->is_bijection())) {
        throw CheckpointMismatch("binding.json does not hold valid assignments");
      }
    }
    s.epoch = meta.at("epoch").get<int>();
    s.step = meta.at("step").get<std::uint64_t>();
    s.skipped = meta.at("skipped").get<std::uint64_t>();
    if (C != ck.config.data.vocab_size || hv != ck.config.train.hidden_visual || ha != ck.config.train.hidden_audio) {
      throw CheckpointMismatch("checkpoint dims disagree with its config");
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointMismatch(std::string("malformed checkpoint metadata: ") + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointMismatch(std::string("checkpoint config: ") + e.what());
  }
  return ck;
}

void check_compatible(const TrainerState& state, const DataConfig& data)
{
  if (state.visual.concepts.concepts() != data.vocab_size) {
    throw CheckpointMismatch("checkpoint has " + std::to_string(state.visual.concepts.concepts()) +
                             " concepts, dataset has " + std::to_string(data.vocab_size));
  }
  if (state.visual.params.input_size() != data.glyph_height || state.audio.params.input_size() != data.audio_dim) {
    throw CheckpointMismatch("checkpoint input sizes do not match the dataset features");
  }
}

} // namespace mmassoc

#include "doctest.h"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mmassoc/align.hpp"
#include "mmassoc/checkpoint.hpp"
#include "mmassoc/fusion.hpp"
#include "mmassoc/tensor_io.hpp"
#include "mmassoc/trainer.hpp"
#include "test_util.hpp"

using namespace mmassoc;

namespace {

ExperimentConfig tiny_config(TrainMode mode)
{
  ExperimentConfig c;
  c.mode = mode;
  c.seed = 5;
  c.epochs = 2;
  c.train.hidden_visual = 5;
  c.train.hidden_audio = 6;
  c.train.learning_rate = 1e-3;
  c.data.vocab_size = 4;
  c.data.base_len = 3;
  c.data.max_drop = 1;
  c.data.n_train = 12;
  c.data.n_test = 6;
  c.data.seed = 9;
  c.eval.resamples = 2;
  c.eval.samples = 4;
  c.eval.calibration = 5;
  return c;
}

std::vector<MultimodalSample> make_samples(const DataConfig& d, Split split, std::size_t n)
{
  const ConceptPrototypes protos = ConceptPrototypes::generate(d);
  std::vector<MultimodalSample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(generate_sample(d, protos, split, i));
  return out;
}

bool same_params(const LstmParams& a, const LstmParams& b)
{
  bool same = true;
  for_each_tensor([&same](const auto& x, const auto& y) { same = same && x == y; }, a, b);
  return same;
}

bool same_state(const TrainerState& a, const TrainerState& b)
{
  return same_params(a.visual.params, b.visual.params) && same_params(a.audio.params, b.audio.params) &&
         same_params(a.visual.velocity, b.visual.velocity) && same_params(a.audio.velocity, b.audio.velocity) &&
         a.visual.concepts.gamma == b.visual.concepts.gamma && a.audio.concepts.gamma == b.audio.concepts.gamma &&
         a.epoch == b.epoch && a.step == b.step && a.skipped == b.skipped;
}

} // namespace

TEST_CASE("init_state")
{
  const ExperimentConfig c = tiny_config(TrainMode::Pooled);
  const TrainerState s = init_state(c);
  CHECK(s.visual.params.input_size() == 32);
  CHECK(s.visual.params.hidden() == 5);
  CHECK(s.audio.params.input_size() == 16);
  CHECK(s.audio.params.hidden() == 6);
  CHECK(s.audio.params.outputs() == 5);
  CHECK(s.visual.concepts.gamma == Matrix::Ones(4, 4));
  CHECK(s.visual.velocity.w_out.isZero(0.0));
  CHECK(s.visual.last_assignment.perm.empty());
  CHECK(same_state(s, init_state(c)));
}

TEST_CASE("baseline step is the plain ctc update")
{
  const ExperimentConfig c = tiny_config(TrainMode::BaselineCtc);
  const auto samples = make_samples(c.data, Split::Train, 1);
  const MultimodalSample& s = samples[0];
  TrainerState state = init_state(c);
  TrainerState expected = state;

  for (auto [m, x, t] : {std::tuple{&expected.visual, &s.visual, &s.transcript_visual},
                         std::tuple{&expected.audio, &s.audio, &s.transcript_audio}}) {
    const LstmOutput out = lstm_forward(m->params, *x);
    const Matrix delta = ctc_delta(out.z, ctc_target(ctc_lattice(out.z, *t), out.z));
    apply_momentum_sgd(m->params, lstm_backward(m->params, out.cache, delta), m->velocity, c.train.learning_rate,
                       c.train.momentum);
  }
  const StepDiagnostics d = train_step(s, state, c);
  CHECK_FALSE(d.skipped);
  CHECK(same_params(state.visual.params, expected.visual.params));
  CHECK(same_params(state.audio.params, expected.audio.params));
  CHECK(state.visual.concepts.gamma == expected.visual.concepts.gamma);
  CHECK(state.visual.last_assignment == Assignment::identity(4));
  CHECK(state.step == 1);
}

TEST_CASE("baseline modalities train independently")
{
  const ExperimentConfig c = tiny_config(TrainMode::BaselineCtc);
  const auto samples = make_samples(c.data, Split::Train, 3);
  MultimodalSample a = samples[0];
  MultimodalSample b = samples[0];
  b.audio = samples[1].audio;
  b.transcript_audio = samples[1].transcript_audio;

  TrainerState sa = init_state(c), sb = init_state(c);
  train_step(a, sa, c);
  train_step(b, sb, c);
  CHECK(same_params(sa.visual.params, sb.visual.params));
  CHECK_FALSE(same_params(sa.audio.params, sb.audio.params));
}

TEST_CASE("original step matches the swapped-target pipeline")
{
  const ExperimentConfig c = tiny_config(TrainMode::Original);
  const auto samples = make_samples(c.data, Split::Train, 1);
  const MultimodalSample& s = samples[0];
  TrainerState state = init_state(c);
  TrainerState expected = state;

  const LstmOutput ov = lstm_forward(expected.visual.params, s.visual);
  const LstmOutput oa = lstm_forward(expected.audio.params, s.audio);
  const Assignment pv = row_column_elimination(concept_evidence(ov.z, expected.visual.concepts).z_hat);
  const Assignment pa = row_column_elimination(concept_evidence(oa.z, expected.audio.concepts).z_hat);
  const Matrix yv = ctc_target(ctc_lattice(ov.z, relabel_transcript(s.transcript_visual, pv)), ov.z);
  const Matrix ya = ctc_target(ctc_lattice(oa.z, relabel_transcript(s.transcript_audio, pa)), oa.z);
  const DtwResult r = dtw(ov.z, oa.z);
  const Matrix dv = ov.z - warp_targets(ya, r.path, ov.z.rows(), WarpDirection::SecondToFirst);
  const Matrix da = oa.z - warp_targets(yv, r.path, oa.z.rows(), WarpDirection::FirstToSecond);
  apply_momentum_sgd(expected.visual.params, lstm_backward(expected.visual.params, ov.cache, dv),
                     expected.visual.velocity, c.train.learning_rate, c.train.momentum);
  apply_momentum_sgd(expected.audio.params, lstm_backward(expected.audio.params, oa.cache, da),
                     expected.audio.velocity, c.train.learning_rate, c.train.momentum);
  update_concept_vectors(expected.visual.concepts, ov.z, pv, c.train.concept_learning_rate);
  update_concept_vectors(expected.audio.concepts, oa.z, pa, c.train.concept_learning_rate);

  const StepDiagnostics d = train_step(s, state, c);
  CHECK(same_params(state.visual.params, expected.visual.params));
  CHECK(same_params(state.audio.params, expected.audio.params));
  CHECK(state.visual.concepts.gamma == expected.visual.concepts.gamma);
  CHECK(state.audio.concepts.gamma == expected.audio.concepts.gamma);
  CHECK(state.visual.last_assignment == pv);
  CHECK(d.loss_visual == doctest::Approx(dv.squaredNorm() / static_cast<double>(dv.rows())));
}

TEST_CASE("zero learning rates leave the model unchanged")
{
  for (TrainMode mode : {TrainMode::BaselineCtc, TrainMode::Original, TrainMode::Pooled}) {
    ExperimentConfig c = tiny_config(mode);
    c.train.learning_rate = 0.0;
    c.train.concept_learning_rate = 0.0;
    const auto samples = make_samples(c.data, Split::Train, 4);
    TrainerState state = init_state(c);
    const TrainerState before = state;
    for (const auto& s : samples) train_step(s, state, c);
    CHECK(same_params(state.visual.params, before.visual.params));
    CHECK(same_params(state.audio.params, before.audio.params));
    CHECK(state.visual.concepts.gamma == before.visual.concepts.gamma);
    CHECK(state.audio.concepts.gamma == before.audio.concepts.gamma);
  }
}

TEST_CASE("pooled mask is all-true for identical full-vocabulary transcripts")
{
  const ExperimentConfig c = tiny_config(TrainMode::Pooled);
  TrainerState state = init_state(c);
  const auto samples = make_samples(c.data, Split::Train, 1);
  const Matrix z = lstm_forward(state.visual.params, samples[0].visual).z;
  const Assignment perm = row_column_elimination(concept_evidence(z, state.visual.concepts).z_hat);
  const Transcript all{3, 1, 0, 2};
  CHECK(shared_channel_mask(perm, all, all).all());
}

TEST_CASE("infeasible samples are skipped")
{
  const ExperimentConfig c = tiny_config(TrainMode::Pooled);
  auto samples = make_samples(c.data, Split::Train, 1);
  MultimodalSample s = samples[0];
  s.audio = s.audio.topRows(2).eval();
  s.transcript_audio = {0, 1, 2};
  TrainerState state = init_state(c);
  const TrainerState before = state;
  const StepDiagnostics d = train_step(s, state, c);
  CHECK(d.skipped);
  CHECK(state.skipped == 1);
  CHECK(state.step == 1);
  CHECK(same_params(state.visual.params, before.visual.params));
  const auto j = nlohmann::json::parse(d.to_json());
  CHECK(j.at("skipped").get<bool>());
}

TEST_CASE("training is deterministic and writes one diagnostics line per step")
{
  const ExperimentConfig c = tiny_config(TrainMode::Pooled);
  const auto samples = make_samples(c.data, Split::Train, 12);
  TrainerState a = init_state(c), b = init_state(c);
  std::ostringstream la, lb;
  train_epochs(samples, a, c, &la);
  train_epochs(samples, b, c, &lb);
  CHECK(same_state(a, b));
  CHECK(la.str() == lb.str());
  CHECK(a.epoch == 2);
  CHECK(a.step == 24);

  std::istringstream lines(la.str());
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"step", "mode", "loss_v", "loss_a", "assignment_churn_v", "assignment_churn_a"})
      CHECK(j.contains(key));
    CHECK(j.at("mode").get<std::string>() == "pooled");
    ++n;
  }
  CHECK(n == 24);
}

TEST_CASE("checkpoints round trip and resume bit-exactly")
{
  ExperimentConfig c = tiny_config(TrainMode::Original);
  const auto samples = make_samples(c.data, Split::Train, 12);
  TrainerState straight = init_state(c);
  train_epochs(samples, straight, c, nullptr);

  test::TempDir dir;
  TrainerState first = init_state(c);
  ExperimentConfig one = c;
  one.epochs = 1;
  train_epochs(samples, first, one, nullptr);
  save_checkpoint(dir.path() / "ckpt", first, c);

  LoadedCheckpoint loaded = load_checkpoint(dir.path() / "ckpt");
  CHECK(same_state(loaded.state, first));
  CHECK(loaded.state.visual.last_assignment == first.visual.last_assignment);
  CHECK(to_json(loaded.config) == to_json(c));
  train_epochs(samples, loaded.state, loaded.config, nullptr);
  CHECK(same_state(loaded.state, straight));

  CHECK(std::filesystem::exists(dir.path() / "ckpt/params_visual/fwd_W_xi.mmt"));
  CHECK(std::filesystem::exists(dir.path() / "ckpt/concepts_audio.mmt"));
  const auto binding = nlohmann::json::parse(test::read_text(dir.path() / "ckpt/binding.json"));
  CHECK(binding.at("visual").get<std::vector<int>>() == first.visual.last_assignment.perm);
}

TEST_CASE("checkpoint mismatches are reported")
{
  const ExperimentConfig c = tiny_config(TrainMode::Pooled);
  const TrainerState s = init_state(c);
  test::TempDir dir;
  const auto ckpt = dir.path() / "ckpt";
  save_checkpoint(ckpt, s, c);

  DataConfig other = c.data;
  other.vocab_size = 5;
  CHECK_THROWS_AS(check_compatible(s, other), CheckpointMismatch);
  CHECK_NOTHROW(check_compatible(s, c.data));

  CHECK_THROWS_AS(load_checkpoint(dir.path() / "absent"), CheckpointMismatch);

  write_tensor(ckpt / "params_audio/W_hz.mmt", Matrix::Zero(3, 3));
  CHECK_THROWS_AS(load_checkpoint(ckpt), CheckpointMismatch);
}

TEST_CASE("scoring")
{
  const ExperimentConfig c = tiny_config(TrainMode::Pooled);
  const auto samples = make_samples(c.data, Split::Test, 6);
  const EvalAssignments id{Assignment::identity(4), Assignment::identity(4)};

  std::vector<DecodedPair> perfect;
  for (const auto& s : samples) perfect.push_back({s.transcript_visual, s.transcript_audio});
  const EvalReport r = score_outputs(samples, perfect, id, c.eval, 1);
  CHECK(r.aacc.mean == 1.0);
  CHECK(r.aacc.std == 0.0);
  CHECK(r.ler_visual.mean == 0.0);
  CHECK(r.ler_audio.mean == 0.0);
  CHECK(r.binding_consistency == 1.0);
  CHECK(r.resamples == 2);
  std::size_t bucketed = 0;
  for (const auto& b : r.buckets) {
    CHECK(b.aacc == 1.0);
    bucketed += b.n_samples;
  }
  CHECK(bucketed == samples.size());

  std::vector<DecodedPair> silent(samples.size());
  const EvalReport e = score_outputs(samples, silent, id, c.eval, 1);
  CHECK(e.aacc.mean == 0.0);
  CHECK(e.ler_visual.mean == 1.0);

  CHECK_THROWS_AS(score_outputs(samples, std::vector<DecodedPair>(2), id, c.eval, 1), InvalidArgument);
}

TEST_CASE("baseline evaluation uses identity binding")
{
  const ExperimentConfig c = tiny_config(TrainMode::BaselineCtc);
  const auto samples = make_samples(c.data, Split::Test, 6);
  const TrainerState s = init_state(c);
  const EvalAssignments a = freeze_assignments(samples, s, TrainMode::BaselineCtc);
  CHECK(a.visual == Assignment::identity(4));
  CHECK(a.audio == Assignment::identity(4));
  const EvalAssignments p = freeze_assignments(samples, s, TrainMode::Pooled);
  CHECK(p.visual.is_bijection());
  CHECK_THROWS_AS(freeze_assignments({}, s, TrainMode::Pooled), InvalidArgument);
}

TEST_CASE("dtw dump")
{
  const ExperimentConfig c = tiny_config(TrainMode::Pooled);
  const auto samples = make_samples(c.data, Split::Test, 1);
  const TrainerState s = init_state(c);
  test::TempDir dir;
  dump_dtw(samples[0], s, dir.path() / "s0");
  const std::string path_csv = test::read_text(dir.path() / "s0_path.csv");
  CHECK(path_csv.rfind("t_visual,t_audio\n0,0\n", 0) == 0);
  const std::string dist = test::read_text(dir.path() / "s0_dist.csv");
  CHECK(std::count(dist.begin(), dist.end(), '\n') == samples[0].visual.rows());
  CHECK(std::filesystem::exists(dir.path() / "s0_cost.csv"));
}

TEST_CASE("sweep output")
{
  ExperimentConfig c = tiny_config(TrainMode::Pooled);
  c.epochs = 1;
  c.data.n_train = 6;
  c.data.n_test = 4;
  test::TempDir dir;
  const auto rows = run_sweep(c, Scenario::AudioFull, {1, 2}, dir.path());
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].mode == TrainMode::Original);
  CHECK(rows[1].mode == TrainMode::Pooled);
  CHECK(rows[3].missing == 2);
  CHECK(std::filesystem::exists(dir.path() / "data_audio_full_2/manifest.jsonl"));

  const std::string csv = sweep_csv(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == kSweepHeader);
  int n = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
    ++n;
  }
  CHECK(n == 4);
  CHECK(csv.find("pooled,audio_full,2,") != std::string::npos);
  CHECK_THROWS_AS(run_sweep(c, Scenario::Both, {1}, dir.path()), ConfigError);
}

#include "doctest.h"

#include "mmassoc/config.hpp"
#include "mmassoc/error.hpp"

using namespace mmassoc;

TEST_CASE("experiment config round trip")
{
  ExperimentConfig c;
  c.mode = TrainMode::Original;
  c.seed = 99;
  c.data.scenario = Scenario::AudioFull;
  c.data.fixed_missing = 2;
  c.train.learning_rate = 3e-4;
  const ExperimentConfig back = experiment_config_from_json(to_json(c));
  CHECK(back.mode == TrainMode::Original);
  CHECK(back.seed == 99);
  CHECK(back.data.scenario == Scenario::AudioFull);
  CHECK(back.data.fixed_missing == 2);
  CHECK(back.train.learning_rate == 3e-4);
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("partial configs keep defaults")
{
  const ExperimentConfig c = experiment_config_from_json(R"({"epochs": 3, "data": {"vocab_size": 5}})");
  CHECK(c.epochs == 3);
  CHECK(c.data.vocab_size == 5);
  CHECK(c.data.base_len == 10);
  CHECK(c.train.hidden_audio == 100);
  CHECK(c.mode == TrainMode::Pooled);
}

TEST_CASE("data config accepts a bare or nested object")
{
  CHECK(data_config_from_json(R"({"vocab_size": 7})").vocab_size == 7);
  CHECK(data_config_from_json(R"({"data": {"vocab_size": 8}, "epochs": 2})").vocab_size == 8);
}

TEST_CASE("bad configs name the offending field")
{
  CHECK_THROWS_WITH_AS(experiment_config_from_json(R"({"data": {"scenario": "sideways"}})"),
                       doctest::Contains("data.scenario"), ConfigError);
  CHECK_THROWS_WITH_AS(experiment_config_from_json(R"({"train": {"hiden_audio": 3}})"),
                       doctest::Contains("train.hiden_audio"), ConfigError);
  CHECK_THROWS_WITH_AS(experiment_config_from_json(R"({"mode": "fancy"})"), doctest::Contains("mode"), ConfigError);
  CHECK_THROWS_WITH_AS(experiment_config_from_json(R"({"epochs": "ten"})"), doctest::Contains("epochs"),
                       ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json("{not json"), ConfigError);
}

TEST_CASE("validation")
{
  DataConfig d;
  d.scenario = Scenario::VisualFull;
  d.fixed_missing = d.base_len;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d = DataConfig{};
  d.train_speakers = d.speakers;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d = DataConfig{};
  d.audio_len_min = 30;
  CHECK_THROWS_AS(d.validate(), ConfigError);

  TrainConfig t;
  t.learning_rate = -1.0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  ExperimentConfig e;
  e.epochs = -1;
  CHECK_THROWS_AS(e.validate(), ConfigError);
  CHECK_NOTHROW(ExperimentConfig{}.validate());
}

#include "doctest.h"

#include <cmath>

#include "mmassoc/ctc.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mmassoc;

namespace {

Matrix one_hot_rows(const std::vector<int>& classes, Index width)
{
  Matrix z = Matrix::Zero(static_cast<Index>(classes.size()), width);
  for (std::size_t t = 0; t < classes.size(); ++t) z(static_cast<Index>(t), classes[t]) = 1.0;
  return z;
}

} // namespace

TEST_CASE("extended labeling and feasibility")
{
  CHECK(extend_labels({0, 1}, 3) == std::vector<int>{3, 0, 3, 1, 3});
  CHECK(extend_labels({}, 2) == std::vector<int>{2});
  CHECK(min_frames({0, 1, 2}) == 3);
  CHECK(min_frames({0, 0, 1, 1}) == 6);
  CHECK(min_frames({}) == 0);
}

TEST_CASE("single frame admits only the label")
{
  Matrix z(1, 3);
  z << 0.2, 0.5, 0.3;
  const CtcLattice lat = ctc_lattice(z, {1});
  CHECK(lat.log_prob == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  const Matrix y = ctc_target(lat, z);
  CHECK(y(0, 0) == 0.0);
  CHECK(y(0, 1) == doctest::Approx(1.0));
  CHECK(y(0, 2) == 0.0);
}

TEST_CASE("two uniform frames")
{
  const Matrix z = Matrix::Constant(2, 2, 0.5);
  const CtcLattice lat = ctc_lattice(z, {0});
  CHECK(std::abs(lat.log_prob - std::log(0.75)) < 1e-14);
  const Matrix y = ctc_target(lat, z);
  for (Index t = 0; t < 2; ++t) {
    CHECK(y(t, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(y(t, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("lattice and targets match exhaustive path enumeration")
{
  Rng rng(17);
  int checked = 0;
  while (checked < 100) {
    const int C = rng.between(1, 3);
    const int k = rng.between(1, 3);
    const int T = rng.between(1, 8);
    Transcript labels;
    for (int i = 0; i < k; ++i) labels.push_back(rng.between(0, C - 1));
    const Matrix z = test::random_distribution(rng, T, C + 1);
    if (T < min_frames(labels)) {
      CHECK_THROWS_AS(ctc_lattice(z, labels), InfeasibleSequence);
      continue;
    }
    ++checked;
    const oracle::PathSum brute = oracle::ctc_paths(z, labels);
    const CtcLattice lat = ctc_lattice(z, labels);
    CHECK(std::abs(lat.log_prob - std::log(brute.prob)) <= 1e-10);

    const Matrix y = ctc_target(lat, z);
    const Matrix expected = brute.occupancy / brute.prob;
    CHECK((y - expected).cwiseAbs().maxCoeff() <= 1e-10);
    for (Index t = 0; t < T; ++t) CHECK(std::abs(y.row(t).sum() - 1.0) <= 1e-10);
  }
}

TEST_CASE("forward-backward consistency at every frame")
{
  Rng rng(18);
  for (int trial = 0; trial < 50; ++trial) {
    const int C = rng.between(2, 6);
    const int T = rng.between(10, 60);
    Transcript labels;
    const int k = rng.between(1, 6);
    for (int i = 0; i < k; ++i) labels.push_back(rng.between(0, C - 1));
    const Matrix z = test::random_distribution(rng, T, C + 1);
    const CtcLattice lat = ctc_lattice(z, labels);
    for (Index t = 0; t < T; ++t) {
      Vector terms(static_cast<Index>(lat.labeling.size()));
      for (Index u = 0; u < terms.size(); ++u)
        terms(u) = lat.log_fw(t, u) + lat.log_bw(t, u) - std::log(z(t, lat.labeling[u]));
      CHECK(std::abs(logsumexp(terms) - lat.log_prob) <= 1e-8);
    }
  }
}

TEST_CASE("infeasible sequences")
{
  const Matrix z = Matrix::Constant(2, 3, 1.0 / 3.0);
  CHECK_THROWS_WITH_AS(ctc_lattice(z, {0, 0}), "sequence too short", InfeasibleSequence);
  CHECK_THROWS_AS(ctc_lattice(z, {0, 1, 0}), InfeasibleSequence);
  CHECK_NOTHROW(ctc_lattice(Matrix::Constant(3, 3, 1.0 / 3.0), {0, 0}));
}

TEST_CASE("delta")
{
  Rng rng(19);
  const Matrix z = test::random_distribution(rng, 5, 4);
  CHECK(ctc_delta(z, z).isZero(0.0));

  const Matrix uniform = Matrix::Constant(2, 4, 0.25);
  const Matrix onehot = one_hot_rows({1, 3}, 4);
  const Matrix d = ctc_delta(uniform, onehot);
  CHECK(d == Matrix(uniform - onehot));

  const Matrix y = test::random_distribution(rng, 5, 4);
  const Matrix dz = ctc_delta(z, y);
  for (Index t = 0; t < dz.rows(); ++t) CHECK(std::abs(dz.row(t).sum()) <= 1e-10);
  CHECK_THROWS_AS(ctc_delta(z, uniform), InvalidArgument);
}

TEST_CASE("best path decoding")
{
  // a=0, c=1, blank=2
  CHECK(best_path_decode(one_hot_rows({2, 0, 0, 2, 1}, 3)) == Transcript{0, 1});
  CHECK(best_path_decode(one_hot_rows({2, 2, 2}, 3)).empty());
  CHECK(best_path_decode(one_hot_rows({0, 2, 0}, 3)) == Transcript{0, 0});

  Matrix tie(1, 3);
  tie << 0.4, 0.4, 0.2;
  CHECK(best_path_decode(tie) == Transcript{0});
}

TEST_CASE("decoding a canonical path is idempotent")
{
  Rng rng(20);
  for (int trial = 0; trial < 200; ++trial) {
    const int C = rng.between(1, 5);
    Transcript labels;
    const int k = rng.between(0, 8);
    for (int i = 0; i < k; ++i) labels.push_back(rng.between(0, C - 1));
    std::vector<int> path;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i > 0 && labels[i] == labels[i - 1]) path.push_back(C);
      path.push_back(labels[i]);
    }
    if (path.empty()) path.push_back(C);
    const Transcript once = best_path_decode(one_hot_rows(path, C + 1));
    CHECK(once == labels);
  }
}

#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "mmassoc/numerics.hpp"
#include "mmassoc/rng.hpp"
#include "mmassoc/tensor_io.hpp"
#include "test_util.hpp"

using namespace mmassoc;

TEST_CASE("softmax_rows known rows")
{
  Matrix m(3, 3);
  m << 0, 0, 0, //
      0, std::log(2.0), 0, //
      7, 7 + std::log(2.0), 7;
  Matrix z = softmax_rows(m.leftCols(2));
  CHECK(z(0, 0) == doctest::Approx(0.5));
  CHECK(z(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(z(1, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(z(2, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  Matrix uniform = softmax_rows(Matrix::Zero(1, 3));
  for (Index c = 0; c < 3; ++c) CHECK(uniform(0, c) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("softmax_rows rows sum to one on random logits")
{
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m = test::random_matrix(rng, 8, 6, -50.0, 50.0);
    Matrix z = softmax_rows(m);
    for (Index r = 0; r < z.rows(); ++r) {
      CHECK(std::abs(z.row(r).sum() - 1.0) <= 1e-12);
      CHECK((z.row(r).array() >= 0.0).all());
    }
  }
}

TEST_CASE("softmax_rows rejects non-finite input")
{
  Matrix m = Matrix::Zero(1, 2);
  m(0, 1) = std::nan("");
  CHECK_THROWS_AS(softmax_rows(m), InvalidArgument);
}

TEST_CASE("logsumexp")
{
  CHECK(logsumexp(Vector::Zero(2)) == doctest::Approx(std::log(2.0)));
  CHECK(logsumexp(Vector::Constant(2, -1000.0)) == doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-15));
  CHECK(logsumexp(Vector::Constant(1, 5.0)) == 5.0);
  CHECK_THROWS_AS(logsumexp(Vector(0)), InvalidArgument);

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Vector v = test::random_matrix(rng, 5, 1, -3.0, 3.0).col(0);
    const double direct = std::log(v.array().exp().sum());
    CHECK(std::abs(logsumexp(v) - direct) <= 1e-12 * std::abs(direct) + 1e-15);
    const double c = rng.uniform(-100.0, 100.0);
    CHECK(std::abs(logsumexp((v.array() + c).matrix()) - (logsumexp(v) + c)) <= 1e-12 * (1.0 + std::abs(c)));
  }
}

TEST_CASE("rng streams are reproducible and sub-seeded")
{
  Rng a(42), b(42);
  bool same = true;
  for (int i = 0; i < 10000; ++i) same = same && a.next_u64() == b.next_u64();
  CHECK(same);

  Rng v = Rng::derive(42, "init-visual"), w = Rng::derive(42, "init-audio");
  CHECK(v.next_u64() != w.next_u64());
  CHECK(Rng::derive(42, "x", 1).next_u64() != Rng::derive(42, "x", 2).next_u64());

  Rng r(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const int k = r.between(-2, 3);
    CHECK((k >= -2 && k <= 3));
  }
}

TEST_CASE("splitmix64 reference values")
{
  // First outputs for seed 0 of the published SplitMix64 reference.
  Rng r(0);
  CHECK(r.next_u64() == 0xE220A8397B1DCDAFULL);
  CHECK(r.next_u64() == 0x6E789E6AA1B965F4ULL);
}

TEST_CASE("tensor round trip")
{
  test::TempDir dir;
  Matrix m(2, 3);
  m << 1.5, -2.0, 3.25, 1e-300, -0.0, 7.0;
  write_tensor(dir.path() / "a.mmt", m);
  Matrix back = read_tensor(dir.path() / "a.mmt");
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  CHECK(std::memcmp(back.data(), m.data(), sizeof(double) * 6) == 0);
  CHECK(std::filesystem::file_size(dir.path() / "a.mmt") == 16 + 6 * 8);

  write_tensor(dir.path() / "z.mmt", Matrix::Zero(1, 1));
  CHECK(read_tensor(dir.path() / "z.mmt")(0, 0) == 0.0);

  Rng rng(5);
  Matrix big = test::random_matrix(rng, 1000, 1000, -1e6, 1e6);
  write_tensor(dir.path() / "big.mmt", big);
  Matrix big_back = read_tensor(dir.path() / "big.mmt");
  CHECK(std::memcmp(big_back.data(), big.data(), sizeof(double) * big.size()) == 0);
}

TEST_CASE("tensor header layout")
{
  test::TempDir dir;
  Matrix m = Matrix::Constant(3, 2, 1.0);
  write_tensor(dir.path() / "h.mmt", m);
  std::ifstream in(dir.path() / "h.mmt", std::ios::binary);
  unsigned char header[16];
  in.read(reinterpret_cast<char*>(header), 16);
  CHECK(std::memcmp(header, "MMT1", 4) == 0);
  CHECK(header[4] == 2);
  CHECK(header[8] == 3);
  CHECK(header[12] == 2);
}

TEST_CASE("tensor read errors are distinct")
{
  test::TempDir dir;
  write_tensor(dir.path() / "ok.mmt", Matrix::Ones(2, 2));
  auto bytes = test::read_bytes(dir.path() / "ok.mmt");

  auto code_of = [&](const std::vector<char>& data) {
    test::write_bytes(dir.path() / "bad.mmt", data);
    try {
      read_tensor(dir.path() / "bad.mmt");
    } catch (const TensorError& e) {
      return e.code();
    }
    FAIL("expected TensorError");
    return TensorErrorCode::Io;
  };

  auto magic = bytes;
  magic[0] = 'X';
  CHECK(code_of(magic) == TensorErrorCode::BadMagic);
  try {
    read_tensor(dir.path() / "bad.mmt");
  } catch (const TensorError& e) {
    CHECK(std::string(e.what()).find("bad magic") != std::string::npos);
  }

  auto rank = bytes;
  rank[4] = 3;
  CHECK(code_of(rank) == TensorErrorCode::BadRank);

  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  CHECK(code_of(truncated) == TensorErrorCode::Truncated);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK(code_of(trailing) == TensorErrorCode::SizeMismatch);

  CHECK_THROWS_AS(read_tensor(dir.path() / "missing.mmt"), TensorError);
}

#include "mmassoc/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace mmassoc {
namespace {

static_assert(std::endian::native == std::endian::little, "MMT1 I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'M', 'M', 'T', '1'};
constexpr std::size_t kHeaderBytes = 16;

void put_u32(char* dst, std::uint32_t v) { std::memcpy(dst, &v, 4); }
std::uint32_t get_u32(const char* src)
{
  std::uint32_t v;
  std::memcpy(&v, src, 4);
  return v;
}

} // namespace

void write_tensor(const std::filesystem::path& path, const Matrix& m)
{
  if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) {
    throw TensorError(TensorErrorCode::SizeMismatch, "tensor too large for MMT1: " + path.string());
  }
  std::array<char, kHeaderBytes> header{};
  std::memcpy(header.data(), kMagic.data(), 4);
  put_u32(header.data() + 4, 2);
  put_u32(header.data() + 8, static_cast<std::uint32_t>(m.rows()));
  put_u32(header.data() + 12, static_cast<std::uint32_t>(m.cols()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TensorError(TensorErrorCode::Io, "cannot open for writing: " + path.string());
  out.write(header.data(), header.size());
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!out) throw TensorError(TensorErrorCode::Io, "write failed: " + path.string());
}

Matrix read_tensor(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TensorError(TensorErrorCode::Io, "cannot open for reading: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic.data(), 4) != 0) {
    throw TensorError(TensorErrorCode::BadMagic, "bad magic: " + path.string());
  }
  if (bytes.size() < kHeaderBytes) throw TensorError(TensorErrorCode::Truncated, "truncated header: " + path.string());
  if (get_u32(bytes.data() + 4) != 2) throw TensorError(TensorErrorCode::BadRank, "rank must be 2: " + path.string());

  const std::uint64_t rows = get_u32(bytes.data() + 8);
  const std::uint64_t cols = get_u32(bytes.data() + 12);
  const std::uint64_t payload = rows * cols * sizeof(double);
  const std::uint64_t available = bytes.size() - kHeaderBytes;
  if (available < payload) throw TensorError(TensorErrorCode::Truncated, "truncated payload: " + path.string());
  if (available > payload) throw TensorError(TensorErrorCode::SizeMismatch, "trailing bytes after payload: " + path.string());

  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  if (payload > 0) std::memcpy(m.data(), bytes.data() + kHeaderBytes, payload);
  return m;
}

} // namespace mmassoc

#pragma once

#include <filesystem>

#include "mmassoc/numerics.hpp"

namespace mmassoc {

// MMT1 layout: "MMT1", u32 rank (= 2), u32 rows, u32 cols, rows*cols f64,
// all little-endian, row-major, no padding.

enum class TensorErrorCode { Io, BadMagic, BadRank, SizeMismatch, Truncated };

class TensorError : public Error
{
public:
  TensorError(TensorErrorCode code, const std::string& msg) : Error(msg), code_(code) {}
  TensorErrorCode code() const { return code_; }

private:
  TensorErrorCode code_;
};

void write_tensor(const std::filesystem::path& path, const Matrix& m);
Matrix read_tensor(const std::filesystem::path& path);

} // namespace mmassoc

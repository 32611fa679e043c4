#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "framealign/objectives.hpp"

namespace framealign {

// Dense row-major float64 tensor as stored on disk.
//
// Binary layout (little endian):
//   char[8]   magic "FATENSOR"
//   uint32    rank
//   uint64    dims[rank]
//   uint32    element type, 1 = float64
//   float64   payload[prod(dims)], row-major
//
// CSV fallback: one row per line, comma separated. An optional first line
// "# shape=d0,d1,..." declares the full shape; without it the file is a
// rank-2 matrix.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  std::size_t numel() const;
};

inline constexpr char kTensorMagic[8] = {'F', 'A', 'T', 'E', 'N', 'S', 'O', 'R'};
inline constexpr std::uint32_t kTensorFloat64 = 1;

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);
void write_tensor_csv(const std::filesystem::path& path, const Tensor& tensor);

Tensor from_matrix(const Matrix& m);
Matrix to_matrix(const Tensor& t);
// Splits a rank-3 tensor (B x R x C) into B matrices of R x C.
std::vector<Matrix> to_matrices(const Tensor& t);
Tensor stack(const std::vector<Matrix>& ms);

}  // namespace framealign

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nnrules/tensor.hpp"

namespace nnrules {

// NPY v1.0, little-endian, C order. Supported dtypes: <f4 <f8 <i4 <i8,
// plus |b1 which widens to i64 on read.
Tensor read_npy(const std::string& path);
Tensor read_npy_bytes(const std::vector<std::uint8_t>& bytes);

void write_npy(const Tensor& t, const std::string& path);
std::vector<std::uint8_t> write_npy_bytes(const Tensor& t);

}  // namespace nnrules

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nnrules/errors.hpp"

namespace nnrules {

enum class Dtype { f32, f64, i32, i64 };

const char* dtype_name(Dtype dt);
bool dtype_is_float(Dtype dt);
std::size_t dtype_size(Dtype dt);

// Dense row-major array. Values are held widened (f32 -> double, i32 -> int64)
// which is lossless both ways, so files round-trip bit-exactly.
class Tensor {
public:
    Tensor() = default;  // empty f64 tensor of shape [0]

    static Tensor from_f64(std::vector<std::size_t> shape, std::vector<double> values,
                           Dtype dtype = Dtype::f64);
    static Tensor from_i64(std::vector<std::size_t> shape, std::vector<std::int64_t> values,
                           Dtype dtype = Dtype::i64);
    static Tensor zeros(Dtype dtype, std::vector<std::size_t> shape);

    static std::size_t shape_numel(const std::vector<std::size_t>& shape);

    Dtype dtype() const { return dtype_; }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t numel() const { return Tensor::shape_numel(shape_); }
    bool is_float() const { return dtype_is_float(dtype_); }

    // 2-D helpers; raise ShapeMismatch when the tensor is not a matrix/vector.
    std::size_t rows() const;
    std::size_t cols() const;

    double f64_at(std::size_t flat_index) const;
    std::int64_t i64_at(std::size_t flat_index) const;

    std::vector<double> as_f64() const;
    // Integer view of the buffer; float entries must be exactly integral.
    std::vector<std::int64_t> as_i64() const;

    // Row r of a 2-D tensor as doubles.
    std::vector<double> row_f64(std::size_t r) const;

    const std::vector<double>& f64_data() const { return fdata_; }
    const std::vector<std::int64_t>& i64_data() const { return idata_; }

    // Bitwise element equality (distinguishes -0.0 from 0.0), plus dtype and shape.
    bool bit_equal(const Tensor& other) const;

private:
    Dtype dtype_ = Dtype::f64;
    std::vector<std::size_t> shape_{0};
    std::vector<double> fdata_;
    std::vector<std::int64_t> idata_;
};

struct Dataset {
    Tensor inputs;                 // N x I
    std::optional<Tensor> labels;  // N

    std::size_t size() const { return inputs.rows(); }
};

Dataset make_dataset(Tensor inputs, std::optional<Tensor> labels);

}  // namespace nnrules

#include "nnrules/tensor.hpp"

#include <cmath>
#include <cstring>

namespace nnrules {

const char* dtype_name(Dtype dt) {
    switch (dt) {
        case Dtype::f32: return "f32";
        case Dtype::f64: return "f64";
        case Dtype::i32: return "i32";
        case Dtype::i64: return "i64";
    }
    return "?";
}

bool dtype_is_float(Dtype dt) { return dt == Dtype::f32 || dt == Dtype::f64; }

std::size_t dtype_size(Dtype dt) {
    switch (dt) {
        case Dtype::f32: return 4;
        case Dtype::f64: return 8;
        case Dtype::i32: return 4;
        case Dtype::i64: return 8;
    }
    return 0;
}

std::size_t Tensor::shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

Tensor Tensor::from_f64(std::vector<std::size_t> shape, std::vector<double> values, Dtype dtype) {
    if (!dtype_is_float(dtype))
        raise(ErrorKind::ShapeMismatch, "from_f64 requires a float dtype");
    if (values.size() != shape_numel(shape))
        raise(ErrorKind::ShapeMismatch, "data length does not match shape product");
    Tensor t;
    t.dtype_ = dtype;
    t.shape_ = std::move(shape);
    t.fdata_ = std::move(values);
    return t;
}

Tensor Tensor::from_i64(std::vector<std::size_t> shape, std::vector<std::int64_t> values,
                        Dtype dtype) {
    if (dtype_is_float(dtype))
        raise(ErrorKind::ShapeMismatch, "from_i64 requires an integer dtype");
    if (values.size() != shape_numel(shape))
        raise(ErrorKind::ShapeMismatch, "data length does not match shape product");
    Tensor t;
    t.dtype_ = dtype;
    t.shape_ = std::move(shape);
    t.idata_ = std::move(values);
    return t;
}

Tensor Tensor::zeros(Dtype dtype, std::vector<std::size_t> shape) {
    std::size_t n = shape_numel(shape);
    if (dtype_is_float(dtype)) return from_f64(std::move(shape), std::vector<double>(n, 0.0), dtype);
    return from_i64(std::move(shape), std::vector<std::int64_t>(n, 0), dtype);
}

std::size_t Tensor::rows() const {
    if (rank() == 2) return shape_[0];
    if (rank() == 1) return shape_[0];
    raise(ErrorKind::ShapeMismatch, "rows() needs a 1-D or 2-D tensor, got rank " +
                                        std::to_string(rank()));
}

std::size_t Tensor::cols() const {
    if (rank() == 2) return shape_[1];
    if (rank() == 1) return 1;
    raise(ErrorKind::ShapeMismatch, "cols() needs a 1-D or 2-D tensor");
}

double Tensor::f64_at(std::size_t i) const {
    return is_float() ? fdata_[i] : static_cast<double>(idata_[i]);
}

std::int64_t Tensor::i64_at(std::size_t i) const {
    if (!is_float()) return idata_[i];
    double v = fdata_[i];
    double r = std::nearbyint(v);
    if (!(std::isfinite(v)) || r != v)
        raise(ErrorKind::ShapeMismatch, "non-integral float value where integer expected");
    return static_cast<std::int64_t>(r);
}

std::vector<double> Tensor::as_f64() const {
    std::vector<double> out(numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f64_at(i);
    return out;
}

std::vector<std::int64_t> Tensor::as_i64() const {
    std::vector<std::int64_t> out(numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i64_at(i);
    return out;
}

std::vector<double> Tensor::row_f64(std::size_t r) const {
    if (rank() != 2) raise(ErrorKind::ShapeMismatch, "row_f64 needs a 2-D tensor");
    std::size_t c = shape_[1];
    std::vector<double> out(c);
    for (std::size_t j = 0; j < c; ++j) out[j] = f64_at(r * c + j);
    return out;
}

bool Tensor::bit_equal(const Tensor& other) const {
    if (dtype_ != other.dtype_ || shape_ != other.shape_) return false;
    if (is_float()) {
        if (fdata_.size() != other.fdata_.size()) return false;
        return std::memcmp(fdata_.data(), other.fdata_.data(), fdata_.size() * sizeof(double)) == 0;
    }
    return idata_ == other.idata_;
}

Dataset make_dataset(Tensor inputs, std::optional<Tensor> labels) {
    if (inputs.rank() != 2)
        raise(ErrorKind::ShapeMismatch, "dataset inputs must be 2-D (rows x features)");
    if (labels) {
        if (labels->rank() != 1)
            raise(ErrorKind::ShapeMismatch, "dataset labels must be 1-D");
        if (labels->shape()[0] != inputs.shape()[0])
            raise(ErrorKind::ShapeMismatch,
                  "label count " + std::to_string(labels->shape()[0]) +
                      " does not match input row count " + std::to_string(inputs.shape()[0]));
    }
    return Dataset{std::move(inputs), std::move(labels)};
}

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorKind::TruncatedFile: return "TruncatedFile";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::UnknownActivation: return "UnknownActivation";
        case ErrorKind::DuplicateLayerName: return "DuplicateLayerName";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NonFiniteInput: return "NonFiniteInput";
        case ErrorKind::UnknownLayer: return "UnknownLayer";
        case ErrorKind::MissingLabels: return "MissingLabels";
        case ErrorKind::SentinelCollision: return "SentinelCollision";
        case ErrorKind::EmptyDataset: return "EmptyDataset";
        case ErrorKind::NoRulesForLabel: return "NoRulesForLabel";
        case ErrorKind::SchemaViolation: return "SchemaViolation";
        case ErrorKind::UnknownOperator: return "UnknownOperator";
        case ErrorKind::EmptySupport: return "EmptySupport";
        case ErrorKind::InconsistentBox: return "InconsistentBox";
        case ErrorKind::AnchorViolatesProperty: return "AnchorViolatesProperty";
        case ErrorKind::RuleUnsatisfiedAtInput: return "RuleUnsatisfiedAtInput";
        case ErrorKind::LayerMismatch: return "LayerMismatch";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Error";
}

}  // namespace nnrules

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nnrules/tensor.hpp"

namespace nnrules {

enum class Activation { relu, linear };

struct DenseLayer {
    std::string name;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> weights;  // out_dim x in_dim, row-major
    std::vector<double> bias;     // out_dim
    Activation activation = Activation::linear;

    double weight(std::size_t out, std::size_t in) const { return weights[out * in_dim + in]; }
};

// Where to read values from: a layer's output after its activation function,
// or the pre-activation affine value.
struct LayerTap {
    std::string layer_name;
    bool post_activation = true;

    bool operator==(const LayerTap&) const = default;
};

// Renders as "name" (post-activation) or "name:pre".
std::string tap_to_string(const LayerTap& tap);
LayerTap tap_from_string(const std::string& text);

enum class PredictMode { argmax, argmin };

class Network {
public:
    Network(std::size_t input_dim, std::vector<DenseLayer> layers);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return layers_.back().out_dim; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    std::size_t layer_index(const std::string& name) const;  // UnknownLayer if absent
    std::size_t tap_dim(const LayerTap& tap) const;

    std::vector<double> forward(const std::vector<double>& x) const;
    std::vector<double> forward_to_layer(const std::vector<double>& x, const LayerTap& tap) const;

    // Network whose output equals forward_to_layer at `tap`, layer for layer.
    Network truncate(const LayerTap& tap) const;

    std::size_t predict(const std::vector<double>& x, PredictMode mode) const;

private:
    std::size_t input_dim_;
    std::vector<DenseLayer> layers_;
};

// Evaluates one layer; accumulation order is fixed (left-to-right dot product)
// so repeated runs are bit-identical.
std::vector<double> layer_affine(const DenseLayer& layer, const std::vector<double>& in);
void apply_activation(Activation act, std::vector<double>& v);

std::size_t argmax_index(const std::vector<double>& v);
std::size_t argmin_index(const std::vector<double>& v);

// Model JSON: {"input_dim": I, "layers": [{"name", "weights", "bias", "activation"}]}.
Network load_model(const std::string& path);
Network parse_model_json(const std::string& json_text);
std::string model_to_json(const Network& net);

}  // namespace nnrules

#include "nnrules/network.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace nnrules {

std::string tap_to_string(const LayerTap& tap) {
    return tap.post_activation ? tap.layer_name : tap.layer_name + ":pre";
}

LayerTap tap_from_string(const std::string& text) {
    const std::string suffix = ":pre";
    if (text.size() > suffix.size() &&
        text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0)
        return LayerTap{text.substr(0, text.size() - suffix.size()), false};
    return LayerTap{text, true};
}

Network::Network(std::size_t input_dim, std::vector<DenseLayer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
    if (layers_.empty()) raise(ErrorKind::ShapeMismatch, "network needs at least one layer");
    std::set<std::string> names;
    std::size_t expect = input_dim_;
    for (const DenseLayer& l : layers_) {
        if (!names.insert(l.name).second)
            raise(ErrorKind::DuplicateLayerName, "layer name " + l.name + " repeats");
        if (l.in_dim != expect)
            raise(ErrorKind::ShapeMismatch, "layer " + l.name + " expects " +
                                                std::to_string(l.in_dim) + " inputs but gets " +
                                                std::to_string(expect));
        if (l.weights.size() != l.in_dim * l.out_dim || l.bias.size() != l.out_dim)
            raise(ErrorKind::ShapeMismatch, "layer " + l.name + " weight/bias size mismatch");
        expect = l.out_dim;
    }
}

std::size_t Network::layer_index(const std::string& name) const {
    for (std::size_t i = 0; i < layers_.size(); ++i)
        if (layers_[i].name == name) return i;
    raise(ErrorKind::UnknownLayer, "no layer named " + name);
}

std::size_t Network::tap_dim(const LayerTap& tap) const {
    return layers_[layer_index(tap.layer_name)].out_dim;
}

std::vector<double> layer_affine(const DenseLayer& layer, const std::vector<double>& in) {
    std::vector<double> out(layer.out_dim);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
        double acc = layer.bias[o];
        const double* w = layer.weights.data() + o * layer.in_dim;
        for (std::size_t i = 0; i < layer.in_dim; ++i) acc += w[i] * in[i];
        out[o] = acc;
    }
    return out;
}

void apply_activation(Activation act, std::vector<double>& v) {
    if (act == Activation::relu)
        for (double& x : v)
            if (x < 0.0) x = 0.0;
}

std::vector<double> Network::forward(const std::vector<double>& x) const {
    if (x.size() != input_dim_)
        raise(ErrorKind::DimensionMismatch, "input length " + std::to_string(x.size()) +
                                                " != input_dim " + std::to_string(input_dim_));
    for (double v : x)
        if (!std::isfinite(v)) raise(ErrorKind::NonFiniteInput, "non-finite input value");
    std::vector<double> cur = x;
    for (const DenseLayer& l : layers_) {
        cur = layer_affine(l, cur);
        apply_activation(l.activation, cur);
    }
    return cur;
}

std::vector<double> Network::forward_to_layer(const std::vector<double>& x,
                                              const LayerTap& tap) const {
    std::size_t stop = layer_index(tap.layer_name);
    if (x.size() != input_dim_)
        raise(ErrorKind::DimensionMismatch, "input length does not match input_dim");
    std::vector<double> cur = x;
    for (std::size_t i = 0; i <= stop; ++i) {
        cur = layer_affine(layers_[i], cur);
        if (i < stop || tap.post_activation) apply_activation(layers_[i].activation, cur);
    }
    return cur;
}

Network Network::truncate(const LayerTap& tap) const {
    std::size_t stop = layer_index(tap.layer_name);
    std::vector<DenseLayer> kept(layers_.begin(), layers_.begin() + stop + 1);
    if (!tap.post_activation) kept.back().activation = Activation::linear;
    return Network(input_dim_, std::move(kept));
}

std::size_t argmax_index(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

std::size_t argmin_index(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[best]) best = i;
    return best;
}

std::size_t Network::predict(const std::vector<double>& x, PredictMode mode) const {
    if (output_dim() < 2)
        raise(ErrorKind::DimensionMismatch, "predict needs output_dim >= 2");
    std::vector<double> logits = forward(x);
    return mode == PredictMode::argmax ? argmax_index(logits) : argmin_index(logits);
}

namespace {

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "linear") return Activation::linear;
    raise(ErrorKind::UnknownActivation, "activation " + s);
}

const char* activation_to_string(Activation a) {
    return a == Activation::relu ? "relu" : "linear";
}

}  // namespace

Network parse_model_json(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorKind::SchemaViolation, std::string("model JSON parse error: ") + e.what());
    }
    if (!doc.contains("input_dim") || !doc.contains("layers"))
        raise(ErrorKind::SchemaViolation, "model JSON needs input_dim and layers");
    try {
        std::size_t input_dim = doc["input_dim"].get<std::size_t>();
        std::vector<DenseLayer> layers;
        for (const auto& jl : doc["layers"]) {
            DenseLayer l;
            l.name = jl.at("name").get<std::string>();
            l.activation = activation_from_string(jl.at("activation").get<std::string>());
            const auto& w = jl.at("weights");
            l.out_dim = w.size();
            if (l.out_dim == 0)
                raise(ErrorKind::ShapeMismatch, "layer " + l.name + " has no rows");
            l.in_dim = w[0].size();
            for (const auto& row : w) {
                if (row.size() != l.in_dim)
                    raise(ErrorKind::ShapeMismatch, "ragged weight rows in layer " + l.name);
                for (const auto& v : row) l.weights.push_back(v.get<double>());
            }
            for (const auto& v : jl.at("bias")) l.bias.push_back(v.get<double>());
            layers.push_back(std::move(l));
        }
        return Network(input_dim, std::move(layers));
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::SchemaViolation, std::string("model JSON: ") + e.what());
    }
}

Network load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) raise(ErrorKind::IoFailure, "cannot open model " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_model_json(ss.str());
}

std::string model_to_json(const Network& net) {
    nlohmann::ordered_json doc;
    doc["input_dim"] = net.input_dim();
    doc["layers"] = nlohmann::ordered_json::array();
    for (const DenseLayer& l : net.layers()) {
        nlohmann::ordered_json jl;
        jl["name"] = l.name;
        auto rows = nlohmann::ordered_json::array();
        for (std::size_t o = 0; o < l.out_dim; ++o) {
            auto row = nlohmann::ordered_json::array();
            for (std::size_t i = 0; i < l.in_dim; ++i) row.push_back(l.weight(o, i));
            rows.push_back(std::move(row));
        }
        jl["weights"] = std::move(rows);
        jl["bias"] = l.bias;
        jl["activation"] = activation_to_string(l.activation);
        doc["layers"].push_back(std::move(jl));
    }
    return doc.dump(2);
}

}  // namespace nnrules

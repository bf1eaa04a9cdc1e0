#include "nnrules/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace nnrules {

std::vector<LayerTap> select_taps(const Network& net, const ExtractionConfig& cfg) {
    if (cfg.selection == LayerSelection::explicit_tap) {
        if (cfg.taps.empty()) raise(ErrorKind::ConfigError, "no layer tap selected");
        for (const LayerTap& t : cfg.taps) net.layer_index(t.layer_name);  // validate
        return cfg.taps;
    }
    std::vector<LayerTap> taps;
    for (const DenseLayer& l : net.layers()) {
        if (l.name.rfind("dense", 0) != 0) continue;
        taps.push_back(LayerTap{l.name, false});
        if (cfg.selection == LayerSelection::dense_pre_and_post)
            taps.push_back(LayerTap{l.name, true});
    }
    if (taps.empty()) raise(ErrorKind::UnknownLayer, "no layer name starts with 'dense'");
    return taps;
}

namespace {

void binarize(std::vector<double>& v) {
    for (double& x : v) x = x > 0.0 ? 1.0 : 0.0;
}

}  // namespace

std::vector<ActivationMatrix> collect_activations_passthrough(const Dataset& data, bool acts) {
    ActivationMatrix m;
    m.layer = LayerTap{"input", true};
    m.n_rows = data.inputs.rows();
    m.n_cols = data.inputs.cols();
    m.values = data.inputs.as_f64();
    if (acts) binarize(m.values);
    return {std::move(m)};
}

std::vector<ActivationMatrix> collect_activations(const Network& net, const Dataset& data,
                                                  const ExtractionConfig& cfg) {
    if (cfg.inptype == 1) return collect_activations_passthrough(data, cfg.acts);

    std::vector<LayerTap> taps = select_taps(net, cfg);
    if (data.inputs.cols() != net.input_dim())
        raise(ErrorKind::DimensionMismatch, "dataset feature count does not match model input_dim");

    std::size_t n = data.inputs.rows();
    std::vector<ActivationMatrix> out;
    out.reserve(taps.size());
    for (const LayerTap& tap : taps) {
        ActivationMatrix m;
        m.layer = tap;
        m.n_rows = n;
        m.n_cols = net.tap_dim(tap);
        m.values.reserve(n * m.n_cols);
        out.push_back(std::move(m));
    }
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<double> x = data.inputs.row_f64(r);
        for (std::size_t t = 0; t < taps.size(); ++t) {
            std::vector<double> v = net.forward_to_layer(x, taps[t]);
            if (cfg.acts) binarize(v);
            out[t].values.insert(out[t].values.end(), v.begin(), v.end());
        }
    }
    return out;
}

LabelVector label_dataset(const Network& net, const Dataset& data, const PostCondition& pc) {
    if (pc.kind < 0 || pc.kind > 3)
        raise(ErrorKind::ConfigError, "post-condition type must be 0..3");
    std::size_t n = data.inputs.rows();
    LabelVector out;
    out.values.reserve(n);

    if (pc.kind == 3) {
        if (!data.labels) raise(ErrorKind::MissingLabels, "type 3 needs a labels dataset");
        out.values = data.labels->as_i64();
        return out;
    }

    std::vector<std::int64_t> truth;
    if (pc.kind == 1 || pc.kind == 2) {
        if (!data.labels)
            raise(ErrorKind::MissingLabels, "type " + std::to_string(pc.kind) +
                                                " needs ground-truth labels");
        truth = data.labels->as_i64();
    }
    if (pc.kind == 2) {
        for (std::int64_t y : truth)
            if (y == pc.sentinel)
                raise(ErrorKind::SentinelCollision,
                      "class id equals the mismatch sentinel " + std::to_string(pc.sentinel));
        if (static_cast<std::int64_t>(net.output_dim()) > pc.sentinel)
            raise(ErrorKind::SentinelCollision, "output_dim exceeds the mismatch sentinel");
    }

    for (std::size_t r = 0; r < n; ++r) {
        std::vector<double> x = data.inputs.row_f64(r);
        auto pred = static_cast<std::int64_t>(net.predict(x, PredictMode::argmax));
        switch (pc.kind) {
            case 0: out.values.push_back(pred); break;
            case 1: out.values.push_back(pred == truth[r] ? 1 : 0); break;
            case 2: out.values.push_back(pred == truth[r] ? pred : pc.sentinel); break;
        }
    }
    return out;
}

std::vector<double> sample_weights(const Network& net, const Dataset& data,
                                   const LabelVector& labels, const ExtractionConfig& cfg) {
    if (!cfg.balance && !cfg.use_confidence) return {};
    std::size_t n = labels.size();
    std::vector<double> w(n, 1.0);

    if (cfg.balance) {
        std::map<std::int64_t, std::size_t> counts;
        for (std::int64_t l : labels.values) ++counts[l];
        double k = static_cast<double>(counts.size());
        for (std::size_t i = 0; i < n; ++i)
            w[i] *= static_cast<double>(n) / (k * static_cast<double>(counts[labels.values[i]]));
    }
    if (cfg.use_confidence) {
        if (cfg.inptype == 1)
            raise(ErrorKind::ConfigError, "confidence weighting needs model inputs (inptype 0)");
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> logits = net.forward(data.inputs.row_f64(i));
            double mx = *std::max_element(logits.begin(), logits.end());
            double denom = 0.0;
            for (double v : logits) denom += std::exp(v - mx);
            w[i] *= 1.0 / denom;  // max softmax probability
        }
    }
    return w;
}

}  // namespace nnrules

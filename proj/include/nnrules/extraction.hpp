#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nnrules/network.hpp"
#include "nnrules/tensor.hpp"

namespace nnrules {

// Short-cuts for the output property evaluated per input:
//   0: the predicted class
//   1: 1 when prediction matches ground truth, else 0
//   2: the predicted class when it matches ground truth, else a sentinel
//   3: labels are supplied verbatim (pre-evaluated property results)
struct PostCondition {
    int kind = 0;
    std::int64_t sentinel = 1000;
};

enum class LayerSelection { explicit_tap, dense_pre, dense_pre_and_post };

struct ExtractionConfig {
    LayerSelection selection = LayerSelection::explicit_tap;
    std::vector<LayerTap> taps;     // used when selection == explicit_tap
    bool acts = false;              // binarize to strict-positivity indicators
    int inptype = 0;                // 1: inputs already are activation vectors
    bool balance = false;           // inverse class-frequency sample weights
    bool use_confidence = false;    // weight samples by max softmax probability
    std::uint64_t seed = 0;
};

struct ActivationMatrix {
    LayerTap layer;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;  // row-major; 0/1 when collected with acts

    std::vector<double> row(std::size_t r) const {
        return {values.begin() + static_cast<std::ptrdiff_t>(r * n_cols),
                values.begin() + static_cast<std::ptrdiff_t>((r + 1) * n_cols)};
    }
};

struct LabelVector {
    std::vector<std::int64_t> values;

    std::size_t size() const { return values.size(); }
};

// Taps chosen by the config: explicit list, or every layer whose name starts
// with "dense" (pre-activation; dense_pre_and_post adds post-activation taps).
std::vector<LayerTap> select_taps(const Network& net, const ExtractionConfig& cfg);

std::vector<ActivationMatrix> collect_activations(const Network& net, const Dataset& data,
                                                  const ExtractionConfig& cfg);

// inptype=1 form: rows pass through from the dataset, under a virtual tap
// named "input".
std::vector<ActivationMatrix> collect_activations_passthrough(const Dataset& data, bool acts);

LabelVector label_dataset(const Network& net, const Dataset& data, const PostCondition& pc);

// Optional per-sample weights, product of the enabled schemes; empty when
// neither balance nor confidence weighting is on.
std::vector<double> sample_weights(const Network& net, const Dataset& data,
                                   const LabelVector& labels, const ExtractionConfig& cfg);

}  // namespace nnrules

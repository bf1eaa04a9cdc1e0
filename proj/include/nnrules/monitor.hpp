#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nnrules/rules.hpp"

namespace nnrules {

enum class MonitorVerdict { correct, incorrect, uncertain };

struct MonitorReport {
    std::string mode;
    std::size_t n_inputs = 0;
    std::size_t n_layers = 0;
    std::vector<MonitorVerdict> verdicts;
    std::vector<std::pair<std::size_t, std::size_t>> votes;  // (correct, incorrect) per input
    double elapsed_ms = 0.0;  // scan/predict loop only
    // Against ground truth, when labels are available.
    bool has_accuracy = false;
    std::size_t decisive = 0;
    std::size_t decisive_right = 0;

    std::size_t count(MonitorVerdict v) const;
};

// Majority vote over per-layer verdicts: more matched correct(1)-rules than
// incorrect(0)-rules tags the input Correct, fewer tags it Incorrect, ties
// (including no matches at all) are Uncertain.
MonitorVerdict tally_verdict(std::size_t correct_votes, std::size_t incorrect_votes);

// Linear scan over every rule of every per-layer set. Rule sets must come
// from correct/incorrect (type-1) labeling.
MonitorReport monitor_rules(const Network& net, const std::vector<RuleSet>& rulesets,
                            const std::vector<LayerTap>& taps, const std::vector<bool>& acts,
                            const Dataset& data);

// Direct per-layer tree prediction; a layer always votes (impure leaves vote
// their majority class).
MonitorReport monitor_classifiers(const Network& net, const std::vector<DecisionTree>& trees,
                                  const Dataset& data);

std::string monitor_report_to_json(const MonitorReport& report);

}  // namespace nnrules

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nnrules/verifier.hpp"

namespace nnrules {

enum class BoundOp { min, max };

// One output constraint resolved against the support set: MIN rows lower-bound
// an output node at (min over support) - slack, MAX rows upper-bound it at
// (max over support) + slack.
struct ConstraintRow {
    std::size_t node = 0;
    BoundOp op = BoundOp::min;
    double slack = 0.0;
    double bound = 0.0;
};

struct OutputProperty {
    enum class Kind { arg_max, arg_min, bounds };
    Kind kind = Kind::arg_max;
    std::size_t target = 0;           // class c for arg_max / arg_min
    std::vector<ConstraintRow> rows;  // bounds only

    static OutputProperty argmax(std::size_t c) { return {Kind::arg_max, c, {}}; }
    static OutputProperty argmin(std::size_t c) { return {Kind::arg_min, c, {}}; }
    static OutputProperty bounds(std::vector<ConstraintRow> rows) {
        return {Kind::bounds, 0, std::move(rows)};
    }
};

struct VerifyOutcome {
    enum class Kind { proved, counterexample, timeout };
    Kind kind = Kind::proved;
    std::vector<double> counterexample_x;       // counterexample only
    std::int64_t violated = 0;                  // query label / constraint row id
    std::vector<std::int64_t> remaining_labs;   // timeout only

    bool proved() const { return kind == Kind::proved; }
};

struct QueryRecord {
    std::int64_t lab = 0;
    QueryStatus verdict = QueryStatus::timeout;
    double time_ms = 0.0;
    std::int64_t nodes = 0;
};

struct IterationRecord {
    int iteration = 0;
    std::vector<std::int64_t> labs_before;
    std::vector<QueryRecord> queries;
};

struct CounterexampleRecord {
    int iteration = 0;
    std::int64_t lab = 0;
    std::vector<double> x;
    std::vector<double> logits;
};

struct ProofReport {
    VerifyOutcome outcome;
    std::vector<IterationRecord> iterations;
    std::vector<CounterexampleRecord> counterexamples;
    bool any_timeout = false;
    BoxRegion support_region;  // iteration-0 boxes
    AnchorPoint anchor;
};

// Coordinatewise min/max hull of the support set in input and layer space;
// the anchor is the lowest-index support point with its tap values.
std::pair<BoxRegion, AnchorPoint> compute_boxes(const Network& net,
                                                const std::vector<std::vector<double>>& support,
                                                const LayerTap& tap);

// Support rows of `data` under the rule's pattern, in dataset order.
std::vector<std::vector<double>> rule_support_inputs(const Network& net, const Rule& rule,
                                                     const Dataset& data);

// Three-iteration proof schedule: support boxes, then the layer pinned to the
// anchor values, then input and layer both pinned. Per iteration each label
// still in `labs` poses one negation query; UNSAT discharges the label, any
// SAT or timeout ends the iteration. The final point query cannot be SAT when
// the anchor satisfies the property, which bounds the whole run.
ProofReport prove_rule(const Network& net, const Rule& rule, const OutputProperty& property,
                       const Dataset& train, const SolveBudget& budget);

// A => sigma on the network truncated at `tap`: each sigma term's negation is
// one query over the input box A; all-UNSAT proves the implication.
VerifyOutcome prove_pattern_implication(const Network& net, const LayerTap& tap,
                                        const std::vector<double>& input_lo,
                                        const std::vector<double>& input_hi, const Rule& sigma,
                                        const SolveBudget& budget);

// Greedy input-fixing minimization: coordinates are freed to their domain
// range in ascending index order and kept free while the implication still
// proves. Returns the indices left fixed.
std::vector<std::size_t> minimize_explanation(const Network& net, const std::vector<double>& x,
                                              const Rule& sigma, const LayerTap& tap,
                                              const std::vector<double>& domain_lo,
                                              const std::vector<double>& domain_hi,
                                              const SolveBudget& budget);

// Rows "[node,MIN|MAX,slack]" resolved against the support outputs.
OutputProperty parse_constraints_file(const std::string& path,
                                      const std::vector<std::vector<double>>& support_outputs);
OutputProperty parse_constraints_text(const std::string& text,
                                      const std::vector<std::vector<double>>& support_outputs);

std::string proof_report_to_json(const ProofReport& report, const Rule& rule,
                                 const OutputProperty& property);

}  // namespace nnrules

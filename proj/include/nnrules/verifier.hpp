#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "nnrules/network.hpp"
#include "nnrules/rules.hpp"

namespace nnrules {

// Input-space and layer-space bounds used to constrain a query. Layer bounds
// may be +-infinity (or empty) for "unconstrained".
struct BoxRegion {
    std::vector<double> input_lo;
    std::vector<double> input_hi;
    std::vector<double> layer_lo;
    std::vector<double> layer_hi;
    LayerTap tap;
};

struct AnchorPoint {
    std::vector<double> x0;
    std::vector<double> v0;
};

// Linear predicate over the network outputs: coeffs . logits > rhs when
// strict, otherwise >=. Strictness is encoded in the LP as >= rhs + 1e-9 and
// re-checked concretely on any witness.
struct OutputPredicate {
    std::vector<double> coeffs;
    double rhs = 0.0;
    bool strict = true;

    double evaluate(const std::vector<double>& logits) const;
    bool holds_concretely(const std::vector<double>& logits) const;
};

enum class QueryStatus { sat, unsat, timeout };

struct SolveBudget {
    std::int64_t max_nodes = 100000;
    std::chrono::milliseconds time_limit{60000};
    unsigned workers = 1;
};

struct QueryResult {
    QueryStatus status = QueryStatus::timeout;
    std::vector<double> witness;  // sat only; replays concretely
    std::int64_t nodes = 0;
    double elapsed_ms = 0.0;
};

// Maps an acts-mode rule (0/1 indicator thresholds at 0.5) onto value-space
// terms (on <=> value > 0); value-mode rules pass through.
Rule sigma_in_value_space(const Rule& rule);

// Complete feasibility check for
//   x in [input box]  and  F_l(x) in [layer box]  and  sigma(F_l(x))
//   and violation(F_logits(x))
// by interval bound propagation plus ReLU phase branching; every fully fixed
// branch is an exact LP. UNSAT is a proof; SAT carries a concrete witness.
QueryResult solve_query(const Network& net, const BoxRegion& box,
                        const std::optional<Rule>& sigma, const OutputPredicate& violation,
                        const SolveBudget& budget);

constexpr double kStrictMargin = 1e-9;

}  // namespace nnrules

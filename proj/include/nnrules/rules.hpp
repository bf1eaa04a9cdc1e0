#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nnrules/tree.hpp"

namespace nnrules {

enum class TermOp { le, gt };

struct RuleTerm {
    std::size_t neuron = 0;
    TermOp op = TermOp::le;
    double threshold = 0.0;

    bool operator==(const RuleTerm&) const = default;
};

struct Metrics {
    double precision = 0.0;  // percents
    double recall = 0.0;
    double f1 = 0.0;
    double coverage = 0.0;
    bool empty_match = false;   // no row matched the rule
    bool no_positives = false;  // the rule's label is absent from the data

    bool operator==(const Metrics&) const = default;
};

// Conjunction of neuron threshold terms at one layer; a pure decision-tree
// path. In acts mode thresholds sit at 0.5 over 0/1 indicator features.
struct Rule {
    LayerTap layer;
    std::vector<RuleTerm> terms;
    std::size_t support = 0;
    std::int64_t label = 0;
    bool acts = false;
    std::optional<Metrics> train;
    std::optional<Metrics> test;

    std::vector<std::size_t> neurons() const;
};

struct RuleSet {
    std::map<std::int64_t, std::vector<Rule>> by_label;

    std::size_t total_rules() const;
    std::vector<std::int64_t> labels() const;
};

// One rule per pure leaf, path predicates merged per neuron (tightest bound
// kept); impure leaves yield nothing. Rules appear in preorder (extraction
// order).
RuleSet extract_rules(const DecisionTree& tree);

bool rule_matches(const Rule& rule, const std::vector<double>& activation);

Metrics evaluate_rule(const Rule& rule, const ActivationMatrix& acts_matrix,
                      const LabelVector& labels);

const Rule& select_max_support(const RuleSet& rules, std::int64_t label);

// Keeps, per label, only the rule with the highest train recall (ties: higher
// support, then extraction order).
RuleSet keep_top_rules(const RuleSet& rules);

// ruleset.csv: layer, neurons, signature, support, label, then train/test
// precision, recall, f1. Fields with commas are quoted.
std::string ruleset_to_csv(const RuleSet& rules);
RuleSet ruleset_from_csv(const std::string& csv_text);
void save_ruleset(const RuleSet& rules, const std::string& dir);
RuleSet load_ruleset(const std::string& dir);

std::string format_double(double v);  // shortest round-trip form

}  // namespace nnrules

#include "nnrules/prover.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "nnrules/npy.hpp"

namespace nnrules {

namespace {

OutputPredicate negation_predicate(const OutputProperty& property, std::size_t output_dim,
                                   std::int64_t lab) {
    OutputPredicate p;
    p.coeffs.assign(output_dim, 0.0);
    p.strict = true;
    switch (property.kind) {
        case OutputProperty::Kind::arg_max:
            // exists x with logits[lab] > logits[c]
            p.coeffs[static_cast<std::size_t>(lab)] = 1.0;
            p.coeffs[property.target] = -1.0;
            p.rhs = 0.0;
            break;
        case OutputProperty::Kind::arg_min:
            // exists x with logits[lab] < logits[c]
            p.coeffs[property.target] = 1.0;
            p.coeffs[static_cast<std::size_t>(lab)] = -1.0;
            p.rhs = 0.0;
            break;
        case OutputProperty::Kind::bounds: {
            const ConstraintRow& row = property.rows[static_cast<std::size_t>(lab)];
            if (row.op == BoundOp::min) {
                // exists x with out[node] < bound
                p.coeffs[row.node] = -1.0;
                p.rhs = -row.bound;
            } else {
                p.coeffs[row.node] = 1.0;
                p.rhs = row.bound;
            }
            break;
        }
    }
    return p;
}

bool anchor_satisfies(const OutputProperty& property, const std::vector<double>& logits) {
    switch (property.kind) {
        case OutputProperty::Kind::arg_max:
            return argmax_index(logits) == property.target;
        case OutputProperty::Kind::arg_min:
            return argmin_index(logits) == property.target;
        case OutputProperty::Kind::bounds:
            for (const ConstraintRow& row : property.rows) {
                if (row.node >= logits.size())
                    raise(ErrorKind::DimensionMismatch, "constraint row beyond output width");
                double v = logits[row.node];
                if (row.op == BoundOp::min && v < row.bound) return false;
                if (row.op == BoundOp::max && v > row.bound) return false;
            }
            return true;
    }
    return false;
}

std::vector<std::int64_t> initial_labs(const OutputProperty& property, std::size_t output_dim) {
    std::vector<std::int64_t> labs;
    if (property.kind == OutputProperty::Kind::bounds) {
        for (std::size_t r = 0; r < property.rows.size(); ++r)
            labs.push_back(static_cast<std::int64_t>(r));
    } else {
        for (std::size_t c = 0; c < output_dim; ++c)
            if (c != property.target) labs.push_back(static_cast<std::int64_t>(c));
    }
    return labs;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (std::size_t i = 0; i < bytes.size(); i += 3) {
        std::uint32_t chunk = static_cast<std::uint32_t>(bytes[i]) << 16;
        if (i + 1 < bytes.size()) chunk |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
        if (i + 2 < bytes.size()) chunk |= bytes[i + 2];
        out += alphabet[(chunk >> 18) & 63];
        out += alphabet[(chunk >> 12) & 63];
        out += i + 1 < bytes.size() ? alphabet[(chunk >> 6) & 63] : '=';
        out += i + 2 < bytes.size() ? alphabet[chunk & 63] : '=';
    }
    return out;
}

}  // namespace

std::pair<BoxRegion, AnchorPoint> compute_boxes(const Network& net,
                                                const std::vector<std::vector<double>>& support,
                                                const LayerTap& tap) {
    if (support.empty()) raise(ErrorKind::EmptySupport, "support set is empty");
    BoxRegion box;
    box.tap = tap;
    box.input_lo = support.front();
    box.input_hi = support.front();
    std::vector<double> v0 = net.forward_to_layer(support.front(), tap);
    box.layer_lo = v0;
    box.layer_hi = v0;
    for (std::size_t s = 1; s < support.size(); ++s) {
        const std::vector<double>& x = support[s];
        if (x.size() != box.input_lo.size())
            raise(ErrorKind::DimensionMismatch, "ragged support rows");
        for (std::size_t j = 0; j < x.size(); ++j) {
            box.input_lo[j] = std::min(box.input_lo[j], x[j]);
            box.input_hi[j] = std::max(box.input_hi[j], x[j]);
        }
        std::vector<double> v = net.forward_to_layer(x, tap);
        for (std::size_t j = 0; j < v.size(); ++j) {
            box.layer_lo[j] = std::min(box.layer_lo[j], v[j]);
            box.layer_hi[j] = std::max(box.layer_hi[j], v[j]);
        }
    }
    return {std::move(box), AnchorPoint{support.front(), std::move(v0)}};
}

std::vector<std::vector<double>> rule_support_inputs(const Network& net, const Rule& rule,
                                                     const Dataset& data) {
    Rule value_rule = sigma_in_value_space(rule);
    std::vector<std::vector<double>> support;
    for (std::size_t r = 0; r < data.inputs.rows(); ++r) {
        std::vector<double> x = data.inputs.row_f64(r);
        if (rule_matches(value_rule, net.forward_to_layer(x, rule.layer)))
            support.push_back(std::move(x));
    }
    return support;
}

ProofReport prove_rule(const Network& net, const Rule& rule, const OutputProperty& property,
                       const Dataset& train, const SolveBudget& budget) {
    std::vector<std::vector<double>> support = rule_support_inputs(net, rule, train);
    if (support.empty())
        raise(ErrorKind::EmptySupport, "rule has no support in the provided dataset");

    auto [box, anchor] = compute_boxes(net, support, rule.layer);
    std::vector<double> anchor_logits = net.forward(anchor.x0);
    if (!anchor_satisfies(property, anchor_logits))
        raise(ErrorKind::AnchorViolatesProperty,
              "anchor prediction does not satisfy the property; rule/label pairing is broken");

    ProofReport report;
    report.support_region = box;
    report.anchor = anchor;
    std::optional<Rule> sigma = sigma_in_value_space(rule);

    std::vector<std::int64_t> labs = initial_labs(property, net.output_dim());
    for (int iteration = 0; iteration < 3 && !labs.empty(); ++iteration) {
        BoxRegion region = box;
        if (iteration >= 1) {
            region.layer_lo = anchor.v0;
            region.layer_hi = anchor.v0;
        }
        if (iteration >= 2) {
            region.input_lo = anchor.x0;
            region.input_hi = anchor.x0;
        }

        IterationRecord rec;
        rec.iteration = iteration;
        rec.labs_before = labs;
        for (std::int64_t lab : rec.labs_before) {
            OutputPredicate violation = negation_predicate(property, net.output_dim(), lab);
            QueryResult q = solve_query(net, region, sigma, violation, budget);
            rec.queries.push_back(QueryRecord{lab, q.status, q.elapsed_ms, q.nodes});
            if (q.status == QueryStatus::unsat) {
                labs.erase(std::find(labs.begin(), labs.end(), lab));
                continue;
            }
            if (q.status == QueryStatus::sat) {
                report.counterexamples.push_back(
                    CounterexampleRecord{iteration, lab, q.witness, net.forward(q.witness)});
            } else {
                report.any_timeout = true;
            }
            break;  // SAT or timeout ends the iteration
        }
        report.iterations.push_back(std::move(rec));
    }

    if (labs.empty()) {
        report.outcome.kind = VerifyOutcome::Kind::proved;
    } else {
        report.outcome.kind = VerifyOutcome::Kind::timeout;
        report.outcome.remaining_labs = labs;
    }
    return report;
}

VerifyOutcome prove_pattern_implication(const Network& net, const LayerTap& tap,
                                        const std::vector<double>& input_lo,
                                        const std::vector<double>& input_hi, const Rule& sigma,
                                        const SolveBudget& budget) {
    VerifyOutcome outcome;
    Rule value_rule = sigma_in_value_space(sigma);
    if (value_rule.terms.empty()) return outcome;  // vacuously proved, no solver calls

    Network sub = net.truncate(tap);
    BoxRegion box;
    box.tap = LayerTap{sub.layers().back().name, tap.post_activation};
    box.input_lo = input_lo;
    box.input_hi = input_hi;

    std::vector<std::int64_t> remaining;
    for (std::size_t i = 0; i < value_rule.terms.size(); ++i) {
        const RuleTerm& term = value_rule.terms[i];
        OutputPredicate negated;
        negated.coeffs.assign(sub.output_dim(), 0.0);
        if (term.op == TermOp::le) {
            // negation: value > threshold
            negated.coeffs[term.neuron] = 1.0;
            negated.rhs = term.threshold;
            negated.strict = true;
        } else {
            // negation: value <= threshold
            negated.coeffs[term.neuron] = -1.0;
            negated.rhs = -term.threshold;
            negated.strict = false;
        }
        QueryResult q = solve_query(sub, box, std::nullopt, negated, budget);
        if (q.status == QueryStatus::sat) {
            outcome.kind = VerifyOutcome::Kind::counterexample;
            outcome.counterexample_x = q.witness;
            outcome.violated = static_cast<std::int64_t>(i);
            return outcome;
        }
        if (q.status == QueryStatus::timeout) remaining.push_back(static_cast<std::int64_t>(i));
    }
    if (!remaining.empty()) {
        outcome.kind = VerifyOutcome::Kind::timeout;
        outcome.remaining_labs = std::move(remaining);
    }
    return outcome;
}

std::vector<std::size_t> minimize_explanation(const Network& net, const std::vector<double>& x,
                                              const Rule& sigma, const LayerTap& tap,
                                              const std::vector<double>& domain_lo,
                                              const std::vector<double>& domain_hi,
                                              const SolveBudget& budget) {
    Rule value_rule = sigma_in_value_space(sigma);
    if (!rule_matches(value_rule, net.forward_to_layer(x, tap)))
        raise(ErrorKind::RuleUnsatisfiedAtInput, "sigma does not hold at the given input");
    if (domain_lo.size() != x.size() || domain_hi.size() != x.size())
        raise(ErrorKind::DimensionMismatch, "domain bounds do not match input width");

    std::vector<bool> fixed(x.size(), true);
    std::vector<double> lo = x, hi = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lo[i] = domain_lo[i];
        hi[i] = domain_hi[i];
        VerifyOutcome out = prove_pattern_implication(net, tap, lo, hi, value_rule, budget);
        if (out.proved()) {
            fixed[i] = false;  // the coordinate stays free
        } else {
            lo[i] = x[i];
            hi[i] = x[i];
        }
    }
    std::vector<std::size_t> result;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (fixed[i]) result.push_back(i);
    return result;
}

OutputProperty parse_constraints_text(const std::string& text,
                                      const std::vector<std::vector<double>>& support_outputs) {
    if (support_outputs.empty())
        raise(ErrorKind::EmptySupport, "constraint bounds need support outputs");
    std::vector<ConstraintRow> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        // tolerate surrounding whitespace and the bracketed row form
        auto strip = [](std::string s) {
            std::size_t a = s.find_first_not_of(" \t\r[]");
            std::size_t b = s.find_last_not_of(" \t\r[]");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string body = strip(line);
        if (body.empty()) continue;
        std::stringstream row_ss(body);
        std::string node_s, op_s, slack_s;
        if (!std::getline(row_ss, node_s, ',') || !std::getline(row_ss, op_s, ',') ||
            !std::getline(row_ss, slack_s))
            raise(ErrorKind::SchemaViolation, "constraint row needs node,op,value: " + line);
        node_s = strip(node_s);
        op_s = strip(op_s);
        slack_s = strip(slack_s);

        ConstraintRow row;
        try {
            row.node = static_cast<std::size_t>(std::stoull(node_s));
            row.slack = std::stod(slack_s);
        } catch (const std::exception&) {
            raise(ErrorKind::SchemaViolation, "bad constraint row: " + line);
        }
        if (row.slack < 0.0) raise(ErrorKind::SchemaViolation, "negative slack: " + line);
        if (op_s == "MIN")
            row.op = BoundOp::min;
        else if (op_s == "MAX")
            row.op = BoundOp::max;
        else
            raise(ErrorKind::UnknownOperator, "operator must be MIN or MAX, got " + op_s);

        double extreme = row.op == BoundOp::min ? std::numeric_limits<double>::infinity()
                                                : -std::numeric_limits<double>::infinity();
        for (const std::vector<double>& out : support_outputs) {
            if (row.node >= out.size())
                raise(ErrorKind::DimensionMismatch, "constraint node beyond output width");
            extreme = row.op == BoundOp::min ? std::min(extreme, out[row.node])
                                             : std::max(extreme, out[row.node]);
        }
        row.bound = row.op == BoundOp::min ? extreme - row.slack : extreme + row.slack;
        rows.push_back(row);
    }
    if (rows.empty()) raise(ErrorKind::SchemaViolation, "constraints file has no rows");
    return OutputProperty::bounds(std::move(rows));
}

OutputProperty parse_constraints_file(const std::string& path,
                                      const std::vector<std::vector<double>>& support_outputs) {
    std::ifstream f(path);
    if (!f) raise(ErrorKind::IoFailure, "cannot open constraints file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_constraints_text(ss.str(), support_outputs);
}

namespace {

nlohmann::ordered_json property_json(const OutputProperty& property) {
    nlohmann::ordered_json j;
    switch (property.kind) {
        case OutputProperty::Kind::arg_max:
            j["kind"] = "argmax";
            j["target"] = property.target;
            break;
        case OutputProperty::Kind::arg_min:
            j["kind"] = "argmin";
            j["target"] = property.target;
            break;
        case OutputProperty::Kind::bounds: {
            j["kind"] = "bounds";
            auto rows = nlohmann::ordered_json::array();
            for (const ConstraintRow& r : property.rows)
                rows.push_back({{"node", r.node},
                                {"op", r.op == BoundOp::min ? "MIN" : "MAX"},
                                {"slack", r.slack},
                                {"bound", r.bound}});
            j["rows"] = std::move(rows);
            break;
        }
    }
    return j;
}

const char* verdict_name(QueryStatus s) {
    switch (s) {
        case QueryStatus::sat: return "sat";
        case QueryStatus::unsat: return "unsat";
        case QueryStatus::timeout: return "timeout";
    }
    return "?";
}

}  // namespace

std::string proof_report_to_json(const ProofReport& report, const Rule& rule,
                                 const OutputProperty& property) {
    nlohmann::ordered_json doc;
    doc["rule"] = {{"layer", tap_to_string(rule.layer)},
                   {"label", rule.label},
                   {"support", rule.support},
                   {"terms", rule.terms.size()}};
    doc["property"] = property_json(property);

    auto iters = nlohmann::ordered_json::array();
    for (const IterationRecord& it : report.iterations) {
        nlohmann::ordered_json ji;
        ji["iteration"] = it.iteration;
        ji["labs_before"] = it.labs_before;
        auto queries = nlohmann::ordered_json::array();
        for (const QueryRecord& q : it.queries)
            queries.push_back({{"lab", q.lab},
                               {"verdict", verdict_name(q.verdict)},
                               {"time_ms", q.time_ms},
                               {"nodes", q.nodes}});
        ji["queries"] = std::move(queries);
        iters.push_back(std::move(ji));
    }
    doc["iterations"] = std::move(iters);

    auto cexs = nlohmann::ordered_json::array();
    for (const CounterexampleRecord& c : report.counterexamples) {
        Tensor x = Tensor::from_f64({c.x.size()}, c.x);
        cexs.push_back({{"iteration", c.iteration},
                        {"lab", c.lab},
                        {"x_npy_base64", base64_encode(write_npy_bytes(x))},
                        {"x", c.x},
                        {"logits", c.logits}});
    }
    doc["counterexamples"] = std::move(cexs);
    doc["any_timeout"] = report.any_timeout;

    switch (report.outcome.kind) {
        case VerifyOutcome::Kind::proved: doc["outcome"] = "proved"; break;
        case VerifyOutcome::Kind::counterexample: doc["outcome"] = "counterexample"; break;
        case VerifyOutcome::Kind::timeout:
            doc["outcome"] = "timeout";
            doc["remaining_labs"] = report.outcome.remaining_labs;
            break;
    }
    return doc.dump(2);
}

}  // namespace nnrules

#include "nnrules/rules.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nnrules {

std::vector<std::size_t> Rule::neurons() const {
    std::vector<std::size_t> out;
    out.reserve(terms.size());
    for (const RuleTerm& t : terms) out.push_back(t.neuron);
    return out;
}

std::size_t RuleSet::total_rules() const {
    std::size_t n = 0;
    for (const auto& [label, rules] : by_label) n += rules.size();
    return n;
}

std::vector<std::int64_t> RuleSet::labels() const {
    std::vector<std::int64_t> out;
    for (const auto& [label, rules] : by_label) out.push_back(label);
    return out;
}

namespace {

struct PathBound {
    std::optional<double> upper;  // from <= edges, tightest = smallest
    std::optional<double> lower;  // from > edges, tightest = largest
    std::size_t first_seen = 0;
};

void collect(const DecisionTree& tree, std::size_t node_idx,
             std::map<std::size_t, PathBound>& bounds, std::size_t& order_counter,
             RuleSet& out) {
    const TreeNode& node = tree.nodes[node_idx];
    if (node.is_leaf()) {
        std::size_t nonzero = 0;
        for (const auto& [label, count] : node.counts)
            if (count > 0) ++nonzero;
        if (nonzero != 1) return;  // impure leaf

        Rule rule;
        rule.layer = tree.layer;
        rule.acts = tree.acts;
        for (const auto& [label, count] : node.counts)
            if (count > 0) {
                rule.label = label;
                rule.support = count;
            }
        // Terms follow the order neurons first appeared on the path.
        std::vector<std::pair<std::size_t, std::size_t>> ordered;  // (first_seen, neuron)
        for (const auto& [neuron, b] : bounds) ordered.emplace_back(b.first_seen, neuron);
        std::sort(ordered.begin(), ordered.end());
        for (const auto& [seen, neuron] : ordered) {
            const PathBound& b = bounds.at(neuron);
            if (b.lower) rule.terms.push_back({neuron, TermOp::gt, *b.lower});
            if (b.upper) rule.terms.push_back({neuron, TermOp::le, *b.upper});
        }
        out.by_label[rule.label].push_back(std::move(rule));
        return;
    }

    auto descend = [&](int child, bool is_left) {
        std::size_t f = static_cast<std::size_t>(node.feature);
        PathBound saved = bounds.count(f) ? bounds[f] : PathBound{};
        bool existed = bounds.count(f) > 0;
        PathBound& b = bounds[f];
        if (!existed) b.first_seen = order_counter++;
        if (is_left)
            b.upper = b.upper ? std::min(*b.upper, node.threshold) : node.threshold;
        else
            b.lower = b.lower ? std::max(*b.lower, node.threshold) : node.threshold;
        collect(tree, static_cast<std::size_t>(child), bounds, order_counter, out);
        if (existed)
            bounds[f] = saved;
        else
            bounds.erase(f);
    };
    descend(node.left, true);
    descend(node.right, false);
}

}  // namespace

RuleSet extract_rules(const DecisionTree& tree) {
    RuleSet out;
    std::map<std::size_t, PathBound> bounds;
    std::size_t order_counter = 0;
    collect(tree, 0, bounds, order_counter, out);
    return out;
}

bool rule_matches(const Rule& rule, const std::vector<double>& activation) {
    for (const RuleTerm& t : rule.terms) {
        if (t.neuron >= activation.size())
            raise(ErrorKind::DimensionMismatch, "activation vector shorter than rule neuron index");
        double v = activation[t.neuron];
        if (t.op == TermOp::le ? !(v <= t.threshold) : !(v > t.threshold)) return false;
    }
    return true;
}

Metrics evaluate_rule(const Rule& rule, const ActivationMatrix& acts_matrix,
                      const LabelVector& labels) {
    if (labels.size() != acts_matrix.n_rows)
        raise(ErrorKind::DimensionMismatch, "label count does not match activation rows");
    std::size_t n = acts_matrix.n_rows;
    std::size_t matched = 0, true_pos = 0, positives = 0;
    for (std::size_t r = 0; r < n; ++r) {
        bool is_label = labels.values[r] == rule.label;
        if (is_label) ++positives;
        if (rule_matches(rule, acts_matrix.row(r))) {
            ++matched;
            if (is_label) ++true_pos;
        }
    }
    Metrics m;
    m.empty_match = matched == 0;
    m.no_positives = positives == 0;
    m.precision = matched ? 100.0 * static_cast<double>(true_pos) / static_cast<double>(matched)
                          : 0.0;
    m.recall = positives ? 100.0 * static_cast<double>(true_pos) / static_cast<double>(positives)
                         : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    m.coverage = n ? 100.0 * static_cast<double>(matched) / static_cast<double>(n) : 0.0;
    return m;
}

const Rule& select_max_support(const RuleSet& rules, std::int64_t label) {
    auto it = rules.by_label.find(label);
    if (it == rules.by_label.end() || it->second.empty())
        raise(ErrorKind::NoRulesForLabel, "no rules for label " + std::to_string(label));
    const Rule* best = &it->second.front();
    for (const Rule& r : it->second)
        if (r.support > best->support) best = &r;  // ties keep extraction order
    return *best;
}

RuleSet keep_top_rules(const RuleSet& rules) {
    RuleSet out;
    for (const auto& [label, list] : rules.by_label) {
        if (list.empty()) continue;
        const Rule* best = &list.front();
        for (const Rule& r : list) {
            double r_recall = r.train ? r.train->recall : 0.0;
            double b_recall = best->train ? best->train->recall : 0.0;
            if (r_recall > b_recall || (r_recall == b_recall && r.support > best->support))
                best = &r;
        }
        out.by_label[label].push_back(*best);
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        raise(ErrorKind::SchemaViolation, "bad numeric field '" + s + "'");
    return v;
}

std::string csv_quote(const std::string& field) {
    if (field.find(',') == std::string::npos && field.find('"') == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string signature_string(const Rule& rule) {
    std::string s = "[";
    for (std::size_t i = 0; i < rule.terms.size(); ++i) {
        if (i) s += ",";
        const RuleTerm& t = rule.terms[i];
        if (rule.acts)
            s += t.op == TermOp::gt ? "1" : "0";
        else
            s += (t.op == TermOp::le ? "<=" : ">") + format_double(t.threshold);
    }
    return s + "]";
}

std::string neurons_string(const Rule& rule) {
    std::string s = "[";
    std::vector<std::size_t> ns = rule.neurons();
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(ns[i]);
    }
    return s + "]";
}

std::vector<std::string> split_bracket_list(const std::string& text) {
    if (text.size() < 2 || text.front() != '[' || text.back() != ']')
        raise(ErrorKind::SchemaViolation, "expected bracketed list, got '" + text + "'");
    std::string body = text.substr(1, text.size() - 2);
    std::vector<std::string> items;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t a = item.find_first_not_of(' ');
        std::size_t b = item.find_last_not_of(' ');
        items.push_back(a == std::string::npos ? std::string() : item.substr(a, b - a + 1));
    }
    return items;
}

std::string metrics_cells(const std::optional<Metrics>& m) {
    if (!m) return ",,";
    return format_double(m->precision) + "," + format_double(m->recall) + "," +
           format_double(m->f1);
}

std::optional<Metrics> parse_metrics_cells(const std::vector<std::string>& f, std::size_t at) {
    if (f[at].empty() && f[at + 1].empty() && f[at + 2].empty()) return std::nullopt;
    Metrics m;
    m.precision = parse_double(f[at]);
    m.recall = parse_double(f[at + 1]);
    m.f1 = parse_double(f[at + 2]);
    return m;
}

constexpr const char* kCsvHeader =
    "layer,neurons,signature,support,label,train_precision,train_recall,train_f1,"
    "test_precision,test_recall,test_f1";

}  // namespace

std::string ruleset_to_csv(const RuleSet& rules) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& [label, list] : rules.by_label) {
        for (const Rule& r : list) {
            out += csv_quote(tap_to_string(r.layer)) + ",";
            out += csv_quote(neurons_string(r)) + ",";
            out += csv_quote(signature_string(r)) + ",";
            out += std::to_string(r.support) + ",";
            out += std::to_string(r.label) + ",";
            out += metrics_cells(r.train) + ",";
            out += metrics_cells(r.test);
            out += "\n";
        }
    }
    return out;
}

namespace {

Rule parse_rule_row(const std::vector<std::string>& f) {
    Rule r;
    r.layer = tap_from_string(f[0]);
    std::vector<std::string> neurons = split_bracket_list(f[1]);
    std::vector<std::string> signature = split_bracket_list(f[2]);
    if (neurons.size() != signature.size())
        raise(ErrorKind::SchemaViolation, "neurons/signature length mismatch");
    bool acts_seen = false, value_seen = false;
    for (std::size_t i = 0; i < neurons.size(); ++i) {
        RuleTerm t;
        t.neuron = static_cast<std::size_t>(std::stoull(neurons[i]));
        const std::string& sig = signature[i];
        if (sig == "0" || sig == "1") {
            acts_seen = true;
            t.op = sig == "1" ? TermOp::gt : TermOp::le;
            t.threshold = 0.5;
        } else if (sig.rfind("<=", 0) == 0) {
            value_seen = true;
            t.op = TermOp::le;
            t.threshold = parse_double(sig.substr(2));
        } else if (sig.rfind(">", 0) == 0) {
            value_seen = true;
            t.op = TermOp::gt;
            t.threshold = parse_double(sig.substr(1));
        } else {
            raise(ErrorKind::SchemaViolation, "bad signature term '" + sig + "'");
        }
        r.terms.push_back(t);
    }
    if (acts_seen && value_seen)
        raise(ErrorKind::SchemaViolation, "signature mixes on/off and value terms");
    r.acts = acts_seen;
    r.support = static_cast<std::size_t>(std::stoull(f[3]));
    r.label = std::stoll(f[4]);
    r.train = parse_metrics_cells(f, 5);
    r.test = parse_metrics_cells(f, 8);
    return r;
}

}  // namespace

RuleSet ruleset_from_csv(const std::string& csv_text) {
    std::stringstream ss(csv_text);
    std::string line;
    if (!std::getline(ss, line) || line != kCsvHeader)
        raise(ErrorKind::SchemaViolation, "ruleset.csv header mismatch");
    RuleSet out;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f = csv_split(line);
        if (f.size() != 11)
            raise(ErrorKind::SchemaViolation, "ruleset.csv row needs 11 fields, got " +
                                                  std::to_string(f.size()));
        try {
            Rule r = parse_rule_row(f);
            out.by_label[r.label].push_back(std::move(r));
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            raise(ErrorKind::SchemaViolation, "bad ruleset.csv row: " + line);
        }
    }
    return out;
}

void save_ruleset(const RuleSet& rules, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::string path = (std::filesystem::path(dir) / "ruleset.csv").string();
    std::ofstream f(path);
    if (!f) raise(ErrorKind::IoFailure, "cannot open " + path + " for writing");
    f << ruleset_to_csv(rules);
    if (!f) raise(ErrorKind::IoFailure, "short write to " + path);
}

RuleSet load_ruleset(const std::string& dir) {
    std::string path = (std::filesystem::path(dir) / "ruleset.csv").string();
    std::ifstream f(path);
    if (!f) raise(ErrorKind::IoFailure, "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ruleset_from_csv(ss.str());
}

}  // namespace nnrules

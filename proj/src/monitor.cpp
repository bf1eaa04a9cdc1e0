#include "nnrules/monitor.hpp"

#include <chrono>

#include "json.hpp"

namespace nnrules {

std::size_t MonitorReport::count(MonitorVerdict v) const {
    std::size_t n = 0;
    for (MonitorVerdict x : verdicts)
        if (x == v) ++n;
    return n;
}

MonitorVerdict tally_verdict(std::size_t correct_votes, std::size_t incorrect_votes) {
    if (correct_votes > incorrect_votes) return MonitorVerdict::correct;
    if (correct_votes < incorrect_votes) return MonitorVerdict::incorrect;
    return MonitorVerdict::uncertain;
}

namespace {

std::vector<ActivationMatrix> collect_for_monitor(const Network& net, const Dataset& data,
                                                  const std::vector<LayerTap>& taps,
                                                  const std::vector<bool>& acts) {
    std::vector<ActivationMatrix> matrices;
    for (std::size_t t = 0; t < taps.size(); ++t) {
        ExtractionConfig cfg;
        cfg.taps = {taps[t]};
        cfg.acts = acts[t];
        matrices.push_back(collect_activations(net, data, cfg).front());
    }
    return matrices;
}

void finish_report(MonitorReport& report, const Network& net, const Dataset& data) {
    if (!data.labels) return;
    report.has_accuracy = true;
    std::vector<std::int64_t> truth = data.labels->as_i64();
    for (std::size_t i = 0; i < report.verdicts.size(); ++i) {
        if (report.verdicts[i] == MonitorVerdict::uncertain) continue;
        bool model_correct =
            static_cast<std::int64_t>(net.predict(data.inputs.row_f64(i), PredictMode::argmax)) ==
            truth[i];
        ++report.decisive;
        bool said_correct = report.verdicts[i] == MonitorVerdict::correct;
        if (said_correct == model_correct) ++report.decisive_right;
    }
}

void check_binary_labels(const RuleSet& rs) {
    for (const auto& [label, rules] : rs.by_label)
        if (label != 0 && label != 1)
            raise(ErrorKind::LayerMismatch,
                  "monitoring needs correct/incorrect rule sets (labels 0/1), found label " +
                      std::to_string(label));
}

}  // namespace

MonitorReport monitor_rules(const Network& net, const std::vector<RuleSet>& rulesets,
                            const std::vector<LayerTap>& taps, const std::vector<bool>& acts,
                            const Dataset& data) {
    if (rulesets.size() != taps.size() || acts.size() != taps.size())
        raise(ErrorKind::LayerMismatch, "one rule set, tap, and acts flag per layer required");
    for (const RuleSet& rs : rulesets) check_binary_labels(rs);

    MonitorReport report;
    report.mode = "rules";
    report.n_inputs = data.inputs.rows();
    report.n_layers = taps.size();

    std::vector<ActivationMatrix> matrices = collect_for_monitor(net, data, taps, acts);

    auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < report.n_inputs; ++i) {
        std::size_t correct_votes = 0, incorrect_votes = 0;
        for (std::size_t t = 0; t < taps.size(); ++t) {
            std::vector<double> row = matrices[t].row(i);
            for (const auto& [label, rules] : rulesets[t].by_label)
                for (const Rule& r : rules)
                    if (rule_matches(r, row)) {
                        if (label == 1)
                            ++correct_votes;
                        else
                            ++incorrect_votes;
                    }
        }
        report.votes.emplace_back(correct_votes, incorrect_votes);
        report.verdicts.push_back(tally_verdict(correct_votes, incorrect_votes));
    }
    report.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();

    finish_report(report, net, data);
    return report;
}

MonitorReport monitor_classifiers(const Network& net, const std::vector<DecisionTree>& trees,
                                  const Dataset& data) {
    if (trees.empty()) raise(ErrorKind::LayerMismatch, "no trees to monitor with");
    std::vector<LayerTap> taps;
    std::vector<bool> acts;
    for (const DecisionTree& t : trees) {
        taps.push_back(t.layer);
        acts.push_back(t.acts);
    }

    MonitorReport report;
    report.mode = "classifiers";
    report.n_inputs = data.inputs.rows();
    report.n_layers = trees.size();

    std::vector<ActivationMatrix> matrices = collect_for_monitor(net, data, taps, acts);

    auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < report.n_inputs; ++i) {
        std::size_t correct_votes = 0, incorrect_votes = 0;
        for (std::size_t t = 0; t < trees.size(); ++t) {
            std::int64_t pred = trees[t].predict(matrices[t].row(i));
            if (pred == 1)
                ++correct_votes;
            else if (pred == 0)
                ++incorrect_votes;
            else
                raise(ErrorKind::LayerMismatch,
                      "monitoring needs correct/incorrect trees (labels 0/1)");
        }
        report.votes.emplace_back(correct_votes, incorrect_votes);
        report.verdicts.push_back(tally_verdict(correct_votes, incorrect_votes));
    }
    report.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();

    finish_report(report, net, data);
    return report;
}

std::string monitor_report_to_json(const MonitorReport& report) {
    nlohmann::ordered_json doc;
    doc["mode"] = report.mode;
    doc["n_inputs"] = report.n_inputs;
    doc["n_layers"] = report.n_layers;
    doc["verdicts"] = {{"correct", report.count(MonitorVerdict::correct)},
                       {"incorrect", report.count(MonitorVerdict::incorrect)},
                       {"uncertain", report.count(MonitorVerdict::uncertain)}};
    if (report.has_accuracy) {
        doc["decisive"] = report.decisive;
        doc["decisive_right"] = report.decisive_right;
        doc["accuracy"] = report.decisive
                              ? static_cast<double>(report.decisive_right) /
                                    static_cast<double>(report.decisive)
                              : 0.0;
    }
    doc["elapsed_ms"] = report.elapsed_ms;
    return doc.dump(2);
}

}  // namespace nnrules

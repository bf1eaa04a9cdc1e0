#include "nnrules/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nnrules/artifacts.hpp"
#include "nnrules/monitor.hpp"
#include "nnrules/npy.hpp"
#include "nnrules/prover.hpp"

namespace nnrules {

namespace {

bool parse_bool_token(const std::string& s, bool& value) {
    if (s == "True" || s == "true" || s == "1") {
        value = true;
        return true;
    }
    if (s == "False" || s == "false" || s == "0") {
        value = false;
        return true;
    }
    return false;
}

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::ConfigError: return 2;
        case ErrorKind::NoRulesForLabel: return 4;
        default: return 3;
    }
}

SolveBudget budget_from(const RunConfig& cfg) {
    SolveBudget b;
    b.max_nodes = cfg.node_budget;
    b.time_limit = std::chrono::milliseconds(static_cast<std::int64_t>(cfg.timeout_s * 1000.0));
    b.workers = cfg.workers;
    return b;
}

Dataset load_dataset(const std::string& x_path, const std::string& y_path) {
    Tensor inputs = read_npy(x_path);
    if (inputs.rank() == 1)
        inputs = inputs.is_float()
                     ? Tensor::from_f64({inputs.shape()[0], 1}, inputs.as_f64(), Dtype::f64)
                     : Tensor::from_i64({inputs.shape()[0], 1}, inputs.as_i64(), Dtype::i64);
    std::optional<Tensor> labels;
    if (!y_path.empty()) labels = read_npy(y_path);
    return make_dataset(std::move(inputs), std::move(labels));
}

}  // namespace

RunConfig parse_args(const std::vector<std::string>& args) {
    if (args.empty())
        raise(ErrorKind::ConfigError, "usage: nnrules <analyze|prove|monitor> [flags]");
    RunConfig cfg;
    cfg.command = args[0];
    if (cfg.command != "analyze" && cfg.command != "prove" && cfg.command != "monitor")
        raise(ErrorKind::ConfigError, "unknown command '" + cfg.command + "'");

    const std::set<std::string> dropped = {"-mp", "-onx", "-onx_map"};
    std::size_t i = 1;
    auto need_value = [&](const std::string& flag) -> std::string {
        if (i + 1 >= args.size()) raise(ErrorKind::ConfigError, flag + " needs a value");
        return args[++i];
    };
    auto int_value = [&](const std::string& flag) -> std::int64_t {
        std::string v = need_value(flag);
        try {
            return std::stoll(v);
        } catch (const std::exception&) {
            raise(ErrorKind::ConfigError, flag + " needs an integer, got '" + v + "'");
        }
    };
    auto double_value = [&](const std::string& flag) -> double {
        std::string v = need_value(flag);
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            raise(ErrorKind::ConfigError, flag + " needs a number, got '" + v + "'");
        }
    };
    auto bool_flag = [&](bool& target) {
        // "-flag True", "-flag False", or bare "-flag"
        bool v = true;
        if (i + 1 < args.size() && parse_bool_token(args[i + 1], v)) ++i;
        target = v;
    };

    for (; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (dropped.count(a))
            raise(ErrorKind::ConfigError,
                  a + " is not supported: the verifier is built in and consumes the model JSON "
                      "given with -m");
        if (a == "-m") cfg.model_path = need_value(a);
        else if (a == "-wd") cfg.workdir = need_value(a);
        else if (a == "-tx") cfg.train_x = need_value(a);
        else if (a == "-ty") cfg.train_y = need_value(a);
        else if (a == "-vx") cfg.val_x = need_value(a);
        else if (a == "-vy") cfg.val_y = need_value(a);
        else if (a == "-layer_name") cfg.layer_name = need_value(a);
        else if (a == "-odl") bool_flag(cfg.only_dense);
        else if (a == "-oal") bool_flag(cfg.dense_and_activation);
        else if (a == "-inptype") cfg.inptype = static_cast<int>(int_value(a));
        else if (a == "-type") cfg.post_type = static_cast<int>(int_value(a));
        else if (a == "-acts") bool_flag(cfg.acts);
        else if (a == "-top") bool_flag(cfg.top);
        else if (a == "-sr") bool_flag(cfg.skip_rules);
        else if (a == "-b") bool_flag(cfg.balance);
        else if (a == "-c") bool_flag(cfg.confidence);
        else if (a == "-rs") cfg.seed = static_cast<std::uint64_t>(int_value(a));
        else if (a == "-sentinel") cfg.sentinel = int_value(a);
        else if (a == "-label") cfg.label = int_value(a);
        else if (a == "-pred") bool_flag(cfg.pred);
        else if (a == "-min_const") bool_flag(cfg.min_const);
        else if (a == "-cp") cfg.constraints_path = need_value(a);
        else if (a == "-timeout") cfg.timeout_s = double_value(a);
        else if (a == "-node_budget") cfg.node_budget = int_value(a);
        else if (a == "-workers") cfg.workers = static_cast<unsigned>(int_value(a));
        else if (cfg.command == "monitor" && (a == "rules" || a == "classifiers"))
            cfg.monitor_mode = a;
        else
            raise(ErrorKind::ConfigError, "unknown flag '" + a + "'");
    }

    if (cfg.command != "monitor" && !cfg.monitor_mode.empty())
        raise(ErrorKind::ConfigError, "mode argument is only valid for monitor");
    if (!cfg.constraints_path.empty() && (cfg.pred || cfg.min_const))
        raise(ErrorKind::ConfigError, "-cp and -pred/-min_const are mutually exclusive");
    if (cfg.inptype != 0 && cfg.inptype != 1)
        raise(ErrorKind::ConfigError, "-inptype must be 0 or 1");
    if (cfg.post_type < 0 || cfg.post_type > 3)
        raise(ErrorKind::ConfigError, "-type must be 0..3");
    return cfg;
}

namespace {

std::pair<std::vector<ActivationMatrix>, LabelVector> collect_and_label(
    const Network* net, const Dataset& data, const RunConfig& cfg, ExtractionConfig& ecfg) {
    PostCondition pc{cfg.post_type, cfg.sentinel};
    if (cfg.inptype == 1) {
        if (cfg.post_type != 3)
            raise(ErrorKind::ConfigError,
                  "inptype 1 supplies activation vectors; the model cannot be run, use -type 3");
        std::vector<ActivationMatrix> acts = collect_activations_passthrough(data, cfg.acts);
        if (!data.labels) raise(ErrorKind::MissingLabels, "type 3 needs -ty");
        LabelVector labels;
        labels.values = data.labels->as_i64();
        return {std::move(acts), std::move(labels)};
    }
    std::vector<ActivationMatrix> acts = collect_activations(*net, data, ecfg);
    LabelVector labels = label_dataset(*net, data, pc);
    return {std::move(acts), std::move(labels)};
}

RuleSet merge_rulesets(const std::vector<RuleSet>& parts) {
    RuleSet merged;
    for (const RuleSet& part : parts)
        for (const auto& [label, rules] : part.by_label)
            for (const Rule& r : rules) merged.by_label[label].push_back(r);
    return merged;
}

}  // namespace

int cmd_analyze(const RunConfig& cfg, std::ostream& err) {
    try {
        if (cfg.workdir.empty()) raise(ErrorKind::ConfigError, "analyze needs -wd");
        if (cfg.train_x.empty()) raise(ErrorKind::ConfigError, "analyze needs -tx");
        if (cfg.model_path.empty() && cfg.inptype != 1)
            raise(ErrorKind::ConfigError, "analyze needs -m (or -inptype 1)");
        bool needs_labels = cfg.post_type == 1 || cfg.post_type == 2 || cfg.post_type == 3;
        if (needs_labels && cfg.train_y.empty())
            raise(ErrorKind::ConfigError, "MissingLabels: -type " +
                                              std::to_string(cfg.post_type) + " needs -ty");
        if (needs_labels && !cfg.val_x.empty() && cfg.val_y.empty())
            raise(ErrorKind::ConfigError, "MissingLabels: -vx with -type " +
                                              std::to_string(cfg.post_type) + " needs -vy");

        std::optional<Network> net;
        if (!cfg.model_path.empty()) net = load_model(cfg.model_path);

        ExtractionConfig ecfg;
        ecfg.acts = cfg.acts;
        ecfg.inptype = cfg.inptype;
        ecfg.balance = cfg.balance;
        ecfg.use_confidence = cfg.confidence;
        ecfg.seed = cfg.seed;
        if (cfg.inptype != 1) {
            if (cfg.layer_name) {
                if (cfg.only_dense || cfg.dense_and_activation)
                    raise(ErrorKind::ConfigError, "-layer_name excludes -odl/-oal");
                ecfg.selection = LayerSelection::explicit_tap;
                ecfg.taps = {tap_from_string(*cfg.layer_name)};
            } else if (cfg.dense_and_activation) {
                ecfg.selection = LayerSelection::dense_pre_and_post;
            } else if (cfg.only_dense) {
                ecfg.selection = LayerSelection::dense_pre;
            } else {
                raise(ErrorKind::ConfigError, "analyze needs -layer_name, -odl, or -oal");
            }
        }

        Dataset train = load_dataset(cfg.train_x, cfg.train_y);
        auto [train_acts, train_labels] = collect_and_label(net ? &*net : nullptr, train, cfg, ecfg);
        std::vector<double> weights;
        if (cfg.inptype != 1) weights = sample_weights(*net, train, train_labels, ecfg);

        std::optional<Dataset> val;
        std::vector<ActivationMatrix> val_acts;
        LabelVector val_labels;
        if (!cfg.val_x.empty() && !cfg.skip_rules) {
            val = load_dataset(cfg.val_x, cfg.val_y);
            auto pair = collect_and_label(net ? &*net : nullptr, *val, cfg, ecfg);
            val_acts = std::move(pair.first);
            val_labels = std::move(pair.second);
        }

        std::filesystem::create_directories(std::filesystem::path(cfg.workdir) / "trees");
        Manifest manifest;
        manifest.model_path = cfg.model_path;
        manifest.post_type = cfg.post_type;
        manifest.inptype = cfg.inptype;
        manifest.seed = cfg.seed;

        std::vector<RuleSet> per_layer;
        for (std::size_t t = 0; t < train_acts.size(); ++t) {
            DecisionTree tree =
                fit_tree(train_acts[t], train_labels, weights, cfg.seed, std::nullopt, cfg.acts);
            std::string rel = tree_filename(tree.layer);
            save_tree(tree, (std::filesystem::path(cfg.workdir) / rel).string());
            manifest.layers.push_back(LayerArtifact{tree.layer, cfg.acts, rel});

            if (cfg.skip_rules) continue;
            RuleSet rules = extract_rules(tree);
            for (auto& [label, list] : rules.by_label)
                for (Rule& r : list) {
                    r.train = evaluate_rule(r, train_acts[t], train_labels);
                    if (val) r.test = evaluate_rule(r, val_acts[t], val_labels);
                }
            if (cfg.top) rules = keep_top_rules(rules);
            per_layer.push_back(std::move(rules));
        }

        if (!cfg.skip_rules) {
            save_ruleset(merge_rulesets(per_layer), cfg.workdir);
            manifest.has_ruleset = true;
        }
        for (const LayerArtifact& l : manifest.layers)
            manifest.file_hashes[l.tree_file] =
                hash_file((std::filesystem::path(cfg.workdir) / l.tree_file).string());
        if (manifest.has_ruleset)
            manifest.file_hashes["ruleset.csv"] =
                hash_file((std::filesystem::path(cfg.workdir) / "ruleset.csv").string());
        save_manifest(manifest, cfg.workdir);
        return 0;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

int cmd_prove(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.workdir.empty()) raise(ErrorKind::ConfigError, "prove needs -wd");
        if (!cfg.label) raise(ErrorKind::ConfigError, "prove needs -label");
        if (cfg.train_x.empty()) raise(ErrorKind::ConfigError, "prove needs -tx");
        if (!cfg.pred && !cfg.min_const && cfg.constraints_path.empty())
            raise(ErrorKind::ConfigError, "prove needs one of -pred, -min_const, -cp");

        Manifest manifest = load_manifest(cfg.workdir);
        if (!manifest.has_ruleset)
            raise(ErrorKind::NoRulesForLabel, "working directory has no ruleset.csv");
        if (manifest.inptype == 1)
            raise(ErrorKind::ConfigError,
                  "prove needs inptype 0 artifacts (the model must be runnable on -tx)");

        std::string model_path = !cfg.model_path.empty() ? cfg.model_path : manifest.model_path;
        if (model_path.empty()) raise(ErrorKind::ConfigError, "no model: pass -m");
        Network net = load_model(model_path);

        RuleSet rules = load_ruleset(cfg.workdir);
        const Rule& rule = select_max_support(rules, *cfg.label);

        Dataset train = load_dataset(cfg.train_x, "");

        OutputProperty property = OutputProperty::argmax(0);
        if (!cfg.constraints_path.empty()) {
            std::vector<std::vector<double>> support_outputs;
            for (const std::vector<double>& x : rule_support_inputs(net, rule, train))
                support_outputs.push_back(net.forward(x));
            if (support_outputs.empty())
                raise(ErrorKind::EmptySupport, "rule has no support in -tx");
            property = parse_constraints_file(cfg.constraints_path, support_outputs);
        } else {
            auto target = static_cast<std::size_t>(*cfg.label);
            if (target >= net.output_dim())
                raise(ErrorKind::ConfigError, "-label is not a valid output class");
            property = cfg.min_const ? OutputProperty::argmin(target)
                                     : OutputProperty::argmax(target);
        }

        ProofReport report = prove_rule(net, rule, property, train, budget_from(cfg));

        std::string json = proof_report_to_json(report, rule, property);
        if (!cfg.val_x.empty()) {
            // informational coverage: share of -vx points inside the proved boxes
            Dataset val = load_dataset(cfg.val_x, "");
            std::size_t inside = 0;
            for (std::size_t r = 0; r < val.inputs.rows(); ++r) {
                std::vector<double> x = val.inputs.row_f64(r);
                bool in = x.size() == report.support_region.input_lo.size();
                for (std::size_t j = 0; in && j < x.size(); ++j)
                    in = x[j] >= report.support_region.input_lo[j] &&
                         x[j] <= report.support_region.input_hi[j];
                if (in) {
                    std::vector<double> v = net.forward_to_layer(x, report.support_region.tap);
                    for (std::size_t j = 0; in && j < v.size(); ++j)
                        in = v[j] >= report.support_region.layer_lo[j] &&
                             v[j] <= report.support_region.layer_hi[j];
                }
                if (in) ++inside;
            }
            nlohmann::ordered_json doc = nlohmann::ordered_json::parse(json);
            doc["box_coverage"] = val.inputs.rows()
                                      ? static_cast<double>(inside) /
                                            static_cast<double>(val.inputs.rows())
                                      : 0.0;
            json = doc.dump(2);
        }

        std::filesystem::create_directories(std::filesystem::path(cfg.workdir) / "proofs");
        std::string report_path =
            (std::filesystem::path(cfg.workdir) / "proofs" /
             (std::to_string(*cfg.label) + ".json"))
                .string();
        std::ofstream f(report_path);
        if (!f) raise(ErrorKind::IoFailure, "cannot write " + report_path);
        f << json << "\n";
        out << json << "\n";

        if (!report.counterexamples.empty()) return 10;
        if (report.any_timeout || !report.outcome.proved()) return 11;
        return 0;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

int cmd_monitor(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.workdir.empty()) raise(ErrorKind::ConfigError, "monitor needs -wd");
        if (cfg.train_x.empty()) raise(ErrorKind::ConfigError, "monitor needs -tx");
        if (cfg.monitor_mode.empty())
            raise(ErrorKind::ConfigError, "monitor needs a mode: rules or classifiers");

        Manifest manifest = load_manifest(cfg.workdir);
        if (manifest.inptype == 1)
            raise(ErrorKind::ConfigError, "monitor needs inptype 0 artifacts");
        std::string model_path = !cfg.model_path.empty() ? cfg.model_path : manifest.model_path;
        if (model_path.empty()) raise(ErrorKind::ConfigError, "no model: pass -m");
        Network net = load_model(model_path);

        Dataset data = load_dataset(cfg.train_x, cfg.train_y);

        MonitorReport report;
        if (cfg.monitor_mode == "rules") {
            if (!manifest.has_ruleset)
                raise(ErrorKind::NoRulesForLabel, "no ruleset.csv in working directory");
            RuleSet all = load_ruleset(cfg.workdir);
            std::vector<RuleSet> per_layer(manifest.layers.size());
            std::vector<LayerTap> taps;
            std::vector<bool> acts;
            for (std::size_t t = 0; t < manifest.layers.size(); ++t) {
                taps.push_back(manifest.layers[t].tap);
                acts.push_back(manifest.layers[t].acts);
                for (const auto& [label, list] : all.by_label)
                    for (const Rule& r : list)
                        if (r.layer == manifest.layers[t].tap)
                            per_layer[t].by_label[label].push_back(r);
            }
            report = monitor_rules(net, per_layer, taps, acts, data);
        } else {
            std::vector<DecisionTree> trees;
            for (const LayerArtifact& l : manifest.layers)
                trees.push_back(
                    load_tree((std::filesystem::path(cfg.workdir) / l.tree_file).string()));
            report = monitor_classifiers(net, trees, data);
        }
        out << monitor_report_to_json(report) << "\n";
        return 0;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_args(args);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    if (cfg.command == "analyze") return cmd_analyze(cfg, err);
    if (cfg.command == "prove") return cmd_prove(cfg, out, err);
    return cmd_monitor(cfg, out, err);
}

}  // namespace nnrules

// Acceptance suite: each criterion prints one PASS/FAIL line; the process
// exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nnrules/cli.hpp"
#include "nnrules/monitor.hpp"
#include "nnrules/npy.hpp"
#include "nnrules/prover.hpp"
#include "oracle.hpp"

using namespace nnrules;
namespace fs = std::filesystem;

namespace {

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool cond, const std::string& what) {
    if (!cond) throw CheckFailure(what);
}

std::mt19937_64 rng_for(std::uint64_t salt) { return std::mt19937_64(0xACCE97ULL ^ salt); }

Dataset dataset_from_rows(const std::vector<std::vector<double>>& rows,
                          std::optional<std::vector<std::int64_t>> labels = std::nullopt) {
    std::size_t n = rows.size(), d = rows.front().size();
    std::vector<double> flat;
    flat.reserve(n * d);
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    std::optional<Tensor> lt;
    if (labels) lt = Tensor::from_i64({n}, *labels);
    return make_dataset(Tensor::from_f64({n, d}, flat), std::move(lt));
}

ActivationMatrix matrix_of(std::size_t rows, std::size_t cols, std::vector<double> values) {
    ActivationMatrix m;
    m.layer = LayerTap{"dense_0", true};
    m.n_rows = rows;
    m.n_cols = cols;
    m.values = std::move(values);
    return m;
}

// ---------------------------------------------------------------------------
// 1. Every extracted rule scores exactly 100% precision on its training data.
void criterion_pure_rule_precision() {
    std::mt19937_64 rng = rng_for(1);
    std::size_t rules_checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 2 + rng() % 499;       // N <= 500
        std::size_t f = 1 + rng() % 16;        // features <= 16
        std::int64_t classes = 2 + rng() % 4;  // classes <= 5
        std::uniform_real_distribution<double> xdist(-3.0, 3.0);
        std::vector<double> values(n * f);
        for (double& v : values) v = xdist(rng);
        LabelVector labels;
        labels.values.resize(n);
        for (auto& y : labels.values) y = static_cast<std::int64_t>(rng() % classes);

        ActivationMatrix acts = matrix_of(n, f, std::move(values));
        DecisionTree tree = fit_tree(acts, labels);
        RuleSet rules = extract_rules(tree);
        for (const auto& [label, list] : rules.by_label)
            for (const Rule& r : list) {
                Metrics m = evaluate_rule(r, acts, labels);
                expect(m.precision == 100.0,
                       "rule precision " + std::to_string(m.precision) + " != 100");
                ++rules_checked;
            }
    }
    expect(rules_checked > 100, "too few rules extracted to be meaningful");
}

// ---------------------------------------------------------------------------
// 2. solve_query agrees with exhaustive ReLU-phase enumeration; every SAT
//    witness replays with a positive violation margin.
void criterion_verifier_oracle() {
    std::mt19937_64 rng = rng_for(2);
    std::uniform_real_distribution<double> center(-1.0, 1.0);
    std::uniform_real_distribution<double> radius(0.05, 1.2);
    int disagreements = 0, sats = 0, unsats = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t inputs = 1 + rng() % 4;  // <= 4 inputs
        std::size_t n_layers = 1 + rng() % 3;
        std::vector<std::size_t> hidden;
        std::size_t total = 0;
        for (std::size_t l = 0; l < n_layers; ++l) {
            std::size_t w = 1 + rng() % 6;  // <= 6 per layer
            if (total + w > 12) w = 12 - total;
            if (w == 0) break;
            hidden.push_back(w);
            total += w;
        }
        if (hidden.empty()) hidden.push_back(1);
        std::size_t outputs = 2 + rng() % 3;
        Network net = testsupport::random_network(rng, inputs, hidden, outputs);

        BoxRegion box;
        box.tap = LayerTap{net.layers()[hidden.size() - 1].name, true};
        for (std::size_t j = 0; j < inputs; ++j) {
            double c = center(rng), r = radius(rng);
            box.input_lo.push_back(c - r);
            box.input_hi.push_back(c + r);
        }
        std::size_t dim = net.tap_dim(box.tap);
        box.layer_lo.assign(dim, -std::numeric_limits<double>::infinity());
        box.layer_hi.assign(dim, std::numeric_limits<double>::infinity());

        std::size_t cls = rng() % outputs;
        std::size_t other = (cls + 1 + rng() % (outputs - 1)) % outputs;
        OutputPredicate viol;
        viol.coeffs.assign(outputs, 0.0);
        viol.coeffs[other] = 1.0;
        viol.coeffs[cls] = -1.0;
        viol.rhs = 0.0;
        viol.strict = true;

        QueryResult q = solve_query(net, box, std::nullopt, viol, SolveBudget{});
        expect(q.status != QueryStatus::timeout, "query timed out under a generous budget");
        testsupport::OracleVerdict o = testsupport::oracle_solve(net, box, std::nullopt, viol);
        bool impl_sat = q.status == QueryStatus::sat;
        bool oracle_sat = o == testsupport::OracleVerdict::sat;
        if (impl_sat != oracle_sat) ++disagreements;
        if (impl_sat) {
            ++sats;
            double margin = viol.evaluate(net.forward(q.witness));
            expect(margin > 0.0, "SAT witness does not replay with positive margin");
            for (std::size_t j = 0; j < inputs; ++j)
                expect(q.witness[j] >= box.input_lo[j] - 1e-9 &&
                           q.witness[j] <= box.input_hi[j] + 1e-9,
                       "witness escapes the input box");
        } else {
            ++unsats;
        }
    }
    expect(disagreements == 0, std::to_string(disagreements) + " oracle disagreements");
    expect(sats > 10 && unsats > 10, "instance mix too lopsided to be meaningful");
}

// ---------------------------------------------------------------------------
// 3. prove_rule: <= 3 iterations, <= 3*(C-1) queries, no timeout.
void criterion_prove_rule_termination() {
    std::mt19937_64 rng = rng_for(3);
    std::uniform_real_distribution<double> xdist(-1.5, 1.5);
    int pairs = 0;
    while (pairs < 100) {
        std::size_t inputs = 2 + rng() % 3;
        std::size_t outputs = 2 + rng() % 4;  // C <= 5
        std::vector<std::size_t> hidden{2 + rng() % 3, 2 + rng() % 3};
        Network net = testsupport::random_network(rng, inputs, hidden, outputs);

        std::vector<std::vector<double>> rows(25, std::vector<double>(inputs));
        for (auto& r : rows)
            for (double& v : r) v = xdist(rng);
        Dataset data = dataset_from_rows(rows);

        ExtractionConfig cfg;
        cfg.taps = {LayerTap{"dense_1", true}};
        ActivationMatrix acts = collect_activations(net, data, cfg)[0];
        LabelVector labels = label_dataset(net, data, PostCondition{0});
        RuleSet rules = extract_rules(fit_tree(acts, labels));
        if (rules.by_label.empty()) continue;

        for (const auto& [label, list] : rules.by_label) {
            if (pairs >= 100) break;
            const Rule& rule = select_max_support(rules, label);
            ProofReport report = prove_rule(net, rule,
                                            OutputProperty::argmax(static_cast<std::size_t>(label)),
                                            data, SolveBudget{});
            expect(report.outcome.proved(), "prove_rule failed to terminate with a proof");
            expect(!report.any_timeout, "prove_rule hit a timeout with ample budgets");
            expect(report.iterations.size() <= 3, "more than 3 iterations");
            std::size_t queries = 0;
            for (const IterationRecord& it : report.iterations) queries += it.queries.size();
            expect(queries <= 3 * (outputs - 1), "query count above 3*(C-1)");
            ++pairs;
        }
    }
}

// ---------------------------------------------------------------------------
// 4. Boxes equal an independent min/max scan and contain the support.
void criterion_box_correctness() {
    std::mt19937_64 rng = rng_for(4);
    std::uniform_real_distribution<double> xdist(-4.0, 4.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t inputs = 1 + rng() % 5;
        Network net = testsupport::random_network(rng, inputs, {1 + rng() % 5}, 2);
        LayerTap tap{"dense_0", true};
        std::size_t n = 1 + rng() % 20;
        std::vector<std::vector<double>> support(n, std::vector<double>(inputs));
        for (auto& row : support)
            for (double& v : row) v = xdist(rng);

        auto [box, anchor] = compute_boxes(net, support, tap);

        std::vector<double> in_lo = support[0], in_hi = support[0];
        std::vector<double> ly_lo = net.forward_to_layer(support[0], tap), ly_hi = ly_lo;
        for (const auto& row : support) {
            std::vector<double> v = net.forward_to_layer(row, tap);
            for (std::size_t j = 0; j < inputs; ++j) {
                in_lo[j] = std::min(in_lo[j], row[j]);
                in_hi[j] = std::max(in_hi[j], row[j]);
            }
            for (std::size_t j = 0; j < v.size(); ++j) {
                ly_lo[j] = std::min(ly_lo[j], v[j]);
                ly_hi[j] = std::max(ly_hi[j], v[j]);
            }
        }
        expect(box.input_lo == in_lo && box.input_hi == in_hi, "input box != scan");
        expect(box.layer_lo == ly_lo && box.layer_hi == ly_hi, "layer box != scan");
        expect(anchor.x0 == support.front(), "anchor is not the lowest-index point");
        for (const auto& row : support) {
            std::vector<double> v = net.forward_to_layer(row, tap);
            for (std::size_t j = 0; j < inputs; ++j)
                expect(row[j] >= box.input_lo[j] && row[j] <= box.input_hi[j],
                       "support input escapes the box");
            for (std::size_t j = 0; j < v.size(); ++j)
                expect(v[j] >= box.layer_lo[j] && v[j] <= box.layer_hi[j],
                       "support activation escapes the box");
        }
    }
}

// ---------------------------------------------------------------------------
// 5. classifiers mode is at least 2x faster than a 1024-rule linear scan,
//    with identical verdicts on pure-leaf inputs.
void criterion_monitor_speedup() {
    std::mt19937_64 rng = rng_for(5);
    const std::size_t width = 8, depth = 8, n_layers = 4, n_inputs = 1000;

    std::vector<DenseLayer> layers;
    std::size_t in = width;
    for (std::size_t l = 0; l < n_layers; ++l) {
        DenseLayer d;
        d.name = "dense_" + std::to_string(l);
        d.in_dim = in;
        d.out_dim = width;
        d.activation = Activation::relu;
        std::uniform_real_distribution<double> w(-0.6, 0.8);
        for (std::size_t k = 0; k < in * width; ++k) d.weights.push_back(w(rng));
        for (std::size_t k = 0; k < width; ++k) d.bias.push_back(0.1);
        layers.push_back(std::move(d));
        in = width;
    }
    DenseLayer out{"out", width, 2, std::vector<double>(2 * width, 0.1),
                   std::vector<double>(2, 0.0), Activation::linear};
    layers.push_back(out);
    Network net(width, std::move(layers));

    // complete depth-8 trees; every leaf pure, labels alternating
    auto build_tree = [&](std::size_t layer_idx) {
        DecisionTree t;
        t.layer = LayerTap{"dense_" + std::to_string(layer_idx), true};
        t.n_features = width;
        std::function<int(std::size_t, std::size_t&)> rec = [&](std::size_t d,
                                                                std::size_t& leaf_counter) {
            if (d == depth) {
                TreeNode leaf;
                leaf.counts = {{static_cast<std::int64_t>(leaf_counter++ % 2), 3}};
                t.nodes.push_back(std::move(leaf));
                return static_cast<int>(t.nodes.size() - 1);
            }
            t.nodes.push_back(TreeNode{});
            int self = static_cast<int>(t.nodes.size() - 1);
            std::uniform_real_distribution<double> thr(0.0, 1.5);
            double threshold = thr(rng);
            int left = rec(d + 1, leaf_counter);
            int right = rec(d + 1, leaf_counter);
            t.nodes[static_cast<std::size_t>(self)] =
                TreeNode{static_cast<int>(d % width), threshold, left, right, {}};
            return self;
        };
        std::size_t leaf_counter = 0;
        rec(0, leaf_counter);
        return t;
    };

    std::vector<DecisionTree> trees;
    std::vector<RuleSet> rulesets;
    std::vector<LayerTap> taps;
    std::vector<bool> acts;
    std::size_t total_rules = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
        trees.push_back(build_tree(l));
        rulesets.push_back(extract_rules(trees.back()));
        total_rules += rulesets.back().total_rules();
        taps.push_back(trees.back().layer);
        acts.push_back(false);
    }
    expect(total_rules >= 1000, "synthetic rule count below 1000");

    std::uniform_real_distribution<double> xdist(-1.0, 1.0);
    std::vector<std::vector<double>> rows(n_inputs, std::vector<double>(width));
    for (auto& r : rows)
        for (double& v : r) v = xdist(rng);
    Dataset data = dataset_from_rows(rows);

    MonitorReport by_rules = monitor_rules(net, rulesets, taps, acts, data);
    MonitorReport by_trees = monitor_classifiers(net, trees, data);

    for (std::size_t i = 0; i < n_inputs; ++i)  // all leaves are pure
        expect(by_rules.verdicts[i] == by_trees.verdicts[i], "pure-leaf verdict mismatch");

    expect(by_trees.elapsed_ms > 0.0 || by_rules.elapsed_ms > 0.0, "timers measured nothing");
    expect(by_rules.elapsed_ms >= 2.0 * by_trees.elapsed_ms,
           "classifiers mode not 2x faster: rules " + std::to_string(by_rules.elapsed_ms) +
               "ms vs classifiers " + std::to_string(by_trees.elapsed_ms) + "ms");
}

// ---------------------------------------------------------------------------
// 6. Fixed seed => byte-identical ruleset.csv; verdicts match across 1- and
//    4-worker schedules.
void criterion_determinism() {
    fs::path root = fs::temp_directory_path() / "nnrules_acceptance_det";
    fs::remove_all(root);
    fs::create_directories(root);

    std::mt19937_64 rng = rng_for(6);
    std::uniform_real_distribution<double> xdist(-2.0, 2.0);
    std::vector<double> xs;
    std::vector<std::int64_t> ys;
    for (int i = 0; i < 40; ++i) {
        xs.push_back(xdist(rng));
        xs.push_back(xdist(rng));
        ys.push_back(static_cast<std::int64_t>(rng() % 2));
    }
    write_npy(Tensor::from_f64({40, 2}, xs), (root / "x.npy").string());
    write_npy(Tensor::from_i64({40}, ys), (root / "y.npy").string());
    {
        std::ofstream f((root / "model.json").string());
        f << R"({"input_dim": 2, "layers": [
            {"name": "dense_0", "weights": [[0.7, -0.3], [0.2, 0.9]], "bias": [0.05, -0.05],
             "activation": "relu"},
            {"name": "out", "weights": [[1, 0], [0, 1]], "bias": [0, 0],
             "activation": "linear"}]})";
    }
    auto analyze_into = [&](const std::string& wd) {
        std::ostringstream sink;
        RunConfig cfg = parse_args({"analyze", "-m", (root / "model.json").string(), "-wd",
                                    (root / wd).string(), "-tx", (root / "x.npy").string(),
                                    "-ty", (root / "y.npy").string(), "-vx",
                                    (root / "x.npy").string(), "-vy", (root / "y.npy").string(),
                                    "-type", "1", "-layer_name", "dense_0", "-rs", "11"});
        return cmd_analyze(cfg, sink);
    };
    expect(analyze_into("wd_a") == 0, "analyze run A failed");
    expect(analyze_into("wd_b") == 0, "analyze run B failed");
    std::ifstream a((root / "wd_a" / "ruleset.csv").string()),
        b((root / "wd_b" / "ruleset.csv").string());
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    expect(!sa.empty() && sa == sb, "ruleset.csv differs across identical runs");

    for (int trial = 0; trial < 20; ++trial) {
        Network net = testsupport::random_network(rng, 2, {3, 3}, 2);
        BoxRegion box;
        box.tap = LayerTap{"dense_1", true};
        box.input_lo = {-1.0, -1.0};
        box.input_hi = {1.0, 1.0};
        std::size_t dim = net.tap_dim(box.tap);
        box.layer_lo.assign(dim, -std::numeric_limits<double>::infinity());
        box.layer_hi.assign(dim, std::numeric_limits<double>::infinity());
        OutputPredicate viol;
        viol.coeffs = {1.0, -1.0};
        viol.rhs = 0.0;
        viol.strict = true;
        SolveBudget serial;
        serial.workers = 1;
        SolveBudget parallel;
        parallel.workers = 4;
        QueryStatus s1 = solve_query(net, box, std::nullopt, viol, serial).status;
        QueryStatus s2 = solve_query(net, box, std::nullopt, viol, parallel).status;
        QueryStatus s3 = solve_query(net, box, std::nullopt, viol, serial).status;
        expect(s1 == s2 && s1 == s3, "verdict changed across schedules");
    }
    fs::remove_all(root);
}

// ---------------------------------------------------------------------------
// 7. NPY, tree JSON, ruleset.csv round-trip losslessly (100 each).
void criterion_round_trips() {
    std::mt19937_64 rng = rng_for(7);

    for (int i = 0; i < 100; ++i) {
        std::uniform_int_distribution<int> rank_dist(0, 3);
        std::uniform_int_distribution<std::size_t> dim_dist(1, 6);
        std::vector<std::size_t> shape;
        int rank = rank_dist(rng);
        for (int d = 0; d < rank; ++d) shape.push_back(dim_dist(rng));
        std::size_t n = Tensor::shape_numel(shape);
        Dtype dt = static_cast<Dtype>(rng() % 4);
        Tensor t;
        if (dtype_is_float(dt)) {
            std::uniform_real_distribution<double> val(-50.0, 50.0);
            std::vector<double> vals(n);
            for (double& v : vals) {
                v = val(rng);
                if (dt == Dtype::f32) v = static_cast<float>(v);
            }
            t = Tensor::from_f64(shape, vals, dt);
        } else {
            std::vector<std::int64_t> vals(n);
            for (auto& v : vals) v = static_cast<std::int64_t>(rng() % 100000) - 50000;
            t = Tensor::from_i64(shape, vals, dt);
        }
        expect(read_npy_bytes(write_npy_bytes(t)).bit_equal(t), "NPY round trip changed data");
    }

    std::uniform_real_distribution<double> xdist(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        std::size_t n = 4 + rng() % 40, f = 1 + rng() % 5;
        std::vector<double> values(n * f);
        for (double& v : values) v = xdist(rng);
        LabelVector labels;
        labels.values.resize(n);
        for (auto& y : labels.values) y = static_cast<std::int64_t>(rng() % 3);
        ActivationMatrix acts = matrix_of(n, f, std::move(values));
        DecisionTree tree = fit_tree(acts, labels, {}, rng());
        DecisionTree back = tree_from_json(tree_to_json(tree));
        expect(back.nodes.size() == tree.nodes.size(), "tree node count changed");
        expect(back.seed == tree.seed, "tree seed lost");
        for (int k = 0; k < 20; ++k) {
            std::vector<double> x(f);
            for (double& v : x) v = xdist(rng);
            expect(back.predict(x) == tree.predict(x), "tree round trip predicts differently");
        }

        RuleSet rules = extract_rules(tree);
        for (auto& [label, list] : rules.by_label)
            for (Rule& r : list) r.train = evaluate_rule(r, acts, labels);
        RuleSet rs_back = ruleset_from_csv(ruleset_to_csv(rules));
        expect(rs_back.by_label.size() == rules.by_label.size(), "ruleset labels changed");
        for (const auto& [label, list] : rules.by_label) {
            const auto& blist = rs_back.by_label.at(label);
            expect(blist.size() == list.size(), "rule count changed");
            for (std::size_t k = 0; k < list.size(); ++k) {
                expect(blist[k].terms == list[k].terms, "rule terms changed");
                expect(blist[k].support == list[k].support, "rule support changed");
                expect(blist[k].train.has_value() && list[k].train.has_value(),
                       "rule metrics dropped");
                expect(blist[k].train->precision == list[k].train->precision &&
                           blist[k].train->recall == list[k].train->recall &&
                           blist[k].train->f1 == list[k].train->f1,
                       "rule metrics changed");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 8. Greedy explanation minimization matches the exhaustive order-first
//    oracle on 3-input toys.
void criterion_explanation_minimality() {
    std::mt19937_64 rng = rng_for(8);
    std::uniform_real_distribution<double> xdist(-1.0, 1.0);
    int checked = 0;
    while (checked < 25) {
        Network net = testsupport::random_network(rng, 3, {1 + rng() % 4}, 2);
        LayerTap tap{"dense_0", true};
        std::vector<double> x{xdist(rng), xdist(rng), xdist(rng)};
        std::vector<double> v = net.forward_to_layer(x, tap);

        Rule sigma;
        sigma.layer = tap;
        std::uniform_real_distribution<double> slack(0.01, 0.2);
        for (std::size_t nidx = 0; nidx < v.size(); ++nidx)
            if (v[nidx] > 0.0) sigma.terms.push_back({nidx, TermOp::gt, v[nidx] - slack(rng)});
        if (sigma.terms.empty()) continue;

        std::vector<double> dom_lo{-1.5, -1.5, -1.5}, dom_hi{1.5, 1.5, 1.5};
        std::vector<std::size_t> fixed =
            minimize_explanation(net, x, sigma, tap, dom_lo, dom_hi, SolveBudget{});

        std::vector<double> lo = x, hi = x;
        std::vector<std::size_t> oracle_fixed;
        for (std::size_t i = 0; i < 3; ++i) {
            double save_lo = lo[i], save_hi = hi[i];
            lo[i] = dom_lo[i];
            hi[i] = dom_hi[i];
            if (!testsupport::oracle_implication_holds(net, tap, lo, hi, sigma)) {
                lo[i] = save_lo;
                hi[i] = save_hi;
                oracle_fixed.push_back(i);
            }
        }
        expect(fixed == oracle_fixed, "greedy fixing differs from the oracle");
        ++checked;
    }
}

// ---------------------------------------------------------------------------
// 9. Regression pipeline: type-3 labels from |F(x)-y| < tau, constraints file
//    [0,MIN,tau],[0,MAX,tau], proof lands within two iterations; the bound is
//    grid-verified with zero violations.
void criterion_regression_path() {
    std::mt19937_64 rng = rng_for(9);
    const double tau = 0.1;

    // monotone network: nonnegative weights throughout
    std::uniform_real_distribution<double> w1(0.0, 0.3), w2(0.0, 0.4);
    DenseLayer hidden_layer;
    hidden_layer.name = "dense_0";
    hidden_layer.in_dim = 5;
    hidden_layer.out_dim = 6;
    hidden_layer.activation = Activation::relu;
    for (std::size_t k = 0; k < 30; ++k) hidden_layer.weights.push_back(w1(rng));
    for (std::size_t k = 0; k < 6; ++k) hidden_layer.bias.push_back(0.05);
    DenseLayer out_layer;
    out_layer.name = "out";
    out_layer.in_dim = 6;
    out_layer.out_dim = 1;
    out_layer.activation = Activation::linear;
    for (std::size_t k = 0; k < 6; ++k) out_layer.weights.push_back(w2(rng));
    out_layer.bias.push_back(0.2);
    Network net(5, {hidden_layer, out_layer});

    // in-distribution cluster in [0,1]^5 including its corner points, plus a
    // far-away group the model mispredicts
    std::vector<std::vector<double>> rows;
    rows.push_back(std::vector<double>(5, 0.0));  // cluster lo corner
    rows.push_back(std::vector<double>(5, 1.0));  // cluster hi corner
    std::uniform_real_distribution<double> in01(0.0, 1.0);
    for (int i = 0; i < 60; ++i) {
        std::vector<double> r(5);
        for (double& v : r) v = in01(rng);
        rows.push_back(std::move(r));
    }
    std::uniform_real_distribution<double> far(5.0, 6.0);
    for (int i = 0; i < 10; ++i) {
        std::vector<double> r(5);
        for (double& v : r) v = far(rng);
        rows.push_back(std::move(r));
    }

    // regression targets: exact on the cluster, off by > tau on the far group
    std::uniform_real_distribution<double> noise(-0.03, 0.03);
    std::vector<std::int64_t> property_labels;
    std::vector<double> targets;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double y = net.forward(rows[i])[0];
        if (i < 62)
            y += noise(rng);
        else
            y += 1.0;  // clearly outside tau
        targets.push_back(y);
        property_labels.push_back(std::abs(net.forward(rows[i])[0] - y) < tau ? 1 : 0);
    }

    // the tool side consumes the pre-evaluated labels (type 3)
    Dataset labeled = dataset_from_rows(rows, property_labels);
    LabelVector labels = label_dataset(net, labeled, PostCondition{3});
    ExtractionConfig cfg;
    cfg.taps = {LayerTap{"dense_0", true}};
    ActivationMatrix acts = collect_activations(net, labeled, cfg)[0];
    DecisionTree tree = fit_tree(acts, labels);
    RuleSet rules = extract_rules(tree);
    const Rule& rule = select_max_support(rules, 1);

    Dataset unlabeled = dataset_from_rows(rows);
    std::vector<std::vector<double>> support = rule_support_inputs(net, rule, unlabeled);
    expect(support.size() >= 62, "label-1 rule should cover the cluster");
    std::vector<std::vector<double>> support_outputs;
    for (const auto& r : support) support_outputs.push_back(net.forward(r));
    OutputProperty property = parse_constraints_text(
        "[0,MIN," + std::to_string(tau) + "]\n[0,MAX," + std::to_string(tau) + "]\n",
        support_outputs);

    ProofReport report = prove_rule(net, rule, property, unlabeled, SolveBudget{});
    expect(report.outcome.proved(), "regression rule did not prove");
    expect(report.iterations.size() <= 2, "proof needed more than two iterations");
    expect(report.counterexamples.empty(), "unexpected counterexample");

    // independent grid check: 7^5 = 16807 points over the support box
    auto [box, anchor] = compute_boxes(net, support, rule.layer);
    double lo_bound = property.rows[0].bound, hi_bound = property.rows[1].bound;
    std::size_t violations = 0, grid_points = 0;
    std::vector<std::size_t> idx(5, 0);
    const std::size_t steps = 7;
    for (;;) {
        std::vector<double> g(5);
        for (std::size_t j = 0; j < 5; ++j) {
            double t = steps == 1 ? 0.0 : static_cast<double>(idx[j]) / (steps - 1);
            g[j] = box.input_lo[j] + t * (box.input_hi[j] - box.input_lo[j]);
        }
        ++grid_points;
        double y = net.forward(g)[0];
        if (y < lo_bound || y > hi_bound) ++violations;
        std::size_t j = 0;
        while (j < 5 && ++idx[j] == steps) idx[j++] = 0;
        if (j == 5) break;
    }
    expect(grid_points >= 10000, "grid too sparse");
    expect(violations == 0, std::to_string(violations) + " grid violations of the bound");
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<void()> fn;
};

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "pure-rule training precision (50 random datasets)", 30.0,
         criterion_pure_rule_precision},
        {2, "verifier matches exhaustive phase enumeration (200 networks)", 120.0,
         criterion_verifier_oracle},
        {3, "prove_rule terminates in <= 3 iterations, <= 3*(C-1) queries", 60.0,
         criterion_prove_rule_termination},
        {4, "support boxes equal an independent min/max scan", 5.0, criterion_box_correctness},
        {5, "classifier monitoring is >= 2x faster than rule scans", 60.0,
         criterion_monitor_speedup},
        {6, "determinism: byte-identical ruleset.csv and schedule-stable verdicts", 30.0,
         criterion_determinism},
        {7, "NPY / tree JSON / ruleset.csv round trips (100 each)", 10.0,
         criterion_round_trips},
        {8, "greedy explanations match the exhaustive oracle (25 instances)", 60.0,
         criterion_explanation_minimality},
        {9, "regression constraints pipeline proves within two iterations", 60.0,
         criterion_regression_path},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        std::string failure;
        try {
            c.fn();
        } catch (const std::exception& e) {
            failure = e.what();
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool ok = failure.empty() && elapsed < c.limit_s;
        if (!ok) ++failures;
        std::printf("[%s] criterion %d: %s (%.2fs, limit %.0fs)%s%s\n", ok ? "PASS" : "FAIL",
                    c.id, c.name, elapsed, c.limit_s, failure.empty() ? "" : " - ",
                    failure.c_str());
        std::fflush(stdout);
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}

#include "nnrules/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <limits>
#include <mutex>
#include <thread>

#include "nnrules/linprog.hpp"

namespace nnrules {

namespace {

constexpr double kPruneSlack = 1e-7;  // headroom over the LP tolerance

enum : std::int8_t { kUnset = 0, kOn = 1, kOff = -1 };

// Per-neuron bounds for sigma terms at the tap, resolved once per query.
struct TapConstraints {
    std::vector<double> lo;
    std::vector<double> hi;
};

struct QuerySetup {
    const Network& net;
    const BoxRegion& box;
    TapConstraints tap_bounds;
    OutputPredicate violation;
    std::size_t tap_layer;
    bool tap_post;
    std::size_t n_relu;
};

struct IbpOutcome {
    bool pruned = false;
    std::vector<std::int8_t> effective;  // phase per relu neuron after sign fixing
    int widest_unstable = -1;
};

IbpOutcome run_ibp(const QuerySetup& q, const std::vector<std::int8_t>& phases) {
    IbpOutcome out;
    out.effective = phases;
    std::vector<double> lo = q.box.input_lo;
    std::vector<double> hi = q.box.input_hi;
    std::size_t flat = 0;
    double widest = -1.0;

    for (std::size_t li = 0; li < q.net.layers().size(); ++li) {
        const DenseLayer& layer = q.net.layers()[li];
        std::vector<double> pre_lo(layer.out_dim), pre_hi(layer.out_dim);
        for (std::size_t o = 0; o < layer.out_dim; ++o) {
            double a = layer.bias[o], b = layer.bias[o];
            const double* w = layer.weights.data() + o * layer.in_dim;
            for (std::size_t i = 0; i < layer.in_dim; ++i) {
                if (w[i] > 0.0) {
                    a += w[i] * lo[i];
                    b += w[i] * hi[i];
                } else if (w[i] < 0.0) {
                    a += w[i] * hi[i];
                    b += w[i] * lo[i];
                }
            }
            pre_lo[o] = a;
            pre_hi[o] = b;
        }

        bool at_tap = li == q.tap_layer;
        if (at_tap && !q.tap_post) {
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                pre_lo[o] = std::max(pre_lo[o], q.tap_bounds.lo[o]);
                pre_hi[o] = std::min(pre_hi[o], q.tap_bounds.hi[o]);
                if (pre_lo[o] > pre_hi[o] + kPruneSlack) {
                    out.pruned = true;
                    return out;
                }
            }
        }

        if (layer.activation == Activation::relu) {
            std::vector<double> post_lo(layer.out_dim), post_hi(layer.out_dim);
            for (std::size_t o = 0; o < layer.out_dim; ++o, ++flat) {
                std::int8_t phase = out.effective[flat];
                if (phase == kOn) {
                    if (pre_hi[o] < -kPruneSlack) {
                        out.pruned = true;
                        return out;
                    }
                    post_lo[o] = std::max(pre_lo[o], 0.0);
                    post_hi[o] = std::max(pre_hi[o], 0.0);
                } else if (phase == kOff) {
                    if (pre_lo[o] > kPruneSlack) {
                        out.pruned = true;
                        return out;
                    }
                    post_lo[o] = 0.0;
                    post_hi[o] = 0.0;
                } else {
                    if (pre_lo[o] >= 0.0) {
                        out.effective[flat] = kOn;
                    } else if (pre_hi[o] <= 0.0) {
                        out.effective[flat] = kOff;
                    } else {
                        double width = pre_hi[o] - pre_lo[o];
                        if (width > widest) {
                            widest = width;
                            out.widest_unstable = static_cast<int>(flat);
                        }
                    }
                    post_lo[o] = std::max(pre_lo[o], 0.0);
                    post_hi[o] = std::max(pre_hi[o], 0.0);
                }
            }
            lo = std::move(post_lo);
            hi = std::move(post_hi);
        } else {
            lo = std::move(pre_lo);
            hi = std::move(pre_hi);
        }

        if (at_tap && q.tap_post) {
            for (std::size_t o = 0; o < layer.out_dim; ++o) {
                lo[o] = std::max(lo[o], q.tap_bounds.lo[o]);
                hi[o] = std::min(hi[o], q.tap_bounds.hi[o]);
                if (lo[o] > hi[o] + kPruneSlack) {
                    out.pruned = true;
                    return out;
                }
            }
        }
    }

    // Output-side prune: the violation needs coeffs . logits >= rhs.
    double best = q.violation.rhs;
    double reach = 0.0;
    for (std::size_t o = 0; o < lo.size(); ++o) {
        double c = o < q.violation.coeffs.size() ? q.violation.coeffs[o] : 0.0;
        reach += c > 0.0 ? c * hi[o] : c * lo[o];
    }
    if (reach < best - kPruneSlack) out.pruned = true;
    return out;
}

// Affine expression over the inputs: coeffs[0..I-1] plus constant.
using Affine = std::vector<double>;

struct AffineLayers {
    std::vector<Affine> tap_exprs;
    std::vector<Affine> logit_exprs;
    std::vector<Affine> relu_pre_exprs;  // one per relu neuron, flattened
};

AffineLayers compose_affine(const QuerySetup& q, const std::vector<std::int8_t>& effective) {
    std::size_t n = q.net.input_dim();
    std::vector<Affine> cur(n, Affine(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) cur[i][i] = 1.0;

    AffineLayers out;
    std::size_t flat = 0;
    for (std::size_t li = 0; li < q.net.layers().size(); ++li) {
        const DenseLayer& layer = q.net.layers()[li];
        std::vector<Affine> pre(layer.out_dim, Affine(n + 1, 0.0));
        for (std::size_t o = 0; o < layer.out_dim; ++o) {
            Affine& e = pre[o];
            e[n] = layer.bias[o];
            const double* w = layer.weights.data() + o * layer.in_dim;
            for (std::size_t i = 0; i < layer.in_dim; ++i) {
                if (w[i] == 0.0) continue;
                for (std::size_t k = 0; k <= n; ++k) e[k] += w[i] * cur[i][k];
            }
        }
        if (li == q.tap_layer && !q.tap_post) out.tap_exprs = pre;

        if (layer.activation == Activation::relu) {
            std::vector<Affine> post(layer.out_dim);
            for (std::size_t o = 0; o < layer.out_dim; ++o, ++flat) {
                out.relu_pre_exprs.push_back(pre[o]);
                post[o] = effective[flat] == kOn ? pre[o] : Affine(n + 1, 0.0);
            }
            cur = std::move(post);
        } else {
            cur = std::move(pre);
        }
        if (li == q.tap_layer && q.tap_post) out.tap_exprs = cur;
    }
    out.logit_exprs = std::move(cur);
    return out;
}

struct LeafVerdict {
    bool sat = false;
    bool inconclusive = false;  // LP hit its limit, or the witness failed replay
    std::vector<double> witness;
};

// Exact LP for a branch with every ReLU phase decided.
LeafVerdict solve_leaf(const QuerySetup& q, const std::vector<std::int8_t>& effective) {
    std::size_t n = q.net.input_dim();
    AffineLayers aff = compose_affine(q, effective);
    std::vector<LinearConstraint> rows;

    auto add_le = [&](const Affine& e, double bound) {  // e(x) <= bound
        LinearConstraint c;
        c.coeffs.assign(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(n));
        c.rhs = bound - e[n];
        rows.push_back(std::move(c));
    };
    auto add_ge = [&](const Affine& e, double bound) {  // e(x) >= bound
        LinearConstraint c;
        c.coeffs.resize(n);
        for (std::size_t k = 0; k < n; ++k) c.coeffs[k] = -e[k];
        c.rhs = e[n] - bound;
        rows.push_back(std::move(c));
    };

    for (std::size_t r = 0; r < aff.relu_pre_exprs.size(); ++r) {
        if (effective[r] == kOn)
            add_ge(aff.relu_pre_exprs[r], 0.0);
        else
            add_le(aff.relu_pre_exprs[r], 0.0);
    }
    for (std::size_t o = 0; o < aff.tap_exprs.size(); ++o) {
        if (std::isfinite(q.tap_bounds.lo[o])) add_ge(aff.tap_exprs[o], q.tap_bounds.lo[o]);
        if (std::isfinite(q.tap_bounds.hi[o])) add_le(aff.tap_exprs[o], q.tap_bounds.hi[o]);
    }

    Affine viol(n + 1, 0.0);
    for (std::size_t o = 0; o < aff.logit_exprs.size(); ++o) {
        double c = o < q.violation.coeffs.size() ? q.violation.coeffs[o] : 0.0;
        if (c == 0.0) continue;
        for (std::size_t k = 0; k <= n; ++k) viol[k] += c * aff.logit_exprs[o][k];
    }
    double needed = q.violation.rhs + (q.violation.strict ? kStrictMargin : 0.0);
    add_ge(viol, needed);

    std::vector<double> objective(viol.begin(), viol.begin() + static_cast<std::ptrdiff_t>(n));
    double target = needed - viol[n] + 1e-6;  // push the witness a bit interior

    LpResult lp = solve_lp(q.box.input_lo, q.box.input_hi, rows, objective, target);
    LeafVerdict verdict;
    if (lp.status == LpStatus::infeasible) return verdict;
    if (lp.status == LpStatus::iteration_limit) {
        verdict.inconclusive = true;
        return verdict;
    }

    // Concrete replay decides whether the LP point is a usable witness.
    std::vector<double> x = lp.x;
    for (std::size_t j = 0; j < n; ++j)
        x[j] = std::clamp(x[j], q.box.input_lo[j], q.box.input_hi[j]);
    std::vector<double> tap_vals = q.net.forward_to_layer(x, q.box.tap);
    bool ok = true;
    for (std::size_t o = 0; o < tap_vals.size() && ok; ++o)
        ok = tap_vals[o] >= q.tap_bounds.lo[o] - kStrictMargin &&
             tap_vals[o] <= q.tap_bounds.hi[o] + kStrictMargin;
    if (ok) ok = q.violation.holds_concretely(q.net.forward(x));
    if (!ok) {
        verdict.inconclusive = true;
        return verdict;
    }
    verdict.sat = true;
    verdict.witness = std::move(x);
    return verdict;
}

struct SharedSearch {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::vector<std::int8_t>> work;
    std::size_t busy = 0;
    bool stop = false;

    std::atomic<std::int64_t> nodes{0};
    std::atomic<bool> over_budget{false};
    std::atomic<bool> inconclusive{false};

    bool sat_found = false;
    std::vector<double> witness;
};

void search_worker(const QuerySetup& q, SharedSearch& shared, std::int64_t max_nodes,
                   std::chrono::steady_clock::time_point deadline) {
    std::unique_lock lock(shared.mu);
    for (;;) {
        shared.cv.wait(lock, [&] { return shared.stop || !shared.work.empty(); });
        if (shared.stop) return;
        std::vector<std::int8_t> phases = std::move(shared.work.front());
        shared.work.pop_front();
        ++shared.busy;
        lock.unlock();

        std::vector<std::vector<std::int8_t>> children;
        bool sat = false;
        std::vector<double> witness;
        if (std::chrono::steady_clock::now() >= deadline ||
            shared.nodes.fetch_add(1) >= max_nodes) {
            shared.over_budget = true;
        } else {
            IbpOutcome ibp = run_ibp(q, phases);
            if (!ibp.pruned) {
                if (ibp.widest_unstable < 0) {
                    LeafVerdict v = solve_leaf(q, ibp.effective);
                    if (v.sat) {
                        sat = true;
                        witness = std::move(v.witness);
                    } else if (v.inconclusive) {
                        shared.inconclusive = true;
                    }
                } else {
                    auto flat = static_cast<std::size_t>(ibp.widest_unstable);
                    std::vector<std::int8_t> off = ibp.effective;
                    off[flat] = kOff;
                    std::vector<std::int8_t> on = std::move(ibp.effective);
                    on[flat] = kOn;
                    children.push_back(std::move(on));
                    children.push_back(std::move(off));
                }
            }
        }

        lock.lock();
        --shared.busy;
        if (sat && !shared.sat_found) {
            shared.sat_found = true;
            shared.witness = std::move(witness);
        }
        if (shared.sat_found || shared.over_budget)
            shared.stop = true;
        else
            for (auto& c : children) shared.work.push_back(std::move(c));
        if (shared.work.empty() && shared.busy == 0) shared.stop = true;  // space exhausted
        if (shared.stop) {
            shared.cv.notify_all();
            return;
        }
        if (!shared.work.empty()) shared.cv.notify_all();
    }
}

TapConstraints resolve_tap_bounds(const Network& net, const BoxRegion& box,
                                  const std::optional<Rule>& sigma) {
    std::size_t dim = net.tap_dim(box.tap);
    TapConstraints tc;
    tc.lo.assign(dim, -std::numeric_limits<double>::infinity());
    tc.hi.assign(dim, std::numeric_limits<double>::infinity());
    if (!box.layer_lo.empty()) {
        if (box.layer_lo.size() != dim || box.layer_hi.size() != dim)
            raise(ErrorKind::DimensionMismatch, "layer box does not match tap width");
        tc.lo = box.layer_lo;
        tc.hi = box.layer_hi;
        for (std::size_t o = 0; o < dim; ++o)
            if (tc.lo[o] > tc.hi[o]) raise(ErrorKind::InconsistentBox, "layer box lo > hi");
    }
    if (sigma) {
        if (!(sigma->layer == box.tap))
            raise(ErrorKind::LayerMismatch, "sigma tap differs from box tap");
        Rule value_rule = sigma_in_value_space(*sigma);
        for (const RuleTerm& t : value_rule.terms) {
            if (t.neuron >= dim)
                raise(ErrorKind::DimensionMismatch, "sigma neuron index beyond tap width");
            if (t.op == TermOp::le)
                tc.hi[t.neuron] = std::min(tc.hi[t.neuron], t.threshold);
            else
                tc.lo[t.neuron] = std::max(tc.lo[t.neuron], t.threshold + kStrictMargin);
        }
    }
    return tc;
}

}  // namespace

double OutputPredicate::evaluate(const std::vector<double>& logits) const {
    double v = 0.0;
    for (std::size_t o = 0; o < logits.size() && o < coeffs.size(); ++o)
        v += coeffs[o] * logits[o];
    return v;
}

bool OutputPredicate::holds_concretely(const std::vector<double>& logits) const {
    double v = evaluate(logits);
    return strict ? v > rhs : v >= rhs - kStrictMargin;
}

Rule sigma_in_value_space(const Rule& rule) {
    if (!rule.acts) return rule;
    Rule out = rule;
    out.acts = false;
    for (RuleTerm& t : out.terms) t.threshold = 0.0;  // on <=> value > 0
    return out;
}

QueryResult solve_query(const Network& net, const BoxRegion& box,
                        const std::optional<Rule>& sigma, const OutputPredicate& violation,
                        const SolveBudget& budget) {
    auto start = std::chrono::steady_clock::now();
    std::size_t n = net.input_dim();
    if (box.input_lo.size() != n || box.input_hi.size() != n)
        raise(ErrorKind::DimensionMismatch, "input box does not match input_dim");
    for (std::size_t j = 0; j < n; ++j) {
        if (!(std::isfinite(box.input_lo[j]) && std::isfinite(box.input_hi[j])))
            raise(ErrorKind::InconsistentBox, "input box must be finite");
        if (box.input_lo[j] > box.input_hi[j])
            raise(ErrorKind::InconsistentBox, "input box lo > hi");
    }

    QuerySetup setup{net,
                     box,
                     resolve_tap_bounds(net, box, sigma),
                     violation,
                     net.layer_index(box.tap.layer_name),
                     box.tap.post_activation,
                     0};
    for (const DenseLayer& layer : net.layers())
        if (layer.activation == Activation::relu) setup.n_relu += layer.out_dim;

    SharedSearch shared;
    shared.work.push_back(std::vector<std::int8_t>(setup.n_relu, kUnset));
    auto deadline = start + budget.time_limit;

    unsigned n_workers = std::max(1u, budget.workers);
    if (n_workers == 1) {
        search_worker(setup, shared, budget.max_nodes, deadline);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w)
            pool.emplace_back(search_worker, std::cref(setup), std::ref(shared),
                              budget.max_nodes, deadline);
        for (auto& t : pool) t.join();
    }

    QueryResult res;
    res.nodes = shared.nodes.load();
    res.elapsed_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    if (shared.sat_found) {
        res.status = QueryStatus::sat;
        res.witness = shared.witness;
    } else if (shared.over_budget || shared.inconclusive) {
        res.status = QueryStatus::timeout;
    } else {
        res.status = QueryStatus::unsat;
    }
    return res;
}

}  // namespace nnrules

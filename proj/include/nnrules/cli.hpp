#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nnrules {

struct RunConfig {
    std::string command;  // analyze | prove | monitor

    std::string model_path;  // -m
    std::string workdir;     // -wd
    std::string train_x;     // -tx
    std::string train_y;     // -ty
    std::string val_x;       // -vx
    std::string val_y;       // -vy

    std::optional<std::string> layer_name;  // -layer_name, "name" or "name:pre"
    bool only_dense = false;                // -odl
    bool dense_and_activation = false;      // -oal
    int inptype = 0;                        // -inptype
    int post_type = 0;                      // -type
    bool acts = false;                      // -acts
    bool top = false;                       // -top
    bool skip_rules = false;                // -sr
    bool balance = false;                   // -b
    bool confidence = false;                // -c
    std::uint64_t seed = 0;                 // -rs
    std::int64_t sentinel = 1000;           // -sentinel

    std::optional<std::int64_t> label;  // -label
    bool pred = false;                  // -pred
    bool min_const = false;             // -min_const
    std::string constraints_path;       // -cp

    std::string monitor_mode;  // positional: rules | classifiers

    double timeout_s = 60.0;             // -timeout, per query
    std::int64_t node_budget = 100000;   // -node_budget, per query
    unsigned workers = 1;                // -workers
};

// Exit codes: 0 success (prove: fully clean proof), 2 configuration error,
// 3 data error, 4 no rules for the requested label / missing ruleset,
// 10 counterexamples remain, 11 timeout residue.
RunConfig parse_args(const std::vector<std::string>& args);

int cmd_analyze(const RunConfig& cfg, std::ostream& err);
int cmd_prove(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_monitor(const RunConfig& cfg, std::ostream& out, std::ostream& err);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nnrules

#pragma once

#include <optional>
#include <random>
#include <vector>

#include "nnrules/prover.hpp"
#include "nnrules/verifier.hpp"

// Test-side oracles, kept independent of the library's search and LP code:
// feasibility is decided by enumerating every ReLU phase pattern and solving
// each pattern's polytope with a KACTL-style simplex.
namespace testsupport {

enum class OracleVerdict { sat, unsat };

OracleVerdict oracle_solve(const nnrules::Network& net, const nnrules::BoxRegion& box,
                           const std::optional<nnrules::Rule>& sigma,
                           const nnrules::OutputPredicate& violation);

// Same check the library's prove_pattern_implication performs, answered by
// oracle_solve on the truncated network.
bool oracle_implication_holds(const nnrules::Network& net, const nnrules::LayerTap& tap,
                              const std::vector<double>& input_lo,
                              const std::vector<double>& input_hi, const nnrules::Rule& sigma);

// Random dense ReLU networks: hidden relu layers, linear output.
nnrules::Network random_network(std::mt19937_64& rng, std::size_t inputs,
                                const std::vector<std::size_t>& hidden, std::size_t outputs);

std::size_t total_hidden_units(const nnrules::Network& net);

}  // namespace testsupport

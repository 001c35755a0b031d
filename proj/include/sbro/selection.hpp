#pragma once

#include <cstdint>
#include <vector>

#include "sbro/types.hpp"

namespace sbro {

struct SelectionProblem {
    std::vector<double> weights;  // nonnegative objective weights
    std::vector<double> bids;     // strictly positive costs
    double budget = 0.0;

    void validate() const;
};

struct SelectionResult {
    std::vector<int> selected;  // ascending ids
    double objective = 0.0;
    double cost = 0.0;
};

// Per-client objective weights (z_i - z_min) * delta^count_i, where count_i
// is the number of selections in the client's trailing window.
std::vector<double> selection_weights(const std::vector<double>& scores,
                                      const ParticipationHistory& history, double delta);

// Exact 0-1 knapsack via depth-first branch and bound with a fractional
// relaxation bound. Ties between equally optimal subsets resolve to the
// lower total cost, then the lexicographically smallest id set.
SelectionResult solve_selection(const SelectionProblem& p);

// Exhaustive 2^n scan with the same tie-break rule; n <= 25.
SelectionResult brute_force_selection(const SelectionProblem& p);

// Seeded uniform permutation, greedily admitting every client whose bid
// still fits the remaining budget.
SelectionResult baseline_random(const std::vector<double>& bids, double budget,
                                std::uint64_t seed);

// baseline_random restricted to the given clean ids.
SelectionResult baseline_hq_random(const std::vector<int>& clean_ids,
                                   const std::vector<double>& bids, double budget,
                                   std::uint64_t seed);

// Everyone participates; cost reported but unconstrained.
SelectionResult baseline_all(const std::vector<double>& bids);

}  // namespace sbro

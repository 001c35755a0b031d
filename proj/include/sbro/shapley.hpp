#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sbro/model.hpp"

namespace sbro {

// One round's coalition game: the selected members' uploaded updates plus
// the validation set the value function scores against. empty_value is the
// v(emptyset) convention (the coalition-value average is undefined there).
struct CoalitionContext {
    std::vector<int> member_ids;       // ordered, size m
    std::vector<ModelParams> updates;  // aligned with member_ids
    Dataset validation;
    double empty_value = 0.0;

    int size() const { return static_cast<int>(member_ids.size()); }
    void validate() const;
};

struct ShapleyResult {
    std::vector<double> values;  // aligned with member_ids
    double coalition_value = 0.0;
    double empty_value = 0.0;
};

// Value of a subset of members: the unweighted average of their updates
// evaluated on the validation set; the empty subset takes ctx.empty_value.
double coalition_value(const CoalitionContext& ctx, const std::vector<int>& subset);

// Bitmask variant over member positions (bit k = member_ids[k]).
double coalition_value_mask(const CoalitionContext& ctx, std::uint32_t mask);

// All 2^m coalition values, index = member bitmask, each computed once.
std::vector<double> build_coalition_table(const CoalitionContext& ctx);
std::vector<double> build_coalition_table(int m,
                                          const std::function<double(std::uint32_t)>& value);

// Exact Shapley values from a full coalition table.
ShapleyResult exact_shapley_from_table(const std::vector<double>& table, int m);

// Exact per-member Shapley values; enumerates all 2^m coalitions (m <= 16).
ShapleyResult exact_shapley(const CoalitionContext& ctx);

// Permutation Monte Carlo estimate: average marginal contribution over
// seeded uniform member orderings. Unbiased for exact_shapley.
ShapleyResult mc_shapley(const CoalitionContext& ctx, int num_permutations,
                         std::uint64_t seed);

}  // namespace sbro

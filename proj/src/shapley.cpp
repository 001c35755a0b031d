#include "sbro/shapley.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "sbro/rng.hpp"

namespace sbro {

namespace {

constexpr int kExactLimit = 16;

// Average of the masked members' updates evaluated on the validation set.
// Members are folded in ascending position order so the result does not
// depend on evaluation scheduling.
double value_of_mask(const CoalitionContext& ctx, std::uint32_t mask) {
    if (mask == 0) return ctx.empty_value;
    std::vector<ModelParams> subset;
    std::vector<double> weights;
    for (std::uint32_t m = mask; m != 0; m &= m - 1) {
        subset.push_back(ctx.updates[std::countr_zero(m)]);
        weights.push_back(1.0);
    }
    const ModelParams avg = aggregate(subset, weights);
    return evaluate(avg, ctx.validation);
}

std::vector<double> binomials(int n) {
    std::vector<double> c(n + 1);
    c[0] = 1.0;
    for (int k = 1; k <= n; ++k) {
        c[k] = c[k - 1] * static_cast<double>(n - k + 1) / static_cast<double>(k);
    }
    return c;
}

}  // namespace

void CoalitionContext::validate() const {
    if (member_ids.empty()) throw std::invalid_argument("coalition needs at least one member");
    if (member_ids.size() > 31) throw std::invalid_argument("coalition exceeds mask width");
    if (updates.size() != member_ids.size()) {
        throw std::invalid_argument("updates must align with member_ids");
    }
    validation.validate();
    if (validation.rows() == 0) throw std::invalid_argument("empty validation set");
}

double coalition_value(const CoalitionContext& ctx, const std::vector<int>& subset) {
    ctx.validate();
    std::uint32_t mask = 0;
    for (int id : subset) {
        const auto it = std::find(ctx.member_ids.begin(), ctx.member_ids.end(), id);
        if (it == ctx.member_ids.end()) {
            throw std::invalid_argument("subset id is not a coalition member");
        }
        mask |= 1u << (it - ctx.member_ids.begin());
    }
    return value_of_mask(ctx, mask);
}

double coalition_value_mask(const CoalitionContext& ctx, std::uint32_t mask) {
    if (mask >= (1u << ctx.size())) throw std::invalid_argument("mask out of range");
    return value_of_mask(ctx, mask);
}

std::vector<double> build_coalition_table(const CoalitionContext& ctx) {
    ctx.validate();
    const int m = ctx.size();
    if (m > kExactLimit) throw std::invalid_argument("coalition too large for exact enumeration");
    return build_coalition_table(m, [&](std::uint32_t mask) { return value_of_mask(ctx, mask); });
}

std::vector<double> build_coalition_table(
    int m, const std::function<double(std::uint32_t)>& value) {
    if (m < 1 || m > kExactLimit) throw std::invalid_argument("coalition size out of range");
    const std::uint32_t size = 1u << m;
    std::vector<double> table(size);
    for (std::uint32_t mask = 0; mask < size; ++mask) table[mask] = value(mask);
    return table;
}

ShapleyResult exact_shapley_from_table(const std::vector<double>& table, int m) {
    if (m < 1 || m > kExactLimit) throw std::invalid_argument("coalition size out of range");
    const std::uint32_t size = 1u << m;
    if (table.size() != size) throw std::invalid_argument("table size must be 2^m");

    const std::vector<double> binom = binomials(m - 1);
    ShapleyResult res;
    res.values.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
        const std::uint32_t bit = 1u << i;
        double acc = 0.0;
        for (std::uint32_t t = 0; t < size; ++t) {
            if (t & bit) continue;
            const double marginal = table[t | bit] - table[t];
            acc += marginal / binom[std::popcount(t)];
        }
        res.values[i] = acc / static_cast<double>(m);
    }
    res.coalition_value = table[size - 1];
    res.empty_value = table[0];
    return res;
}

ShapleyResult exact_shapley(const CoalitionContext& ctx) {
    return exact_shapley_from_table(build_coalition_table(ctx), ctx.size());
}

ShapleyResult mc_shapley(const CoalitionContext& ctx, int num_permutations,
                         std::uint64_t seed) {
    ctx.validate();
    if (num_permutations < 1) throw std::invalid_argument("need at least one permutation");
    const int m = ctx.size();

    std::unordered_map<std::uint32_t, double> cache;
    const auto value = [&](std::uint32_t mask) {
        const auto it = cache.find(mask);
        if (it != cache.end()) return it->second;
        const double v = value_of_mask(ctx, mask);
        cache.emplace(mask, v);
        return v;
    };

    Rng rng(seed);
    std::vector<int> order(m);
    std::vector<double> sums(m, 0.0);
    for (int p = 0; p < num_permutations; ++p) {
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        std::uint32_t mask = 0;
        double prev = ctx.empty_value;
        for (int pos : order) {
            mask |= 1u << pos;
            const double cur = value(mask);
            sums[pos] += cur - prev;
            prev = cur;
        }
    }

    ShapleyResult res;
    res.values.resize(m);
    for (int i = 0; i < m; ++i) {
        res.values[i] = sums[i] / static_cast<double>(num_permutations);
    }
    res.coalition_value = value((1u << m) - 1);
    res.empty_value = ctx.empty_value;
    return res;
}

}  // namespace sbro

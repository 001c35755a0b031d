#include "sbro/selection.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sbro/rng.hpp"

namespace sbro {

namespace {

// Canonical sums: always fold in ascending id order so the solver and the
// brute-force oracle produce bit-identical objectives and costs.
double sum_by_id(const std::vector<double>& vals, const std::vector<int>& ids_ascending) {
    double s = 0.0;
    for (int id : ids_ascending) s += vals[id];
    return s;
}

// Lexicographic order on ascending-id sequences, stated on bitmasks: at the
// lowest differing bit, the mask holding it is smaller unless the other mask
// has already run out of members (proper prefix).
bool mask_lex_less(std::uint32_t a, std::uint32_t b) {
    const std::uint32_t diff = a ^ b;
    if (diff == 0) return false;
    const int p = std::countr_zero(diff);
    const bool in_a = (a >> p) & 1u;
    const std::uint32_t other = in_a ? b : a;
    if ((other >> p) != 0) return in_a;
    return !in_a;  // the other sequence ended; shorter is smaller
}

struct Candidate {
    double objective = 0.0;
    double cost = 0.0;
    std::vector<int> ids;  // ascending
    bool valid = false;
};

// Strict "better" under the shared tie-break: objective desc, cost asc,
// id set lexicographically asc. Comparisons are exact.
bool better(double obj, double cost, const std::vector<int>& ids, const Candidate& best) {
    if (!best.valid) return true;
    if (obj != best.objective) return obj > best.objective;
    if (cost != best.cost) return cost < best.cost;
    return std::lexicographical_compare(ids.begin(), ids.end(), best.ids.begin(),
                                        best.ids.end());
}

struct Item {
    int id;
    double weight;
    double bid;
};

struct BranchAndBound {
    const SelectionProblem& problem;
    std::vector<Item> items;  // positive weight, individually affordable; ratio desc
    double eps;
    Candidate best;
    std::vector<int> picked;  // item indices along the current path

    explicit BranchAndBound(const SelectionProblem& p) : problem(p) {
        double total_weight = 0.0;
        for (std::size_t i = 0; i < p.weights.size(); ++i) {
            total_weight += p.weights[i];
            // Zero-weight items only add cost, so the min-cost tie-break can
            // never admit them; items that exceed the whole budget fit no
            // feasible set. Dropping both is exact.
            if (p.weights[i] > 0.0 && p.bids[i] <= p.budget) {
                items.push_back({static_cast<int>(i), p.weights[i], p.bids[i]});
            }
        }
        std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
            const double ra = a.weight / a.bid;
            const double rb = b.weight / b.bid;
            if (ra != rb) return ra > rb;
            return a.id < b.id;
        });
        eps = 1e-9 * (1.0 + p.budget + total_weight);
    }

    // Fractional-relaxation bound on the objective attainable below this
    // node, plus a fractional lower bound on the extra cost needed to raise
    // the running objective up to the incumbent's.
    void bounds(std::size_t idx, double run_w, double run_b, double* ub,
                double* min_extra_cost) const {
        double cap = std::max(0.0, problem.budget - run_b);
        double bound = run_w;
        // eps of slack on the tie target keeps this a valid lower bound in
        // the presence of summation-order noise.
        double need = best.valid ? best.objective - run_w - eps
                                 : std::numeric_limits<double>::infinity();
        double extra = 0.0;
        bool reachable = need <= 0.0;
        for (std::size_t k = idx; k < items.size(); ++k) {
            const Item& it = items[k];
            if (it.bid <= cap) {
                bound += it.weight;
                cap -= it.bid;
            } else {
                bound += it.weight * (cap / it.bid);
                cap = 0.0;
            }
            if (!reachable) {
                if (it.weight >= need) {
                    extra += it.bid * (need / it.weight);
                    reachable = true;
                } else {
                    extra += it.bid;
                    need -= it.weight;
                }
            }
        }
        *ub = bound;
        *min_extra_cost = reachable ? extra : std::numeric_limits<double>::infinity();
    }

    void offer_candidate() {
        std::vector<int> ids;
        ids.reserve(picked.size());
        for (int k : picked) ids.push_back(items[k].id);
        std::sort(ids.begin(), ids.end());
        const double cost = sum_by_id(problem.bids, ids);
        if (cost > problem.budget) return;  // canonical feasibility is the final word
        const double obj = sum_by_id(problem.weights, ids);
        if (better(obj, cost, ids, best)) {
            best.objective = obj;
            best.cost = cost;
            best.ids = std::move(ids);
            best.valid = true;
        }
    }

    void dfs(std::size_t idx, double run_w, double run_b) {
        if (best.valid) {
            double ub = 0.0;
            double min_extra = 0.0;
            bounds(idx, run_w, run_b, &ub, &min_extra);
            if (ub < best.objective - eps) return;
            // Subtree can at best tie the incumbent's objective: prune when
            // it cannot undercut on cost either.
            if (ub < best.objective + eps && run_b + min_extra > best.cost + eps) return;
        }
        if (idx == items.size()) {
            offer_candidate();
            return;
        }
        const Item& it = items[idx];
        if (run_b + it.bid <= problem.budget + eps) {
            picked.push_back(static_cast<int>(idx));
            dfs(idx + 1, run_w + it.weight, run_b + it.bid);
            picked.pop_back();
        }
        dfs(idx + 1, run_w, run_b);
    }

    SelectionResult run() {
        dfs(0, 0.0, 0.0);
        SelectionResult res;
        if (best.valid) {
            res.selected = best.ids;
            res.objective = best.objective;
            res.cost = best.cost;
        }
        return res;
    }
};

// Walk the permutation and admit every client that still fits. Admission is
// checked on the canonical (ascending-id) sum so the reported cost is exactly
// the quantity that was compared against the budget.
SelectionResult greedy_fill(const std::vector<int>& order, const std::vector<double>& bids,
                            double budget) {
    std::vector<int> chosen;
    for (int id : order) {
        std::vector<int> trial = chosen;
        trial.insert(std::upper_bound(trial.begin(), trial.end(), id), id);
        if (sum_by_id(bids, trial) <= budget) chosen = std::move(trial);
    }
    SelectionResult res;
    res.cost = sum_by_id(bids, chosen);
    res.selected = std::move(chosen);
    return res;
}

}  // namespace

void SelectionProblem::validate() const {
    if (weights.size() != bids.size()) {
        throw std::invalid_argument("weights/bids length mismatch");
    }
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    }
    for (double b : bids) {
        if (!(b > 0.0)) throw std::invalid_argument("bids must be positive");
    }
    if (!(budget >= 0.0)) throw std::invalid_argument("budget must be nonnegative");
}

std::vector<double> selection_weights(const std::vector<double>& scores,
                                      const ParticipationHistory& history, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must be in (0,1]");
    if (scores.empty()) throw std::invalid_argument("no scores");
    if (history.size() != scores.size()) {
        throw std::invalid_argument("history/scores length mismatch");
    }
    const double z_min = *std::min_element(scores.begin(), scores.end());
    std::vector<double> weights(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        int count = 0;
        for (std::uint8_t flag : history[i]) count += flag;
        weights[i] = (scores[i] - z_min) * std::pow(delta, static_cast<double>(count));
    }
    return weights;
}

SelectionResult solve_selection(const SelectionProblem& p) {
    p.validate();
    BranchAndBound solver(p);
    return solver.run();
}

SelectionResult brute_force_selection(const SelectionProblem& p) {
    p.validate();
    const std::size_t n = p.weights.size();
    if (n > 25) throw std::invalid_argument("brute force limited to n <= 25");

    std::uint32_t best_mask = 0;
    double best_obj = 0.0;
    double best_cost = 0.0;
    bool have_best = false;
    const std::uint32_t limit =
        n == 0 ? 1u : (static_cast<std::uint32_t>(1) << n);
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
        double obj = 0.0;
        double cost = 0.0;
        for (std::uint32_t m = mask; m != 0; m &= m - 1) {
            const int id = std::countr_zero(m);
            obj += p.weights[id];
            cost += p.bids[id];
        }
        if (cost > p.budget) continue;
        bool take = false;
        if (!have_best) {
            take = true;
        } else if (obj != best_obj) {
            take = obj > best_obj;
        } else if (cost != best_cost) {
            take = cost < best_cost;
        } else {
            take = mask_lex_less(mask, best_mask);
        }
        if (take) {
            best_mask = mask;
            best_obj = obj;
            best_cost = cost;
            have_best = true;
        }
    }

    SelectionResult res;
    for (std::uint32_t m = best_mask; m != 0; m &= m - 1) {
        res.selected.push_back(std::countr_zero(m));
    }
    res.objective = best_obj;
    res.cost = best_cost;
    return res;
}

SelectionResult baseline_random(const std::vector<double>& bids, double budget,
                                std::uint64_t seed) {
    std::vector<int> order(bids.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    return greedy_fill(order, bids, budget);
}

SelectionResult baseline_hq_random(const std::vector<int>& clean_ids,
                                   const std::vector<double>& bids, double budget,
                                   std::uint64_t seed) {
    if (clean_ids.empty()) throw std::invalid_argument("clean id set is empty");
    std::vector<int> order = clean_ids;
    Rng rng(seed);
    rng.shuffle(order);
    return greedy_fill(order, bids, budget);
}

SelectionResult baseline_all(const std::vector<double>& bids) {
    SelectionResult res;
    res.selected.resize(bids.size());
    std::iota(res.selected.begin(), res.selected.end(), 0);
    res.cost = sum_by_id(bids, res.selected);
    return res;
}

}  // namespace sbro

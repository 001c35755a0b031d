#pragma once

#include <cstdint>
#include <vector>

#include "sbro/types.hpp"

namespace sbro {

// Parameters of the prospect-theory score transform. The loss branch is
// negative by default (losses plotted below zero, steeper than gains);
// as_printed keeps the positive form for side-by-side study.
struct ProspectParams {
    enum class LossSign { negative, as_printed };
    double alpha = 0.15;
    double beta = 0.3;
    double gamma = 1.0;
    LossSign loss_sign = LossSign::negative;

    void validate() const;
};

struct UpdateParams {
    double omega = 1.0;  // reward coefficient
    double psi = 1.0;    // punishment coefficient
    double rho = 2.0;    // penalty base, > 1
    int err_window = 5;  // poor-performance lookback over selected rounds

    void validate() const;
};

struct SvEntry {
    int round = 0;
    double sv = 0.0;
};

struct ReputationState {
    std::vector<double> reputation;               // R, length n
    std::vector<std::vector<SvEntry>> sv_history; // per-client, selected rounds only
    ParticipationHistory participation;           // last-5-round selection flags
    int n = 0;

    static ReputationState initial(int n);
};

// Arithmetic mean of all n reputation values.
double compute_threshold(const ReputationState& state);

// Prospect-theory reputation score z(R_i) around the reference point r_th.
double reputation_score(double r, double r_th, const ProspectParams& p);

// Count of sv <= 0 among the client's most recent <= err_window history
// entries.
int error_count(const ReputationState& state, int client_id, int err_window = 5);

// Applies one round of updates: selected clients with sv <= 0 lose
// psi * rho^err (err taken before this round's sv is appended); positive
// contributors gain omega * (1 - exp(-(sv/S_pos)/(B_i/B_pos))). Unselected
// clients keep their reputation. Appends this round's sv entries and the
// selection flags for every client.
ReputationState update_reputations(const ReputationState& state,
                                   const std::vector<int>& selected,
                                   const std::vector<double>& sv,
                                   const std::vector<double>& bids,
                                   const UpdateParams& up, int round);

}  // namespace sbro

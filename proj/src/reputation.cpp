#include "sbro/reputation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbro {

void ProspectParams::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0,1]");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must be in (0,1]");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
}

void UpdateParams::validate() const {
    if (!(omega > 0.0)) throw std::invalid_argument("omega must be > 0");
    if (!(psi > 0.0)) throw std::invalid_argument("psi must be > 0");
    if (!(rho > 1.0)) throw std::invalid_argument("rho must be > 1");
    if (err_window < 1) throw std::invalid_argument("err_window must be >= 1");
}

ReputationState ReputationState::initial(int n) {
    if (n < 1) throw std::invalid_argument("need at least one client");
    ReputationState s;
    s.n = n;
    s.reputation.assign(n, 0.0);
    s.sv_history.assign(n, {});
    s.participation.assign(n, {});
    return s;
}

double compute_threshold(const ReputationState& state) {
    if (state.n < 1) throw std::invalid_argument("empty reputation state");
    double sum = 0.0;
    for (double r : state.reputation) sum += r;
    return sum / static_cast<double>(state.n);
}

double reputation_score(double r, double r_th, const ProspectParams& p) {
    p.validate();
    if (r > r_th) return std::pow(r - r_th, p.alpha);
    const double magnitude = p.gamma * std::pow(r_th - r, p.beta);
    return p.loss_sign == ProspectParams::LossSign::negative ? -magnitude : magnitude;
}

int error_count(const ReputationState& state, int client_id, int err_window) {
    if (client_id < 0 || client_id >= state.n) throw std::invalid_argument("bad client id");
    const auto& hist = state.sv_history[client_id];
    const std::size_t window = std::min<std::size_t>(hist.size(), err_window);
    int count = 0;
    for (std::size_t k = hist.size() - window; k < hist.size(); ++k) {
        if (hist[k].sv <= 0.0) ++count;
    }
    return count;
}

ReputationState update_reputations(const ReputationState& state,
                                   const std::vector<int>& selected,
                                   const std::vector<double>& sv,
                                   const std::vector<double>& bids,
                                   const UpdateParams& up, int round) {
    up.validate();
    if (sv.size() != selected.size()) {
        throw std::invalid_argument("sv must be defined exactly on the selected set");
    }
    if (bids.size() != static_cast<std::size_t>(state.n)) {
        throw std::invalid_argument("bids length must equal client count");
    }
    std::vector<char> is_selected(state.n, 0);
    for (int id : selected) {
        if (id < 0 || id >= state.n) throw std::invalid_argument("selected id out of range");
        if (is_selected[id]) throw std::invalid_argument("duplicate selected id");
        is_selected[id] = 1;
        if (!(bids[id] > 0.0)) throw std::invalid_argument("zero bid for selected client");
    }

    double s_pos = 0.0;
    double b_pos = 0.0;
    for (std::size_t k = 0; k < selected.size(); ++k) {
        if (sv[k] > 0.0) {
            s_pos += sv[k];
            b_pos += bids[selected[k]];
        }
    }

    ReputationState out = state;
    for (std::size_t k = 0; k < selected.size(); ++k) {
        const int id = selected[k];
        if (sv[k] <= 0.0) {
            // err counted before this round's sv is appended
            const int err = error_count(state, id, up.err_window);
            out.reputation[id] -= up.psi * std::pow(up.rho, static_cast<double>(err));
        } else {
            const double share = (sv[k] / s_pos) / (bids[id] / b_pos);
            out.reputation[id] += up.omega * (1.0 - std::exp(-share));
        }
        out.sv_history[id].push_back({round, sv[k]});
    }
    for (int id = 0; id < state.n; ++id) {
        auto& window = out.participation[id];
        window.push_back(is_selected[id]);
        if (window.size() > static_cast<std::size_t>(kSelectionWindow)) {
            window.erase(window.begin());
        }
    }
    return out;
}

}  // namespace sbro

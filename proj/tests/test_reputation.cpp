#include <cmath>
#include <vector>

#include "doctest.h"
#include "sbro/reputation.hpp"

using namespace sbro;

namespace {

ReputationState with_history(int n, int client, const std::vector<double>& svs) {
    ReputationState s = ReputationState::initial(n);
    int round = 1;
    for (double v : svs) s.sv_history[client].push_back({round++, v});
    return s;
}

}  // namespace

TEST_CASE("compute_threshold is the mean reputation") {
    ReputationState s = ReputationState::initial(3);
    CHECK(compute_threshold(s) == 0.0);

    s.reputation = {1.0, -1.0, 0.0};
    s.n = 3;
    CHECK(compute_threshold(s) == doctest::Approx(0.0));

    s.reputation = {0.2, 0.5, -0.1};
    CHECK(compute_threshold(s) == doctest::Approx(0.2));

    ReputationState two = ReputationState::initial(2);
    two.reputation = {1.0, -1.0};
    CHECK(compute_threshold(two) == 0.0);
}

TEST_CASE("reputation_score matches the prospect transform") {
    ProspectParams p;  // alpha 0.15, beta 0.3, gamma 1, negative losses

    CHECK(reputation_score(0.4, 0.4, p) == 0.0);
    CHECK(reputation_score(1.4, 0.4, p) == 1.0);  // 1^alpha
    CHECK(reputation_score(2.4, 0.4, p) ==
          doctest::Approx(1.109569472067845).epsilon(1e-12));  // 2^0.15
    CHECK(reputation_score(-0.6, 0.4, p) == doctest::Approx(-1.0));  // -gamma*1^beta

    ProspectParams printed = p;
    printed.loss_sign = ProspectParams::LossSign::as_printed;
    CHECK(reputation_score(-0.6, 0.4, printed) == doctest::Approx(1.0));
    // both conventions agree on the gain branch and at the reference point
    CHECK(reputation_score(0.4, 0.4, printed) == 0.0);
    CHECK(reputation_score(1.4, 0.4, printed) == reputation_score(1.4, 0.4, p));
}

TEST_CASE("reputation_score is monotone with the default loss sign") {
    ProspectParams p;
    const double r_th = 0.3;
    double prev = reputation_score(-5.0, r_th, p);
    for (int k = 1; k <= 1000; ++k) {
        const double r = -5.0 + 10.0 * k / 1000.0;
        const double z = reputation_score(r, r_th, p);
        CHECK(z >= prev);
        prev = z;
    }
}

TEST_CASE("error_count looks at the trailing window of selected rounds") {
    const ReputationState empty = ReputationState::initial(4);
    CHECK(error_count(empty, 2) == 0);

    const ReputationState mixed = with_history(4, 1, {0.1, 0.2, -0.1, 0.0, 0.3});
    CHECK(error_count(mixed, 1) == 2);  // -0.1 and the exact zero both count

    const ReputationState seven =
        with_history(4, 0, {0.5, 0.5, -0.1, -0.2, 0.0, -0.3, -0.4});
    CHECK(error_count(seven, 0) == 5);  // the two old positives fall outside

    CHECK_THROWS(error_count(empty, 9));
}

TEST_CASE("update_reputations rewards the single positive contributor by omega*(1-1/e)") {
    ReputationState s = ReputationState::initial(3);
    const std::vector<double> bids = {5.0, 7.0, 9.0};
    UpdateParams up;

    const ReputationState next = update_reputations(s, {1}, {0.25}, bids, up, 1);
    CHECK(next.reputation[1] ==
          doctest::Approx(0.6321205588285577).epsilon(1e-12));
    CHECK(next.reputation[0] == 0.0);
    CHECK(next.reputation[2] == 0.0);
    CHECK(next.sv_history[1].size() == 1);
    CHECK(next.sv_history[0].empty());
    CHECK(next.participation[0] == std::vector<std::uint8_t>{0});
    CHECK(next.participation[1] == std::vector<std::uint8_t>{1});

    UpdateParams strong;
    strong.omega = 2.5;
    const ReputationState scaled = update_reputations(s, {1}, {0.25}, bids, strong, 1);
    CHECK(scaled.reputation[1] ==
          doctest::Approx(2.5 * 0.6321205588285577).epsilon(1e-12));
}

TEST_CASE("penalties are psi * rho^err with err counted before the append") {
    const std::vector<double> bids = {5.0, 7.0};
    UpdateParams up;  // psi 1, rho 2

    ReputationState fresh = ReputationState::initial(2);
    const ReputationState once = update_reputations(fresh, {0}, {-0.5}, bids, up, 1);
    CHECK(once.reputation[0] == doctest::Approx(-1.0));  // rho^0

    ReputationState history = with_history(2, 0, {-0.1, -0.2});
    const ReputationState hit = update_reputations(history, {0}, {-0.5}, bids, up, 3);
    CHECK(hit.reputation[0] == doctest::Approx(-4.0));  // psi * rho^2
    CHECK(hit.sv_history[0].size() == 3);
}

TEST_CASE("unselected clients are untouched") {
    ReputationState s = ReputationState::initial(4);
    s.reputation = {0.5, -0.25, 0.125, 0.0};
    const std::vector<double> bids = {5.0, 5.0, 5.0, 5.0};
    const ReputationState next =
        update_reputations(s, {0, 2}, {0.1, -0.1}, bids, UpdateParams{}, 1);
    CHECK(next.reputation[1] == s.reputation[1]);
    CHECK(next.reputation[3] == s.reputation[3]);
    CHECK(next.sv_history[1].empty());
    CHECK(next.sv_history[3].empty());
    CHECK(next.participation[1] == std::vector<std::uint8_t>{0});
}

TEST_CASE("rewards stay inside (0, omega) and fall with the client's own bid") {
    UpdateParams up;
    ReputationState s = ReputationState::initial(3);
    const std::vector<double> sv = {0.3, 0.2, 0.1};

    for (double bid0 : {1.0, 2.0, 5.0, 20.0}) {
        const std::vector<double> bids = {bid0, 4.0, 4.0};
        const ReputationState next = update_reputations(s, {0, 1, 2}, sv, bids, up, 1);
        for (int i = 0; i < 3; ++i) {
            CHECK(next.reputation[i] > 0.0);
            CHECK(next.reputation[i] < up.omega);
        }
    }

    double prev_reward = 1.0;
    for (double bid0 : {1.0, 2.0, 5.0, 20.0}) {
        const std::vector<double> bids = {bid0, 4.0, 4.0};
        const ReputationState next = update_reputations(s, {0, 1, 2}, sv, bids, up, 1);
        CHECK(next.reputation[0] < prev_reward);
        prev_reward = next.reputation[0];
    }
}

TEST_CASE("penalty magnitude grows strictly with the error count when rho > 1") {
    UpdateParams up;
    const std::vector<double> bids = {5.0};
    double prev = 0.0;
    for (int errs = 0; errs <= 5; ++errs) {
        ReputationState s = with_history(1, 0, std::vector<double>(errs, -0.1));
        const ReputationState next = update_reputations(s, {0}, {-1.0}, bids, up, 9);
        const double drop = -next.reputation[0];
        CHECK(drop > prev);
        prev = drop;
    }
}

TEST_CASE("rewards are invariant to scaling all positive sv") {
    UpdateParams up;
    ReputationState s = ReputationState::initial(4);
    const std::vector<double> bids = {3.0, 6.0, 9.0, 4.0};
    const std::vector<int> selected = {0, 1, 3};
    const std::vector<double> sv = {0.4, 0.1, -0.2};

    const ReputationState base = update_reputations(s, selected, sv, bids, up, 1);
    for (double c : {2.0, 0.5, 4.0}) {
        std::vector<double> scaled = sv;
        for (double& v : scaled) {
            if (v > 0.0) v *= c;
        }
        const ReputationState next = update_reputations(s, selected, scaled, bids, up, 1);
        CHECK(next.reputation == base.reputation);  // power-of-two scaling is exact
    }
    std::vector<double> scaled3 = sv;
    for (double& v : scaled3) {
        if (v > 0.0) v *= 3.0;
    }
    const ReputationState next3 = update_reputations(s, selected, scaled3, bids, up, 1);
    for (int i = 0; i < 4; ++i) {
        CHECK(next3.reputation[i] == doctest::Approx(base.reputation[i]).epsilon(1e-12));
    }
}

TEST_CASE("participation buffers cap at five entries") {
    ReputationState s = ReputationState::initial(2);
    const std::vector<double> bids = {2.0, 2.0};
    for (int round = 1; round <= 9; ++round) {
        s = update_reputations(s, {0}, {0.5}, bids, UpdateParams{}, round);
    }
    CHECK(s.participation[0].size() == 5);
    CHECK(s.participation[1].size() == 5);
    CHECK(s.participation[0] == std::vector<std::uint8_t>{1, 1, 1, 1, 1});
    CHECK(s.participation[1] == std::vector<std::uint8_t>{0, 0, 0, 0, 0});
}

TEST_CASE("update_reputations rejects malformed input") {
    ReputationState s = ReputationState::initial(3);
    const std::vector<double> bids = {1.0, 1.0, 1.0};
    CHECK_THROWS(update_reputations(s, {0, 1}, {0.5}, bids, UpdateParams{}, 1));
    CHECK_THROWS(update_reputations(s, {5}, {0.5}, bids, UpdateParams{}, 1));
    CHECK_THROWS(update_reputations(s, {0, 0}, {0.5, 0.5}, bids, UpdateParams{}, 1));
    const std::vector<double> zero_bid = {0.0, 1.0, 1.0};
    CHECK_THROWS(update_reputations(s, {0}, {0.5}, zero_bid, UpdateParams{}, 1));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "dcolor/schedule.hpp"

using namespace dcolor;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

EpsSequence two_level_seq(double eps1, double eps2) {
    return make_eps_sequence(1 << 20, 0.19, {eps1, eps2});
}
}  // namespace

TEST_CASE("multi-layer schedule: initial bounds by direct substitution") {
    // eps_i = 1/16 at Delta = 2^20 gives D^(1) = 3 * 2^16.
    auto seq = two_level_seq(1.0 / 32, 1.0 / 16);
    REQUIRE(seq.ell() >= 2);
    REQUIRE(seq.at_level(2) == doctest::Approx(1.0 / 16));
    auto s = schedule_layer2plus(1 << 20, seq, 2.0, 8.0);
    CHECK(s.applications == 7);
    CHECK(s.num_invariants() == 14);

    const auto& b1 = s.at(2, 1);
    CHECK(b1.D == doctest::Approx(196608.0));
    CHECK(b1.U == doctest::Approx((1.0 + 3.0 / 16) * (1 << 20)));
    CHECK(b1.L == doctest::Approx((1 << 20) / std::log(16.0)));
    CHECK(s.t_bound(1, 2) == doctest::Approx(1 << 20));
}

TEST_CASE("multi-layer schedule: shrink rate independently recomputed") {
    auto seq = two_level_seq(1.0 / 32, 1.0 / 16);
    auto s = schedule_layer2plus(1 << 20, seq, 2.0, 8.0);
    for (int layer : {2}) {
        for (int k = 1; k <= s.num_invariants(); ++k) {
            const auto& b = s.at(layer, k);
            double expect = b.D * std::log(std::max(b.U / b.D, 2.0)) / b.L;
            CHECK(b.delta == doctest::Approx(expect));
        }
    }
}

TEST_CASE("multi-layer schedule: recurrences hold link by link") {
    auto seq = make_eps_sequence(1 << 20, 0.19, {0.001, 0.01, 0.1});
    const double beta = 3.0, gamma = 8.0, Delta = 1 << 20;
    auto s = schedule_layer2plus(Delta, seq, beta, gamma);
    for (int layer = 2; layer <= seq.ell(); ++layer) {
        const double eps = seq.at_level(layer);
        const double floor_t = std::pow(eps, 6.0) * Delta;
        for (int q = 1; q <= s.applications; ++q) {
            const auto& odd = s.at(layer, 2 * q - 1);
            const auto& even = s.at(layer, 2 * q);
            CHECK(even.D == doctest::Approx(beta * odd.delta * odd.D));
            CHECK(even.L == doctest::Approx(odd.delta * odd.L));
            CHECK(even.U == doctest::Approx(beta * odd.delta * odd.U));
            CHECK(s.t_bound(2 * q, layer) ==
                  doctest::Approx(std::max(odd.delta * s.t_bound(2 * q - 1, layer),
                                           floor_t)));
            if (q < s.applications) {
                const auto& next = s.at(layer, 2 * q + 1);
                CHECK(next.D == doctest::Approx(gamma * even.D));
                CHECK(next.L == doctest::Approx(even.L));
                CHECK(next.U == doctest::Approx(even.U));
            }
        }
    }
}

TEST_CASE("multi-layer schedule: t never drops below eps^6 Delta") {
    auto seq = make_eps_sequence(1 << 20, 0.19, {0.001, 0.01, 0.1});
    const double Delta = 1 << 20;
    auto s = schedule_layer2plus(Delta, seq, 2.0, 8.0);
    for (int layer = 2; layer <= seq.ell(); ++layer) {
        const double floor_t = std::pow(seq.at_level(layer), 6.0) * Delta;
        bool hit_floor = false;
        for (int k = 1; k <= s.num_invariants(); ++k) {
            double tk = s.t_bound(k, layer);
            CHECK(tk >= floor_t - 1e-9);
            if (hit_floor) CHECK(tk >= floor_t - 1e-9);
            if (tk == doctest::Approx(floor_t)) hit_floor = true;
        }
    }
}

TEST_CASE("layer-1 schedule: overrides at the documented flat indices") {
    const double Delta = 1 << 20, n = 1e6;
    const double beta = 2.0, gamma = 8.0, eps1 = 0.01;
    Layer1Thetas th;
    th.c = 1.0;
    th.d19 = 2.0;
    th.d24 = 3.0;
    auto s = schedule_layer1(Delta, n, eps1, beta, gamma, th);
    CHECK(s.applications == 12);
    CHECK(s.num_invariants() == 24);
    CHECK(s.layers == std::vector<int>{1});

    const double logD = std::log(Delta);
    const double logn = std::log(n);

    // Invariant 18 still follows the default even recurrence.
    const auto& b17 = s.at(1, 17);
    const auto& b18 = s.at(1, 18);
    CHECK(b18.D == doctest::Approx(beta * b17.delta * b17.D));
    CHECK(b18.L == doctest::Approx(b17.delta * b17.L));
    CHECK(b18.U == doctest::Approx(beta * b17.delta * b17.U));

    // Invariant 19: non-default bounds and shrink rate Delta^{-1/20}.
    const auto& b19 = s.at(1, 19);
    CHECK(b19.D == doctest::Approx(2.0 * std::max(std::pow(logD, 18.0), logn)));
    CHECK(b19.L == doctest::Approx(std::pow(Delta, 0.1) * std::pow(logD, 17.0)));
    CHECK(b19.U == doctest::Approx(std::pow(Delta, 0.1) * std::pow(logD, 18.0)));
    CHECK(b19.delta == doctest::Approx(std::pow(Delta, -1.0 / 20.0)));

    // Invariant 20: polylog-degree table entry.
    const auto& b20 = s.at(1, 20);
    CHECK(b20.D == doctest::Approx(logn));
    CHECK(b20.L == doctest::Approx(std::pow(Delta, 1.0 / 20.0) * logD));
    CHECK(b20.U == doctest::Approx(std::pow(Delta, 1.0 / 20.0) * std::pow(logD, 5.0)));

    // Invariant 21: gamma boost of 20, sizes kept.
    const auto& b21 = s.at(1, 21);
    CHECK(b21.D == doctest::Approx(gamma * b20.D));
    CHECK(b21.U == doctest::Approx(b20.U));

    // Invariant 22: bounds polylogarithmic in n, explicit shrink override.
    const auto& b22 = s.at(1, 22);
    CHECK(b22.D == doctest::Approx(logn));
    CHECK(b22.L == doctest::Approx(std::pow(logn, 5.0) / logD));
    CHECK(b22.U == doctest::Approx(std::pow(logn, 5.0)));
    CHECK(b22.delta == doctest::Approx(std::pow(logn, -3.0)));

    // Invariant 23: gamma boost of 22.
    const auto& b23 = s.at(1, 23);
    CHECK(b23.D == doctest::Approx(gamma * b22.D));
    CHECK(b23.L == doctest::Approx(b22.L));
    CHECK(b23.U == doctest::Approx(b22.U));

    // Terminal degree bound is the configured constant times log n, and the
    // terminal size bounds are polylogarithmic in n.
    const auto& b24 = s.at(1, 24);
    CHECK(b24.D == doctest::Approx(3.0 * logn));
    CHECK(b24.U <= std::pow(logn, 6.0));
    CHECK(b24.U > 0.0);

    // No per-layer neighbor bound anywhere in the layer-1 schedule.
    for (int k = 1; k <= s.num_invariants(); ++k)
        CHECK(s.t_bound(k, 1) == kInf);
}

TEST_CASE("contention schedule: strictly increasing until the cap") {
    auto cs = make_contention_schedule(12.0, 1e6);
    REQUIRE(cs.capped);
    REQUIRE(cs.Q >= 2);
    CHECK(cs.at(1) == doctest::Approx(12.0));
    CHECK(cs.at(cs.Q) == doctest::Approx(std::sqrt(1e6)));
    for (int k = 2; k <= cs.Q; ++k) {
        CHECK(cs.at(k) > cs.at(k - 1));
        double expect = std::min(std::sqrt(1e6),
                                 cs.at(k - 1) / (1.1 * std::exp(-cs.at(k - 1) / 6.0)));
        CHECK(cs.at(k) == doctest::Approx(expect));
    }
}

TEST_CASE("contention schedule: small constants loosen instead") {
    // Below 6*ln(1.1) the recurrence decreases, so the cap is never reached;
    // the schedule then just reports its truncated trajectory.
    auto cs = make_contention_schedule(0.5, 1e6, 0.1, 10);
    CHECK_FALSE(cs.capped);
    CHECK(cs.length() == 10);
    for (int k = 2; k <= cs.length(); ++k) CHECK(cs.at(k) < cs.at(k - 1));
}

TEST_CASE("contention schedule: C0 above the cap clamps immediately") {
    auto cs = make_contention_schedule(1e5, 100.0);
    CHECK(cs.capped);
    CHECK(cs.Q == 1);
    CHECK(cs.at(1) == doctest::Approx(10.0));
}

#pragma once
// Iteration schedules for dense coloring without slack and for sparse
// color bidding.
//
// Dense clusters are colored over Q applications of the sampled sequential
// coloring step.  Application q begins with every cluster satisfying the
// (2q-1)-th invariant and ends with the (2q)-th invariant holding up to a
// gamma factor; boosting the bounds by gamma yields the next odd invariant.
// The schedule below precomputes, per layer, the bound quadruple
// (D, L, U, delta) for each invariant index k in [1, 2Q]:
//   D^(k)    upper bound on uncolored external degree and antidegree,
//   L^(k)    lower bound on the uncolored cluster size,
//   U^(k)    upper bound on the uncolored cluster size,
//   delta^(k) shrink rate D^(k) * ln(U^(k)/D^(k)) / L^(k), stored raw
//            (consumers clamp before using it as a sampling fraction),
// plus, for the multi-layer schedule, a table t[k][i] bounding the number of
// uncolored layer-i neighbors of any node.
//
// Sparse nodes are colored by bidding rounds governed by a contention
// schedule C^(1), C^(2), ... that tightens (or, for small constants,
// loosens) the per-node contention bound 1/C^(k) each iteration.

#include <vector>

#include "dcolor/decomp.hpp"

namespace dcolor {

struct InvariantBounds {
    double D = 0.0;
    double L = 0.0;
    double U = 0.0;
    double delta = 0.0;
};

struct InvariantSchedule {
    int applications = 0;  // Q; invariant indices run k = 1 .. 2Q
    double beta = 0.0;
    double gamma = 0.0;
    std::vector<int> layers;  // layer numbers covered, ascending
    // bounds[li][k-1] = bounds at invariant k for clusters in layers[li].
    std::vector<std::vector<InvariantBounds>> bounds;
    // t[k-1][li] = bound on uncolored layer-(layers[li]) neighbors of any
    // node at invariant k.  Infinity when the schedule imposes no bound.
    std::vector<std::vector<double>> t;

    int num_invariants() const { return 2 * applications; }
    int layer_index(int layer) const;
    const InvariantBounds& at(int layer, int k) const;  // k is 1-based
    double t_bound(int k, int layer) const;             // k is 1-based
};

// Shrink rate delta = D * ln(max(U/D, 2)) / L, the raw schedule value.
double shrink_rate(double D, double L, double U);

// Fraction of a cluster sampled for sequential coloring: 1 - delta with
// delta clamped into [kMinShrink, kMaxShrink] so the sample is never empty
// and never the whole cluster.
inline constexpr double kMinShrink = 1e-9;
inline constexpr double kMaxShrink = 0.5;
double clamped_shrink(double delta);

// Schedule for large blocks of layers 2..ell.  Initial bounds per layer i:
// D = 3*eps_i*Delta, L = Delta/ln(1/eps_i), U = (1+3*eps_i)*Delta,
// t(1,i) = Delta.  Even invariants scale (D, L, U) by
// (beta*delta, delta, beta*delta) and t by max{delta_i * t, eps_i^6*Delta};
// odd invariants boost D and t by gamma and keep L, U.
InvariantSchedule schedule_layer2plus(double max_degree, const EpsSequence& seq,
                                      double beta, double gamma,
                                      int applications = 7);

// Config table for the non-default layer-1 bounds: multiplicative constants
// in front of each polylog expression, plus the exponent constant c used in
// the log^{5c} terms.
struct Layer1Thetas {
    double c = 1.0;
    double d19 = 1.0, l19 = 1.0, u19 = 1.0;  // invariant 19 (application 10)
    double d20 = 1.0, l20 = 1.0, u20 = 1.0;  // invariant 20
    double d22 = 1.0, l22 = 1.0, u22 = 1.0;  // invariant 22 (application 11)
    double delta22 = 1.0;                    // shrink override at 22
    double d24 = 1.0;                        // terminal degree bound
};

// Schedule for large blocks of layer 1.  All clusters share one bound
// sequence (layers = {1}); t is infinite throughout.  Applications 1..9
// follow the default recurrences; applications 10..12 use the override
// table. n is the node count of the instance (the terminal bounds are
// polylogarithmic in n rather than in Delta).
InvariantSchedule schedule_layer1(double max_degree, double n, double eps1,
                                  double beta, double gamma,
                                  const Layer1Thetas& thetas,
                                  int applications = 12);

struct ContentionSchedule {
    std::vector<double> C;  // C[k-1] = C^(k)
    double p_star = 0.0;
    bool capped = false;  // reached sqrt(p_star)
    int Q = 0;            // first k with C^(k) = sqrt(p_star); 0 if never

    double at(int k) const { return C.at(static_cast<size_t>(k) - 1); }
    int length() const { return static_cast<int>(C.size()); }
};

// C^(1) = min{C0, sqrt(p_star)};
// C^(k) = min{sqrt(p_star), C^(k-1) / ((1+lambda) * exp(-C^(k-1)/6))}.
// Stops at the cap or after max_iters entries, whichever is first.
ContentionSchedule make_contention_schedule(double C0, double p_star,
                                            double lambda = 0.1,
                                            int max_iters = 64);

}  // namespace dcolor

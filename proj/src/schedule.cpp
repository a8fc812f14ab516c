#include "dcolor/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dcolor/errors.hpp"

namespace dcolor {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double poly_log(double x, double exponent) {
    return std::pow(std::log(std::max(x, 2.0)), exponent);
}
}  // namespace

int InvariantSchedule::layer_index(int layer) const {
    for (size_t i = 0; i < layers.size(); ++i)
        if (layers[i] == layer) return static_cast<int>(i);
    return -1;
}

const InvariantBounds& InvariantSchedule::at(int layer, int k) const {
    int li = layer_index(layer);
    if (li < 0) throw InvariantViolated("schedule has no bounds for layer " +
                                        std::to_string(layer));
    return bounds.at(static_cast<size_t>(li)).at(static_cast<size_t>(k) - 1);
}

double InvariantSchedule::t_bound(int k, int layer) const {
    int li = layer_index(layer);
    if (li < 0) return kInf;
    return t.at(static_cast<size_t>(k) - 1).at(static_cast<size_t>(li));
}

double shrink_rate(double D, double L, double U) {
    if (D <= 0.0 || L <= 0.0) return kMaxShrink;
    return D * std::log(std::max(U / D, 2.0)) / L;
}

double clamped_shrink(double delta) {
    return std::clamp(delta, kMinShrink, kMaxShrink);
}

InvariantSchedule schedule_layer2plus(double max_degree, const EpsSequence& seq,
                                      double beta, double gamma,
                                      int applications) {
    if (beta < 1.0 || gamma < 1.0)
        throw InvariantViolated("schedule requires beta, gamma >= 1");
    InvariantSchedule s;
    s.applications = applications;
    s.beta = beta;
    s.gamma = gamma;
    for (int i = 2; i <= seq.ell(); ++i) s.layers.push_back(i);
    const size_t nl = s.layers.size();
    s.bounds.assign(nl, {});
    s.t.assign(static_cast<size_t>(2 * applications), std::vector<double>(nl, kInf));

    for (size_t li = 0; li < nl; ++li) {
        const double eps = seq.at_level(s.layers[li]);
        const double floor_t = std::pow(eps, 6.0) * max_degree;
        auto& b = s.bounds[li];
        b.resize(static_cast<size_t>(2 * applications));

        InvariantBounds cur;
        cur.D = 3.0 * eps * max_degree;
        cur.L = max_degree / std::log(1.0 / eps);
        cur.U = (1.0 + 3.0 * eps) * max_degree;
        cur.delta = shrink_rate(cur.D, cur.L, cur.U);
        double cur_t = max_degree;
        b[0] = cur;
        s.t[0][li] = cur_t;

        for (int q = 1; q <= applications; ++q) {
            // Even invariant 2q: the cluster shrinks by its rate, degrees by
            // beta times the rate; the per-layer neighbor bound shrinks too
            // but never below eps^6 * Delta.
            InvariantBounds even;
            even.D = beta * cur.delta * cur.D;
            even.L = cur.delta * cur.L;
            even.U = beta * cur.delta * cur.U;
            even.delta = shrink_rate(even.D, even.L, even.U);
            double even_t = std::max(cur.delta * cur_t, floor_t);
            b[static_cast<size_t>(2 * q - 1)] = even;
            s.t[static_cast<size_t>(2 * q - 1)][li] = even_t;
            if (q == applications) break;
            // Odd invariant 2q+1: degree bounds boosted by gamma, sizes kept.
            InvariantBounds odd = even;
            odd.D = gamma * even.D;
            odd.delta = shrink_rate(odd.D, odd.L, odd.U);
            double odd_t = std::max(gamma * even_t, floor_t);
            b[static_cast<size_t>(2 * q)] = odd;
            s.t[static_cast<size_t>(2 * q)][li] = odd_t;
            cur = odd;
            cur_t = odd_t;
        }
    }
    return s;
}

InvariantSchedule schedule_layer1(double max_degree, double n, double eps1,
                                  double beta, double gamma,
                                  const Layer1Thetas& th, int applications) {
    if (beta < 1.0 || gamma < 1.0)
        throw InvariantViolated("schedule requires beta, gamma >= 1");
    if (applications < 12)
        throw InvariantViolated("layer-1 schedule needs >= 12 applications");
    InvariantSchedule s;
    s.applications = applications;
    s.beta = beta;
    s.gamma = gamma;
    s.layers = {1};
    s.bounds.assign(1, {});
    s.t.assign(static_cast<size_t>(2 * applications),
               std::vector<double>(1, kInf));
    auto& b = s.bounds[0];
    b.resize(static_cast<size_t>(2 * applications));

    const double logD = std::log(std::max(max_degree, 2.0));
    const double logn = std::log(std::max(n, 2.0));

    InvariantBounds cur;
    cur.D = 3.0 * eps1 * max_degree;
    cur.L = max_degree / std::log(1.0 / eps1);
    cur.U = (1.0 + 3.0 * eps1) * max_degree;
    cur.delta = shrink_rate(cur.D, cur.L, cur.U);
    b[0] = cur;

    for (int q = 1; q <= applications; ++q) {
        const int k_even = 2 * q;      // invariant reached by application q
        const int k_odd = k_even + 1;  // start of the next application
        InvariantBounds even;
        if (q == 10) {
            even.D = th.d20 * logn;
            even.L = th.l20 * std::pow(max_degree, 1.0 / 20.0) * logD;
            even.U = th.u20 * std::pow(max_degree, 1.0 / 20.0) *
                     poly_log(max_degree, 5.0 * th.c);
            even.delta = shrink_rate(even.D, even.L, even.U);
        } else if (q == 11) {
            even.D = th.d22 * logn;
            even.L = th.l22 * poly_log(n, 5.0 * th.c) / logD;
            even.U = th.u22 * poly_log(n, 5.0 * th.c);
            even.delta = th.delta22 * poly_log(n, -3.0 * th.c);
        } else {
            even.D = beta * cur.delta * cur.D;
            even.L = cur.delta * cur.L;
            even.U = beta * cur.delta * cur.U;
            even.delta = shrink_rate(even.D, even.L, even.U);
            if (q == applications) even.D = th.d24 * logn;  // terminal bound
        }
        b[static_cast<size_t>(k_even - 1)] = even;
        if (q == applications) break;

        InvariantBounds odd;
        if (q == 9) {  // invariant 19: non-default bounds and shrink rate
            odd.D = th.d19 * std::max(poly_log(max_degree, 18.0), logn);
            odd.L = th.l19 * std::pow(max_degree, 0.1) * poly_log(max_degree, 17.0);
            odd.U = th.u19 * std::pow(max_degree, 0.1) * poly_log(max_degree, 18.0);
            odd.delta = std::pow(max_degree, -1.0 / 20.0);
        } else {
            odd = even;
            odd.D = gamma * even.D;
            odd.delta = shrink_rate(odd.D, odd.L, odd.U);
        }
        b[static_cast<size_t>(k_odd - 1)] = odd;
        cur = odd;
    }
    return s;
}

ContentionSchedule make_contention_schedule(double C0, double p_star,
                                            double lambda, int max_iters) {
    if (C0 <= 0.0 || p_star <= 0.0)
        throw InvariantViolated("contention schedule needs C0, p_star > 0");
    ContentionSchedule cs;
    cs.p_star = p_star;
    const double cap = std::sqrt(p_star);
    double c = std::min(C0, cap);
    for (int k = 1; k <= max_iters; ++k) {
        cs.C.push_back(c);
        if (c >= cap) {
            cs.capped = true;
            cs.Q = k;
            break;
        }
        c = std::min(cap, c / ((1.0 + lambda) * std::exp(-c / 6.0)));
    }
    return cs;
}

}  // namespace dcolor

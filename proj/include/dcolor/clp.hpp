#ifndef DCOLOR_CLP_HPP
#define DCOLOR_CLP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dcolor/instance.hpp"

namespace dcolor {

// The randomized subroutines, written as pure functions of (state, coins).
// A Coins functor exposes `int bit(int64_t id, uint32_t idx)` — typically a
// CoinSource with the seed bound, or an explicit bit table in exhaustive
// tests. Every procedure documents its coin layout so independent oracles
// can replay the stream.

struct Assignment {
    NodeId v;
    Color c;
};

struct ProcResult {
    std::vector<Assignment> colored;
    int skipped_empty_palette = 0;  // nodes whose tentative palette ran dry
};

// Dyadic probability a / 2^w.
struct Dyadic {
    uint32_t num = 0;
    int w = 16;
    static Dyadic approx(double p, int w = 16) {
        double scaled = std::floor(p * std::pow(2.0, w));
        scaled = std::min(scaled, std::pow(2.0, w));
        return Dyadic{static_cast<uint32_t>(std::max(0.0, scaled)), w};
    }
};

constexpr int kUniformExtraBits = 8;

namespace detail {
// Uniform value in [0, s) from fixed coin bits: ceil(log2 s) + 8 bits reduced
// mod s (rejection-free; bias <= 2^-8 / s).
template <typename Coins>
uint64_t uniform_mod(const Coins& coins, int64_t id, uint32_t& idx, uint64_t s) {
    if (s <= 1) return 0;
    int bits = static_cast<int>(std::ceil(std::log2(static_cast<double>(s)))) +
               kUniformExtraBits;
    uint64_t v = 0;
    for (int i = 0; i < bits; ++i) v = (v << 1) | static_cast<uint64_t>(coins.bit(id, idx++));
    return v % s;
}

template <typename Coins>
bool coin_event(const Coins& coins, int64_t id, uint32_t& idx, Dyadic p) {
    uint64_t v = 0;
    for (int i = 0; i < p.w; ++i) v = (v << 1) | static_cast<uint64_t>(coins.bit(id, idx++));
    return v < p.num;
}

inline std::vector<Color> available_colors(const ListColoringInstance& inst,
                                           const PartialColoring& col, NodeId v) {
    std::vector<Color> used;
    for (NodeId u : inst.graph.neighbors(v))
        if (col.is_colored(u)) used.push_back(col.color(u));
    std::sort(used.begin(), used.end());
    std::vector<Color> avail;
    for (Color c : inst.palettes[v])
        if (!std::binary_search(used.begin(), used.end(), c)) avail.push_back(c);
    return avail;
}
}  // namespace detail

// OneShotColoring. Coin layout per node v (stream id = ids[v]):
//   idx [0, w)                      participation: value < p.num
//   idx [w, w + ceil(log2 s) + 8)   uniform palette index over s = |avail(v)|
// v keeps its pick iff no participating node in N*(v) = {u in N(v) :
// ids[u] < ids[v], u active} picked the same color.
template <typename Coins>
ProcResult one_shot_coloring(const ListColoringInstance& inst, const PartialColoring& col,
                             const std::vector<NodeId>& active,
                             const std::vector<int64_t>& ids, Dyadic p, const Coins& coins) {
    ProcResult res;
    if (p.num == 0) return res;
    std::vector<char> is_active(inst.num_nodes(), 0);
    for (NodeId v : active) is_active[v] = 1;
    std::unordered_map<NodeId, Color> pick;
    for (NodeId v : active) {
        uint32_t idx = 0;
        if (!detail::coin_event(coins, ids[v], idx, p)) continue;
        auto avail = detail::available_colors(inst, col, v);
        if (avail.empty()) {
            ++res.skipped_empty_palette;
            continue;
        }
        idx = static_cast<uint32_t>(p.w);
        uint64_t r = detail::uniform_mod(coins, ids[v], idx, avail.size());
        pick[v] = avail[r];
    }
    for (auto [v, c] : pick) {
        bool keep = true;
        for (NodeId u : inst.graph.neighbors(v)) {
            if (!is_active[u] || ids[u] >= ids[v]) continue;
            auto it = pick.find(u);
            if (it != pick.end() && it->second == c) {
                keep = false;
                break;
            }
        }
        if (keep) res.colored.push_back({v, c});
    }
    std::sort(res.colored.begin(), res.colored.end(),
              [](const Assignment& a, const Assignment& b) { return a.v < b.v; });
    return res;
}

// Shared tail of the dense coloring steps: sequential tentative picks over
// `order` (each node draws uniformly from its available palette minus the
// tentative picks of earlier adjacent in-cluster nodes), then permanence
// against the tentative picks of N_out.
//
// OutPred(u, v) answers "u is an out-neighbor of v".
template <typename Coins, typename OutPred>
ProcResult dense_sequential_color(const ListColoringInstance& inst, const PartialColoring& col,
                                  const std::vector<std::vector<NodeId>>& cluster_orders,
                                  const std::vector<int64_t>& ids, const Coins& coins,
                                  const OutPred& is_out) {
    ProcResult res;
    std::unordered_map<NodeId, Color> tentative;
    for (const auto& order : cluster_orders) {
        for (NodeId v : order) {
            auto avail = detail::available_colors(inst, col, v);
            // Exclude earlier in-cluster adjacent tentative picks.
            std::vector<Color> taken;
            for (NodeId u : order) {
                if (u == v) break;
                if (inst.graph.has_edge(u, v)) {
                    auto it = tentative.find(u);
                    if (it != tentative.end()) taken.push_back(it->second);
                }
            }
            std::sort(taken.begin(), taken.end());
            std::vector<Color> usable;
            for (Color c : avail)
                if (!std::binary_search(taken.begin(), taken.end(), c)) usable.push_back(c);
            if (usable.empty()) {
                ++res.skipped_empty_palette;
                continue;
            }
            uint32_t idx = 0;
            uint64_t r = detail::uniform_mod(coins, ids[v], idx, usable.size());
            tentative[v] = usable[r];
        }
    }
    for (auto [v, c] : tentative) {
        bool keep = true;
        for (NodeId u : inst.graph.neighbors(v)) {
            if (!is_out(u, v)) continue;
            auto it = tentative.find(u);
            if (it != tentative.end() && it->second == c) {
                keep = false;
                break;
            }
        }
        if (keep) res.colored.push_back({v, c});
    }
    std::sort(res.colored.begin(), res.colored.end(),
              [](const Assignment& a, const Assignment& b) { return a.v < b.v; });
    return res;
}

// DenseColoringStep v1: clusters are processed in their given order; each
// cluster's nodes in pi = (layer, id) order as provided by the caller. Coin
// layout: each node draws its tentative pick from its own stream at idx 0.
template <typename Coins, typename OutPred>
ProcResult dense_step_v1(const ListColoringInstance& inst, const PartialColoring& col,
                         const std::vector<std::vector<NodeId>>& clusters_in_pi_order,
                         const std::vector<int64_t>& ids, const Coins& coins,
                         const OutPred& is_out) {
    return dense_sequential_color(inst, col, clusters_in_pi_order, ids, coins, is_out);
}

// DenseColoringStep v2: per cluster, sample floor((1-delta_j)*|S_j|) nodes
// and color the sample in a random order. Coin layout: the sample draws
// (Fisher–Yates selection over |S_j|) followed by the permutation draws over
// the sample sit on the cluster leader's stream (leader id = ids[] of the
// pi-first node), consumed serially from idx kSampleIdxBase — a region
// disjoint from the tentative color draws, which use each node's own stream
// at idx 0 as in v1 (the leader draws colors too).
constexpr uint32_t kSampleIdxBase = 1u << 16;

template <typename Coins, typename OutPred>
ProcResult dense_step_v2(const ListColoringInstance& inst, const PartialColoring& col,
                         const std::vector<std::vector<NodeId>>& clusters_in_pi_order,
                         const std::vector<double>& delta_j,
                         const std::vector<int64_t>& ids, const Coins& coins,
                         const OutPred& is_out) {
    std::vector<std::vector<NodeId>> sampled_orders;
    for (size_t j = 0; j < clusters_in_pi_order.size(); ++j) {
        const auto& order = clusters_in_pi_order[j];
        if (order.empty()) continue;
        size_t m = static_cast<size_t>(
            std::floor((1.0 - delta_j[j]) * static_cast<double>(order.size())));
        if (m == 0) continue;
        int64_t leader = ids[order.front()];
        uint32_t idx = kSampleIdxBase;
        // Selection pass.
        std::vector<NodeId> arr = order;
        for (size_t i = 0; i < m; ++i) {
            uint64_t r = detail::uniform_mod(coins, leader, idx, arr.size() - i);
            std::swap(arr[i], arr[i + r]);
        }
        std::vector<NodeId> sample(arr.begin(), arr.begin() + m);
        std::sort(sample.begin(), sample.end());  // canonical set before permuting
        // Permutation pass.
        for (size_t i = 0; i + 1 < sample.size(); ++i) {
            uint64_t r = detail::uniform_mod(coins, leader, idx, sample.size() - i);
            std::swap(sample[i], sample[i + r]);
        }
        sampled_orders.push_back(std::move(sample));
    }
    return dense_sequential_color(inst, col, sampled_orders, ids, coins, is_out);
}

// ColorBidding. Coin layout per node v: color j of avail(v) is tried at
// idx = j*w with w bits; the color joins S_v iff the value is below
// floor(C/(2 p_v) * 2^w). v takes the smallest color of S_v not appearing in
// the candidate set of any out-neighbor.
template <typename Coins, typename OutPred>
ProcResult color_bidding(const ListColoringInstance& inst, const PartialColoring& col,
                         const std::vector<NodeId>& active,
                         const std::vector<double>& p_v, double C,
                         const std::vector<int64_t>& ids, const Coins& coins,
                         const OutPred& is_out, int w = 16) {
    ProcResult res;
    std::vector<char> is_active(inst.num_nodes(), 0);
    for (NodeId v : active) is_active[v] = 1;
    std::unordered_map<NodeId, std::vector<Color>> candidate;
    for (NodeId v : active) {
        Dyadic prob = Dyadic::approx(std::min(1.0, C / (2.0 * p_v[v])), w);
        auto avail = detail::available_colors(inst, col, v);
        std::vector<Color> sv;
        for (size_t j = 0; j < avail.size(); ++j) {
            uint32_t idx = static_cast<uint32_t>(j * w);
            if (detail::coin_event(coins, ids[v], idx, prob)) sv.push_back(avail[j]);
        }
        candidate[v] = std::move(sv);
    }
    for (NodeId v : active) {
        const auto& sv = candidate[v];
        for (Color c : sv) {
            bool blocked = false;
            for (NodeId u : inst.graph.neighbors(v)) {
                if (!is_active[u] || !is_out(u, v)) continue;
                const auto& su = candidate[u];
                if (std::binary_search(su.begin(), su.end(), c)) {
                    blocked = true;
                    break;
                }
            }
            if (!blocked) {
                res.colored.push_back({v, c});
                break;  // smallest unblocked candidate
            }
        }
    }
    std::sort(res.colored.begin(), res.colored.end(),
              [](const Assignment& a, const Assignment& b) { return a.v < b.v; });
    return res;
}

// Coins functor binding a CoinSource to a seed.
template <typename Source>
struct SeededCoins {
    const Source* src;
    uint64_t seed;
    int bit(int64_t id, uint32_t idx) const {
        return src->bit(static_cast<uint64_t>(id), idx, seed);
    }
};

}  // namespace dcolor

#endif

#include "dcolor/stages.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "dcolor/clp.hpp"
#include "dcolor/errors.hpp"
#include "dcolor/seedvote.hpp"

namespace dcolor {

int StageConfig::vote_width() const {
    return static_cast<int>(std::ceil(1.0 / alpha));
}

double StageConfig::target_fraction(NodeId n) const {
    return 1.0 - std::pow(static_cast<double>(std::max<NodeId>(n, 2)), -alpha);
}

namespace {

using nlohmann::json;

struct StageCoins {
    const PrfCoinSource* src;
    uint64_t key;
    int bit(int64_t id, uint32_t idx) const {
        return src->bit(static_cast<uint64_t>(id), idx, key);
    }
};

uint64_t stage_salt(const StageConfig& cfg, const std::string& label, uint64_t a,
                    uint64_t b) {
    uint64_t h = cfg.master_seed ^ std::hash<std::string>{}(label);
    return splitmix64(h + 0x9e3779b97f4a7c15ull * (a * 1315423911ull + b + 1));
}

uint64_t coin_key(uint64_t salt, uint64_t vote_seed) {
    return splitmix64(salt ^ (vote_seed * 0x2545f4914f6cdd1dull));
}

std::vector<int64_t> identity_ids(NodeId n) {
    std::vector<int64_t> ids(static_cast<size_t>(n));
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

void commit(PartialColoring& col, const ProcResult& r) {
    for (const auto& a : r.colored) col.set(a.v, a.c);
}

void charge_vote(RoundLog& log, const std::string& label, NodeId n, int delta) {
    charge_grouped(log, label, 2, 2ll * (delta + 2), 2ll * std::max<NodeId>(n, 1));
}

// Large unit sets get a narrow first vote; escalation widens it on demand.
int initial_bits(const StageConfig& cfg, size_t units) {
    return units > 1500 ? std::min(cfg.seed_bits, 4) : cfg.seed_bits;
}

template <typename HappyCount>
SeedVoteResult run_vote(const StageConfig& cfg, NodeId n, size_t units,
                        HappyCount&& fn) {
    const int d0 = initial_bits(cfg, units);
    const int cap = std::min(cfg.seed_bits_cap, d0 + cfg.seed_bits_step);
    return seed_vote_escalating(d0, cap, cfg.seed_bits_step,
                                static_cast<int>(units),
                                cfg.target_fraction(n), fn);
}

// Colors of a hypothetical extension: base coloring plus an overlay.
struct Overlay {
    const PartialColoring* base;
    std::unordered_map<NodeId, Color> extra;

    explicit Overlay(const PartialColoring& b) : base(&b) {}
    void load(const ProcResult& r) {
        extra.clear();
        for (const auto& a : r.colored) extra.emplace(a.v, a.c);
    }
    bool is_colored(NodeId v) const {
        return base->is_colored(v) || extra.count(v) > 0;
    }
    Color color(NodeId v) const {
        if (base->is_colored(v)) return base->color(v);
        auto it = extra.find(v);
        return it == extra.end() ? kUncolored : it->second;
    }
};

int count_avail(const ListColoringInstance& inst, const Overlay& ov, NodeId v) {
    std::vector<Color> used;
    for (NodeId u : inst.graph.neighbors(v)) {
        Color c = ov.color(u);
        if (c != kUncolored) used.push_back(c);
    }
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    int avail = 0;
    const auto& pal = inst.palettes[v];
    size_t i = 0;
    for (Color c : pal) {
        while (i < used.size() && used[i] < c) ++i;
        if (i >= used.size() || used[i] != c) ++avail;
    }
    return avail;
}

}  // namespace

// ---------------------------------------------------------------- slack ---

SlackReport generate_slack(const ListColoringInstance& inst, PartialColoring& col,
                           double eps_cap, const StageConfig& cfg, RoundLog& log,
                           json* trace) {
    const Graph& g = inst.graph;
    const NodeId n = g.num_nodes();
    const int delta = g.max_degree();
    const int C = cfg.vote_width();
    const int G = 4 * C;
    SlackReport rep;
    rep.slack_target = cfg.c_slack * eps_cap * eps_cap * delta;

    std::vector<NodeId> heavy;
    for (NodeId v = 0; v < n; ++v)
        if (delta > 0 && g.degree(v) >= cfg.heavy_fraction * delta) heavy.push_back(v);
    rep.heavy_nodes = static_cast<int>(heavy.size());
    if (heavy.empty()) {
        rep.pre_satisfied = true;
        if (trace) (*trace)["slack"] = {{"pre_satisfied", true}};
        return rep;
    }

    // Non-adjacent neighbor pairs per heavy node; the spread constraint only
    // binds when there are enough of them to split across groups.
    const double psi_floor = 96.0 * C * C;
    // The spread indicator is evaluated on a deterministic stride subsample
    // of each node's pair set: the per-group count scales linearly with the
    // sample, so comparing the sampled count against sample_size / floor is
    // the same test with the evaluation cost capped per node.
    constexpr size_t kPairCap = 512;
    std::vector<std::vector<std::pair<NodeId, NodeId>>> pairs(heavy.size());
    std::vector<double> psi(heavy.size(), 0.0);
    for (size_t hi = 0; hi < heavy.size(); ++hi) {
        const auto& nb = g.neighbors(heavy[hi]);
        std::vector<std::pair<NodeId, NodeId>> ps;
        for (size_t i = 0; i < nb.size(); ++i)
            for (size_t j = i + 1; j < nb.size(); ++j)
                if (!g.has_edge(nb[i], nb[j])) ps.emplace_back(nb[i], nb[j]);
        psi[hi] = static_cast<double>(ps.size());
        if (psi[hi] < psi_floor) continue;
        if (ps.size() > kPairCap) {
            std::vector<std::pair<NodeId, NodeId>> sub;
            sub.reserve(kPairCap);
            for (size_t t = 0; t < kPairCap; ++t)
                sub.push_back(ps[t * ps.size() / kPairCap]);
            ps = std::move(sub);
        }
        pairs[hi] = std::move(ps);
    }

    // Group hash: polynomial family over node ids folded into the field
    // input, subfamily indexed by a short seed expanded to coefficients.
    int a_bits = 0;
    while ((1 << a_bits) < std::max<NodeId>(n, 2)) ++a_bits;
    a_bits = std::min(a_bits, 16);
    const uint32_t fold_mask = (1u << a_bits) - 1;
    int z = cfg.hash_independence;
    while (z > 1 && z * std::max(a_bits, 4) > 60) --z;
    KWiseFamily fam(z, a_bits, 4);
    auto expand = [&](uint64_t s) -> uint64_t {
        uint64_t seed = 0;
        const int w = fam.field_width();
        for (int i = 0; i < fam.k(); ++i) {
            uint64_t coeff = splitmix64(s * 0x100 + static_cast<uint64_t>(i)) &
                             ((1ull << w) - 1);
            seed |= coeff << (i * w);
        }
        return seed;
    };
    auto group_of = [&](uint64_t hseed, NodeId v) -> int {
        uint32_t x = (static_cast<uint32_t>(v) ^
                      static_cast<uint32_t>(splitmix64(v) >> 17)) &
                     fold_mask;
        return static_cast<int>(fam.eval(hseed, x) % static_cast<uint32_t>(G));
    };
    const double dev_base = std::pow(std::max(delta, 2), 0.01);
    auto hash_cost = [&](uint64_t s) -> double {
        const uint64_t hseed = expand(s);
        // One hash evaluation per node, then pure table lookups below.
        std::vector<int8_t> gmemo(static_cast<size_t>(n));
        for (NodeId v = 0; v < n; ++v)
            gmemo[v] = static_cast<int8_t>(group_of(hseed, v));
        double bad = 0.0;
        std::vector<int> cnt(static_cast<size_t>(G));
        std::vector<double> psig(static_cast<size_t>(G));
        for (size_t hi = 0; hi < heavy.size(); ++hi) {
            NodeId v = heavy[hi];
            const int deg = g.degree(v);
            std::fill(cnt.begin(), cnt.end(), 0);
            for (NodeId u : g.neighbors(v)) cnt[gmemo[u]]++;
            const double thr = std::sqrt(static_cast<double>(deg)) * dev_base;
            const double mean = static_cast<double>(deg) / G;
            for (int i = 0; i < G; ++i)
                if (std::abs(cnt[i] - mean) > thr) bad += 1.0;
            if (!pairs[hi].empty()) {
                std::fill(psig.begin(), psig.end(), 0.0);
                for (const auto& [a, b] : pairs[hi]) {
                    int ga = gmemo[a];
                    if (ga == gmemo[b]) psig[ga] += 1.0;
                }
                const double floor_i =
                    static_cast<double>(pairs[hi].size()) / psi_floor;
                for (int i = 0; i < G; ++i)
                    if (psig[i] < floor_i) bad += 1.0;
            }
        }
        return bad;
    };
    auto sel = cond_expect_select(cfg.hash_seed_bits, cfg.hash_seed_bits,
                                  Direction::Minimize, hash_cost);
    const uint64_t hseed = expand(sel.seed);
    rep.hash_seed = sel.seed;
    rep.hash_cost = sel.value;
    charge_grouped(log, "slack_hash", 2, 2ll * (delta + 2), 2ll * n);

    std::vector<int> grp(static_cast<size_t>(n));
    for (NodeId v = 0; v < n; ++v) grp[v] = group_of(hseed, v);

    // Color the first C groups by voted one-shot rounds; the last 3C groups
    // stay uncolored so heavy nodes keep most of their neighborhood.
    PrfCoinSource src(cfg.seed_bits);
    const auto ids = identity_ids(n);
    const Dyadic p = Dyadic::approx(cfg.p_oneshot, cfg.w);
    const double half = static_cast<double>(delta) / 2.0;
    Overlay ov(col);
    auto heavy_happy = [&](NodeId v) {
        int unc = 0;
        for (NodeId u : g.neighbors(v))
            if (!ov.is_colored(u)) ++unc;
        if (static_cast<double>(unc) < half) return false;
        int avail = count_avail(inst, ov, v);
        return static_cast<double>(avail - unc) >= rep.slack_target;
    };
    for (int gi = 0; gi < C; ++gi) {
        std::vector<NodeId> active;
        for (NodeId v = 0; v < n; ++v)
            if (grp[v] == gi && !col.is_colored(v)) active.push_back(v);
        if (active.empty()) {
            rep.group_happy.push_back(1.0);
            continue;
        }
        const uint64_t salt = stage_salt(cfg, "slack", static_cast<uint64_t>(gi), 0);
        auto sim = [&](uint64_t seed) {
            StageCoins coins{&src, coin_key(salt, seed)};
            return one_shot_coloring(inst, col, active, ids, p, coins);
        };
        auto fn = [&](uint64_t seed) {
            ov.load(sim(seed));
            int h = 0;
            for (NodeId v : heavy)
                if (heavy_happy(v)) ++h;
            return h;
        };
        auto res = run_vote(cfg, n, heavy.size(), fn);
        auto win = sim(res.seed);
        rep.colored += static_cast<int>(win.colored.size());
        commit(col, win);
        rep.group_happy.push_back(static_cast<double>(res.happy) /
                                  static_cast<double>(heavy.size()));
        charge_vote(log, "slack_group", n, delta);
    }

    // Repair: at larger degrees the slack target exceeds one, so a heavy
    // node needs at least two same-colored neighbors; a handful can miss
    // that after the initial group passes. Keep voting one-shot rounds over
    // the uncolored members of the colored group prefix, widening the prefix
    // by one group whenever a vote makes no progress. The happiness
    // predicate is unchanged, so over-coloring (dropping a node below
    // delta/2 uncolored neighbors) scores worse and gets voted down.
    auto count_happy = [&] {
        ov.extra.clear();
        int h = 0;
        for (NodeId v : heavy)
            if (heavy_happy(v)) ++h;
        return h;
    };
    int prefix = C;
    int have = count_happy();
    const int max_repairs = 4 * C;
    for (int r = 0; r < max_repairs && have < static_cast<int>(heavy.size());
         ++r) {
        std::vector<NodeId> active;
        for (NodeId v = 0; v < n; ++v)
            if (grp[v] < prefix && !col.is_colored(v)) active.push_back(v);
        if (active.empty()) {
            if (prefix >= G / 2) break;
            ++prefix;
            continue;
        }
        const uint64_t salt = stage_salt(cfg, "slack_repair",
                                         static_cast<uint64_t>(r),
                                         static_cast<uint64_t>(prefix));
        auto sim = [&](uint64_t seed) {
            StageCoins coins{&src, coin_key(salt, seed)};
            return one_shot_coloring(inst, col, active, ids, p, coins);
        };
        auto fn = [&](uint64_t seed) {
            ov.load(sim(seed));
            int h = 0;
            for (NodeId v : heavy)
                if (heavy_happy(v)) ++h;
            return h;
        };
        auto res = run_vote(cfg, n, heavy.size(), fn);
        auto win = sim(res.seed);
        rep.colored += static_cast<int>(win.colored.size());
        commit(col, win);
        charge_vote(log, "slack_group", n, delta);
        int now = count_happy();
        if (now <= have && prefix < G / 2) ++prefix;
        have = now;
    }

    ov.extra.clear();
    std::vector<std::string> unhappy;
    rep.min_uncolored_ratio = 1.0;
    rep.min_heavy_slack = std::numeric_limits<double>::infinity();
    for (NodeId v : heavy) {
        int unc = 0;
        for (NodeId u : g.neighbors(v))
            if (!col.is_colored(u)) ++unc;
        int avail = count_avail(inst, ov, v);
        double slack = static_cast<double>(avail - unc);
        rep.min_uncolored_ratio =
            std::min(rep.min_uncolored_ratio,
                     static_cast<double>(unc) / std::max(delta, 1));
        rep.min_heavy_slack = std::min(rep.min_heavy_slack, slack);
        if (static_cast<double>(unc) < half || slack < rep.slack_target)
            unhappy.push_back(std::to_string(v));
    }
    if (trace) {
        (*trace)["slack"] = {{"hash_seed", rep.hash_seed},
                             {"hash_cost", rep.hash_cost},
                             {"heavy_nodes", rep.heavy_nodes},
                             {"colored", rep.colored},
                             {"group_happy", rep.group_happy},
                             {"min_uncolored_ratio", rep.min_uncolored_ratio},
                             {"min_heavy_slack", rep.min_heavy_slack},
                             {"slack_target", rep.slack_target}};
    }
    if (!unhappy.empty()) {
        std::string msg = "generate_slack: unhappy nodes:";
        for (const auto& s : unhappy) msg += " " + s;
        throw StageFailed(msg);
    }
    return rep;
}

// -------------------------------------------- small / medium blocks -------

namespace {

// One voted application of the sequential coloring step on `clusters`
// (restricted to their uncolored members), committing the winning seed.
// happy_fn is evaluated on the hypothetical extension via `ov`.
template <typename HappyFn>
SeedVoteResult voted_v1(const ListColoringInstance& inst, PartialColoring& col,
                        const std::vector<std::vector<NodeId>>& clusters,
                        const DensityHierarchy& hier, Overlay& ov, size_t units,
                        const StageConfig& cfg, RoundLog& log,
                        const std::string& label, uint64_t salt, HappyFn&& happy) {
    static thread_local PrfCoinSource src(16);
    const auto ids = identity_ids(inst.num_nodes());
    auto is_out = [&hier](NodeId u, NodeId v) { return hier.out_neighbor(v, u); };
    std::vector<std::vector<NodeId>> live;
    for (const auto& c : clusters) {
        std::vector<NodeId> u;
        for (NodeId v : c)
            if (!col.is_colored(v)) u.push_back(v);
        if (!u.empty()) live.push_back(std::move(u));
    }
    auto sim = [&](uint64_t seed) {
        StageCoins coins{&src, coin_key(salt, seed)};
        return dense_step_v1(inst, col, live, ids, coins, is_out);
    };
    auto fn = [&](uint64_t seed) {
        ov.load(sim(seed));
        return happy();
    };
    auto res = run_vote(cfg, inst.num_nodes(), units, fn);
    commit(col, sim(res.seed));
    charge_vote(log, label, inst.num_nodes(), inst.max_degree());
    return res;
}

struct Watcher {
    NodeId v;
    // neighbors inside the processed set, with their layer
    std::vector<std::pair<NodeId, int>> s_nbrs;
};

std::vector<Watcher> build_watchers(const Graph& g, const DensityHierarchy& hier,
                                    const std::vector<char>& in_s) {
    std::vector<Watcher> ws;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        if (!hier.in_vstar(v)) continue;
        Watcher w{v, {}};
        for (NodeId u : g.neighbors(v))
            if (in_s[u]) w.s_nbrs.emplace_back(u, hier.layer_of[u]);
        if (!w.s_nbrs.empty()) ws.push_back(std::move(w));
    }
    return ws;
}

}  // namespace

void color_small_medium_2plus(const ListColoringInstance& inst,
                              const DensityHierarchy& hier, PartialColoring& col,
                              const StageConfig& cfg, RoundLog& log, json* trace) {
    const Graph& g = inst.graph;
    const double delta = g.max_degree();
    const int ell = hier.ell();
    json jstage = json::array();
    for (BlockClass cls : {BlockClass::Small, BlockClass::Medium}) {
        std::vector<std::vector<NodeId>> clusters;
        std::vector<char> in_s(static_cast<size_t>(g.num_nodes()), 0);
        std::vector<const Block*> blocks;
        for (const auto& b : hier.blocks)
            if (b.cls == cls && b.layer >= 2) blocks.push_back(&b);
        std::sort(blocks.begin(), blocks.end(), [](const Block* a, const Block* b) {
            return std::pair(a->layer, a->cluster) < std::pair(b->layer, b->cluster);
        });
        for (const Block* b : blocks) {
            clusters.push_back(b->nodes);
            for (NodeId v : b->nodes) in_s[v] = 1;
        }
        if (clusters.empty()) continue;
        const std::string label =
            cls == BlockClass::Small ? "sm2_small" : "sm2_medium";
        auto watchers = build_watchers(g, hier, in_s);

        Overlay ov(col);
        auto watcher_happy = [&](const Watcher& w,
                                 const std::vector<double>& tk) {
            std::vector<int> cnt(static_cast<size_t>(ell + 1), 0);
            for (const auto& [u, lay] : w.s_nbrs)
                if (!ov.is_colored(u)) cnt[static_cast<size_t>(lay)]++;
            for (int i = 2; i <= ell; ++i)
                if (cnt[static_cast<size_t>(i)] > tk[static_cast<size_t>(i)] + 1e-9)
                    return false;
            return true;
        };

        for (int k = 1; k <= 6; ++k) {
            std::vector<double> tk(static_cast<size_t>(ell + 1), delta);
            for (int i = 2; i <= ell; ++i) {
                double eps = hier.seq.at_level(i);
                double di = 2.0 * eps * std::log(1.0 / eps);
                tk[static_cast<size_t>(i)] = std::min(
                    std::pow(2.0 * di, k - 1) * delta, std::pow(eps, 5.0) * delta);
            }
            for (int a = 0; a < cfg.vote_width(); ++a) {
                ov.extra.clear();
                std::vector<const Watcher*> unhappy;
                for (const auto& w : watchers)
                    if (!watcher_happy(w, tk)) unhappy.push_back(&w);
                if (unhappy.empty()) break;
                auto res = voted_v1(
                    inst, col, clusters, hier, ov, unhappy.size(), cfg, log, label,
                    stage_salt(cfg, label, static_cast<uint64_t>(k),
                               static_cast<uint64_t>(a)),
                    [&]() {
                        int h = 0;
                        for (const Watcher* w : unhappy)
                            if (watcher_happy(*w, tk)) ++h;
                        return h;
                    });
                jstage.push_back({{"class", label},
                                  {"phase", k},
                                  {"substep", a + 1},
                                  {"unhappy", unhappy.size()},
                                  {"happy", res.happy},
                                  {"seed_bits", res.seed_bits}});
            }
            ov.extra.clear();
            for (const auto& w : watchers)
                if (!watcher_happy(w, tk))
                    throw StageFailed(label + ": phase " + std::to_string(k) +
                                      " target missed at node " +
                                      std::to_string(w.v));
        }
    }
    if (trace) (*trace)["small_medium_2plus"] = jstage;
}

void color_small_medium_1(const ListColoringInstance& inst,
                          const DensityHierarchy& hier, PartialColoring& col,
                          const StageConfig& cfg, RoundLog& log, json* trace) {
    const Graph& g = inst.graph;
    const double delta = std::max(g.max_degree(), 2);
    const double deg_target =
        cfg.c9 * std::pow(delta, 0.9) * std::log(delta);
    json jstage = json::array();
    for (BlockClass cls : {BlockClass::Small, BlockClass::Medium}) {
        std::vector<std::vector<NodeId>> clusters;
        std::vector<char> in_s(static_cast<size_t>(g.num_nodes()), 0);
        std::vector<NodeId> members;
        for (const auto& b : hier.blocks)
            if (b.cls == cls && b.layer == 1) {
                clusters.push_back(b.nodes);
                for (NodeId v : b.nodes) {
                    in_s[v] = 1;
                    members.push_back(v);
                }
            }
        if (members.empty()) continue;
        const std::string label = cls == BlockClass::Small ? "sm1_small" : "sm1_medium";

        Overlay ov(col);
        auto node_happy = [&](NodeId v) {
            if (ov.is_colored(v)) return true;
            int unc = 0;
            for (NodeId u : g.neighbors(v))
                if (in_s[u] && !ov.is_colored(u)) ++unc;
            return static_cast<double>(unc) <= deg_target;
        };
        for (int a = 0; a < cfg.vote_width(); ++a) {
            ov.extra.clear();
            std::vector<NodeId> unhappy;
            for (NodeId v : members)
                if (!node_happy(v)) unhappy.push_back(v);
            if (unhappy.empty()) break;
            auto res = voted_v1(inst, col, clusters, hier, ov, unhappy.size(), cfg,
                                log, label,
                                stage_salt(cfg, label, 1, static_cast<uint64_t>(a)),
                                [&]() {
                                    int h = 0;
                                    for (NodeId v : unhappy)
                                        if (node_happy(v)) ++h;
                                    return h;
                                });
            jstage.push_back({{"class", label},
                              {"substep", a + 1},
                              {"unhappy", unhappy.size()},
                              {"happy", res.happy}});
        }
        std::vector<NodeId> residue;
        for (NodeId v : members)
            if (!col.is_colored(v)) residue.push_back(v);
        if (!residue.empty())
            sparse_gap_color(inst, col, residue, cfg, log, trace, label + "_gap");
    }
    if (trace) (*trace)["small_medium_1"] = jstage;
}

// ------------------------------------------------ large-block framework ---

namespace {

struct FwCluster {
    int layer = 0;
    std::vector<NodeId> nodes;  // ascending id (pi order)
};

struct FwState {
    const ListColoringInstance* inst;
    const DensityHierarchy* hier;
    const InvariantSchedule* sched;
    std::vector<FwCluster> clusters;
    std::vector<int> cluster_of;               // node -> cluster idx or -1
    std::vector<std::vector<int>> cluster_nbrs;  // cluster adjacency
    int ell = 0;
    bool use_t = false;

    // Does cluster j satisfy the k-th invariant up to `factor` on the degree
    // bounds, under the hypothetical extension? The lower size bound is
    // informational (recorded by callers, never enforced here).
    bool satisfies(int j, int k, double factor, const Overlay& ov) const {
        const FwCluster& cl = clusters[static_cast<size_t>(j)];
        const auto& b = sched->at(cl.layer, k);
        int unc = 0;
        for (NodeId v : cl.nodes)
            if (!ov.is_colored(v)) ++unc;
        if (static_cast<double>(unc) > b.U + 1e-9) return false;
        const Graph& g = inst->graph;
        std::vector<int> layer_cnt(static_cast<size_t>(ell + 1), 0);
        for (NodeId v : cl.nodes) {
            if (ov.is_colored(v)) continue;
            int adj_in = 0, ext = 0;
            if (use_t)
                std::fill(layer_cnt.begin(), layer_cnt.end(), 0);
            for (NodeId u : g.neighbors(v)) {
                int cu = cluster_of[u];
                if (cu < 0 || ov.is_colored(u)) continue;
                int lu = clusters[static_cast<size_t>(cu)].layer;
                if (cu == j) {
                    ++adj_in;
                } else if (lu <= cl.layer) {
                    ++ext;
                }
                if (use_t) layer_cnt[static_cast<size_t>(lu)]++;
            }
            int anti = unc - 1 - adj_in;
            if (static_cast<double>(anti) > factor * b.D + 1e-9) return false;
            if (static_cast<double>(ext) > factor * b.D + 1e-9) return false;
            if (use_t) {
                for (int i = 2; i <= ell; ++i) {
                    double ti = sched->t_bound(k, i);
                    if (std::isfinite(ti) &&
                        static_cast<double>(layer_cnt[static_cast<size_t>(i)]) >
                            factor * ti + 1e-9)
                        return false;
                }
            }
        }
        return true;
    }

    // Largest factor needed for cluster j to satisfy invariant k (degree
    // bounds and t only); 0 when trivially satisfied.
    double achieved_factor(int j, int k, const Overlay& ov) const {
        const FwCluster& cl = clusters[static_cast<size_t>(j)];
        const auto& b = sched->at(cl.layer, k);
        const Graph& g = inst->graph;
        int unc = 0;
        for (NodeId v : cl.nodes)
            if (!ov.is_colored(v)) ++unc;
        double f = 0.0;
        std::vector<int> layer_cnt(static_cast<size_t>(ell + 1), 0);
        for (NodeId v : cl.nodes) {
            if (ov.is_colored(v)) continue;
            int adj_in = 0, ext = 0;
            if (use_t) std::fill(layer_cnt.begin(), layer_cnt.end(), 0);
            for (NodeId u : g.neighbors(v)) {
                int cu = cluster_of[u];
                if (cu < 0 || ov.is_colored(u)) continue;
                int lu = clusters[static_cast<size_t>(cu)].layer;
                if (cu == j)
                    ++adj_in;
                else if (lu <= cl.layer)
                    ++ext;
                if (use_t) layer_cnt[static_cast<size_t>(lu)]++;
            }
            int anti = unc - 1 - adj_in;
            if (b.D > 0) f = std::max(f, std::max(anti, ext) / b.D);
            if (use_t)
                for (int i = 2; i <= ell; ++i) {
                    double ti = sched->t_bound(k, i);
                    if (std::isfinite(ti) && ti > 0)
                        f = std::max(f, layer_cnt[static_cast<size_t>(i)] / ti);
                }
        }
        return f;
    }
};

}  // namespace

FrameworkOutcome color_large_framework(const ListColoringInstance& inst,
                                       const DensityHierarchy& hier,
                                       PartialColoring& col,
                                       const InvariantSchedule& sched,
                                       int min_layer, int max_layer,
                                       const StageConfig& cfg, RoundLog& log,
                                       json* trace) {
    FrameworkOutcome out;
    const Graph& g = inst.graph;
    FwState st;
    st.inst = &inst;
    st.hier = &hier;
    st.sched = &sched;
    st.ell = hier.ell();
    st.use_t = max_layer >= 2;
    st.cluster_of.assign(static_cast<size_t>(g.num_nodes()), -1);
    {
        std::vector<const Block*> blocks;
        for (const auto& b : hier.blocks)
            if (b.cls == BlockClass::Large && b.layer >= min_layer &&
                b.layer <= max_layer)
                blocks.push_back(&b);
        std::sort(blocks.begin(), blocks.end(), [](const Block* a, const Block* b) {
            return std::pair(a->layer, a->nodes.front()) <
                   std::pair(b->layer, b->nodes.front());
        });
        for (const Block* b : blocks) {
            FwCluster fc{b->layer, b->nodes};
            std::sort(fc.nodes.begin(), fc.nodes.end());
            for (NodeId v : fc.nodes)
                st.cluster_of[v] = static_cast<int>(st.clusters.size());
            st.clusters.push_back(std::move(fc));
        }
    }
    const int m = static_cast<int>(st.clusters.size());
    if (m == 0) {
        if (trace) (*trace)["framework"] = {{"clusters", 0}};
        return out;
    }
    st.cluster_nbrs.assign(static_cast<size_t>(m), {});
    for (int j = 0; j < m; ++j) {
        std::unordered_set<int> nb;
        for (NodeId v : st.clusters[static_cast<size_t>(j)].nodes)
            for (NodeId u : g.neighbors(v)) {
                int cu = st.cluster_of[u];
                if (cu >= 0 && cu != j) nb.insert(cu);
            }
        st.cluster_nbrs[static_cast<size_t>(j)].assign(nb.begin(), nb.end());
    }

    static thread_local PrfCoinSource src(16);
    const auto ids = identity_ids(g.num_nodes());
    const std::string label = max_layer >= 2 ? "large_2plus" : "large_1";
    const int Q = cfg.vote_width();
    json jiters = json::array();

    for (int q = 1; q <= sched.applications; ++q) {
        const int k = 2 * q - 1;
        out.applications = q;
        std::vector<char> happy_done(static_cast<size_t>(m), 0);
        std::vector<int> kept_at(static_cast<size_t>(m), -1);  // inner app index
        std::vector<double> allowed(static_cast<size_t>(m), 0.0);
        std::vector<int> unhappy;
        Overlay base_ov(col);
        for (int j = 0; j < m; ++j) {
            bool any_unc = false;
            for (NodeId v : st.clusters[static_cast<size_t>(j)].nodes)
                if (!col.is_colored(v)) any_unc = true;
            if (!any_unc || st.satisfies(j, k + 1, 1.0, base_ov)) {
                happy_done[static_cast<size_t>(j)] = 1;
                allowed[static_cast<size_t>(j)] = 1.0;
            } else {
                unhappy.push_back(j);
            }
        }

        for (int a = 1; a <= Q && !unhappy.empty(); ++a) {
            const double factor = static_cast<double>(a);  // r + 1, r = a - 1
            std::vector<std::vector<NodeId>> live;
            std::vector<double> deltas;
            std::vector<int> live_cluster;
            for (int j : unhappy) {
                std::vector<NodeId> u;
                for (NodeId v : st.clusters[static_cast<size_t>(j)].nodes)
                    if (!col.is_colored(v)) u.push_back(v);
                if (u.empty()) continue;
                live.push_back(std::move(u));
                deltas.push_back(clamped_shrink(
                    sched.at(st.clusters[static_cast<size_t>(j)].layer, k).delta));
                live_cluster.push_back(j);
            }
            auto is_out = [&hier](NodeId u, NodeId v) {
                return hier.out_neighbor(v, u);
            };
            const uint64_t salt = stage_salt(cfg, label,
                                             static_cast<uint64_t>(k),
                                             static_cast<uint64_t>(a));
            auto sim = [&](uint64_t seed) {
                StageCoins coins{&src, coin_key(salt, seed)};
                return dense_step_v2(inst, col, live, deltas, ids, coins, is_out);
            };
            Overlay ov(col);
            std::vector<int> relevant;
            {
                std::unordered_set<int> rel(unhappy.begin(), unhappy.end());
                for (int j : unhappy)
                    for (int nb : st.cluster_nbrs[static_cast<size_t>(j)])
                        rel.insert(nb);
                relevant.assign(rel.begin(), rel.end());
            }
            std::vector<char> sat(static_cast<size_t>(m), 0);
            auto eval_happy = [&](std::vector<int>* happy_out) {
                for (int j : relevant)
                    sat[static_cast<size_t>(j)] =
                        st.satisfies(j, k + 1, factor, ov) ? 1 : 0;
                int h = 0;
                for (int j : unhappy) {
                    bool ok = sat[static_cast<size_t>(j)] != 0;
                    for (int nb : st.cluster_nbrs[static_cast<size_t>(j)])
                        ok = ok && sat[static_cast<size_t>(nb)] != 0;
                    if (ok) {
                        ++h;
                        if (happy_out) happy_out->push_back(j);
                    }
                }
                return h;
            };
            auto fn = [&](uint64_t seed) {
                ov.load(sim(seed));
                return eval_happy(nullptr);
            };
            auto res = run_vote(cfg, g.num_nodes(), unhappy.size(), fn);
            ++out.votes;
            auto win = sim(res.seed);
            ov.load(win);
            std::vector<int> winners;
            eval_happy(&winners);
            std::vector<char> keep(static_cast<size_t>(m), 0);
            for (int j : winners) keep[static_cast<size_t>(j)] = 1;
            int dropped = 0;
            for (const auto& asg : win.colored) {
                int cj = st.cluster_of[asg.v];
                if (cj >= 0 && keep[static_cast<size_t>(cj)])
                    col.set(asg.v, asg.c);
                else
                    ++dropped;
            }
            if (dropped > 0) {
                ++out.rollback_events;
                out.rollback_nodes += dropped;
                // Every application that rolls anything back can return up
                // to one D's worth of uncolored externals to earlier keepers.
                for (int j = 0; j < m; ++j)
                    if (happy_done[static_cast<size_t>(j)])
                        allowed[static_cast<size_t>(j)] = std::min<double>(
                            allowed[static_cast<size_t>(j)] + 1.0, Q);
            }
            // Rollback safety: every cluster kept now or earlier must still
            // meet its allowed factor on the committed coloring.
            Overlay committed(col);
            for (int j : winners) {
                happy_done[static_cast<size_t>(j)] = 1;
                kept_at[static_cast<size_t>(j)] = a;
                allowed[static_cast<size_t>(j)] = factor;
            }
            for (int j = 0; j < m; ++j) {
                if (!happy_done[static_cast<size_t>(j)]) continue;
                if (kept_at[static_cast<size_t>(j)] < 0) continue;  // pre-happy
                if (!st.satisfies(j, k + 1, allowed[static_cast<size_t>(j)],
                                  committed))
                    ++out.safety_violations;
            }
            std::vector<int> next;
            for (int j : unhappy)
                if (!keep[static_cast<size_t>(j)]) next.push_back(j);
            unhappy = std::move(next);
            charge_vote(log, label, g.num_nodes(), g.max_degree());
            jiters.push_back({{"k", k},
                              {"application", a},
                              {"happy", res.happy},
                              {"unhappy_left", unhappy.size()},
                              {"rolled_back", dropped},
                              {"seed_bits", res.seed_bits}});
        }
        if (!unhappy.empty())
            throw StageFailed(label + ": invariant " + std::to_string(k + 1) +
                              " unreachable for " +
                              std::to_string(unhappy.size()) + " clusters");
        Overlay done(col);
        for (int j = 0; j < m; ++j)
            out.max_growth_factor = std::max(
                out.max_growth_factor, st.achieved_factor(j, k + 1, done));
    }
    for (const auto& cl : st.clusters)
        for (NodeId v : cl.nodes)
            if (!col.is_colored(v)) ++out.uncolored_left;
    if (trace)
        (*trace)["framework_" + label] = {{"clusters", m},
                                          {"iterations", jiters},
                                          {"rollback_events", out.rollback_events},
                                          {"rollback_nodes", out.rollback_nodes},
                                          {"safety_violations", out.safety_violations},
                                          {"max_growth_factor", out.max_growth_factor},
                                          {"uncolored_left", out.uncolored_left}};
    return out;
}

// ------------------------------------------------------- sparse bidding ---

SparseOutcome color_sparse(const ListColoringInstance& inst, PartialColoring& col,
                           const SparseTask& task, const StageConfig& cfg,
                           RoundLog& log, json* trace) {
    SparseOutcome out;
    const Graph& g = inst.graph;
    std::vector<NodeId> targets;
    std::vector<char> is_target(static_cast<size_t>(g.num_nodes()), 0);
    for (NodeId v : task.nodes)
        if (!col.is_colored(v)) {
            targets.push_back(v);
            is_target[v] = 1;
        }
    if (targets.empty()) return out;
    auto is_out = [&](NodeId u, NodeId v) {
        return is_target[u] != 0 && is_target[v] != 0 && task.rank[u] < task.rank[v];
    };

    // Current excess p_v under a hypothetical extension (drives the bidding
    // probabilities).
    auto p_of = [&](NodeId v, const Overlay& ov) -> double {
        int avail = count_avail(inst, ov, v);
        int unc_out = 0;
        for (NodeId u : g.neighbors(v))
            if (is_target[u] && !ov.is_colored(u) && task.rank[u] < task.rank[v])
                ++unc_out;
        return std::max(1.0, static_cast<double>(avail - unc_out));
    };

    Overlay base(col);
    // Contention uses the stage-entry excess p0: the hypothesis parameter is
    // static, so con(v) = sum over uncolored out-neighbors of 1/p0(u) loses
    // terms as nodes get colored and never gains any — that is what makes it
    // non-increasing across iteration boundaries.
    std::vector<double> p0(static_cast<size_t>(g.num_nodes()), 1.0);
    for (NodeId v : targets) p0[v] = p_of(v, base);
    auto con_of = [&](NodeId v, const Overlay& ov) -> double {
        double s = 0.0;
        for (NodeId u : g.neighbors(v)) {
            if (!is_target[u] || ov.is_colored(u) || task.rank[u] >= task.rank[v])
                continue;
            s += 1.0 / p0[u];
        }
        return s;
    };

    double p_star = std::numeric_limits<double>::infinity();
    for (NodeId v : targets) p_star = std::min(p_star, p0[v]);
    out.p_star = p_star;
    double max_con = 0.0;
    NodeId worst = targets.front();
    for (NodeId v : targets) {
        double c = con_of(v, base);
        if (c > max_con) {
            max_con = c;
            worst = v;
        }
    }
    double C = std::min(std::sqrt(p_star),
                        max_con > 0 ? 1.0 / max_con
                                    : std::sqrt(p_star));
    if (task.C > 0) C = std::min(C, task.C);
    if (C < cfg.min_derived_C)
        throw ContentionHypothesisViolated(
            task.label + ": node " + std::to_string(worst) + " has contention " +
            std::to_string(max_con) + ", derived C " + std::to_string(C) +
            " below floor " + std::to_string(cfg.min_derived_C));
    out.derived_C = C;
    auto cs = make_contention_schedule(C, p_star, cfg.lambda,
                                       cfg.max_contention_iters);

    static thread_local PrfCoinSource src(16);
    const auto ids = identity_ids(g.num_nodes());
    std::unordered_map<NodeId, double> prev_con;
    for (NodeId v : targets) prev_con[v] = con_of(v, base);

    for (int k = 1; k <= cs.length(); ++k) {
        // Boundary check: contention within schedule and non-increasing.
        base.extra.clear();
        double bmax = 0.0;
        const double bound = 1.0 / cs.at(k);
        bool all_colored = true;
        for (NodeId v : targets) {
            if (col.is_colored(v)) continue;
            all_colored = false;
            double c = con_of(v, base);
            bmax = std::max(bmax, c);
            if (c > bound + 1e-9) out.within_schedule = false;
            if (c > prev_con[v] + 1e-9) out.monotone_ok = false;
            prev_con[v] = c;
        }
        out.boundary_max_con.push_back(bmax);
        if (all_colored) break;
        out.iterations = k;
        const double next_bound = k < cs.length() ? 1.0 / cs.at(k + 1) : bound;

        std::vector<double> p_vec(static_cast<size_t>(g.num_nodes()), 1.0);
        for (NodeId v : targets)
            if (!col.is_colored(v)) p_vec[v] = p_of(v, base);

        auto node_happy = [&](NodeId v, const Overlay& ov) {
            if (ov.is_colored(v)) return true;
            double c = con_of(v, ov);
            return c <= next_bound + 1e-9 && c <= prev_con[v] + 1e-9;
        };
        for (int a = 0; a < cfg.vote_width(); ++a) {
            base.extra.clear();
            std::vector<NodeId> unhappy;
            std::vector<NodeId> active;
            for (NodeId v : targets) {
                if (!col.is_colored(v)) active.push_back(v);
                if (!node_happy(v, base)) unhappy.push_back(v);
            }
            if (unhappy.empty()) break;
            const uint64_t salt =
                stage_salt(cfg, task.label, static_cast<uint64_t>(k),
                           static_cast<uint64_t>(a));
            auto sim = [&](uint64_t seed) {
                StageCoins coins{&src, coin_key(salt, seed)};
                return color_bidding(inst, col, active, p_vec, cs.at(k), ids,
                                     coins, is_out, cfg.w);
            };
            Overlay ov(col);
            auto fn = [&](uint64_t seed) {
                ov.load(sim(seed));
                int h = 0;
                for (NodeId v : unhappy)
                    if (node_happy(v, ov)) ++h;
                return h;
            };
            auto res = run_vote(cfg, g.num_nodes(), unhappy.size(), fn);
            ++out.votes;
            commit(col, sim(res.seed));
            charge_vote(log, task.label, g.num_nodes(), g.max_degree());
        }
    }

    // Wrap-up: voted repetitions until everyone is colored; stop after
    // final_reps consecutive votes with zero progress.
    int stalled = 0;
    for (int rep = 0; rep < 400 && stalled < cfg.final_reps; ++rep) {
        std::vector<NodeId> active;
        for (NodeId v : targets)
            if (!col.is_colored(v)) active.push_back(v);
        if (active.empty()) break;
        base.extra.clear();
        std::vector<double> p_vec(static_cast<size_t>(g.num_nodes()), 1.0);
        for (NodeId v : active) p_vec[v] = p_of(v, base);
        const double Cfin = cs.at(cs.length());
        const uint64_t salt = stage_salt(cfg, task.label + "_final",
                                         static_cast<uint64_t>(rep), 0);
        auto sim = [&](uint64_t seed) {
            StageCoins coins{&src, coin_key(salt, seed)};
            return color_bidding(inst, col, active, p_vec, Cfin, ids, coins,
                                 is_out, cfg.w);
        };
        auto fn = [&](uint64_t seed) {
            return static_cast<int>(sim(seed).colored.size());
        };
        auto res = seed_vote(initial_bits(cfg, active.size()), fn);
        ++out.votes;
        stalled = res.happy == 0 ? stalled + 1 : 0;
        commit(col, sim(res.seed));
        charge_vote(log, task.label, g.num_nodes(), g.max_degree());
    }
    for (NodeId v : targets)
        if (!col.is_colored(v)) ++out.uncolored_left;
    if (trace)
        (*trace)["sparse_" + task.label] = {
            {"targets", targets.size()},
            {"derived_C", out.derived_C},
            {"p_star", out.p_star},
            {"iterations", out.iterations},
            {"votes", out.votes},
            {"monotone_ok", out.monotone_ok},
            {"within_schedule", out.within_schedule},
            {"boundary_max_con", out.boundary_max_con},
            {"uncolored_left", out.uncolored_left}};
    if (out.uncolored_left > 0)
        throw StageFailed(task.label + ": " + std::to_string(out.uncolored_left) +
                          " nodes uncolored after bidding");
    return out;
}

SparseOutcome sparse_gap_color(const ListColoringInstance& inst, PartialColoring& col,
                               const std::vector<NodeId>& targets,
                               const StageConfig& cfg, RoundLog& log, json* trace,
                               const std::string& label) {
    SparseTask task;
    task.nodes = targets;
    task.rank.resize(static_cast<size_t>(inst.num_nodes()));
    std::iota(task.rank.begin(), task.rank.end(), 0);
    task.C = 0.0;  // derived from the measured contention
    task.label = label;
    return color_sparse(inst, col, task, cfg, log, trace);
}

SparseOutcome finish_dense_U(const ListColoringInstance& inst,
                             const DensityHierarchy& hier, PartialColoring& col,
                             const StageConfig& cfg, RoundLog& log, json* trace) {
    SparseTask task;
    task.label = "finish_dense_U";
    const NodeId n = inst.num_nodes();
    task.rank.resize(static_cast<size_t>(n));
    for (NodeId v = 0; v < n; ++v) {
        // Sparser -> denser orientation: denser (lower layer) ranks lower.
        int layer = hier.in_vstar(v)
                        ? (hier.is_sparse(v) ? hier.ell() + 1 : hier.layer_of[v])
                        : hier.ell() + 2;
        task.rank[v] = static_cast<int64_t>(layer) * n + v;
        if (hier.in_vstar(v) && !hier.is_sparse(v) && !col.is_colored(v))
            task.nodes.push_back(v);
    }
    return color_sparse(inst, col, task, cfg, log, trace);
}

SparseOutcome finish_sparse(const ListColoringInstance& inst,
                            const DensityHierarchy& hier, PartialColoring& col,
                            const StageConfig& cfg, RoundLog& log, json* trace) {
    SparseTask task;
    task.label = "finish_sparse";
    task.rank.resize(static_cast<size_t>(inst.num_nodes()));
    std::iota(task.rank.begin(), task.rank.end(), 0);
    double gamma_sp = std::numeric_limits<double>::infinity();
    Overlay ov(col);
    for (NodeId v = 0; v < inst.num_nodes(); ++v)
        if (hier.is_sparse(v) && !col.is_colored(v)) {
            task.nodes.push_back(v);
            int unc = 0;
            for (NodeId u : inst.graph.neighbors(v))
                if (!col.is_colored(u)) ++unc;
            double excess = count_avail(inst, ov, v) - unc;
            gamma_sp = std::min(gamma_sp,
                                excess / std::max(inst.max_degree(), 1));
        }
    if (trace && !task.nodes.empty())
        (*trace)["finish_sparse_gamma_sp"] = gamma_sp;
    return color_sparse(inst, col, task, cfg, log, trace);
}

// ---------------------------------------------------- low-degree finish ---

void low_degree_color(const ListColoringInstance& inst, PartialColoring& col,
                      const StageConfig& cfg, RoundLog& log, json* trace) {
    (void)cfg;
    const Graph& g = inst.graph;
    std::vector<NodeId> rest;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (!col.is_colored(v)) rest.push_back(v);
    if (rest.empty()) return;

    // Uncolored subgraph with compact ids.
    std::vector<NodeId> back(rest.begin(), rest.end());
    std::vector<NodeId> fwd(static_cast<size_t>(g.num_nodes()), -1);
    for (size_t i = 0; i < back.size(); ++i) fwd[back[i]] = static_cast<NodeId>(i);
    Graph sub(static_cast<NodeId>(back.size()));
    for (NodeId v : rest)
        for (NodeId u : g.neighbors(v))
            if (fwd[u] >= 0 && u > v) sub.add_edge(fwd[v], fwd[u]);
    sub.finalize();

    // Small ids, distinct within radius 1: local minima form independent
    // sets, and simultaneous minimum-available picks stay proper.
    LinialIds lin = linial_ids(sub, 1, log, /*allow_trivial=*/false);
    int rounds = 0;
    size_t left = back.size();
    Overlay ov(col);
    while (left > 0) {
        std::vector<NodeId> batch;
        for (size_t i = 0; i < back.size(); ++i) {
            NodeId v = back[i];
            if (col.is_colored(v)) continue;
            bool min_id = true;
            for (NodeId su : sub.neighbors(static_cast<NodeId>(i)))
                if (!col.is_colored(back[su]) && lin.id[su] < lin.id[i])
                    min_id = false;
            if (min_id) batch.push_back(v);
        }
        std::vector<std::pair<NodeId, Color>> picks;
        for (NodeId v : batch) {
            std::vector<Color> used;
            for (NodeId u : g.neighbors(v))
                if (col.is_colored(u)) used.push_back(col.color(u));
            std::sort(used.begin(), used.end());
            Color pick = kUncolored;
            for (Color c : inst.palettes[v])
                if (!std::binary_search(used.begin(), used.end(), c)) {
                    pick = c;
                    break;
                }
            if (pick == kUncolored)
                throw InvariantViolated("low_degree_color: empty availability at " +
                                        std::to_string(v));
            picks.emplace_back(v, pick);
        }
        for (const auto& [v, c] : picks) col.set(v, c);
        left -= picks.size();
        ++rounds;
        charge_grouped(log, "low_degree", 1, 2ll * (g.max_degree() + 2),
                       2ll * static_cast<int64_t>(left + picks.size()));
    }
    if (trace)
        (*trace)["low_degree"] = {{"nodes", back.size()},
                                  {"rounds", rounds},
                                  {"id_bits", lin.bits}};
}

}  // namespace dcolor

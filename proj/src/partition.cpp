#include "dcolor/partition.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "dcolor/errors.hpp"

namespace dcolor {

namespace {

using nlohmann::json;

constexpr int kHashInputBits = 16;
constexpr int kHashOutputBits = 16;

uint32_t fold16(int64_t x) {
    return static_cast<uint32_t>(
        (static_cast<uint64_t>(x) ^ (splitmix64(static_cast<uint64_t>(x)) >> 23)) &
        0xffffu);
}

int map_bin(uint32_t val16, int bins) {
    return static_cast<int>((static_cast<uint64_t>(val16) * static_cast<uint64_t>(bins)) >> 16);
}

uint64_t expand_poly(const KWiseFamily& fam, uint64_t subfamily) {
    uint64_t seed = 0;
    const int w = fam.field_width();
    for (int i = 0; i < fam.k(); ++i) {
        uint64_t coeff =
            splitmix64(subfamily * 0x10000 + static_cast<uint64_t>(i) + 0x517cc1b7u) &
            ((1ull << w) - 1);
        seed |= coeff << (i * w);
    }
    return seed;
}

// Shared evaluation context so hot loops build the field tables once.
struct HashCtx {
    KWiseFamily fam;
    int bins;
    uint64_t poly1, poly2;

    HashCtx(const PartitionConfig& cfg, uint64_t s1, uint64_t s2)
        : fam(cfg.hash_independence, kHashInputBits, kHashOutputBits),
          bins(cfg.bins),
          poly1(expand_poly(fam, s1)),
          poly2(expand_poly(fam, s2 + 0x800000)) {}

    int node_bin(NodeId v) const { return map_bin(fam.eval(poly1, fold16(v)), bins); }
    int color_bin(Color c) const {
        return map_bin(fam.eval(poly2, fold16(c)), bins - 1);
    }
};

// Core cost loop; with early_exit the first bad chunk aborts the count (the
// zero-certificate scan only needs cost == 0 vs cost > 0).
int64_t cost_impl(const ListColoringInstance& inst, const PartialColoring& col,
                  const HashCtx& h, const PartitionConfig& cfg, bool early_exit) {
    const Graph& g = inst.graph;
    const double thr = cfg.chunk_threshold();
    const int B = cfg.bins;
    int64_t bad = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        if (col.is_colored(v)) continue;
        const int bv = h.node_bin(v);
        // Neighbor chunks (colored neighbors belong to V_0 and are skipped).
        int d = 0, dp = 0;
        auto flush_n = [&]() {
            if (d > 0 &&
                std::abs(static_cast<double>(dp) - static_cast<double>(d) / B) > thr)
                ++bad;
            d = dp = 0;
        };
        for (NodeId u : g.neighbors(v)) {
            if (col.is_colored(u)) continue;
            ++d;
            if (h.node_bin(u) == bv) ++dp;
            if (d == cfg.chunk_cap) {
                flush_n();
                if (early_exit && bad > 0) return bad;
            }
        }
        flush_n();
        if (early_exit && bad > 0) return bad;
        // Color chunks, only for nodes outside the leftover bin.
        if (bv == B - 1) continue;
        int p = 0, pp = 0;
        auto flush_c = [&]() {
            if (p > 0 && std::abs(static_cast<double>(pp) -
                                  static_cast<double>(p) / (B - 1)) > thr)
                ++bad;
            p = pp = 0;
        };
        for (Color c : inst.palettes[v]) {
            ++p;
            if (h.color_bin(c) == bv) ++pp;
            if (p == cfg.chunk_cap) {
                flush_c();
                if (early_exit && bad > 0) return bad;
            }
        }
        flush_c();
        if (early_exit && bad > 0) return bad;
    }
    return bad;
}

PartitionHashes make_hashes(const PartitionConfig& cfg, const HashCtx& ctx,
                            uint64_t s1, uint64_t s2) {
    PartitionHashes h;
    h.bins = cfg.bins;
    h.seed1 = s1;
    h.seed2 = s2;
    h.poly1 = ctx.poly1;
    h.poly2 = ctx.poly2;
    h.independence = cfg.hash_independence;
    h.input_bits = kHashInputBits;
    return h;
}

}  // namespace

double PartitionConfig::zeta(NodeId n) const {
    return std::log(static_cast<double>(bins)) /
           std::log(static_cast<double>(std::max<NodeId>(n, 2)));
}

double PartitionConfig::chunk_threshold() const {
    return std::sqrt(static_cast<double>(chunk_cap)) * slack_factor;
}

int PartitionHashes::node_bin(NodeId v) const {
    KWiseFamily fam(independence, input_bits, kHashOutputBits);
    return map_bin(fam.eval(poly1, fold16(v)), bins);
}

int PartitionHashes::color_bin(Color c) const {
    KWiseFamily fam(independence, input_bits, kHashOutputBits);
    return map_bin(fam.eval(poly2, fold16(c)), bins - 1);
}

int64_t partition_cost(const ListColoringInstance& inst, const PartialColoring& col,
                       const PartitionHashes& h, const PartitionConfig& cfg) {
    HashCtx ctx(cfg, h.seed1, h.seed2);
    return cost_impl(inst, col, ctx, cfg, /*early_exit=*/false);
}

PartitionHashes select_partition_hashes(const ListColoringInstance& inst,
                                        const PartialColoring& col,
                                        const PartitionConfig& cfg, RoundLog& log) {
    if (cfg.bins < 2) throw InvariantViolated("select_partition_hashes: bins < 2");
    const uint64_t per = 1ull << cfg.hash_seed_bits;
    // Zero-certificate scan over the joint seed space: costs are integers,
    // so exhausting the family without a zero proves the family mean is at
    // least 1.
    for (uint64_t s = 0; s < per * per; ++s) {
        const uint64_t s1 = s & (per - 1), s2 = s >> cfg.hash_seed_bits;
        HashCtx ctx(cfg, s1, s2);
        if (cost_impl(inst, col, ctx, cfg, /*early_exit=*/true) == 0) {
            auto h = make_hashes(cfg, ctx, s1, s2);
            if (partition_cost(inst, col, h, cfg) != 0)
                throw InvariantViolated("select_partition_hashes: verification recount");
            charge_grouped(log, "partition_select", 2, 2ll * cfg.chunk_cap,
                           2ll * std::max<NodeId>(inst.num_nodes(), 1));
            return h;
        }
    }
    throw ExpectationNotBelowOne(
        "select_partition_hashes: every pair in the " + std::to_string(per * per) +
        "-seed family has a bad chunk, so the family mean cost is >= 1");
}

PartitionLevel low_space_partition(const ListColoringInstance& inst,
                                   const PartialColoring& col,
                                   const PartitionHashes& h,
                                   const PartitionConfig& cfg, RoundLog& log) {
    const Graph& g = inst.graph;
    const int B = cfg.bins;
    HashCtx ctx(cfg, h.seed1, h.seed2);
    PartitionLevel level;
    level.leftover_index = B - 1;
    std::vector<std::vector<NodeId>> members(static_cast<size_t>(B));
    std::vector<int> bin_of(static_cast<size_t>(g.num_nodes()), -1);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        if (col.is_colored(v)) continue;
        int b = ctx.node_bin(v);
        bin_of[v] = b;
        members[static_cast<size_t>(b)].push_back(v);
    }
    level.min_new_palette = INT32_MAX;
    for (int b = 0; b < B; ++b) {
        SubInstance sub;
        sub.orig = members[static_cast<size_t>(b)];
        std::vector<NodeId> fwd(static_cast<size_t>(g.num_nodes()), -1);
        for (size_t i = 0; i < sub.orig.size(); ++i)
            fwd[sub.orig[i]] = static_cast<NodeId>(i);
        Graph sg(static_cast<NodeId>(sub.orig.size()));
        for (NodeId v : sub.orig)
            for (NodeId u : g.neighbors(v))
                if (bin_of[u] == b && u > v) sg.add_edge(fwd[v], fwd[u]);
        sg.finalize();
        sub.inst.graph = std::move(sg);
        sub.inst.relaxed = true;
        sub.inst.palettes.resize(sub.orig.size());
        for (size_t i = 0; i < sub.orig.size(); ++i) {
            NodeId v = sub.orig[i];
            // Availability against the colored set (V_0), then restriction
            // to the colors h2 routes to this bin (sibling bins only; the
            // leftover bin is rebuilt after the siblings are solved).
            std::vector<Color> used;
            for (NodeId u : g.neighbors(v))
                if (col.is_colored(u)) used.push_back(col.color(u));
            std::sort(used.begin(), used.end());
            std::vector<Color>& pal = sub.inst.palettes[i];
            for (Color c : inst.palettes[v]) {
                if (std::binary_search(used.begin(), used.end(), c)) continue;
                if (b != B - 1 && ctx.color_bin(c) != b) continue;
                pal.push_back(c);
            }
            if (b != B - 1) {
                const int dp = sub.inst.graph.degree(static_cast<NodeId>(i));
                if (static_cast<int>(pal.size()) <= dp)
                    throw InvariantViolated(
                        "low_space_partition: p'(v) <= d'(v) at node " +
                        std::to_string(v) + " (p' " + std::to_string(pal.size()) +
                        ", d' " + std::to_string(dp) + ")");
                level.min_new_palette =
                    std::min(level.min_new_palette, static_cast<int>(pal.size()));
            }
            level.max_new_degree = std::max(
                level.max_new_degree, sub.inst.graph.degree(static_cast<NodeId>(i)));
        }
        level.bins.push_back(std::move(sub));
    }
    // Sibling palette disjointness: h2 routes each color to exactly one bin.
    std::unordered_map<Color, int> owner;
    for (int b = 0; b + 1 < B; ++b)
        for (const auto& pal : level.bins[static_cast<size_t>(b)].inst.palettes)
            for (Color c : pal) {
                auto [it, fresh] = owner.emplace(c, b);
                if (!fresh && it->second != b)
                    throw InvariantViolated(
                        "low_space_partition: color " + std::to_string(c) +
                        " appears in sibling bins " + std::to_string(it->second) +
                        " and " + std::to_string(b));
            }
    if (level.min_new_palette == INT32_MAX) level.min_new_palette = 0;
    charge_grouped(log, "partition_split", 2, 2ll * cfg.chunk_cap,
                   2ll * std::max<NodeId>(g.num_nodes(), 1));
    return level;
}

void rebuild_leftover(const ListColoringInstance& inst, const PartialColoring& col,
                      SubInstance& leftover) {
    for (size_t i = 0; i < leftover.orig.size(); ++i) {
        NodeId v = leftover.orig[i];
        std::vector<Color> used;
        for (NodeId u : inst.graph.neighbors(v))
            if (col.is_colored(u)) used.push_back(col.color(u));
        std::sort(used.begin(), used.end());
        std::vector<Color> pal;
        for (Color c : inst.palettes[v])
            if (!std::binary_search(used.begin(), used.end(), c)) pal.push_back(c);
        const int dp = leftover.inst.graph.degree(static_cast<NodeId>(i));
        if (static_cast<int>(pal.size()) <= dp)
            throw InvariantViolated("rebuild_leftover: p'(v) <= d'(v) at node " +
                                    std::to_string(v));
        leftover.inst.palettes[i] = std::move(pal);
    }
}

namespace {

int solve_recursive(const ListColoringInstance& li, PartialColoring& lc, int depth,
                    const PartitionConfig& cfg, const BaseSolver& base,
                    RoundLog& log, json* levels, json* trace) {
    if (li.num_nodes() == 0) return 0;
    if (depth <= 0 || li.num_nodes() <= cfg.bins || li.max_degree() <= 1) {
        base(li, lc, log, trace);
        return 0;
    }
    PartitionHashes h;
    try {
        h = select_partition_hashes(li, lc, cfg, log);
    } catch (const ExpectationNotBelowOne&) {
        base(li, lc, log, trace);
        return 1;
    }
    auto level = low_space_partition(li, lc, h, cfg, log);
    if (levels) {
        json sizes = json::array();
        for (const auto& s : level.bins) sizes.push_back(s.orig.size());
        char buf[64];
        std::snprintf(buf, sizeof buf, "%llx/%llx",
                      static_cast<unsigned long long>(h.seed1),
                      static_cast<unsigned long long>(h.seed2));
        levels->push_back({{"depth", depth},
                           {"bin_sizes", sizes},
                           {"max_new_degree", level.max_new_degree},
                           {"min_new_palette", level.min_new_palette},
                           {"parent_degree", li.max_degree()},
                           {"hash_seeds", buf}});
    }
    int fallbacks = 0;
    auto solve_bin = [&](SubInstance& sub, RoundLog& blog) {
        PartialColoring sc(sub.inst.num_nodes());
        fallbacks += solve_recursive(sub.inst, sc, depth - 1, cfg, base, blog,
                                     levels, trace);
        for (size_t i = 0; i < sub.orig.size(); ++i) {
            if (!sc.is_colored(static_cast<NodeId>(i)))
                throw StageFailed("color_reduce: leaf left node uncolored");
            lc.set(sub.orig[i], sc.color(static_cast<NodeId>(i)));
        }
    };
    // Sibling bins run on disjoint machine groups simultaneously, so the
    // level costs the max of their round counts, not the sum. Each sibling
    // gets its own sub-log (same budget, remaining cap) and the sub-logs are
    // merged round-by-round afterwards.
    std::vector<RoundLog> sublogs;
    for (int b = 0; b + 1 < cfg.bins; ++b) {
        sublogs.emplace_back(log.budget(), log.round_cap() - log.num_rounds());
        solve_bin(level.bins[static_cast<size_t>(b)], sublogs.back());
    }
    size_t max_rounds = 0;
    for (const auto& sl : sublogs)
        max_rounds = std::max(max_rounds, sl.rounds().size());
    for (size_t r = 0; r < max_rounds; ++r) {
        std::string label;
        int64_t machines = 0, peak = 0, total = 0;
        for (const auto& sl : sublogs) {
            if (r >= sl.rounds().size()) continue;
            const auto& rec = sl.rounds()[r];
            if (label.empty()) label = rec.label;
            machines += rec.machines;
            peak = std::max(peak, rec.peak_words);
            total += rec.total_words;
        }
        log.charge(label, 1, machines, peak, total);
    }
    // The leftover bin depends on the siblings' colors, so it runs after them.
    rebuild_leftover(li, lc, level.bins.back());
    solve_bin(level.bins.back(), log);
    return fallbacks;
}

}  // namespace

int color_reduce(const ListColoringInstance& inst, PartialColoring& col,
                 const PartitionConfig& cfg, const BaseSolver& base_solver,
                 RoundLog& log, nlohmann::json* trace) {
    const NodeId n = inst.num_nodes();
    const double zeta = cfg.zeta(n);
    int depth = 0;
    if (inst.max_degree() > cfg.target_degree) {
        // Levels of B-way splitting needed to bring the expected bin degree
        // down to target_degree: ceil(log_B(Delta / target)).
        depth = static_cast<int>(std::ceil(
                    std::log(static_cast<double>(inst.max_degree()) /
                             static_cast<double>(std::max(cfg.target_degree, 1))) /
                    std::log(static_cast<double>(cfg.bins)))) -
                cfg.depth_offset;
    }
    depth = std::clamp(depth, 0, cfg.max_depth);

    // Top-level sub-instance: the uncolored nodes with their availability
    // (V_0 is whatever the caller colored already).
    SubInstance top;
    for (NodeId v = 0; v < n; ++v)
        if (!col.is_colored(v)) top.orig.push_back(v);
    std::vector<NodeId> fwd(static_cast<size_t>(n), -1);
    for (size_t i = 0; i < top.orig.size(); ++i)
        fwd[top.orig[i]] = static_cast<NodeId>(i);
    Graph sg(static_cast<NodeId>(top.orig.size()));
    for (NodeId v : top.orig)
        for (NodeId u : inst.graph.neighbors(v))
            if (fwd[u] >= 0 && u > v) sg.add_edge(fwd[v], fwd[u]);
    sg.finalize();
    top.inst.graph = std::move(sg);
    top.inst.relaxed = inst.relaxed;
    top.inst.palettes.resize(top.orig.size());
    for (size_t i = 0; i < top.orig.size(); ++i) {
        NodeId v = top.orig[i];
        std::vector<Color> used;
        for (NodeId u : inst.graph.neighbors(v))
            if (col.is_colored(u)) used.push_back(col.color(u));
        std::sort(used.begin(), used.end());
        for (Color c : inst.palettes[v])
            if (!std::binary_search(used.begin(), used.end(), c))
                top.inst.palettes[i].push_back(c);
    }

    json levels = json::array();
    PartialColoring lc(top.inst.num_nodes());
    int fallbacks = solve_recursive(top.inst, lc, depth, cfg, base_solver, log,
                                    trace ? &levels : nullptr, trace);
    for (size_t i = 0; i < top.orig.size(); ++i)
        col.set(top.orig[i], lc.color(static_cast<NodeId>(i)));
    if (trace)
        (*trace)["color_reduce"] = {{"depth", depth},
                                    {"zeta", zeta},
                                    {"levels", levels},
                                    {"fallbacks", fallbacks}};
    return fallbacks;
}

}  // namespace dcolor

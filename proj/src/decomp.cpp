#include "dcolor/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "dcolor/errors.hpp"

namespace dcolor {

namespace {
constexpr double kEpsGuard = 1e-12;
}

EpsSequence make_eps_sequence(int delta, double cap, const std::vector<double>& explicit_list) {
    if (!(cap < 0.2))
        throw InvariantViolated("eps cap must be < 1/5, got " + std::to_string(cap));
    EpsSequence seq;
    seq.cap = cap;
    double e1 = std::pow(std::max(2.0, static_cast<double>(delta)), -0.1);
    if (e1 <= cap + kEpsGuard) {
        seq.faithful = true;
        double e = e1;
        while (e <= cap + kEpsGuard) {
            seq.eps.push_back(e);
            e = std::sqrt(e);
        }
    } else {
        for (double e : explicit_list) {
            if (e <= cap + kEpsGuard) seq.eps.push_back(e);
        }
        // Extend by the successor rule while it stays below the cap.
        while (!seq.eps.empty()) {
            double next = std::sqrt(seq.eps.back());
            if (next > cap + kEpsGuard) break;
            seq.eps.push_back(next);
        }
    }
    for (size_t i = 1; i < seq.eps.size(); ++i)
        if (seq.eps[i] <= seq.eps[i - 1])
            throw InvariantViolated("eps sequence must be strictly increasing");
    int bound = delta >= 4 ? static_cast<int>(2 * std::log2(std::log2(delta)) + 2) + 1 : 3;
    if (seq.faithful && seq.ell() > bound)
        throw InvariantViolated("eps sequence longer than 2 log2 log2 Delta + 2");
    return seq;
}

std::vector<std::pair<NodeId, NodeId>> compute_friend_edges(const Graph& g, double eps, int q) {
    std::vector<std::pair<NodeId, NodeId>> out;
    const int delta = g.max_degree();
    const int threshold =
        static_cast<int>(std::ceil((1.0 - eps) * (delta - q) - kEpsGuard));
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        for (NodeId u : g.neighbors(v)) {
            if (u <= v) continue;
            if (g.common_neighbors(v, u, threshold) >= threshold) out.emplace_back(v, u);
        }
    }
    return out;
}

LevelDecomp decompose_level(const Graph& g, double eps, int q) {
    LevelDecomp level;
    level.eps = eps;
    const NodeId n = g.num_nodes();
    const int delta = g.max_degree();
    const int threshold =
        static_cast<int>(std::ceil((1.0 - eps) * (delta - q) - kEpsGuard));
    auto friends = compute_friend_edges(g, eps, q);
    std::vector<std::vector<NodeId>> fadj(n);
    for (auto [u, v] : friends) {
        fadj[u].push_back(v);
        fadj[v].push_back(u);
    }
    level.dense.assign(n, 0);
    for (NodeId v = 0; v < n; ++v)
        level.dense[v] = static_cast<int>(fadj[v].size()) >= threshold ? 1 : 0;
    // Components of dense nodes under friend edges between dense nodes.
    level.cluster_of.assign(n, -1);
    for (NodeId v = 0; v < n; ++v) {
        if (!level.dense[v] || level.cluster_of[v] >= 0) continue;
        int cid = static_cast<int>(level.clusters.size());
        level.clusters.emplace_back();
        std::queue<NodeId> q2;
        q2.push(v);
        level.cluster_of[v] = cid;
        while (!q2.empty()) {
            NodeId x = q2.front();
            q2.pop();
            level.clusters[cid].push_back(x);
            for (NodeId u : fadj[x]) {
                if (level.dense[u] && level.cluster_of[u] < 0) {
                    level.cluster_of[u] = cid;
                    q2.push(u);
                }
            }
        }
        std::sort(level.clusters[cid].begin(), level.clusters[cid].end());
    }
    return level;
}

CliquePropsReport verify_clique_props(const Graph& g, const LevelDecomp& level,
                                      const std::vector<NodeId>& clique, double eps) {
    CliquePropsReport rep;
    const double delta = g.max_degree();
    std::vector<char> in_c(g.num_nodes(), 0);
    for (NodeId v : clique) in_c[v] = 1;

    if (static_cast<double>(clique.size()) > (1.0 + 3.0 * eps) * delta + kEpsGuard) {
        rep.size_ok = false;
        rep.violations.push_back("size " + std::to_string(clique.size()) + " above (1+3e)D");
    }
    for (NodeId v : clique) {
        int external_dense = 0, inside_adjacent = 0;
        for (NodeId u : g.neighbors(v)) {
            if (in_c[u])
                ++inside_adjacent;
            else if (level.dense[u])
                ++external_dense;
        }
        int antidegree = static_cast<int>(clique.size()) - 1 - inside_adjacent;
        rep.max_external = std::max(rep.max_external, static_cast<double>(external_dense));
        rep.max_antidegree = std::max(rep.max_antidegree, static_cast<double>(antidegree));
        if (external_dense > eps * delta + kEpsGuard) {
            rep.external_degree_ok = false;
            rep.violations.push_back("node " + std::to_string(v) + " external dense degree " +
                                     std::to_string(external_dense));
        }
        if (!(antidegree < 3.0 * eps * delta - kEpsGuard)) {
            rep.antidegree_ok = false;
            rep.violations.push_back("node " + std::to_string(v) + " antidegree " +
                                     std::to_string(antidegree));
        }
    }
    // Weak diameter: every pair adjacent or sharing a neighbor in G.
    for (size_t i = 0; i < clique.size(); ++i) {
        for (size_t j = i + 1; j < clique.size(); ++j) {
            NodeId u = clique[i], v = clique[j];
            if (!g.has_edge(u, v) && g.common_neighbors(u, v, 1) == 0) {
                rep.diameter_ok = false;
                rep.violations.push_back("pair (" + std::to_string(u) + "," +
                                         std::to_string(v) + ") at distance > 2");
            }
        }
    }
    return rep;
}

double DensityHierarchy::sparsity_eps(NodeId v) const {
    int layer = layer_of[v];
    if (layer == 0) return seq.eps.empty() ? seq.cap : seq.eps.back();
    if (layer == 1 || layer < 0) return 0.0;
    return seq.at_level(layer - 1);
}

bool DensityHierarchy::related(const Block& a, const Block& b) const {
    if (a.layer == b.layer) return false;
    const Block& lo = a.layer < b.layer ? a : b;
    const Block& hi = a.layer < b.layer ? b : a;
    // lo is a descendant of hi iff lo's nodes live in hi's level-(hi.layer)
    // cluster; level-i clusters are nested inside level-i' clusters (i < i').
    NodeId rep = lo.nodes.front();
    return levels[hi.layer - 1].cluster_of[rep] == hi.cluster;
}

DensityHierarchy build_hierarchy(const Graph& g, const std::vector<char>* active,
                                 const EpsSequence& seq, int q) {
    DensityHierarchy h;
    h.seq = seq;
    h.q = q;
    h.delta = g.max_degree();
    const NodeId n = g.num_nodes();
    for (int i = 1; i <= seq.ell(); ++i)
        h.levels.push_back(decompose_level(g, seq.at_level(i), q));

    h.layer_of.assign(n, 0);
    for (NodeId v = 0; v < n; ++v) {
        if (active && !(*active)[v]) {
            h.layer_of[v] = -1;
            continue;
        }
        int layer = 0;  // sparse unless dense at some level
        for (int i = 1; i <= seq.ell(); ++i) {
            if (h.levels[i - 1].dense[v]) {
                layer = i;
                break;  // first (densest) level wins
            }
        }
        h.layer_of[v] = layer;
    }

    // Blocks: layer-i active nodes grouped by their level-i cluster.
    h.block_of.assign(n, -1);
    for (int i = 1; i <= seq.ell(); ++i) {
        const LevelDecomp& level = h.levels[i - 1];
        std::vector<std::vector<NodeId>> members(level.clusters.size());
        for (NodeId v = 0; v < n; ++v)
            if (h.layer_of[v] == i) members[level.cluster_of[v]].push_back(v);
        for (size_t c = 0; c < members.size(); ++c) {
            if (members[c].empty()) continue;
            Block b;
            b.layer = i;
            b.cluster = static_cast<int>(c);
            b.nodes = std::move(members[c]);
            double elig = static_cast<double>(h.delta) /
                          std::log(1.0 / seq.at_level(i));
            b.large_eligible = static_cast<double>(b.nodes.size()) >= elig - kEpsGuard;
            int bid = static_cast<int>(h.blocks.size());
            for (NodeId v : b.nodes) h.block_of[v] = bid;
            h.blocks.push_back(std::move(b));
        }
    }

    classify_blocks(h);
    return h;
}

void classify_blocks(DensityHierarchy& h) {
    // Greedy maximal independent set of large-eligible blocks, prioritized by
    // (size desc, layer asc, min node id asc); the rest of the eligible
    // blocks are medium, everything else small.
    std::vector<int> order;
    for (size_t i = 0; i < h.blocks.size(); ++i)
        if (h.blocks[i].large_eligible) order.push_back(static_cast<int>(i));
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        const Block& a = h.blocks[x];
        const Block& b = h.blocks[y];
        if (a.nodes.size() != b.nodes.size()) return a.nodes.size() > b.nodes.size();
        if (a.layer != b.layer) return a.layer < b.layer;
        return a.nodes.front() < b.nodes.front();
    });
    std::vector<int> chosen;
    for (int idx : order) {
        bool independent = true;
        for (int c : chosen)
            if (h.related(h.blocks[idx], h.blocks[c])) independent = false;
        if (independent) {
            h.blocks[idx].cls = BlockClass::Large;
            chosen.push_back(idx);
        } else {
            h.blocks[idx].cls = BlockClass::Medium;
        }
    }
    for (auto& b : h.blocks)
        if (!b.large_eligible) b.cls = BlockClass::Small;
}

ClassSlackReport check_class_slack(const Graph& g, const DensityHierarchy& h) {
    ClassSlackReport rep;
    const double delta = g.max_degree();
    rep.min_small_margin = delta;
    rep.min_medium_margin = delta;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        int b = h.block_of[v];
        if (b < 0) continue;
        const Block& blk = h.blocks[b];
        int in_vstar = 0, in_mlsp = 0, in_lsp = 0;
        for (NodeId u : g.neighbors(v)) {
            if (!h.in_vstar(u)) continue;
            ++in_vstar;
            BlockClass uc = BlockClass::Small;
            bool sparse = h.is_sparse(u);
            if (!sparse && h.block_of[u] >= 0) uc = h.blocks[h.block_of[u]].cls;
            if (sparse || uc == BlockClass::Medium || uc == BlockClass::Large) ++in_mlsp;
            if (sparse || uc == BlockClass::Large) ++in_lsp;
        }
        if (blk.cls == BlockClass::Small && in_vstar >= delta / 3.0) {
            rep.min_small_margin = std::min(rep.min_small_margin, in_mlsp - delta / 4.0);
            if (in_mlsp < delta / 4.0 - kEpsGuard) {
                rep.small_ok = false;
                rep.violations.push_back("small node " + std::to_string(v));
            }
        }
        if (blk.cls == BlockClass::Medium) {
            double need = delta / (2.0 * std::log(1.0 / h.seq.at_level(blk.layer)));
            rep.min_medium_margin = std::min(rep.min_medium_margin, in_lsp - need);
            if (in_lsp < need - kEpsGuard) {
                rep.medium_ok = false;
                rep.violations.push_back("medium node " + std::to_string(v));
            }
        }
    }
    return rep;
}

// --- Linial ids ---

namespace {
bool is_prime(int64_t p) {
    if (p < 2) return false;
    for (int64_t d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

int64_t next_prime(int64_t p) {
    while (!is_prime(p)) ++p;
    return p;
}

// Adjacency of the t-th power graph via truncated BFS.
std::vector<std::vector<NodeId>> power_adjacency(const Graph& g, int t) {
    std::vector<std::vector<NodeId>> padj(g.num_nodes());
    std::vector<int> dist(g.num_nodes(), -1);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        std::queue<NodeId> q;
        q.push(v);
        dist[v] = 0;
        std::vector<NodeId> seen{v};
        while (!q.empty()) {
            NodeId x = q.front();
            q.pop();
            if (dist[x] == t) continue;
            for (NodeId u : g.neighbors(x))
                if (dist[u] < 0) {
                    dist[u] = dist[x] + 1;
                    seen.push_back(u);
                    q.push(u);
                }
        }
        for (NodeId u : seen) {
            if (u != v) padj[v].push_back(u);
            dist[u] = -1;
        }
    }
    return padj;
}
}  // namespace

LinialIds linial_ids(const Graph& g, int t, RoundLog& log, bool allow_trivial) {
    LinialIds out;
    const NodeId n = g.num_nodes();
    const int delta = std::max(2, g.max_degree());
    const int target_bits = 2 * t * static_cast<int>(std::ceil(std::log2(delta))) + 4;
    int n_bits = static_cast<int>(std::ceil(std::log2(std::max<NodeId>(2, n))));

    if (allow_trivial && n_bits <= target_bits) {
        // Raw ids are already a proper coloring of any power graph within the
        // bit budget.
        out.id.resize(n);
        std::iota(out.id.begin(), out.id.end(), 0);
        out.bits = n_bits;
        out.trivial_route = true;
        charge_grouped(log, "linial_ids", 1, 2, 2ll * n);
        return out;
    }

    auto padj = power_adjacency(g, t);
    int64_t pdeg = 0;
    for (auto& a : padj) pdeg = std::max<int64_t>(pdeg, static_cast<int64_t>(a.size()));
    pdeg = std::max<int64_t>(pdeg, 1);

    std::vector<int64_t> color(n);
    std::iota(color.begin(), color.end(), 0);
    int64_t num_colors = n;
    int iterations = 0;

    while (true) {
        // Pick the polynomial degree d and prime p minimizing the new range
        // p^2 subject to p >= d*pdeg + 1 and p^{d+1} >= num_colors.
        int best_d = -1;
        int64_t best_p = 0, best_range = num_colors;
        for (int d = 1; d <= 8; ++d) {
            int64_t p_lo = d * pdeg + 1;
            int64_t need = static_cast<int64_t>(
                std::ceil(std::pow(static_cast<double>(num_colors), 1.0 / (d + 1))));
            int64_t p = next_prime(std::max(p_lo, need));
            if (p * p < best_range) {
                best_range = p * p;
                best_p = p;
                best_d = d;
            }
        }
        if (best_d < 0) break;  // no step shrinks the range further
        const int64_t p = best_p;
        const int d = best_d;
        // Encode colors as degree-d polynomials over GF(p) (base-p digits)
        // and give every node the first evaluation point separating it from
        // all power-graph neighbors.
        auto poly_eval = [&](int64_t c, int64_t x) {
            int64_t val = 0;
            for (int i = d; i >= 0; --i) {
                int64_t digits = c;
                for (int j = 0; j < i; ++j) digits /= p;
                int64_t coeff = digits % p;
                val = (val * x + coeff) % p;
            }
            return val;
        };
        std::vector<int64_t> next_color(n);
        for (NodeId v = 0; v < n; ++v) {
            int64_t pick = -1;
            for (int64_t x = 0; x < p && pick < 0; ++x) {
                int64_t mine = poly_eval(color[v], x);
                bool clash = false;
                for (NodeId u : padj[v]) {
                    if (color[u] != color[v] && poly_eval(color[u], x) == mine) {
                        clash = true;
                        break;
                    }
                }
                if (!clash) pick = x * p + mine;
            }
            if (pick < 0)
                throw InvariantViolated("no separating evaluation point; p too small");
            next_color[v] = pick;
        }
        color = std::move(next_color);
        num_colors = p * p;
        ++iterations;
        charge_grouped(log, "linial_ids", 1, static_cast<int64_t>(pdeg) + 2, 2ll * n);
        if (iterations > 64) throw InvariantViolated("linial halving failed to converge");
    }

    out.id = std::move(color);
    out.iterations = iterations;
    out.bits = std::max(1, static_cast<int>(std::ceil(std::log2(
                               static_cast<double>(std::max<int64_t>(2, num_colors))))));
    return out;
}

}  // namespace dcolor

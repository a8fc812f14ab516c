#ifndef DCOLOR_DECOMP_HPP
#define DCOLOR_DECOMP_HPP

#include <string>
#include <utility>
#include <vector>

#include "dcolor/instance.hpp"
#include "dcolor/mpc.hpp"

namespace dcolor {

// Increasing sequence of density thresholds eps_1 < ... < eps_ell <= cap.
// The asymptotic rule eps_1 = Delta^{-1/10}, eps_{i+1} = sqrt(eps_i) yields an
// empty sequence whenever Delta^{-1/10} > cap (true for every desk-scale
// Delta); in that case an explicit configured list is used, extended by the
// square-root successor rule while it stays under the cap.
struct EpsSequence {
    std::vector<double> eps;
    double cap = 0.05;
    bool faithful = false;  // true when the Delta^{-1/10} rule produced it

    int ell() const { return static_cast<int>(eps.size()); }
    double at_level(int i) const { return eps[i - 1]; }  // levels are 1-based
};

EpsSequence make_eps_sequence(int delta, double cap, const std::vector<double>& explicit_list);

// One density level: friend edges with threshold (1-eps)(Delta-q), dense
// nodes (>= (1-eps)(Delta-q) friends), and almost-cliques = connected
// components of dense nodes under friend edges.
struct LevelDecomp {
    double eps = 0.0;
    std::vector<char> dense;                  // per node
    std::vector<int> cluster_of;              // -1 for sparse nodes
    std::vector<std::vector<NodeId>> clusters;
};

// q = 0 in standard mode, ceil(Delta^{3/5}) in relaxed mode.
std::vector<std::pair<NodeId, NodeId>> compute_friend_edges(const Graph& g, double eps, int q);
LevelDecomp decompose_level(const Graph& g, double eps, int q);

// Lemma-style structural report for one almost-clique.
struct CliquePropsReport {
    bool external_degree_ok = true;  // per v: dense neighbors outside C <= eps*Delta
    bool antidegree_ok = true;       // per v: |C \ (N(v) u {v})| < 3*eps*Delta
    bool size_ok = true;             // |C| <= (1+3eps)*Delta
    bool diameter_ok = true;         // pairwise distance <= 2 in G
    double max_external = 0, max_antidegree = 0;
    std::vector<std::string> violations;
    bool ok() const {
        return external_degree_ok && antidegree_ok && size_ok && diameter_ok;
    }
};

CliquePropsReport verify_clique_props(const Graph& g, const LevelDecomp& level,
                                      const std::vector<NodeId>& clique, double eps);

enum class BlockClass { Small, Medium, Large };

struct Block {
    int layer = 0;        // 1-based level index
    int cluster = 0;      // cluster index within that level's decomposition
    std::vector<NodeId> nodes;
    BlockClass cls = BlockClass::Small;
    bool large_eligible = false;
};

// Full hierarchy over the active (uncolored) node set V*:
//  layer_of[v]: 1..ell for dense nodes by first dense level, 0 for V_sp,
//               -1 for nodes outside V*.
//  blocks: layer-i nodes split by their level-i almost-clique.
struct DensityHierarchy {
    EpsSequence seq;
    int q = 0;
    int delta = 0;
    std::vector<LevelDecomp> levels;  // levels[i-1] is level i
    std::vector<int> layer_of;
    std::vector<int> block_of;        // block index or -1
    std::vector<Block> blocks;

    int ell() const { return seq.ell(); }
    bool in_vstar(NodeId v) const { return layer_of[v] >= 0; }
    bool is_sparse(NodeId v) const { return layer_of[v] == 0; }

    // Largest eps in the sequence at which v is still sparse: cap value for
    // V_sp nodes, eps_{i-1} for layer-i nodes (0 for layer 1, which is dense
    // at every level).
    double sparsity_eps(NodeId v) const;

    // Block-tree ancestry: a layer-i block is a descendant of a layer-i'
    // block (i < i') iff both sit inside the same level-i' almost-clique.
    bool related(const Block& a, const Block& b) const;

    // Orientation key for N_out (sparser -> denser): edge (u, u') points from
    // u to u' when key(u') < key(u). V_sp sorts above every layer.
    std::pair<int, NodeId> order_key(NodeId v) const {
        int layer = layer_of[v] == 0 ? ell() + 1 : layer_of[v];
        return {layer, v};
    }
    bool out_neighbor(NodeId v, NodeId u) const { return order_key(u) < order_key(v); }
};

// Builds the hierarchy. Friend edges and density are computed on the full
// graph (the structural decomposition predates any coloring); layers and
// blocks are intersected with the active node set V* (nullptr = all nodes).
DensityHierarchy build_hierarchy(const Graph& g, const std::vector<char>* active,
                                 const EpsSequence& seq, int q);

// Greedy class assignment over h.blocks: maximal independent (under
// h.related) set of large-eligible blocks by (size desc, layer asc, min id
// asc) becomes Large, remaining eligible blocks Medium, the rest Small.
// Called by build_hierarchy; exposed for direct testing.
void classify_blocks(DensityHierarchy& h);

// Lemma-3.3-style slack counts for small/medium classes; report only.
struct ClassSlackReport {
    bool small_ok = true;
    bool medium_ok = true;
    double min_small_margin = 0, min_medium_margin = 0;
    std::vector<std::string> violations;
};
ClassSlackReport check_class_slack(const Graph& g, const DensityHierarchy& h);

// --- Linial-style small ids ---

// Ids of O(log Delta) bits, distinct within every t-radius ball: a proper
// coloring of the t-th graph power with <= O(Delta^{2t}) colors. When
// n <= ~Delta^{2t} the raw node ids already achieve the contract and are
// used directly; otherwise iterated polynomial-set-system halving runs on
// the power graph. Charges its rounds to the log.
struct LinialIds {
    std::vector<int64_t> id;    // per node
    int bits = 0;
    int iterations = 0;
    bool trivial_route = false;  // raw ids used
};
// allow_trivial: permit the raw-id shortcut when n is already within the
// bit budget; pass false to force the halving route (small id spaces).
LinialIds linial_ids(const Graph& g, int t, RoundLog& log, bool allow_trivial = true);

}  // namespace dcolor

#endif

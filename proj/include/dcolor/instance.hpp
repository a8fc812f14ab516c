#ifndef DCOLOR_INSTANCE_HPP
#define DCOLOR_INSTANCE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dcolor {

using NodeId = int32_t;
using Color = int32_t;
constexpr Color kUncolored = -1;

// Simple undirected graph with sorted adjacency lists.
class Graph {
  public:
    Graph() = default;
    explicit Graph(NodeId n) : adj_(static_cast<size_t>(n)) {}

    NodeId num_nodes() const { return static_cast<NodeId>(adj_.size()); }
    int64_t num_edges() const { return num_edges_; }
    int max_degree() const { return max_degree_; }
    int degree(NodeId v) const { return static_cast<int>(adj_[v].size()); }
    const std::vector<NodeId>& neighbors(NodeId v) const { return adj_[v]; }
    bool has_edge(NodeId u, NodeId v) const;

    // Adds an undirected edge; duplicate and self edges are rejected.
    void add_edge(NodeId u, NodeId v);
    // Must be called once after the last add_edge; sorts adjacency lists
    // and freezes degree statistics.
    void finalize();
    bool finalized() const { return finalized_; }

    // Number of common neighbors, capped early once >= cap (cap < 0: exact).
    int common_neighbors(NodeId u, NodeId v, int cap = -1) const;

  private:
    std::vector<std::vector<NodeId>> adj_;
    int64_t num_edges_ = 0;
    int max_degree_ = 0;
    bool finalized_ = false;
};

// A list-coloring instance: graph plus a palette per node. In standard mode
// every palette is [0, Δ]; in relaxed mode palettes have size
// >= max{deg(v)+1, Δ - ceil(Δ^{3/5})} and may differ per node.
struct ListColoringInstance {
    Graph graph;
    // Sorted color list per node.
    std::vector<std::vector<Color>> palettes;
    bool relaxed = false;

    NodeId num_nodes() const { return graph.num_nodes(); }
    int max_degree() const { return graph.max_degree(); }
    // Smallest palette size needed for node v in the current mode.
    int palette_floor(NodeId v) const;
    // Throws PaletteTooSmall if any palette is below its floor.
    void check_palettes() const;
    bool palette_contains(NodeId v, Color c) const;
};

// Mutable coloring state on top of an instance.
class PartialColoring {
  public:
    PartialColoring() = default;
    explicit PartialColoring(NodeId n) : color_(static_cast<size_t>(n), kUncolored) {}

    Color color(NodeId v) const { return color_[v]; }
    bool is_colored(NodeId v) const { return color_[v] != kUncolored; }
    void set(NodeId v, Color c) { color_[v] = c; }
    void unset(NodeId v) { color_[v] = kUncolored; }
    NodeId num_nodes() const { return static_cast<NodeId>(color_.size()); }
    NodeId num_colored() const;
    const std::vector<Color>& raw() const { return color_; }

  private:
    std::vector<Color> color_;
};

// Per-node view of the quantities that drive every stage: the colors still
// available to v, its uncolored degree, and the resulting slack.
struct SlackView {
    std::vector<Color> available;  // sorted palette colors not used by any colored neighbor
    int uncolored_degree = 0;
    int slack = 0;  // |available| - uncolored_degree
};

SlackView slack_view(const ListColoringInstance& inst, const PartialColoring& col, NodeId v);

// Checks partial properness and palette membership: every colored node uses a
// color from its palette and no edge is monochromatic. Returns the list of
// violating edges / nodes as strings (empty == valid).
std::vector<std::string> validate_coloring(const ListColoringInstance& inst,
                                           const PartialColoring& col,
                                           bool require_complete);

// --- io (formats shared with the CLI) ---

// Edge list: first line "n m", then m lines "u v" (0-based). Throws ParseError.
Graph load_edge_list(std::istream& in);
void save_edge_list(const Graph& g, std::ostream& out);

// Palette file: one line per node "v: c1 c2 ...". Nodes absent from the file
// get the standard palette [0, Δ].
std::vector<std::vector<Color>> load_palettes(std::istream& in, const Graph& g);
void save_palettes(const std::vector<std::vector<Color>>& pals, std::ostream& out);

// Coloring file: one line per node "v c".
void save_coloring(const PartialColoring& col, std::ostream& out);
PartialColoring load_coloring(std::istream& in, NodeId n);

// --- generators (deterministic given the seed) ---

// G(n, p) with p chosen so the expected max degree is near target_delta;
// edges above hard_cap per node are dropped to keep Δ controlled.
Graph gen_gnp(NodeId n, int target_delta, uint64_t seed);

// Disjoint K_{delta+1} cliques planted on n nodes; leftover nodes form a
// sparse background with degree << delta.
Graph gen_clique_planted(NodeId n, int delta, uint64_t seed);

// 2d grid with n nodes (degree <= 4).
Graph gen_grid(NodeId n);

// Mixed testbed: planted near-cliques of controlled density (a fraction
// `loose_drop` of internal edges removed so blocks land in a higher
// epsilon-level), plus sparse background nodes, plus cross edges bounded by
// ext_deg per clique node.
Graph gen_cluster_testbed(NodeId n, int delta, int num_cliques, double loose_drop,
                          int ext_deg, uint64_t seed);

// Builds palettes for a graph. spec is "uniform:K" (palette [0, K-1] for all
// nodes) or "relaxed" (per-node deterministic palettes meeting the relaxed
// floor, drawn from [0, Δ]).
std::vector<std::vector<Color>> make_palettes(const Graph& g, const std::string& spec);

ListColoringInstance make_instance(Graph g, const std::string& palette_spec);

}  // namespace dcolor

#endif

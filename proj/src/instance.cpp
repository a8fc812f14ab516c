#include "dcolor/instance.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "dcolor/errors.hpp"

namespace dcolor {

bool Graph::has_edge(NodeId u, NodeId v) const {
    const auto& a = adj_[u];
    return std::binary_search(a.begin(), a.end(), v);
}

void Graph::add_edge(NodeId u, NodeId v) {
    if (u == v) throw ParseError("self loop at node " + std::to_string(u));
    if (u < 0 || v < 0 || u >= num_nodes() || v >= num_nodes())
        throw ParseError("edge endpoint out of range");
    adj_[u].push_back(v);
    adj_[v].push_back(u);
    ++num_edges_;
}

void Graph::finalize() {
    max_degree_ = 0;
    for (auto& a : adj_) {
        std::sort(a.begin(), a.end());
        if (std::adjacent_find(a.begin(), a.end()) != a.end())
            throw ParseError("duplicate edge");
        max_degree_ = std::max(max_degree_, static_cast<int>(a.size()));
    }
    finalized_ = true;
}

int Graph::common_neighbors(NodeId u, NodeId v, int cap) const {
    const auto& a = adj_[u];
    const auto& b = adj_[v];
    int count = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++count;
            if (cap >= 0 && count >= cap) return count;
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return count;
}

int ListColoringInstance::palette_floor(NodeId v) const {
    int deg = graph.degree(v);
    if (!relaxed) return graph.max_degree() + 1;
    int delta = graph.max_degree();
    int q = static_cast<int>(std::ceil(std::pow(static_cast<double>(delta), 3.0 / 5.0)));
    return std::max(deg + 1, delta - q);
}

void ListColoringInstance::check_palettes() const {
    for (NodeId v = 0; v < num_nodes(); ++v) {
        if (static_cast<int>(palettes[v].size()) < palette_floor(v))
            throw PaletteTooSmall("node " + std::to_string(v) + " has " +
                                  std::to_string(palettes[v].size()) + " colors, needs " +
                                  std::to_string(palette_floor(v)));
    }
}

bool ListColoringInstance::palette_contains(NodeId v, Color c) const {
    const auto& p = palettes[v];
    return std::binary_search(p.begin(), p.end(), c);
}

NodeId PartialColoring::num_colored() const {
    NodeId k = 0;
    for (Color c : color_)
        if (c != kUncolored) ++k;
    return k;
}

SlackView slack_view(const ListColoringInstance& inst, const PartialColoring& col, NodeId v) {
    SlackView sv;
    std::unordered_set<Color> used;
    for (NodeId u : inst.graph.neighbors(v)) {
        if (col.is_colored(u))
            used.insert(col.color(u));
        else
            ++sv.uncolored_degree;
    }
    for (Color c : inst.palettes[v])
        if (!used.count(c)) sv.available.push_back(c);
    sv.slack = static_cast<int>(sv.available.size()) - sv.uncolored_degree;
    return sv;
}

std::vector<std::string> validate_coloring(const ListColoringInstance& inst,
                                           const PartialColoring& col,
                                           bool require_complete) {
    std::vector<std::string> bad;
    for (NodeId v = 0; v < inst.num_nodes(); ++v) {
        if (!col.is_colored(v)) {
            if (require_complete) bad.push_back("uncolored node " + std::to_string(v));
            continue;
        }
        if (!inst.palette_contains(v, col.color(v)))
            bad.push_back("node " + std::to_string(v) + " uses off-palette color " +
                          std::to_string(col.color(v)));
        for (NodeId u : inst.graph.neighbors(v)) {
            if (u > v && col.is_colored(u) && col.color(u) == col.color(v))
                bad.push_back("monochromatic edge (" + std::to_string(v) + "," +
                              std::to_string(u) + ")");
        }
    }
    return bad;
}

// --- io ---

Graph load_edge_list(std::istream& in) {
    int64_t n = 0, m = 0;
    if (!(in >> n >> m)) throw ParseError("missing header line 'n m'");
    if (n < 0 || m < 0) throw ParseError("negative n or m");
    Graph g(static_cast<NodeId>(n));
    for (int64_t i = 0; i < m; ++i) {
        int64_t u, v;
        if (!(in >> u >> v)) throw ParseError("edge line " + std::to_string(i) + " truncated");
        g.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
    g.finalize();
    return g;
}

void save_edge_list(const Graph& g, std::ostream& out) {
    out << g.num_nodes() << ' ' << g.num_edges() << '\n';
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        for (NodeId u : g.neighbors(v))
            if (u > v) out << v << ' ' << u << '\n';
}

std::vector<std::vector<Color>> load_palettes(std::istream& in, const Graph& g) {
    std::vector<std::vector<Color>> pals(g.num_nodes());
    std::vector<bool> seen(g.num_nodes(), false);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("palette line missing ':' " + line);
        NodeId v = static_cast<NodeId>(std::stol(line.substr(0, colon)));
        if (v < 0 || v >= g.num_nodes()) throw ParseError("palette node out of range");
        std::istringstream rest(line.substr(colon + 1));
        Color c;
        while (rest >> c) pals[v].push_back(c);
        std::sort(pals[v].begin(), pals[v].end());
        seen[v] = true;
    }
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        if (!seen[v]) {
            pals[v].resize(g.max_degree() + 1);
            for (int c = 0; c <= g.max_degree(); ++c) pals[v][c] = c;
        }
    }
    return pals;
}

void save_palettes(const std::vector<std::vector<Color>>& pals, std::ostream& out) {
    for (size_t v = 0; v < pals.size(); ++v) {
        out << v << ':';
        for (Color c : pals[v]) out << ' ' << c;
        out << '\n';
    }
}

void save_coloring(const PartialColoring& col, std::ostream& out) {
    for (NodeId v = 0; v < col.num_nodes(); ++v) out << v << ' ' << col.color(v) << '\n';
}

PartialColoring load_coloring(std::istream& in, NodeId n) {
    PartialColoring col(n);
    int64_t v, c;
    while (in >> v >> c) {
        if (v < 0 || v >= n) throw ParseError("coloring node out of range");
        col.set(static_cast<NodeId>(v), static_cast<Color>(c));
    }
    return col;
}

// --- generators ---

Graph gen_gnp(NodeId n, int target_delta, uint64_t seed) {
    // Aim for expected degree a bit below target_delta so that the maximum
    // lands near it; cap degrees at target_delta exactly.
    std::mt19937_64 rng(seed);
    double p = std::min(1.0, 0.8 * target_delta / std::max<NodeId>(1, n - 1));
    Graph g(n);
    std::vector<int> deg(n, 0);
    // Sparse sampling via geometric skips over the upper-triangular pairs.
    std::geometric_distribution<int64_t> skip(p);
    int64_t total = static_cast<int64_t>(n) * (n - 1) / 2;
    int64_t pos = -1;
    auto pair_of = [n](int64_t idx, NodeId& u, NodeId& v) {
        // Row-major enumeration of pairs (u < v).
        int64_t row = 0, rem = idx;
        int64_t rowlen = n - 1;
        while (rem >= rowlen) {
            rem -= rowlen;
            ++row;
            --rowlen;
        }
        u = static_cast<NodeId>(row);
        v = static_cast<NodeId>(row + 1 + rem);
    };
    if (p > 0 && p < 1) {
        while (true) {
            pos += 1 + skip(rng);
            if (pos >= total) break;
            NodeId u, v;
            pair_of(pos, u, v);
            if (deg[u] >= target_delta || deg[v] >= target_delta) continue;
            g.add_edge(u, v);
            ++deg[u];
            ++deg[v];
        }
    }
    g.finalize();
    return g;
}

Graph gen_clique_planted(NodeId n, int delta, uint64_t seed) {
    Graph g(n);
    NodeId csize = delta + 1;
    NodeId planted = (n / csize) * csize;
    for (NodeId base = 0; base < planted; base += csize)
        for (NodeId i = 0; i < csize; ++i)
            for (NodeId j = i + 1; j < csize; ++j) g.add_edge(base + i, base + j);
    // Sparse background ring among leftover nodes.
    std::mt19937_64 rng(seed);
    for (NodeId v = planted; v + 1 < n; ++v) g.add_edge(v, v + 1);
    g.finalize();
    return g;
}

Graph gen_grid(NodeId n) {
    NodeId side = static_cast<NodeId>(std::sqrt(static_cast<double>(n)));
    if (side < 1) side = 1;
    NodeId rows = side, cols = (n + side - 1) / side;
    Graph g(n);
    for (NodeId v = 0; v < n; ++v) {
        NodeId r = v / cols, c = v % cols;
        if (c + 1 < cols && v + 1 < n && (v + 1) / cols == r) g.add_edge(v, v + 1);
        if (r + 1 < rows && v + cols < n) g.add_edge(v, v + cols);
    }
    g.finalize();
    return g;
}

Graph gen_cluster_testbed(NodeId n, int delta, int num_cliques, double loose_drop,
                          int ext_deg, uint64_t seed) {
    std::mt19937_64 rng(seed);
    Graph g(n);
    NodeId csize = delta + 1;
    NodeId planted = std::min<NodeId>(static_cast<NodeId>(num_cliques) * csize, (n / csize) * csize);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (NodeId base = 0; base + csize <= planted; base += csize) {
        for (NodeId i = 0; i < csize; ++i) {
            for (NodeId j = i + 1; j < csize; ++j) {
                if (loose_drop > 0 && unit(rng) < loose_drop) continue;
                g.add_edge(base + i, base + j);
            }
        }
    }
    // Cross edges from clique nodes to the sparse background, bounded per node.
    std::vector<int> extra(n, 0);
    if (planted < n && ext_deg > 0) {
        std::set<std::pair<NodeId, NodeId>> cross;
        std::uniform_int_distribution<NodeId> pick_bg(planted, n - 1);
        for (NodeId v = 0; v < planted; ++v) {
            int want = static_cast<int>(rng() % static_cast<uint64_t>(ext_deg + 1));
            for (int t = 0; t < want; ++t) {
                NodeId u = pick_bg(rng);
                if (extra[u] >= std::max(1, delta / 4)) continue;
                if (!cross.insert({v, u}).second) continue;
                g.add_edge(v, u);
                ++extra[u];
                ++extra[v];
            }
        }
    }
    // Background path so no isolated nodes.
    for (NodeId v = planted; v + 1 < n; ++v) g.add_edge(v, v + 1);
    g.finalize();
    return g;
}

std::vector<std::vector<Color>> make_palettes(const Graph& g, const std::string& spec) {
    std::vector<std::vector<Color>> pals(g.num_nodes());
    int delta = g.max_degree();
    if (spec.rfind("uniform:", 0) == 0) {
        int k = std::stoi(spec.substr(8));
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            pals[v].resize(k);
            for (int c = 0; c < k; ++c) pals[v][c] = c;
        }
        return pals;
    }
    if (spec == "relaxed") {
        // Per-node palette of exactly the relaxed floor, taken as a stride
        // through [0, Δ] so different nodes get genuinely different lists.
        int q = static_cast<int>(std::ceil(std::pow(static_cast<double>(delta), 3.0 / 5.0)));
        int universe = delta + 1;
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            int want = std::max(g.degree(v) + 1, delta - q);
            want = std::min(want, universe);
            int start = static_cast<int>((static_cast<int64_t>(v) * 7919) % universe);
            for (int t = 0; t < want; ++t) pals[v].push_back((start + t) % universe);
            std::sort(pals[v].begin(), pals[v].end());
        }
        return pals;
    }
    throw ParseError("unknown palette spec: " + spec);
}

ListColoringInstance make_instance(Graph g, const std::string& palette_spec) {
    ListColoringInstance inst;
    inst.relaxed = (palette_spec == "relaxed");
    inst.palettes = make_palettes(g, palette_spec);
    inst.graph = std::move(g);
    inst.check_palettes();
    return inst;
}

}  // namespace dcolor

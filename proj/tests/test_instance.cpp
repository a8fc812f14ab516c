#include <doctest.h>

#include <set>
#include <sstream>

#include "dcolor/errors.hpp"
#include "dcolor/instance.hpp"

using namespace dcolor;

namespace {
// Independent slack oracle: recompute availability from scratch with sets.
SlackView slack_oracle(const ListColoringInstance& inst, const PartialColoring& col, NodeId v) {
    SlackView sv;
    std::set<Color> used;
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

Graph triangle() {
    Graph g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(0, 2);
    g.finalize();
    return g;
}
}  // namespace

TEST_CASE("graph basics and edge list io") {
    Graph g = triangle();
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_edges() == 3);
    CHECK(g.max_degree() == 2);
    CHECK(g.has_edge(0, 2));
    CHECK(!g.has_edge(0, 0));
    CHECK(g.common_neighbors(0, 1) == 1);

    std::stringstream ss;
    save_edge_list(g, ss);
    Graph h = load_edge_list(ss);
    CHECK(h.num_nodes() == 3);
    CHECK(h.num_edges() == 3);
    CHECK(h.has_edge(1, 2));
}

TEST_CASE("edge list parse errors") {
    std::stringstream bad1("3");
    CHECK_THROWS_AS(load_edge_list(bad1), ParseError);
    std::stringstream bad2("2 1\n0 5\n");
    CHECK_THROWS_AS(load_edge_list(bad2), ParseError);
    std::stringstream bad3("2 2\n0 1\n0 1\n");
    CHECK_THROWS_AS(load_edge_list(bad3), ParseError);
}

TEST_CASE("palette floors: standard and relaxed") {
    Graph g = triangle();
    auto inst = make_instance(g, "uniform:3");
    CHECK(inst.palette_floor(0) == 3);  // Δ+1
    inst.check_palettes();

    auto rel = make_instance(g, "relaxed");
    CHECK(rel.relaxed);
    // Δ=2, q=ceil(2^{3/5})=2, floor = max(deg+1, 0) = 3
    CHECK(rel.palette_floor(0) == 3);
    rel.check_palettes();

    auto small = make_instance(g, "uniform:3");
    small.palettes[1] = {0, 1};
    CHECK_THROWS_AS(small.check_palettes(), PaletteTooSmall);
}

TEST_CASE("validate_coloring catches every violation kind") {
    auto inst = make_instance(triangle(), "uniform:3");
    PartialColoring col(3);
    CHECK(validate_coloring(inst, col, false).empty());
    CHECK(validate_coloring(inst, col, true).size() == 3);  // all uncolored

    col.set(0, 0);
    col.set(1, 0);  // monochromatic edge
    col.set(2, 7);  // off palette
    auto bad = validate_coloring(inst, col, true);
    CHECK(bad.size() == 2);

    col.set(1, 1);
    col.set(2, 2);
    CHECK(validate_coloring(inst, col, true).empty());
}

TEST_CASE("slack_view matches oracle across partial colorings") {
    Graph g = gen_gnp(60, 8, 11);
    auto inst = make_instance(g, "uniform:" + std::to_string(g.max_degree() + 1));
    PartialColoring col(60);
    // Color every third node with a deterministic proper-ish choice.
    for (NodeId v = 0; v < 60; v += 3) col.set(v, v % (g.max_degree() + 1));
    for (NodeId v = 0; v < 60; ++v) {
        SlackView got = slack_view(inst, col, v);
        SlackView want = slack_oracle(inst, col, v);
        CHECK(got.uncolored_degree == want.uncolored_degree);
        CHECK(got.slack == want.slack);
        CHECK(got.available == want.available);
    }
}

TEST_CASE("slack baseline: available >= uncolored_degree + 1 with full palettes") {
    // With palettes of size Δ+1 and any partial proper coloring, every node
    // keeps at least one spare color; this is what guarantees greedy
    // completion everywhere in the pipeline.
    Graph g = gen_clique_planted(40, 7, 3);
    auto inst = make_instance(g, "uniform:" + std::to_string(g.max_degree() + 1));
    PartialColoring col(40);
    col.set(0, 0);
    col.set(1, 1);
    for (NodeId v = 0; v < 40; ++v) {
        SlackView sv = slack_view(inst, col, v);
        CHECK(sv.slack >= 1);
    }
}

TEST_CASE("generators: shapes and degree bounds") {
    Graph gnp = gen_gnp(500, 16, 1);
    CHECK(gnp.num_nodes() == 500);
    CHECK(gnp.max_degree() <= 16);
    CHECK(gnp.num_edges() > 500);  // far above a forest at this density

    Graph cp = gen_clique_planted(101, 9, 2);
    CHECK(cp.max_degree() == 9);
    // First clique of 10 nodes is complete.
    for (NodeId i = 0; i < 10; ++i)
        for (NodeId j = i + 1; j < 10; ++j) CHECK(cp.has_edge(i, j));

    Graph grid = gen_grid(100);
    CHECK(grid.num_nodes() == 100);
    CHECK(grid.max_degree() <= 4);
    CHECK(grid.num_edges() == 180);  // 2 * 10 * 9

    Graph tb = gen_cluster_testbed(300, 12, 4, 0.0, 2, 5);
    CHECK(tb.num_nodes() == 300);
    for (NodeId i = 0; i < 13; ++i)
        for (NodeId j = i + 1; j < 13; ++j) CHECK(tb.has_edge(i, j));
}

TEST_CASE("generators are deterministic in the seed") {
    Graph a = gen_gnp(200, 12, 42);
    Graph b = gen_gnp(200, 12, 42);
    Graph c = gen_gnp(200, 12, 43);
    CHECK(a.num_edges() == b.num_edges());
    bool same = true;
    for (NodeId v = 0; v < 200 && same; ++v) same = a.neighbors(v) == b.neighbors(v);
    CHECK(same);
    CHECK(a.num_edges() != c.num_edges());
}

TEST_CASE("palette and coloring io roundtrip") {
    Graph g = triangle();
    auto pals = make_palettes(g, "relaxed");
    std::stringstream ss;
    save_palettes(pals, ss);
    auto back = load_palettes(ss, g);
    CHECK(back == pals);

    PartialColoring col(3);
    col.set(0, 2);
    std::stringstream cs;
    save_coloring(col, cs);
    PartialColoring got = load_coloring(cs, 3);
    CHECK(got.color(0) == 2);
    CHECK(got.color(1) == kUncolored);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dcolor/clp.hpp"
#include "dcolor/decomp.hpp"
#include "dcolor/errors.hpp"
#include "dcolor/instance.hpp"
#include "dcolor/mpc.hpp"
#include "dcolor/schedule.hpp"
#include "dcolor/stages.hpp"

using namespace dcolor;

namespace {

RoundLog fresh_log(NodeId n) {
    MpcConfig mc;
    return RoundLog(mc.space_words(std::max<NodeId>(n, 4)), mc.round_cap);
}

Graph clique(int k) {
    Graph g(k);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) g.add_edge(i, j);
    g.finalize();
    return g;
}

Graph cycle(int k) {
    Graph g(k);
    for (int i = 0; i < k; ++i) g.add_edge(i, (i + 1) % k);
    g.finalize();
    return g;
}

Graph path(int k) {
    Graph g(k);
    for (int i = 0; i + 1 < k; ++i) g.add_edge(i, i + 1);
    g.finalize();
    return g;
}

// Two disjoint tight cliques K_{41} plus a background path, Delta = 40.
Graph two_cliques(NodeId background) {
    const int k = 41;
    NodeId n = static_cast<NodeId>(2 * k + background);
    Graph g(n);
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
                g.add_edge(c * k + i, c * k + j);
    for (NodeId v = 2 * k; v + 1 < n; ++v) g.add_edge(v, v + 1);
    g.finalize();
    return g;
}

// Hand-built hierarchy: the given node sets become blocks of the given
// class and layer; everything else is sparse. Used to exercise the
// small/medium stages, which desk-scale decompositions never produce.
DensityHierarchy synthetic_hierarchy(const Graph& g,
                                     const std::vector<std::vector<NodeId>>& groups,
                                     const std::vector<int>& layers,
                                     const std::vector<BlockClass>& classes,
                                     const std::vector<double>& eps_levels) {
    DensityHierarchy h;
    h.seq.eps = eps_levels;
    h.seq.cap = eps_levels.back();
    h.delta = g.max_degree();
    h.layer_of.assign(static_cast<size_t>(g.num_nodes()), 0);
    h.block_of.assign(static_cast<size_t>(g.num_nodes()), -1);
    for (size_t b = 0; b < groups.size(); ++b) {
        Block blk;
        blk.layer = layers[b];
        blk.cluster = static_cast<int>(b);
        blk.nodes = groups[b];
        blk.cls = classes[b];
        blk.large_eligible = classes[b] != BlockClass::Small;
        for (NodeId v : blk.nodes) {
            h.layer_of[v] = layers[b];
            h.block_of[v] = static_cast<int>(b);
        }
        h.blocks.push_back(std::move(blk));
    }
    return h;
}

int count_colored(const PartialColoring& col, const std::vector<NodeId>& nodes) {
    int c = 0;
    for (NodeId v : nodes)
        if (col.is_colored(v)) ++c;
    return c;
}

}  // namespace

TEST_CASE("generate_slack: empty graph is pre-satisfied, zero rounds") {
    Graph g(5);
    g.finalize();
    auto inst = make_instance(g, "uniform:1");
    PartialColoring col(5);
    StageConfig cfg;
    auto log = fresh_log(5);
    auto rep = generate_slack(inst, col, 0.05, cfg, log, nullptr);
    CHECK(rep.pre_satisfied);
    CHECK(rep.heavy_nodes == 0);
    CHECK(col.num_colored() == 0);
    CHECK(log.num_rounds() == 0);
}

TEST_CASE("generate_slack: star already has the target slack and stays happy") {
    // Star K_{1,12}: the hub is the only heavy node; slack target at
    // eps_cap = 0.05 is 0.03, and the hub starts with slack 1.
    const int d = 12;
    Graph g(d + 1);
    for (int i = 1; i <= d; ++i) g.add_edge(0, i);
    g.finalize();
    auto inst = make_instance(g, "uniform:" + std::to_string(d + 1));
    PartialColoring col(d + 1);
    StageConfig cfg;
    auto log = fresh_log(d + 1);
    nlohmann::json trace;
    auto rep = generate_slack(inst, col, 0.05, cfg, log, &trace);
    CHECK(rep.heavy_nodes == 1);
    CHECK(rep.min_heavy_slack >= rep.slack_target);
    CHECK(rep.min_uncolored_ratio >= 0.5);
    CHECK(validate_coloring(inst, col, false).empty());
    // Only the first vote_width groups were touched.
    CHECK(col.num_colored() <= d + 1);
}

TEST_CASE("generate_slack: dense blob gains slack from same-colored pairs") {
    // K_33 minus a perfect-ish matching: Delta = 31, every node heavy.
    const int k = 33;
    Graph g(k);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            if (j == i + 1 && i % 2 == 0) continue;
            g.add_edge(i, j);
        }
    g.finalize();
    auto inst = make_instance(g, "uniform:" + std::to_string(g.max_degree() + 1));
    PartialColoring col(k);
    StageConfig cfg;
    auto log = fresh_log(k);
    auto rep = generate_slack(inst, col, 0.1, cfg, log, nullptr);
    CHECK(rep.heavy_nodes == k);
    CHECK(rep.min_heavy_slack >= rep.slack_target);
    CHECK(validate_coloring(inst, col, false).empty());
    CHECK(log.num_rounds() > 0);
}

TEST_CASE("small/medium stages: no matching blocks is a strict no-op") {
    Graph g = two_cliques(20);
    auto seq = make_eps_sequence(g.max_degree(), 0.05, {0.04});
    auto h = build_hierarchy(g, nullptr, seq, 0);
    for (const auto& b : h.blocks) CHECK(b.cls == BlockClass::Large);
    auto inst = make_instance(g, "uniform:" + std::to_string(g.max_degree() + 1));
    PartialColoring col(g.num_nodes());
    StageConfig cfg;
    auto log = fresh_log(g.num_nodes());
    color_small_medium_2plus(inst, h, col, cfg, log, nullptr);
    color_small_medium_1(inst, h, col, cfg, log, nullptr);
    CHECK(col.num_colored() == 0);
    CHECK(log.num_rounds() == 0);
}

TEST_CASE("layer-1 small blocks: trivial degree target, gap finish completes") {
    // Two disjoint K_5 declared Small layer-1 blocks; Delta = 4 so the
    // phase-a degree target c9 * 4^{0.9} * ln 4 ~ 9.7 holds vacuously and
    // the whole class is finished by gap coloring.
    Graph g(12);
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j) g.add_edge(c * 5 + i, c * 5 + j);
    g.add_edge(10, 11);
    g.finalize();
    auto inst = make_instance(g, "uniform:6");
    PartialColoring col(12);
    std::vector<NodeId> a{0, 1, 2, 3, 4}, b{5, 6, 7, 8, 9};
    auto h = synthetic_hierarchy(g, {a, b}, {1, 1},
                                 {BlockClass::Small, BlockClass::Small}, {0.04});
    StageConfig cfg;
    auto log = fresh_log(12);
    nlohmann::json trace;
    color_small_medium_1(inst, h, col, cfg, log, &trace);
    CHECK(count_colored(col, a) == 5);
    CHECK(count_colored(col, b) == 5);
    CHECK(!col.is_colored(10));
    CHECK(validate_coloring(inst, col, false).empty());
}

TEST_CASE("layer-2 small block with zero external edges finishes in phase order") {
    // One K_6 as a Small layer-2 block, isolated from the sparse rest.
    Graph g(10);
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) g.add_edge(i, j);
    for (int v = 6; v + 1 < 10; ++v) g.add_edge(v, v + 1);
    g.finalize();
    auto inst = make_instance(g, "uniform:6");
    PartialColoring col(10);
    std::vector<NodeId> a{0, 1, 2, 3, 4, 5};
    auto h = synthetic_hierarchy(g, {a}, {2}, {BlockClass::Small}, {0.04, 0.1});
    StageConfig cfg;
    auto log = fresh_log(10);
    color_small_medium_2plus(inst, h, col, cfg, log, nullptr);
    // Final phase target eps_2^5 * Delta << 1 forces the block fully colored.
    CHECK(count_colored(col, a) == 6);
    CHECK(validate_coloring(inst, col, false).empty());
}

TEST_CASE("framework: no large blocks in range is a no-op") {
    Graph g = cycle(20);
    auto seq = make_eps_sequence(g.max_degree(), 0.05, {0.04});
    auto h = build_hierarchy(g, nullptr, seq, 0);
    auto inst = make_instance(g, "uniform:3");
    PartialColoring col(20);
    StageConfig cfg;
    auto sched = schedule_layer2plus(g.max_degree(), seq, cfg.beta, cfg.gamma());
    auto log = fresh_log(20);
    auto out = color_large_framework(inst, h, col, sched, 2, seq.ell(), cfg, log,
                                     nullptr);
    CHECK(out.votes == 0);
    CHECK(out.uncolored_left == 0);
    CHECK(log.num_rounds() == 0);
}

TEST_CASE("framework on tight cliques: invariants hold, safety never fires") {
    Graph g = two_cliques(30);
    auto seq = make_eps_sequence(g.max_degree(), 0.12, {0.04, 0.1});
    auto h = build_hierarchy(g, nullptr, seq, 0);
    int large = 0;
    for (const auto& b : h.blocks)
        if (b.cls == BlockClass::Large) ++large;
    REQUIRE(large >= 2);
    auto inst = make_instance(g, "uniform:" + std::to_string(g.max_degree() + 1));
    PartialColoring col(g.num_nodes());
    StageConfig cfg;
    auto log = fresh_log(g.num_nodes());
    nlohmann::json trace;

    auto s2 = schedule_layer2plus(g.max_degree(), seq, cfg.beta, cfg.gamma());
    auto o2 = color_large_framework(inst, h, col, s2, 2, seq.ell(), cfg, log, &trace);
    CHECK(o2.safety_violations == 0);
    CHECK(o2.max_growth_factor <= cfg.vote_width() + 1e-9);

    auto s1 = schedule_layer1(g.max_degree(), g.num_nodes(), seq.at_level(1),
                              cfg.beta, cfg.gamma(), cfg.thetas);
    auto o1 = color_large_framework(inst, h, col, s1, 1, 1, cfg, log, &trace);
    CHECK(o1.safety_violations == 0);
    CHECK(o1.max_growth_factor <= cfg.vote_width() + 1e-9);
    CHECK(validate_coloring(inst, col, false).empty());

    // The finishing stages complete every dense node.
    finish_dense_U(inst, h, col, cfg, log, &trace);
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (h.in_vstar(v) && !h.is_sparse(v)) CHECK(col.is_colored(v));
    CHECK(validate_coloring(inst, col, false).empty());
    finish_sparse(inst, h, col, cfg, log, &trace);
    CHECK(validate_coloring(inst, col, true).empty());
    CHECK(log.num_rounds() < 500);
}

TEST_CASE("color_sparse: independent set colors in the first substep") {
    Graph g(6);
    g.finalize();
    auto inst = make_instance(g, "uniform:1");
    PartialColoring col(6);
    SparseTask task;
    task.nodes = {0, 1, 2, 3, 4, 5};
    task.rank.resize(6);
    std::iota(task.rank.begin(), task.rank.end(), 0);
    task.label = "iso";
    StageConfig cfg;
    auto log = fresh_log(6);
    auto out = color_sparse(inst, col, task, cfg, log, nullptr);
    CHECK(out.uncolored_left == 0);
    CHECK(out.monotone_ok);
    CHECK(out.within_schedule);
    CHECK(col.num_colored() == 6);
    CHECK(validate_coloring(inst, col, true).empty());
}

TEST_CASE("color_sparse: two-node chain") {
    Graph g = path(2);
    auto inst = make_instance(g, "uniform:2");
    PartialColoring col(2);
    SparseTask task;
    task.nodes = {0, 1};
    task.rank = {0, 1};
    task.label = "chain";
    StageConfig cfg;
    auto log = fresh_log(2);
    auto out = color_sparse(inst, col, task, cfg, log, nullptr);
    CHECK(out.uncolored_left == 0);
    CHECK(validate_coloring(inst, col, true).empty());
}

TEST_CASE("color_sparse: C5 with standard palettes, contention stays monotone") {
    Graph g = cycle(5);
    auto inst = make_instance(g, "uniform:3");
    PartialColoring col(5);
    SparseTask task;
    task.nodes = {0, 1, 2, 3, 4};
    task.rank.resize(5);
    std::iota(task.rank.begin(), task.rank.end(), 0);
    task.label = "c5";
    StageConfig cfg;
    auto log = fresh_log(5);
    nlohmann::json trace;
    auto out = color_sparse(inst, col, task, cfg, log, &trace);
    CHECK(out.uncolored_left == 0);
    CHECK(out.monotone_ok);
    CHECK(out.within_schedule);
    CHECK(out.derived_C >= cfg.min_derived_C);
    CHECK(validate_coloring(inst, col, true).empty());
}

TEST_CASE("sparse_gap_color: excess >= 1 everywhere completes a clique") {
    Graph g = clique(5);
    auto inst = make_instance(g, "uniform:6");  // 6 colors for K5: excess 1
    PartialColoring col(5);
    StageConfig cfg;
    auto log = fresh_log(5);
    auto out = sparse_gap_color(inst, col, {0, 1, 2, 3, 4}, cfg, log, nullptr, "gap");
    CHECK(out.uncolored_left == 0);
    CHECK(validate_coloring(inst, col, true).empty());
}

TEST_CASE("color_sparse skips already-colored targets") {
    Graph g = path(4);
    auto inst = make_instance(g, "uniform:3");
    PartialColoring col(4);
    col.set(1, 0);
    col.set(2, 1);
    StageConfig cfg;
    auto log = fresh_log(4);
    auto out = sparse_gap_color(inst, col, {0, 1, 2, 3}, cfg, log, nullptr, "partial");
    CHECK(out.uncolored_left == 0);
    CHECK(col.color(1) == 0);
    CHECK(col.color(2) == 1);
    CHECK(validate_coloring(inst, col, true).empty());
}

TEST_CASE("low_degree_color: single node and empty graph edge cases") {
    {
        Graph g(1);
        g.finalize();
        auto inst = make_instance(g, "uniform:1");
        PartialColoring col(1);
        StageConfig cfg;
        auto log = fresh_log(1);
        low_degree_color(inst, col, cfg, log, nullptr);
        CHECK(col.is_colored(0));
        CHECK(validate_coloring(inst, col, true).empty());
    }
    {
        Graph g(3);
        g.finalize();
        auto inst = make_instance(g, "uniform:1");
        PartialColoring col(3);
        col.set(0, 0);
        col.set(1, 0);
        col.set(2, 0);
        StageConfig cfg;
        auto log = fresh_log(3);
        low_degree_color(inst, col, cfg, log, nullptr);  // nothing to do
        CHECK(log.num_rounds() == 0);
    }
}

TEST_CASE("low_degree_color: P4 and a random degree-8 graph, few rounds") {
    {
        Graph g = path(4);
        auto inst = make_instance(g, "uniform:3");
        PartialColoring col(4);
        StageConfig cfg;
        auto log = fresh_log(4);
        low_degree_color(inst, col, cfg, log, nullptr);
        CHECK(validate_coloring(inst, col, true).empty());
    }
    {
        Graph g = gen_gnp(500, 8, 7);
        auto inst = make_instance(g, "uniform:" + std::to_string(g.max_degree() + 1));
        PartialColoring col(500);
        StageConfig cfg;
        auto log = fresh_log(500);
        nlohmann::json trace;
        low_degree_color(inst, col, cfg, log, &trace);
        CHECK(validate_coloring(inst, col, true).empty());
        CHECK(log.num_rounds() < 500);
        // Scheduling by simultaneous local id-minima keeps rounds far below n.
        CHECK(trace["low_degree"]["rounds"].get<int>() < 120);
    }
}

TEST_CASE("low_degree_color respects per-node palettes") {
    Graph g = path(3);
    ListColoringInstance inst;
    inst.graph = g;
    inst.relaxed = true;
    inst.palettes = {{5, 9}, {5, 7, 9}, {7, 9}};
    PartialColoring col(3);
    StageConfig cfg;
    auto log = fresh_log(3);
    low_degree_color(inst, col, cfg, log, nullptr);
    CHECK(validate_coloring(inst, col, true).empty());
    for (NodeId v = 0; v < 3; ++v) CHECK(inst.palette_contains(v, col.color(v)));
}

TEST_CASE("finish stages on the cluster testbed: monotone contention, completes") {
    Graph g = gen_cluster_testbed(300, 40, 3, 0.0, 2, 11);
    auto seq = make_eps_sequence(g.max_degree(), 0.12, {0.04, 0.1});
    auto h = build_hierarchy(g, nullptr, seq, 0);
    auto inst = make_instance(g, "uniform:" + std::to_string(g.max_degree() + 1));
    PartialColoring col(g.num_nodes());
    StageConfig cfg;
    auto log = fresh_log(g.num_nodes());
    nlohmann::json trace;
    auto od = finish_dense_U(inst, h, col, cfg, log, &trace);
    CHECK(od.monotone_ok);
    CHECK(od.within_schedule);
    auto os = finish_sparse(inst, h, col, cfg, log, &trace);
    CHECK(os.monotone_ok);
    CHECK(validate_coloring(inst, col, true).empty());
    CHECK(log.num_rounds() < 500);
}

TEST_CASE("stage determinism: identical runs produce identical colorings") {
    Graph g = two_cliques(10);
    auto inst = make_instance(g, "uniform:" + std::to_string(g.max_degree() + 1));
    auto seq = make_eps_sequence(g.max_degree(), 0.12, {0.04, 0.1});
    auto h = build_hierarchy(g, nullptr, seq, 0);
    StageConfig cfg;
    auto run = [&]() {
        PartialColoring col(g.num_nodes());
        auto log = fresh_log(g.num_nodes());
        finish_dense_U(inst, h, col, cfg, log, nullptr);
        finish_sparse(inst, h, col, cfg, log, nullptr);
        return col.raw();
    };
    CHECK(run() == run());
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dcolor/errors.hpp"
#include "dcolor/instance.hpp"
#include "dcolor/pipeline.hpp"

using namespace dcolor;

TEST_CASE("pipeline: K_{33} clique routes through the staged engine") {
    Graph g(33);
    for (int i = 0; i < 33; ++i)
        for (int j = i + 1; j < 33; ++j) g.add_edge(i, j);
    g.finalize();
    auto inst = make_instance(g, "uniform:33");
    PipelineConfig cfg;
    PartialColoring col;
    auto rep = run_pipeline(inst, col, cfg);
    CHECK(rep.route == "staged");
    CHECK(rep.valid);
    CHECK(rep.complete);
    CHECK(rep.total_rounds < cfg.round_cap);
    CHECK(rep.peak_words <= rep.budget_words);
    CHECK(validate_coloring(inst, col, true).empty());
}

TEST_CASE("pipeline: edgeless n=1000 takes the low-degree route") {
    Graph g(1000);
    g.finalize();
    auto inst = make_instance(g, "uniform:1");
    PipelineConfig cfg;
    PartialColoring col;
    auto rep = run_pipeline(inst, col, cfg);
    CHECK(rep.route == "low_degree");
    CHECK(rep.valid);
    CHECK(rep.total_rounds <= 4);
}

TEST_CASE("pipeline: routing thresholds are exact") {
    {
        Graph g = gen_gnp(200, 8, 1);
        auto inst = make_instance(g, "uniform:" + std::to_string(g.max_degree() + 1));
        PipelineConfig cfg;
        cfg.lowdeg_floor = g.max_degree();
        PartialColoring col;
        CHECK(run_pipeline(inst, col, cfg).route == "low_degree");
        cfg.lowdeg_floor = g.max_degree() - 1;
        CHECK(run_pipeline(inst, col, cfg).route == "staged");
    }
    {
        Graph g = gen_gnp(400, 24, 2);
        auto inst = make_instance(g, "uniform:" + std::to_string(g.max_degree() + 1));
        PipelineConfig cfg;
        cfg.partition_threshold = g.max_degree() - 1;
        PartialColoring col;
        CHECK(run_pipeline(inst, col, cfg).route == "partition");
    }
}

TEST_CASE("pipeline: determinism across identical runs") {
    Graph g = gen_cluster_testbed(250, 40, 2, 0.05, 2, 17);
    auto inst = make_instance(g, "uniform:" + std::to_string(g.max_degree() + 1));
    PipelineConfig cfg;
    PartialColoring a, b;
    auto r1 = run_pipeline(inst, a, cfg);
    auto r2 = run_pipeline(inst, b, cfg);
    CHECK(a.raw() == b.raw());
    CHECK(r1.total_rounds == r2.total_rounds);
    CHECK(r1.to_json() == r2.to_json());
}

TEST_CASE("pipeline: relaxed palettes run end to end") {
    Graph g = gen_gnp(300, 32, 5);
    ListColoringInstance inst = make_instance(g, "relaxed");
    PipelineConfig cfg;
    cfg.mode = "relaxed";
    PartialColoring col;
    auto rep = run_pipeline(inst, col, cfg);
    CHECK(rep.valid);
    CHECK(rep.complete);
}

TEST_CASE("pipeline: config validation") {
    PipelineConfig cfg;
    cfg.stage.alpha = 0.6;  // >= delta_exp
    CHECK_THROWS_AS(cfg.validate(), InvariantViolated);
    cfg = PipelineConfig{};
    cfg.eps_cap = 0.25;
    CHECK_THROWS_AS(cfg.validate(), InvariantViolated);
    cfg = PipelineConfig{};
    cfg.mode = "bogus";
    CHECK_THROWS_AS(cfg.validate(), InvariantViolated);
}

TEST_CASE("pipeline: partition route colors a high-degree instance") {
    Graph g = gen_gnp(1200, 160, 23);
    auto inst = make_instance(g, "uniform:" + std::to_string(g.max_degree() + 1));
    PipelineConfig cfg;
    PartialColoring col;
    auto rep = run_pipeline(inst, col, cfg);
    CHECK(rep.route == "partition");
    CHECK(rep.valid);
    CHECK(rep.complete);
    CHECK(rep.total_rounds < cfg.round_cap);
    CHECK(rep.peak_words <= rep.budget_words);
}

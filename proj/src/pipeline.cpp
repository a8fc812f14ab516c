#include "dcolor/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "dcolor/decomp.hpp"
#include "dcolor/errors.hpp"
#include "dcolor/schedule.hpp"

namespace dcolor {

namespace {

using nlohmann::json;

void boundary_check(const ListColoringInstance& inst, const PartialColoring& col,
                    const char* stage) {
    auto bad = validate_coloring(inst, col, false);
    if (!bad.empty())
        throw InvariantViolated(std::string("pipeline: improper after ") + stage +
                                ": " + bad.front());
}

// Direct completion of an arbitrary uncolored subset: build the induced
// sub-instance with current availability and finish it deterministically.
// Feasible because every uncolored node has more available colors than
// uncolored neighbors.
void complete_subset(const ListColoringInstance& inst, PartialColoring& col,
                     const std::vector<NodeId>& subset, const StageConfig& scfg,
                     RoundLog& log, json* trace) {
    std::vector<NodeId> nodes;
    for (NodeId v : subset)
        if (!col.is_colored(v)) nodes.push_back(v);
    if (nodes.empty()) return;
    std::vector<NodeId> fwd(static_cast<size_t>(inst.num_nodes()), -1);
    for (size_t i = 0; i < nodes.size(); ++i) fwd[nodes[i]] = static_cast<NodeId>(i);
    Graph sg(static_cast<NodeId>(nodes.size()));
    for (NodeId v : nodes)
        for (NodeId u : inst.graph.neighbors(v))
            if (fwd[u] >= 0 && u > v) sg.add_edge(fwd[v], fwd[u]);
    sg.finalize();
    ListColoringInstance li;
    li.graph = std::move(sg);
    li.relaxed = true;
    li.palettes.resize(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
        auto sv = slack_view(inst, col, nodes[i]);
        li.palettes[i] = std::move(sv.available);
    }
    PartialColoring lc(li.num_nodes());
    low_degree_color(li, lc, scfg, log, trace);
    for (size_t i = 0; i < nodes.size(); ++i)
        col.set(nodes[i], lc.color(static_cast<NodeId>(i)));
}

// The staged engine for one medium-degree instance (Delta between the
// low-degree floor and the partition threshold, or a partition leaf).
void staged_solve(const ListColoringInstance& inst, PartialColoring& col,
                  const PipelineConfig& cfg, RoundLog& log, json& jinst,
                  int& fallbacks) {
    const Graph& g = inst.graph;
    const int delta = g.max_degree();
    const StageConfig& scfg = cfg.stage;
    if (delta <= cfg.lowdeg_floor) {
        low_degree_color(inst, col, scfg, log, &jinst);
        jinst["route"] = "low_degree";
        return;
    }
    jinst["route"] = "staged";
    auto lin = linial_ids(g, 1, log);
    jinst["linial"] = {{"bits", lin.bits}, {"trivial_route", lin.trivial_route}};

    const int q = inst.relaxed
                      ? static_cast<int>(std::ceil(std::pow(delta, 3.0 / 5.0)))
                      : 0;
    auto seq = make_eps_sequence(delta, cfg.eps_cap, cfg.eps_levels);

    auto guarded = [&](const char* name, auto&& stage) {
        try {
            stage();
        } catch (const StageFailed& e) {
            ++fallbacks;
            jinst["stage_failures"].push_back({{"stage", name},
                                               {"error", e.what()}});
        } catch (const ContentionHypothesisViolated& e) {
            ++fallbacks;
            jinst["stage_failures"].push_back({{"stage", name},
                                               {"error", e.what()}});
        }
        boundary_check(inst, col, name);
    };

    guarded("generate_slack", [&] {
        auto rep = generate_slack(inst, col, cfg.eps_cap, scfg, log, &jinst);
        jinst["margins"]["slack"] = rep.pre_satisfied
                                        ? json(nullptr)
                                        : json(rep.min_heavy_slack - rep.slack_target);
    });

    std::vector<char> active(static_cast<size_t>(g.num_nodes()), 0);
    for (NodeId v = 0; v < g.num_nodes(); ++v) active[v] = col.is_colored(v) ? 0 : 1;
    auto hier = build_hierarchy(g, &active, seq, q);
    {
        int dense = 0, sparse = 0;
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            if (!hier.in_vstar(v)) continue;
            if (hier.is_sparse(v)) ++sparse;
            else ++dense;
        }
        jinst["hierarchy"] = {{"levels", hier.ell()},
                              {"blocks", hier.blocks.size()},
                              {"dense", dense},
                              {"sparse", sparse}};
    }

    guarded("small_medium_2plus",
            [&] { color_small_medium_2plus(inst, hier, col, scfg, log, &jinst); });
    guarded("small_medium_1",
            [&] { color_small_medium_1(inst, hier, col, scfg, log, &jinst); });

    if (hier.ell() >= 2) {
        guarded("large_2plus", [&] {
            auto sched = schedule_layer2plus(delta, seq, scfg.beta, scfg.gamma());
            auto out = color_large_framework(inst, hier, col, sched, 2, hier.ell(),
                                             scfg, log, &jinst);
            jinst["margins"]["framework_2plus_growth"] = out.max_growth_factor;
            if (out.safety_violations > 0)
                throw InvariantViolated("framework rollback safety violated");
        });
    }
    guarded("large_1", [&] {
        auto sched = schedule_layer1(delta, g.num_nodes(), seq.at_level(1),
                                     scfg.beta, scfg.gamma(), scfg.thetas);
        auto out =
            color_large_framework(inst, hier, col, sched, 1, 1, scfg, log, &jinst);
        jinst["margins"]["framework_1_growth"] = out.max_growth_factor;
        if (out.safety_violations > 0)
            throw InvariantViolated("framework rollback safety violated");
        // The layer-1 framework leaves a low-degree residue inside the
        // large blocks; finish it directly before the dense wrap-up.
        std::vector<NodeId> residue;
        for (const auto& b : hier.blocks)
            if (b.cls == BlockClass::Large && b.layer == 1)
                for (NodeId v : b.nodes)
                    if (!col.is_colored(v)) residue.push_back(v);
        complete_subset(inst, col, residue, scfg, log, nullptr);
    });

    guarded("finish_dense_U", [&] {
        auto out = finish_dense_U(inst, hier, col, scfg, log, &jinst);
        jinst["margins"]["dense_U_monotone"] = out.monotone_ok;
        jinst["margins"]["dense_U_within_schedule"] = out.within_schedule;
    });
    guarded("finish_sparse", [&] {
        auto out = finish_sparse(inst, hier, col, scfg, log, &jinst);
        jinst["margins"]["sparse_monotone"] = out.monotone_ok;
        jinst["margins"]["sparse_within_schedule"] = out.within_schedule;
    });

    // Defense in depth: complete any residue left by recovered failures.
    std::vector<NodeId> rest;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (!col.is_colored(v)) rest.push_back(v);
    if (!rest.empty()) {
        jinst["residue_completed"] = rest.size();
        complete_subset(inst, col, rest, scfg, log, nullptr);
    }
}

}  // namespace

void PipelineConfig::validate() const {
    if (!(stage.alpha < delta_exp))
        throw InvariantViolated("pipeline config: alpha must be < delta_exp");
    if (!(eps_cap < 0.2))
        throw InvariantViolated("pipeline config: eps_cap must be < 1/5");
    if (mode != "standard" && mode != "relaxed")
        throw InvariantViolated("pipeline config: unknown mode " + mode);
    if (lowdeg_floor < 1 || partition_threshold < lowdeg_floor)
        throw InvariantViolated("pipeline config: bad degree thresholds");
}

json RunReport::to_json() const {
    return {{"n", n},
            {"max_degree", max_degree},
            {"mode", mode},
            {"route", route},
            {"total_rounds", total_rounds},
            {"peak_words", peak_words},
            {"budget_words", budget_words},
            {"valid", valid},
            {"complete", complete},
            {"fallbacks", fallbacks},
            {"trace", trace}};
}

RunReport run_pipeline(const ListColoringInstance& inst, PartialColoring& col,
                       const PipelineConfig& cfg) {
    cfg.validate();
    inst.check_palettes();
    const NodeId n = inst.num_nodes();
    const int delta = inst.max_degree();
    RunReport rep;
    rep.n = n;
    rep.max_degree = delta;
    rep.mode = cfg.mode;
    MpcConfig mc;
    mc.delta_exp = cfg.delta_exp;
    mc.round_cap = cfg.round_cap;
    RoundLog log(mc.space_words(std::max<NodeId>(n, 4)), mc.round_cap);
    rep.budget_words = log.budget();
    col = PartialColoring(n);
    rep.trace["stage_failures"] = json::array();

    if (delta <= cfg.lowdeg_floor) {
        rep.route = "low_degree";
        low_degree_color(inst, col, cfg.stage, log, &rep.trace);
    } else if (delta > cfg.partition_threshold) {
        rep.route = "partition";
        json instances = json::array();
        BaseSolver base = [&](const ListColoringInstance& li, PartialColoring& lc,
                              RoundLog& blog, json*) {
            json jinst;
            jinst["n"] = li.num_nodes();
            jinst["max_degree"] = li.max_degree();
            jinst["stage_failures"] = json::array();
            staged_solve(li, lc, cfg, blog, jinst, rep.fallbacks);
            instances.push_back(std::move(jinst));
        };
        PartitionConfig pcfg = cfg.part;
        pcfg.target_degree = cfg.partition_threshold;  // leaves fit the staged engine
        rep.fallbacks += color_reduce(inst, col, pcfg, base, log, &rep.trace);
        rep.trace["instances"] = std::move(instances);
    } else {
        rep.route = "staged";
        json jinst;
        jinst["stage_failures"] = json::array();
        staged_solve(inst, col, cfg, log, jinst, rep.fallbacks);
        rep.trace["instance"] = std::move(jinst);
    }

    rep.total_rounds = log.num_rounds();
    rep.peak_words = log.peak_words();
    rep.trace["rounds"] = json::parse(log.to_json());
    rep.complete = col.num_colored() == n;
    rep.valid = validate_coloring(inst, col, true).empty();
    if (!rep.valid || !rep.complete)
        throw StageFailed("run_pipeline: final coloring invalid or incomplete");
    return rep;
}

}  // namespace dcolor

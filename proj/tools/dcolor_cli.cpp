// Command-line front end: generate benchmark graphs, run the coloring
// pipeline, verify colorings, and summarize run reports.
//
// Exit codes: 0 success, 1 input/validation failure, 2 stage failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcolor/errors.hpp"
#include "dcolor/instance.hpp"
#include "dcolor/pipeline.hpp"

using namespace dcolor;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitStageFailure = 2;

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    return out;
}

// Applies a flat {"key": value} JSON object onto the pipeline config.
// Unknown keys are an error so typos do not silently run with defaults.
void apply_config(PipelineConfig& cfg, const json& kv) {
    for (auto it = kv.begin(); it != kv.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        if (k == "delta_exp") cfg.delta_exp = v.get<double>();
        else if (k == "round_cap") cfg.round_cap = v.get<int>();
        else if (k == "mode") cfg.mode = v.get<std::string>();
        else if (k == "lowdeg_floor") cfg.lowdeg_floor = v.get<int>();
        else if (k == "partition_threshold") cfg.partition_threshold = v.get<int>();
        else if (k == "eps_cap") cfg.eps_cap = v.get<double>();
        else if (k == "alpha") cfg.stage.alpha = v.get<double>();
        else if (k == "beta") cfg.stage.beta = v.get<double>();
        else if (k == "c_slack") cfg.stage.c_slack = v.get<double>();
        else if (k == "seed_bits") cfg.stage.seed_bits = v.get<int>();
        else if (k == "seed_bits_cap") cfg.stage.seed_bits_cap = v.get<int>();
        else if (k == "master_seed") cfg.stage.master_seed = v.get<uint64_t>();
        else if (k == "bins") cfg.part.bins = v.get<int>();
        else if (k == "chunk_cap") cfg.part.chunk_cap = v.get<int>();
        else if (k == "slack_factor") cfg.part.slack_factor = v.get<double>();
        else if (k == "max_depth") cfg.part.max_depth = v.get<int>();
        else throw ParseError("unknown config key: " + k);
    }
}

int cmd_gen(const std::string& kind, NodeId n, int delta, int k, uint64_t seed,
            const std::string& out_path) {
    Graph g(0);
    if (kind == "gnp") g = gen_gnp(n, delta, seed);
    else if (kind == "clique_planted") g = gen_clique_planted(n, delta, seed);
    else if (kind == "grid") g = gen_grid(n);
    else if (kind == "cluster_testbed")
        g = gen_cluster_testbed(n, delta, k, 0.05, 2, seed);
    else throw ParseError("unknown generator kind: " + kind);
    auto out = open_out(out_path);
    save_edge_list(g, out);
    std::cerr << "generated " << kind << ": n=" << g.num_nodes()
              << " m=" << g.num_edges() << " max_degree=" << g.max_degree()
              << "\n";
    return kExitOk;
}

int cmd_run(const std::string& graph_path, const std::string& palette_spec,
            const std::string& palette_path, const std::string& out_path,
            const std::string& report_path, PipelineConfig cfg, double zeta) {
    auto gin = open_in(graph_path);
    Graph g = load_edge_list(gin);
    ListColoringInstance inst;
    if (!palette_path.empty()) {
        auto pin = open_in(palette_path);
        inst.graph = std::move(g);
        inst.palettes = load_palettes(pin, inst.graph);
        inst.relaxed = (cfg.mode == "relaxed");
        inst.check_palettes();
    } else {
        std::string spec = palette_spec;
        if (spec == "standard")
            spec = "uniform:" + std::to_string(g.max_degree() + 1);
        inst = make_instance(g, spec);
    }
    if (zeta > 0.0) {
        cfg.part.bins = std::max(
            2, static_cast<int>(std::llround(
                   std::pow(static_cast<double>(std::max<NodeId>(inst.num_nodes(), 2)),
                            zeta))));
    }
    cfg.validate();

    PartialColoring col;
    RunReport rep = run_pipeline(inst, col, cfg);

    if (!out_path.empty()) {
        auto out = open_out(out_path);
        save_coloring(col, out);
    }
    if (!report_path.empty()) {
        auto out = open_out(report_path);
        out << rep.to_json().dump(2) << "\n";
    }
    std::cerr << "route=" << rep.route << " rounds=" << rep.total_rounds
              << " peak_words=" << rep.peak_words << "/" << rep.budget_words
              << " complete=" << (rep.complete ? "yes" : "no") << "\n";
    return kExitOk;
}

int cmd_verify(const std::string& graph_path, const std::string& coloring_path,
               const std::string& palette_spec, const std::string& palette_path) {
    auto gin = open_in(graph_path);
    Graph g = load_edge_list(gin);
    ListColoringInstance inst;
    if (!palette_path.empty()) {
        auto pin = open_in(palette_path);
        inst.graph = std::move(g);
        inst.palettes = load_palettes(pin, inst.graph);
        inst.relaxed = true;
        inst.check_palettes();
    } else {
        std::string spec = palette_spec;
        if (spec == "standard")
            spec = "uniform:" + std::to_string(g.max_degree() + 1);
        inst = make_instance(g, spec);
    }
    auto cin_ = open_in(coloring_path);
    PartialColoring col = load_coloring(cin_, inst.num_nodes());
    auto errs = validate_coloring(inst, col, /*require_complete=*/true);
    if (errs.empty()) {
        std::cerr << "valid: " << inst.num_nodes() << " nodes, complete proper "
                  << "list coloring\n";
        return kExitOk;
    }
    for (size_t i = 0; i < errs.size() && i < 20; ++i)
        std::cerr << "violation: " << errs[i] << "\n";
    std::cerr << errs.size() << " violation(s)\n";
    return kExitInvalid;
}

int cmd_report(const std::string& path, bool summary) {
    auto in = open_in(path);
    json rep = json::parse(in);
    if (!summary) {
        std::cout << rep.dump(2) << "\n";
        return kExitOk;
    }
    std::cout << "n=" << rep.value("n", 0)
              << " max_degree=" << rep.value("max_degree", 0)
              << " route=" << rep.value("route", std::string("?"))
              << " rounds=" << rep.value("total_rounds", 0)
              << " peak_words=" << rep.value("peak_words", int64_t{0})
              << "/" << rep.value("budget_words", int64_t{0})
              << " complete=" << (rep.value("complete", false) ? "yes" : "no")
              << " fallbacks=" << rep.value("fallbacks", 0) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic (Delta+1) list coloring in a simulated "
                 "low-space parallel model"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a benchmark graph");
    std::string g_kind = "gnp", g_out;
    NodeId g_n = 1000;
    int g_delta = 32, g_k = 4;
    uint64_t g_seed = 1;
    gen->add_option("--kind", g_kind, "gnp|clique_planted|grid|cluster_testbed");
    gen->add_option("--n", g_n, "number of nodes");
    gen->add_option("--delta", g_delta, "target maximum degree");
    gen->add_option("--k", g_k, "cluster count (cluster_testbed)");
    gen->add_option("--seed", g_seed, "generator seed");
    gen->add_option("-o,--output", g_out, "edge-list output path")->required();

    // run
    auto* run = app.add_subcommand("run", "color a graph");
    std::string r_graph, r_palette = "standard", r_palette_file, r_out, r_report,
                r_config, r_mode;
    double r_delta_exp = -1, r_alpha = -1, r_zeta = -1;
    int r_seed_bits = -1, r_round_cap = -1;
    run->add_option("-i,--input", r_graph, "edge-list graph")->required();
    run->add_option("--palette", r_palette,
                    "palette spec: standard | relaxed | uniform:K");
    run->add_option("--palette-file", r_palette_file, "explicit palette file");
    run->add_option("-o,--output", r_out, "coloring output path");
    run->add_option("--report", r_report, "JSON run report output path");
    run->add_option("--delta-exp", r_delta_exp, "machine space exponent");
    run->add_option("--alpha", r_alpha, "vote decay exponent");
    run->add_option("--zeta", r_zeta, "partition bin exponent (bins = n^zeta)");
    run->add_option("--seed-bits", r_seed_bits, "initial vote seed width");
    run->add_option("--round-cap", r_round_cap, "round budget");
    run->add_option("--mode", r_mode, "standard | relaxed");
    run->add_option("--config", r_config, "flat key/value JSON config file");

    // verify
    auto* ver = app.add_subcommand("verify", "check a coloring");
    std::string v_graph, v_coloring, v_palette = "standard", v_palette_file;
    ver->add_option("-i,--input", v_graph, "edge-list graph")->required();
    ver->add_option("-c,--coloring", v_coloring, "coloring file")->required();
    ver->add_option("--palette", v_palette, "palette spec");
    ver->add_option("--palette-file", v_palette_file, "explicit palette file");

    // report
    auto* rp = app.add_subcommand("report", "print or summarize a run report");
    std::string p_file;
    bool p_summary = false;
    rp->add_option("file", p_file, "report JSON file")->required();
    rp->add_flag("--summary", p_summary, "one-line summary");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(g_kind, g_n, g_delta, g_k, g_seed, g_out);
        if (ver->parsed())
            return cmd_verify(v_graph, v_coloring, v_palette, v_palette_file);
        if (rp->parsed()) return cmd_report(p_file, p_summary);

        PipelineConfig cfg;
        if (!r_config.empty()) {
            auto in = open_in(r_config);
            apply_config(cfg, json::parse(in));
        }
        if (r_delta_exp > 0) cfg.delta_exp = r_delta_exp;
        if (r_alpha > 0) cfg.stage.alpha = r_alpha;
        if (r_seed_bits > 0) cfg.stage.seed_bits = r_seed_bits;
        if (r_round_cap > 0) cfg.round_cap = r_round_cap;
        if (!r_mode.empty()) cfg.mode = r_mode;
        std::string pal = r_palette;
        if (pal == "standard") pal = "";
        if (cfg.mode == "relaxed" && pal.empty()) pal = "relaxed";
        if (pal.empty()) pal = "standard";
        return cmd_run(r_graph, pal, r_palette_file, r_out, r_report, cfg, r_zeta);
    } catch (const StageFailed& e) {
        std::cerr << "stage failure: " << e.what() << "\n";
        return kExitStageFailure;
    } catch (const RoundCapExceeded& e) {
        std::cerr << "stage failure: " << e.what() << "\n";
        return kExitStageFailure;
    } catch (const EngineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitOk;
}

#pragma once
// End-to-end orchestration: route an instance by maximum degree (direct
// low-degree completion, degree-reduction partition, or the full dense /
// sparse staged engine), run the stages in order, re-validate the partial
// coloring at every stage boundary, and report rounds, space, and invariant
// margins.

#include <string>
#include <vector>

#include <json.hpp>

#include "dcolor/instance.hpp"
#include "dcolor/mpc.hpp"
#include "dcolor/partition.hpp"
#include "dcolor/stages.hpp"

namespace dcolor {

struct PipelineConfig {
    double delta_exp = 0.5;  // machine space S = ceil(n^delta_exp) words
    int round_cap = 500;
    std::string mode = "standard";  // "standard" or "relaxed"
    int lowdeg_floor = 8;           // Delta <= floor: direct completion
    int partition_threshold = 128;  // Delta > threshold: degree reduction
    double eps_cap = 0.12;          // must be < 1/5
    std::vector<double> eps_levels = {0.04, 0.1};
    StageConfig stage;
    PartitionConfig part;

    // Throws InvariantViolated unless alpha < delta_exp and eps_cap < 1/5.
    void validate() const;
};

struct RunReport {
    NodeId n = 0;
    int max_degree = 0;
    std::string mode;
    std::string route;  // "low_degree", "partition", "staged"
    int total_rounds = 0;
    int64_t peak_words = 0;
    int64_t budget_words = 0;
    bool valid = false;     // proper + palette-feasible
    bool complete = false;  // every node colored
    int fallbacks = 0;      // stage failures recovered by direct completion
    nlohmann::json trace;   // per-stage detail, including invariant margins

    nlohmann::json to_json() const;
};

// Colors the instance from scratch. Always returns a complete proper
// coloring or throws; stage failures inside the staged engine are recovered
// by direct completion of the residue and counted in the report.
RunReport run_pipeline(const ListColoringInstance& inst, PartialColoring& col,
                       const PipelineConfig& cfg);

}  // namespace dcolor

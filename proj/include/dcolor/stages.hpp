#pragma once
// Deterministic pipeline stages. Each stage extends a partial coloring by
// seed-voting one of the randomized coloring procedures (one-shot, dense
// sequential step, color bidding) until the stage's happiness predicate
// holds for every tracked unit, escalating seed width when a vote falls
// short of the target happy fraction. Stages never recolor: outputs extend
// inputs, and every commit keeps the coloring proper and palette-feasible.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcolor/decomp.hpp"
#include "dcolor/instance.hpp"
#include "dcolor/kwise.hpp"
#include "dcolor/mpc.hpp"
#include "dcolor/schedule.hpp"

namespace dcolor {

// Central table for every stage constant. The asymptotic analysis only
// pins these up to Theta; concrete runs need concrete numbers, and the
// assertions below use exactly these values.
struct StageConfig {
    double alpha = 0.25;   // vote decay exponent; happy target 1 - n^{-alpha}
    double beta = 2.0;     // even-invariant growth constant
    double c_slack = 1.0;  // slack target c_slack * eps^2 * Delta
    double c9 = 2.0;       // layer-1 phase-a degree target c9 * D^{9/10} log D
    double heavy_fraction = 5.0 / 6.0;  // "high degree" threshold fraction
    double p_oneshot = 0.125;           // one-shot participation probability
    double lambda = 0.1;                // contention schedule damping
    int w = 16;                         // dyadic coin precision
    int seed_bits = 8;                  // initial vote seed width
    int seed_bits_cap = 16;
    int seed_bits_step = 4;
    int hash_seed_bits = 10;       // slack group-hash subfamily width
    int hash_independence = 8;     // z: independence of the group hash
    int final_reps = 8;            // wrap-up bidding votes after the schedule
    int max_contention_iters = 8;  // schedule length cap at small C
    double min_derived_C = 0.05;   // contention hypothesis floor
    Layer1Thetas thetas;
    uint64_t master_seed = 0x5dc01ab1u;

    int vote_width() const;       // ceil(1/alpha): inner applications per step
    double gamma() const { return 2.0 / alpha; }
    double target_fraction(NodeId n) const;
};

// --- slack generation ---

struct SlackReport {
    uint64_t hash_seed = 0;
    double hash_cost = 0.0;
    int heavy_nodes = 0;
    int colored = 0;
    double min_uncolored_ratio = 1.0;  // over heavy nodes: uncolored nbrs / Delta
    double min_heavy_slack = 0.0;
    double slack_target = 0.0;
    std::vector<double> group_happy;
    bool pre_satisfied = false;
};

// Partitions V into 4 * vote_width() groups with a hash chosen by
// conditional expectations over balance and non-edge-spread indicators,
// then colors the first vote_width() groups by voted one-shot rounds. On
// success every heavy node (deg >= heavy_fraction * Delta) keeps at least
// Delta/2 uncolored neighbors and slack >= c_slack * eps_cap^2 * Delta.
SlackReport generate_slack(const ListColoringInstance& inst, PartialColoring& col,
                           double eps_cap, const StageConfig& cfg, RoundLog& log,
                           nlohmann::json* trace);

// --- dense coloring with slack (small / medium blocks) ---

// Layer 2+ small and medium blocks: 6 phases of voted sequential coloring
// per class; after phase k every node has at most
// min{(2*delta_i)^{k-1} * Delta, eps_i^5 * Delta} uncolored layer-i
// neighbors inside the processed class, delta_i = 2 eps_i ln(1/eps_i).
void color_small_medium_2plus(const ListColoringInstance& inst,
                              const DensityHierarchy& hier, PartialColoring& col,
                              const StageConfig& cfg, RoundLog& log,
                              nlohmann::json* trace);

// Layer-1 small and medium blocks: voted sequential coloring until the
// uncolored degree inside the class drops below c9 * Delta^{9/10} * ln
// Delta, then a gap-coloring finish over the measured excess.
void color_small_medium_1(const ListColoringInstance& inst,
                          const DensityHierarchy& hier, PartialColoring& col,
                          const StageConfig& cfg, RoundLog& log,
                          nlohmann::json* trace);

// --- dense coloring without slack (large blocks) ---

struct FrameworkOutcome {
    int applications = 0;       // outer schedule steps executed
    int votes = 0;              // inner seed votes actually run
    int rollback_events = 0;    // inner applications that rolled anything back
    int rollback_nodes = 0;     // assignments undone
    int safety_violations = 0;  // kept clusters broken by a rollback (must be 0)
    double max_growth_factor = 0.0;  // achieved invariant factor, <= vote_width()
    int uncolored_left = 0;
};

// Runs the invariant schedule over the large blocks with layers in
// [min_layer, max_layer]. Outer step q starts from the (2q-1)-th invariant
// and performs vote_width() inner voted applications of the sampled
// sequential step; clusters whose 3-hop context (r+1)-satisfies the
// (2q)-th invariant keep their colors, all other new colors are rolled
// back. Kept clusters are re-verified after every rollback.
FrameworkOutcome color_large_framework(const ListColoringInstance& inst,
                                       const DensityHierarchy& hier,
                                       PartialColoring& col,
                                       const InvariantSchedule& sched,
                                       int min_layer, int max_layer,
                                       const StageConfig& cfg, RoundLog& log,
                                       nlohmann::json* trace);

// --- sparse color bidding ---

struct SparseOutcome {
    int iterations = 0;
    int votes = 0;
    double derived_C = 0.0;
    double p_star = 0.0;
    bool monotone_ok = true;        // con(v, .) never increased at a boundary
    bool within_schedule = true;    // con(v, k) <= 1/C^(k) at every boundary
    std::vector<double> boundary_max_con;
    int uncolored_left = 0;
};

struct SparseTask {
    std::vector<NodeId> nodes;  // uncolored targets
    // total strict priority: lower rank = colored later target reference;
    // u is an out-neighbor of v iff rank[u] < rank[v].
    std::vector<int64_t> rank;  // per node id, arbitrary for non-targets
    double C = 0.0;             // initial contention constant (derived by caller)
    std::string label;
};

// Voted color bidding under the contention schedule C^(1), C^(2), ...; a
// node is happy when colored or when its recomputed contention meets both
// the next bound 1/C^(k+1) and its previous boundary value. Uncolored
// leftovers after the wrap-up votes raise StageFailed.
SparseOutcome color_sparse(const ListColoringInstance& inst, PartialColoring& col,
                           const SparseTask& task, const StageConfig& cfg,
                           RoundLog& log, nlohmann::json* trace);

// Gap coloring: every target has measured excess (available colors minus
// uncolored in-task degree) >= 1; p_v is that excess and C is derived from
// the measured contention. Rho is reported in the trace.
SparseOutcome sparse_gap_color(const ListColoringInstance& inst, PartialColoring& col,
                               const std::vector<NodeId>& targets,
                               const StageConfig& cfg, RoundLog& log,
                               nlohmann::json* trace, const std::string& label);

// Colors the remaining uncolored dense nodes, oriented from sparser to
// denser (lower layer = denser = out). C is derived from the measured
// contention sum and asserted >= min_derived_C, else
// ContentionHypothesisViolated.
SparseOutcome finish_dense_U(const ListColoringInstance& inst,
                             const DensityHierarchy& hier, PartialColoring& col,
                             const StageConfig& cfg, RoundLog& log,
                             nlohmann::json* trace);

// Colors the sparse nodes V_sp with the lower-id orientation and derived C.
SparseOutcome finish_sparse(const ListColoringInstance& inst,
                            const DensityHierarchy& hier, PartialColoring& col,
                            const StageConfig& cfg, RoundLog& log,
                            nlohmann::json* trace);

// --- low-degree completion ---

// Deterministic completion of every uncolored node: computes small ids on
// the uncolored subgraph (distinct within radius 1, so equal-id nodes are
// independent) and lets each id class take minimum available colors
// simultaneously. Always terminates with a proper, feasible completion
// because palettes exceed degrees.
void low_degree_color(const ListColoringInstance& inst, PartialColoring& col,
                      const StageConfig& cfg, RoundLog& log, nlohmann::json* trace);

}  // namespace dcolor

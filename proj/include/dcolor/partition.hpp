#pragma once
// Recursive degree reduction: nodes and colors are hashed into bins with
// O(1)-wise independent hashes selected by conditional expectations, node
// palettes are restricted to the colors routed to their bin, the bins are
// solved recursively, and a designated leftover bin (which keeps its full
// palette minus colors used by already-colored neighbors) is solved last.
// Every level maintains p'(v) > d'(v) for every node, so each leaf instance
// is a feasible list-coloring problem for the base solver.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcolor/instance.hpp"
#include "dcolor/kwise.hpp"
#include "dcolor/mpc.hpp"

namespace dcolor {

struct PartitionConfig {
    int bins = 2;          // B: node bins per level (colors go to B - 1 bins)
    int chunk_cap = 256;   // neighbors / colors per accounting chunk
    // Chunk threshold = sqrt(chunk_cap) * slack_factor. The asymptotic
    // threshold corresponds to slack 1 with chunk_cap = n^{22 zeta}, but at
    // bench-scale bin counts a full chunk's deviation is a constant number
    // of standard deviations away, so the default widens the band to keep
    // the expected bad-chunk count below one.
    double slack_factor = 3.0;
    int hash_seed_bits = 8;     // subfamily width per hash
    int hash_independence = 4;  // c: independence of both hash families
    int depth_offset = 0;       // subtracted from the computed depth
    int max_depth = 8;
    // Recursion stops once the per-bin degree is expected at or below this,
    // handing the leaf to the base solver. The asymptotic recursion drives
    // the degree to a constant, but the leftover bin runs after its sibling
    // bins at every level, so the sequential round chain doubles per level;
    // stopping at the base solver's comfort zone keeps it short.
    int target_degree = 128;
    // The asymptotic depth formula subtracts this constant; at bench scale
    // it would always clamp to zero, so it is kept for documentation only.
    int faithful_depth_offset = 23;
    uint64_t master_seed = 0x9a27c011u;

    // zeta implied by the bin count: n^zeta = bins.
    double zeta(NodeId n) const;
    double chunk_threshold() const;
};

// A selected (h1, h2) pair. Both hashes are polynomials over GF(2^w)
// indexed by a short subfamily seed; outputs map through a 16-bit range
// onto the bin count by near-equal intervals.
struct PartitionHashes {
    int bins = 0;
    uint64_t seed1 = 0;  // subfamily indices (the enumerated short seeds)
    uint64_t seed2 = 0;
    uint64_t poly1 = 0;  // expanded coefficient seeds
    uint64_t poly2 = 0;
    int independence = 0;
    int input_bits = 0;

    int node_bin(NodeId v) const;   // in [0, bins)
    int color_bin(Color c) const;   // in [0, bins - 1)
};

// Number of bad accounting chunks under (h1, h2): a neighbor chunk of size
// d(x) is bad when |d'(x) - d(x)/B| exceeds the threshold, a color chunk
// (only for nodes outside the leftover bin) when |p'(x) - p(x)/(B-1)|
// does. Nodes already colored in `col` are ignored (the V_0 set).
int64_t partition_cost(const ListColoringInstance& inst, const PartialColoring& col,
                       const PartitionHashes& h, const PartitionConfig& cfg);

// Selects (h1, h2) with cost 0 by conditional expectations over the joint
// subfamily seed. Throws ExpectationNotBelowOne when no zero-cost pair
// exists in the family (the caller falls back to direct coloring).
PartitionHashes select_partition_hashes(const ListColoringInstance& inst,
                                        const PartialColoring& col,
                                        const PartitionConfig& cfg, RoundLog& log);

// One bin as a standalone instance; orig[i] is the parent id of node i.
struct SubInstance {
    ListColoringInstance inst;
    std::vector<NodeId> orig;
};

struct PartitionLevel {
    std::vector<SubInstance> bins;  // size B; bins[B-1] is the leftover bin
    int leftover_index = 0;
    int max_new_degree = 0;
    int min_new_palette = 0;
};

// Splits the uncolored nodes of `inst` into B bins. Bins 0..B-2 get their
// palettes restricted to the colors h2 routes to their bin; the leftover
// bin's palettes are left at the full availability and must be rebuilt
// (rebuild_leftover) after the siblings are colored. Asserts p'(v) > d'(v)
// for every sibling-bin node, and that sibling palettes are pairwise
// disjoint.
PartitionLevel low_space_partition(const ListColoringInstance& inst,
                                   const PartialColoring& col,
                                   const PartitionHashes& h,
                                   const PartitionConfig& cfg, RoundLog& log);

// Recomputes the leftover bin's palettes from the current coloring (full
// palette minus colors used by colored neighbors) and asserts p' > d'.
void rebuild_leftover(const ListColoringInstance& inst, const PartialColoring& col,
                      SubInstance& leftover);

// Solves a leaf instance in place, extending `col` to every node of the
// sub-instance.
using BaseSolver = std::function<void(const ListColoringInstance&, PartialColoring&,
                                      RoundLog&, nlohmann::json*)>;

// Full recursion: partitions to depth max(0, min(max_depth,
// ceil(log_n Delta / zeta) - depth_offset)), solving leaves with
// base_solver. A level whose hash selection raises ExpectationNotBelowOne
// is solved directly by base_solver (counted in the trace). Returns the
// number of such fallbacks.
int color_reduce(const ListColoringInstance& inst, PartialColoring& col,
                 const PartitionConfig& cfg, const BaseSolver& base_solver,
                 RoundLog& log, nlohmann::json* trace);

}  // namespace dcolor

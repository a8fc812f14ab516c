#ifndef DCOLOR_MPC_HPP
#define DCOLOR_MPC_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dcolor/instance.hpp"

namespace dcolor {

// Configuration of the simulated low-space machine model. A word is
// ceil(word_c * log2 n) bits; every stored integer costs one word. Each
// machine holds S = ceil(n^delta_exp) words.
struct MpcConfig {
    double delta_exp = 0.5;
    int word_c = 2;
    int round_cap = 500;

    int64_t space_words(int64_t n) const;
    int word_bits(int64_t n) const;
};

struct RoundRecord {
    int round = 0;
    std::string label;       // stage/primitive that produced the round
    int64_t machines = 0;    // machines active this round
    int64_t peak_words = 0;  // max words resident on any machine
    int64_t total_words = 0; // sum over machines
};

// Per-run accounting. Every primitive charges the rounds it consumes; the
// budget is enforced at charge time (a record with peak > S is an error in
// strict mode and is how SpaceExceeded surfaces from the pipeline).
class RoundLog {
  public:
    RoundLog() = default;
    RoundLog(int64_t budget_words, int round_cap)
        : budget_(budget_words), round_cap_(round_cap) {}

    // Appends `count` rounds with identical shape. Throws SpaceExceeded if
    // peak > budget, RoundCapExceeded past the cap.
    void charge(const std::string& label, int count, int64_t machines, int64_t peak_words,
                int64_t total_words);

    int num_rounds() const { return static_cast<int>(rounds_.size()); }
    int64_t peak_words() const;
    int64_t budget() const { return budget_; }
    int round_cap() const { return round_cap_; }
    const std::vector<RoundRecord>& rounds() const { return rounds_; }
    std::string to_json() const;

  private:
    int64_t budget_ = 0;
    int round_cap_ = 0;
    std::vector<RoundRecord> rounds_;
};

// --- raw simulator ---

using MachineId = int32_t;

struct Message {
    MachineId to = 0;
    std::vector<int64_t> payload;
};

struct MachineState {
    std::vector<int64_t> store;
};

// One synchronous step of one machine: consumes its inbox, may mutate its
// store, emits messages delivered next round. The word cost of a machine in
// a round is |store| + total inbox payload words.
using MpcProgram =
    std::function<std::vector<Message>(MachineId, MachineState&, const std::vector<Message>&)>;

// Runs `num_rounds` barrier-synchronized rounds over `machines`, with strict
// per-machine accounting against `space_words`. Appends one record per round
// to the log. Throws SpaceExceeded on any overflow.
void run_rounds(std::vector<MachineState>& machines, const MpcProgram& program, int num_rounds,
                int64_t space_words, RoundLog& log, const std::string& label);

// --- model-level primitives (accounting-faithful, centrally computed) ---

struct KeyedRecord {
    int64_t key = 0;
    std::vector<int64_t> words;
};

// Stable-sorts records by key and repacks them into machines of at most
// space_words words with equal keys contiguous (a key run longer than one
// machine spans consecutive machines). Charges ceil(1/delta_exp) rounds.
// Returns per-machine record index ranges.
struct SortedLayout {
    std::vector<KeyedRecord> records;                     // sorted
    std::vector<std::pair<size_t, size_t>> machine_ranges;  // [first, last) per machine
};
SortedLayout sort_and_group(std::vector<KeyedRecord> records, int64_t space_words,
                            double delta_exp, RoundLog& log);

// Collects the radius-r ball of every node (node set plus induced state
// words). words_per_node is the payload a node contributes (id + color +
// O(1) counters). If strict and some ball exceeds space_words, throws
// BallTooLarge; otherwise over-budget balls span a group of machines and the
// gather costs extra rounds. Charges ceil(log2(r))+1 rounds plus group
// overhead. Returns the balls.
std::vector<std::vector<NodeId>> collect_balls(const Graph& g, int radius, int words_per_node,
                                               int64_t space_words, RoundLog& log, bool strict);

// Assigns each cluster (list of nodes, with per-node payload words) to a
// dedicated machine group: ceil(payload / space_words) machines. In strict
// mode a cluster payload over space_words throws SpaceExceeded. Charges the
// shuffle round(s) and returns machines-per-cluster.
std::vector<int64_t> allocate_cluster_machines(const std::vector<std::vector<NodeId>>& clusters,
                                               int words_per_node, int64_t space_words,
                                               RoundLog& log, bool strict);

// Convenience used by pipeline stages: charges `count` rounds for a step
// whose largest single-holder payload is `payload_words`; payloads beyond
// the budget are chunked across a machine group (ledger-documented
// relaxation) with gather overhead of ceil(log2(group)) extra rounds.
void charge_grouped(RoundLog& log, const std::string& label, int count, int64_t payload_words,
                    int64_t total_words);

}  // namespace dcolor

#endif

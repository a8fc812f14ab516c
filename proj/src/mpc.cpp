#include "dcolor/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

#include "dcolor/errors.hpp"

namespace dcolor {

int64_t MpcConfig::space_words(int64_t n) const {
    return static_cast<int64_t>(std::ceil(std::pow(static_cast<double>(n), delta_exp)));
}

int MpcConfig::word_bits(int64_t n) const {
    return static_cast<int>(std::ceil(word_c * std::log2(std::max<int64_t>(2, n))));
}

void RoundLog::charge(const std::string& label, int count, int64_t machines, int64_t peak_words,
                      int64_t total_words) {
    if (peak_words > budget_)
        throw SpaceExceeded(label + ": machine holds " + std::to_string(peak_words) +
                            " words, budget " + std::to_string(budget_));
    for (int i = 0; i < count; ++i) {
        if (round_cap_ > 0 && static_cast<int>(rounds_.size()) >= round_cap_)
            throw RoundCapExceeded("round cap " + std::to_string(round_cap_) + " hit at " +
                                   label);
        RoundRecord rec;
        rec.round = static_cast<int>(rounds_.size());
        rec.label = label;
        rec.machines = machines;
        rec.peak_words = peak_words;
        rec.total_words = total_words;
        rounds_.push_back(std::move(rec));
    }
}

int64_t RoundLog::peak_words() const {
    int64_t peak = 0;
    for (const auto& r : rounds_) peak = std::max(peak, r.peak_words);
    return peak;
}

std::string RoundLog::to_json() const {
    std::ostringstream out;
    out << "{\"rounds\":" << rounds_.size() << ",\"budget_words\":" << budget_
        << ",\"peak_words\":" << peak_words() << ",\"per_round\":[";
    for (size_t i = 0; i < rounds_.size(); ++i) {
        const auto& r = rounds_[i];
        if (i) out << ',';
        out << "{\"round\":" << r.round << ",\"label\":\"" << r.label
            << "\",\"machines\":" << r.machines << ",\"peak_words\":" << r.peak_words
            << ",\"total_words\":" << r.total_words << '}';
    }
    out << "]}";
    return out.str();
}

void run_rounds(std::vector<MachineState>& machines, const MpcProgram& program, int num_rounds,
                int64_t space_words, RoundLog& log, const std::string& label) {
    std::vector<std::vector<Message>> inboxes(machines.size());
    for (int round = 0; round < num_rounds; ++round) {
        // Account space first: resident store plus delivered messages.
        int64_t peak = 0, total = 0;
        for (size_t m = 0; m < machines.size(); ++m) {
            int64_t words = static_cast<int64_t>(machines[m].store.size());
            for (const auto& msg : inboxes[m]) words += static_cast<int64_t>(msg.payload.size());
            if (words > space_words)
                throw SpaceExceeded(label + ": machine " + std::to_string(m) + " holds " +
                                    std::to_string(words) + " words in round " +
                                    std::to_string(round));
            peak = std::max(peak, words);
            total += words;
        }
        log.charge(label, 1, static_cast<int64_t>(machines.size()), peak, total);
        std::vector<std::vector<Message>> next(machines.size());
        for (size_t m = 0; m < machines.size(); ++m) {
            auto outgoing = program(static_cast<MachineId>(m), machines[m], inboxes[m]);
            for (auto& msg : outgoing) {
                if (msg.to < 0 || static_cast<size_t>(msg.to) >= machines.size())
                    throw SpaceExceeded(label + ": message to unknown machine");
                next[msg.to].push_back(std::move(msg));
            }
        }
        inboxes = std::move(next);
    }
}

SortedLayout sort_and_group(std::vector<KeyedRecord> records, int64_t space_words,
                            double delta_exp, RoundLog& log) {
    std::stable_sort(records.begin(), records.end(),
                     [](const KeyedRecord& a, const KeyedRecord& b) { return a.key < b.key; });
    SortedLayout layout;
    layout.records = std::move(records);
    // Greedy repack into machines of <= space_words words.
    size_t first = 0;
    int64_t used = 0;
    int64_t peak = 0, total = 0;
    for (size_t i = 0; i <= layout.records.size(); ++i) {
        int64_t w = (i < layout.records.size())
                        ? static_cast<int64_t>(layout.records[i].words.size()) + 1
                        : 0;
        if (i < layout.records.size() && w > space_words)
            throw SpaceExceeded("sort_and_group: single record of " + std::to_string(w) +
                                " words exceeds budget");
        if (i == layout.records.size() || used + w > space_words) {
            if (i > first) {
                layout.machine_ranges.emplace_back(first, i);
                peak = std::max(peak, used);
                total += used;
            }
            first = i;
            used = 0;
        }
        used += w;
    }
    int rounds = std::max(1, static_cast<int>(std::ceil(1.0 / delta_exp)));
    log.charge("sort_and_group", rounds,
               static_cast<int64_t>(std::max<size_t>(1, layout.machine_ranges.size())), peak,
               total);
    return layout;
}

std::vector<std::vector<NodeId>> collect_balls(const Graph& g, int radius, int words_per_node,
                                               int64_t space_words, RoundLog& log, bool strict) {
    std::vector<std::vector<NodeId>> balls(g.num_nodes());
    int64_t peak = 0, total = 0;
    int64_t worst_group = 1;
    std::vector<int> dist(g.num_nodes(), -1);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        std::queue<NodeId> q;
        q.push(v);
        dist[v] = 0;
        std::vector<NodeId> ball{v};
        while (!q.empty()) {
            NodeId x = q.front();
            q.pop();
            if (dist[x] == radius) continue;
            for (NodeId u : g.neighbors(x)) {
                if (dist[u] < 0) {
                    dist[u] = dist[x] + 1;
                    ball.push_back(u);
                    q.push(u);
                }
            }
        }
        for (NodeId u : ball) dist[u] = -1;
        std::sort(ball.begin(), ball.end());
        int64_t words = static_cast<int64_t>(ball.size()) * words_per_node;
        if (words > space_words) {
            if (strict)
                throw BallTooLarge("radius-" + std::to_string(radius) + " ball of node " +
                                   std::to_string(v) + " needs " + std::to_string(words) +
                                   " words, budget " + std::to_string(space_words));
            worst_group = std::max(worst_group, (words + space_words - 1) / space_words);
            peak = std::max(peak, space_words);
        } else {
            peak = std::max(peak, words);
        }
        total += words;
        balls[v] = std::move(ball);
    }
    int rounds = static_cast<int>(std::ceil(std::log2(std::max(2, radius + 1)))) + 1;
    if (worst_group > 1)
        rounds += static_cast<int>(std::ceil(std::log2(static_cast<double>(worst_group))));
    log.charge("collect_balls", rounds, static_cast<int64_t>(g.num_nodes()), peak, total);
    return balls;
}

std::vector<int64_t> allocate_cluster_machines(const std::vector<std::vector<NodeId>>& clusters,
                                               int words_per_node, int64_t space_words,
                                               RoundLog& log, bool strict) {
    std::vector<int64_t> machines_per(clusters.size(), 0);
    int64_t peak = 0, total = 0, worst_group = 1;
    for (size_t j = 0; j < clusters.size(); ++j) {
        int64_t words = static_cast<int64_t>(clusters[j].size()) * words_per_node;
        if (words > space_words && strict)
            throw SpaceExceeded("cluster " + std::to_string(j) + " payload " +
                                std::to_string(words) + " words exceeds budget " +
                                std::to_string(space_words));
        machines_per[j] = std::max<int64_t>(1, (words + space_words - 1) / space_words);
        worst_group = std::max(worst_group, machines_per[j]);
        peak = std::max(peak, std::min(words, space_words));
        total += words;
    }
    int rounds = 1;
    if (worst_group > 1)
        rounds += static_cast<int>(std::ceil(std::log2(static_cast<double>(worst_group))));
    log.charge("allocate_cluster_machines", rounds,
               static_cast<int64_t>(std::max<size_t>(1, clusters.size())), peak, total);
    return machines_per;
}

void charge_grouped(RoundLog& log, const std::string& label, int count, int64_t payload_words,
                    int64_t total_words) {
    int64_t budget = log.budget();
    int64_t group = std::max<int64_t>(1, (payload_words + budget - 1) / budget);
    int extra = group > 1
                    ? static_cast<int>(std::ceil(std::log2(static_cast<double>(group))))
                    : 0;
    int64_t machines = std::max<int64_t>(1, (total_words + budget - 1) / budget);
    log.charge(label, count + extra, machines, std::min(payload_words, budget), total_words);
}

}  // namespace dcolor

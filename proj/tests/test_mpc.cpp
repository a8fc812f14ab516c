#include <doctest.h>

#include <queue>

#include "dcolor/errors.hpp"
#include "dcolor/instance.hpp"
#include "dcolor/mpc.hpp"

using namespace dcolor;

namespace {
// BFS ball oracle, independent of collect_balls.
std::vector<NodeId> ball_oracle(const Graph& g, NodeId v, int r) {
    std::vector<int> dist(g.num_nodes(), -1);
    std::queue<NodeId> q;
    q.push(v);
    dist[v] = 0;
    std::vector<NodeId> out{v};
    while (!q.empty()) {
        NodeId x = q.front();
        q.pop();
        if (dist[x] == r) continue;
        for (NodeId u : g.neighbors(x))
            if (dist[u] < 0) {
                dist[u] = dist[x] + 1;
                out.push_back(u);
                q.push(u);
            }
    }
    std::sort(out.begin(), out.end());
    return out;
}
}  // namespace

TEST_CASE("MpcConfig word and space arithmetic") {
    MpcConfig cfg;
    CHECK(cfg.space_words(10000) == 100);
    CHECK(cfg.space_words(1000) == 32);  // ceil(1000^0.5) = 32
    CHECK(cfg.word_bits(1024) == 20);    // 2 * log2(1024)
    cfg.delta_exp = 0.25;
    CHECK(cfg.space_words(10000) == 10);
}

TEST_CASE("run_rounds: message passing and per-round accounting") {
    // Three machines pass a token 0 -> 1 -> 2.
    std::vector<MachineState> machines(3);
    machines[0].store = {42};
    RoundLog log(/*budget=*/8, /*cap=*/10);
    MpcProgram prog = [](MachineId m, MachineState& st, const std::vector<Message>& inbox)
        -> std::vector<Message> {
        for (const auto& msg : inbox) st.store = msg.payload;
        if (!st.store.empty() && m < 2) {
            Message fwd{static_cast<MachineId>(m + 1), st.store};
            st.store.clear();
            return {fwd};
        }
        return {};
    };
    run_rounds(machines, prog, 3, 8, log, "token");
    CHECK(machines[2].store == std::vector<int64_t>{42});
    CHECK(log.num_rounds() == 3);
    CHECK(log.peak_words() <= 8);
    for (const auto& r : log.rounds()) CHECK(r.label == "token");
}

TEST_CASE("run_rounds: store plus inbox over budget raises SpaceExceeded") {
    std::vector<MachineState> machines(2);
    RoundLog log(4, 10);
    MpcProgram flood = [](MachineId m, MachineState&, const std::vector<Message>&)
        -> std::vector<Message> {
        if (m == 0) return {Message{1, std::vector<int64_t>(16, 7)}};
        return {};
    };
    CHECK_THROWS_AS(run_rounds(machines, flood, 2, 4, log, "flood"), SpaceExceeded);
}

TEST_CASE("RoundLog: round cap and budget enforcement") {
    RoundLog log(10, 3);
    log.charge("a", 3, 1, 5, 5);
    CHECK_THROWS_AS(log.charge("a", 1, 1, 5, 5), RoundCapExceeded);
    RoundLog log2(10, 100);
    CHECK_THROWS_AS(log2.charge("big", 1, 1, 11, 11), SpaceExceeded);
}

TEST_CASE("RoundLog JSON export carries rounds and peaks") {
    RoundLog log(50, 100);
    log.charge("phase1", 2, 4, 30, 100);
    std::string js = log.to_json();
    CHECK(js.find("\"rounds\":2") != std::string::npos);
    CHECK(js.find("\"peak_words\":30") != std::string::npos);
    CHECK(js.find("phase1") != std::string::npos);
}

TEST_CASE("sort_and_group: contiguous keys, machine budget respected") {
    std::vector<KeyedRecord> recs;
    for (int i = 0; i < 40; ++i) recs.push_back({i % 5, {i, i, i}});
    RoundLog log(16, 100);
    SortedLayout layout = sort_and_group(recs, 16, 0.5, log);
    CHECK(layout.records.size() == 40);
    for (size_t i = 1; i < layout.records.size(); ++i)
        CHECK(layout.records[i - 1].key <= layout.records[i].key);
    // Same-key runs are contiguous by sortedness. Budget per machine:
    for (auto [a, b] : layout.machine_ranges) {
        int64_t words = 0;
        for (size_t i = a; i < b; ++i)
            words += static_cast<int64_t>(layout.records[i].words.size()) + 1;
        CHECK(words <= 16);
    }
    CHECK(log.num_rounds() == 2);  // ceil(1/0.5)
}

TEST_CASE("sort_and_group: oversized single record") {
    RoundLog log(4, 100);
    std::vector<KeyedRecord> recs{{0, {1, 2, 3, 4, 5}}};
    CHECK_THROWS_AS(sort_and_group(recs, 4, 0.5, log), SpaceExceeded);
}

TEST_CASE("collect_balls matches the BFS oracle") {
    Graph g = gen_gnp(80, 6, 9);
    RoundLog log(1'000'000, 100);
    for (int r : {0, 1, 2, 3}) {
        auto balls = collect_balls(g, r, 2, 1'000'000, log, true);
        for (NodeId v = 0; v < g.num_nodes(); ++v) CHECK(balls[v] == ball_oracle(g, v, r));
    }
}

TEST_CASE("collect_balls: strict mode raises BallTooLarge, grouped mode chunks") {
    Graph g = gen_clique_planted(33, 32, 1);  // one K_33
    RoundLog strict_log(16, 100);
    CHECK_THROWS_AS(collect_balls(g, 1, 2, 16, strict_log, true), BallTooLarge);
    RoundLog loose_log(16, 100);
    auto balls = collect_balls(g, 1, 2, 16, loose_log, false);
    CHECK(balls[0].size() == 33);
    CHECK(loose_log.peak_words() <= 16);  // chunked across a machine group
}

TEST_CASE("allocate_cluster_machines: group sizes and strictness") {
    std::vector<std::vector<NodeId>> clusters{{0, 1, 2}, {3, 4, 5, 6, 7, 8, 9, 10}};
    RoundLog log(8, 100);
    auto groups = allocate_cluster_machines(clusters, 2, 8, log, false);
    CHECK(groups[0] == 1);  // 6 words
    CHECK(groups[1] == 2);  // 16 words -> 2 machines
    RoundLog slog(8, 100);
    CHECK_THROWS_AS(allocate_cluster_machines(clusters, 2, 8, slog, true), SpaceExceeded);
}

TEST_CASE("charge_grouped never records a machine above budget") {
    RoundLog log(100, 500);
    charge_grouped(log, "stage", 2, 1000, 5000);
    CHECK(log.peak_words() <= 100);
    CHECK(log.num_rounds() > 2);  // gather overhead for the 10-machine group
}

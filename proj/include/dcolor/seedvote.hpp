#ifndef DCOLOR_SEEDVOTE_HPP
#define DCOLOR_SEEDVOTE_HPP

#include <cmath>
#include <cstdint>
#include <string>

#include "dcolor/errors.hpp"

namespace dcolor {

struct SeedVoteResult {
    uint64_t seed = 0;
    int happy = 0;        // units happy under the winning seed
    double mean = 0.0;    // exact mean happy count over the enumerated seeds
    int seed_bits = 0;    // seed width actually used (after escalation)
    int escalations = 0;
};

// Enumerates every seed in [0, 2^d), scoring each with `happy_count(seed)`
// (number of units whose happiness predicate holds when the procedure runs
// with that seed's coins). Returns the argmax, lowest seed on ties. The
// winner satisfies happy >= ceil(mean) by the averaging argument; this is
// asserted, not assumed.
template <typename HappyCount>
SeedVoteResult seed_vote(int d, HappyCount&& happy_count) {
    SeedVoteResult res;
    res.seed_bits = d;
    const uint64_t space = 1ull << d;
    int64_t total = 0;
    int best = -1;
    uint64_t best_seed = 0;
    for (uint64_t s = 0; s < space; ++s) {
        int h = happy_count(s);
        total += h;
        if (h > best) {
            best = h;
            best_seed = s;
        }
    }
    res.seed = best_seed;
    res.happy = best;
    res.mean = static_cast<double>(total) / static_cast<double>(space);
    if (static_cast<double>(res.happy) + 1e-9 < std::ceil(res.mean - 1e-9))
        throw InvariantViolated("seed_vote: argmax " + std::to_string(res.happy) +
                                " below ceil(mean) with mean " + std::to_string(res.mean));
    return res;
}

// Seed-vote with escalation: if the winner leaves more than
// (1 - target_fraction) * units unhappy, the seed width grows by `step` bits
// (fresh, wider seed space) up to d_cap. Returns the best result seen; the
// caller decides whether a shortfall is a StageFailed or handled by
// deferral.
template <typename HappyCount>
SeedVoteResult seed_vote_escalating(int d0, int d_cap, int step, int units,
                                    double target_fraction, HappyCount&& happy_count) {
    SeedVoteResult best;
    bool have = false;
    int escalations = 0;
    for (int d = d0; d <= d_cap; d += step) {
        SeedVoteResult r = seed_vote(d, happy_count);
        r.escalations = escalations;
        if (!have || r.happy > best.happy) best = r;
        have = true;
        if (static_cast<double>(best.happy) >=
            target_fraction * static_cast<double>(units) - 1e-9)
            break;
        ++escalations;
        if (step <= 0) break;
    }
    best.escalations = escalations;
    return best;
}

}  // namespace dcolor

#endif

#ifndef DCOLOR_KWISE_HPP
#define DCOLOR_KWISE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dcolor/errors.hpp"

namespace dcolor {

// Arithmetic in GF(2^w) for w in [1, 16], represented as w-bit polynomials
// over GF(2) reduced by a fixed irreducible polynomial per width.
class GF2 {
  public:
    explicit GF2(int w);
    int width() const { return w_; }
    uint32_t order() const { return 1u << w_; }
    uint32_t add(uint32_t a, uint32_t b) const { return a ^ b; }
    uint32_t mul(uint32_t a, uint32_t b) const;
    // Reduction polynomial (with the leading x^w term), e.g. 0x11B for w=8.
    uint32_t modulus() const { return mod_; }

  private:
    int w_;
    uint32_t mod_;
};

// Family of k-wise independent hash functions {0,1}^a -> {0,1}^b realized as
// degree-(k-1) polynomials over GF(2^w), w = max(a, b); outputs are the low
// b bits of the polynomial value. Seed length is exactly k*w bits: the k
// coefficients in little-endian coefficient order (constant term first).
class KWiseFamily {
  public:
    KWiseFamily(int k, int a, int b);

    int k() const { return k_; }
    int input_bits() const { return a_; }
    int output_bits() const { return b_; }
    int field_width() const { return field_.width(); }
    int seed_bits() const { return k_ * field_.width(); }

    // Evaluates h_seed(x). x must fit in input_bits; seed bits beyond
    // seed_bits() must be zero.
    uint32_t eval(uint64_t seed, uint32_t x) const;

    const GF2& field() const { return field_; }

  private:
    int k_, a_, b_;
    GF2 field_;
};

// Exhaustively checks k-wise independence of the family: over a uniformly
// random seed, the outputs at any k distinct inputs are independent and
// uniform on {0,1}^b. Enumerates every seed and every sorted k-tuple of
// distinct inputs (coordinate permutations of a uniform joint distribution
// are uniform, so sorted tuples suffice). Throws TooLargeToEnumerate when
// the total work exceeds work_guard.
bool verify_kwise(const KWiseFamily& fam, uint64_t work_guard = (1ull << 34));

// --- conditional expectations ---

enum class Direction { Minimize, Maximize };

struct CondExpResult {
    uint64_t seed = 0;
    double value = 0.0;       // q(seed)
    double expectation = 0.0; // exact E[q] over the full seed space (if computed)
    bool expectation_known = false;
    int phases = 0;
};

// Deterministically fixes a seed of `seed_bits` bits in ceil(seed_bits /
// chunk_bits) phases so that q(seed) <= E[q] (Minimize) or >= E[q]
// (Maximize). `cost` is called O(2^chunk_bits * phases + 2^seed_bits) times.
// For Minimize with nonnegative costs, a seed with q = 0 found during the
// scan is accepted immediately (0 <= E[q] holds for any nonnegative family).
// Throws TooLargeToEnumerate when 2^seed_bits exceeds the guard.
template <typename CostFn>
CondExpResult cond_expect_select(int seed_bits, int chunk_bits, Direction dir, CostFn&& cost,
                                 bool zero_certificate = true,
                                 uint64_t enumeration_guard = (1ull << 22));

// --- toy PRG ---

// Explicit epsilon-PRG table for m-bit outputs: 2^d rows, each an m-bit
// string; for every registered statistical test T (a set of m-bit strings),
// |Pr_table[T] - Pr_uniform[T]| <= eps. Built by deterministic search and
// verified exhaustively; throws NoTableFound if no table of allowed size
// passes.
struct ToyPrg {
    int m = 0;        // output bits
    int d = 0;        // seed bits
    double eps = 0.0;
    std::vector<uint32_t> table;  // 2^d rows

    uint32_t expand(uint32_t seed) const { return table[seed]; }
};

// tests: each test is the characteristic vector (size 2^m bitset as bytes) of
// a subset of {0,1}^m. Seed length starts at d = ceil(log2(ln(2*#tests) /
// (2 eps^2))) and doubles the table (d += 1) up to d_max while verification
// fails.
ToyPrg build_toy_prg(int m, double eps, const std::vector<std::vector<uint8_t>>& tests,
                     int d_max = 20);

// Binary serialization: header (m, d, eps as fixed point micro-units,
// little-endian u32 each) followed by 2^d rows of ceil(m/8) bytes.
std::vector<uint8_t> serialize_toy_prg(const ToyPrg& prg);
ToyPrg deserialize_toy_prg(const std::vector<uint8_t>& bytes);

// --- coin sources ---

// A CoinSource exposes an unbounded deterministic bit stream per unit id,
// addressed by (id, idx, seed). Equal ids always see equal streams under the
// same seed, regardless of which machine evaluates them.
class CoinSource {
  public:
    virtual ~CoinSource() = default;
    virtual int seed_bits() const = 0;
    virtual int bit(uint64_t id, uint32_t idx, uint64_t seed) const = 0;
    // Convenience: reads `count` bits starting at idx as a big-endian value.
    uint64_t bits(uint64_t id, uint32_t idx, int count, uint64_t seed) const;
};

// Coin stream backed by a k-wise family: bit(id, idx, seed) =
// eval_hash(seed, pack(id, idx)) & 1. Seed length is the family's seed
// length, so k and the field width bound the usable id/idx ranges.
class KWiseCoinSource : public CoinSource {
  public:
    // id uses the high input bits, idx the low idx_bits bits.
    KWiseCoinSource(int k, int input_bits, int idx_bits);
    int seed_bits() const override { return fam_.seed_bits(); }
    int bit(uint64_t id, uint32_t idx, uint64_t seed) const override;
    const KWiseFamily& family() const { return fam_; }

  private:
    KWiseFamily fam_;
    int idx_bits_;
};

// Pipeline default: splitmix64-based PRF keyed by a short seed. No
// independence guarantee is claimed; vote optimality comes from the argmax
// inequality, not from fooling.
class PrfCoinSource : public CoinSource {
  public:
    explicit PrfCoinSource(int seed_bits) : seed_bits_(seed_bits) {}
    int seed_bits() const override { return seed_bits_; }
    int bit(uint64_t id, uint32_t idx, uint64_t seed) const override;

  private:
    int seed_bits_;
};

uint64_t splitmix64(uint64_t x);

// --- template implementation ---

template <typename CostFn>
CondExpResult cond_expect_select(int seed_bits, int chunk_bits, Direction dir, CostFn&& cost,
                                 bool zero_certificate, uint64_t enumeration_guard) {
    CondExpResult res;
    const uint64_t space = 1ull << seed_bits;
    if (space > enumeration_guard)
        throw TooLargeToEnumerate("cond_expect_select: 2^" + std::to_string(seed_bits) +
                                  " seeds exceeds guard");
    if (chunk_bits <= 0) chunk_bits = seed_bits;

    if (zero_certificate && dir == Direction::Minimize) {
        // Deterministic scan; the first zero-cost seed certifies optimality
        // against the mean of a nonnegative cost.
        for (uint64_t s = 0; s < space; ++s) {
            double q = cost(s);
            if (q == 0.0) {
                res.seed = s;
                res.value = 0.0;
                res.phases = 1;
                return res;
            }
        }
        // fall through to the exact chunked method
    }

    // Chunked fixing with exact completion enumeration. Chunks are taken from
    // the low bits upward; phase p fixes bits [p*chunk, (p+1)*chunk).
    uint64_t fixed = 0;
    int fixed_bits = 0;
    int phases = 0;
    double expectation = 0.0;
    bool have_expectation = false;
    while (fixed_bits < seed_bits) {
        int take = chunk_bits;
        if (fixed_bits + take > seed_bits) take = seed_bits - fixed_bits;
        int rest_bits = seed_bits - fixed_bits - take;
        uint64_t best_chunk = 0;
        double best_mean = 0.0;
        bool first = true;
        double phase_mean_total = 0.0;
        for (uint64_t c = 0; c < (1ull << take); ++c) {
            double sum = 0.0;
            for (uint64_t r = 0; r < (1ull << rest_bits); ++r) {
                uint64_t s = fixed | (c << fixed_bits) | (r << (fixed_bits + take));
                sum += cost(s);
            }
            double mean = sum / static_cast<double>(1ull << rest_bits);
            phase_mean_total += mean;
            bool better = dir == Direction::Minimize ? (mean < best_mean) : (mean > best_mean);
            if (first || better) {
                best_chunk = c;
                best_mean = mean;
                first = false;
            }
        }
        if (!have_expectation) {
            // Mean over the first phase's candidates is the full E[q].
            expectation = phase_mean_total / static_cast<double>(1ull << take);
            have_expectation = true;
        }
        fixed |= best_chunk << fixed_bits;
        fixed_bits += take;
        ++phases;
    }
    res.seed = fixed;
    res.value = cost(fixed);
    res.expectation = expectation;
    res.expectation_known = have_expectation;
    res.phases = phases;
    return res;
}

}  // namespace dcolor

#endif

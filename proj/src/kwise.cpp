#include "dcolor/kwise.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "dcolor/errors.hpp"

namespace dcolor {

namespace {
// One fixed irreducible polynomial per field width (leading term included).
// Standard low-weight choices; e.g. w=8 is x^8+x^4+x^3+x+1 (0x11B).
constexpr uint32_t kIrreducible[17] = {
    0,
    0x3,      // w=1:  x + 1
    0x7,      // w=2:  x^2 + x + 1
    0xB,      // w=3:  x^3 + x + 1
    0x13,     // w=4:  x^4 + x + 1
    0x25,     // w=5:  x^5 + x^2 + 1
    0x43,     // w=6:  x^6 + x + 1
    0x83,     // w=7:  x^7 + x + 1
    0x11B,    // w=8:  x^8 + x^4 + x^3 + x + 1
    0x203,    // w=9:  x^9 + x + 1
    0x409,    // w=10: x^10 + x^3 + 1
    0x805,    // w=11: x^11 + x^2 + 1
    0x1053,   // w=12: x^12 + x^6 + x^4 + x + 1
    0x201B,   // w=13: x^13 + x^4 + x^3 + x + 1
    0x4443,   // w=14: x^14 + x^10 + x^6 + x + 1
    0x8003,   // w=15: x^15 + x + 1
    0x1100B,  // w=16: x^16 + x^12 + x^3 + x + 1
};
}  // namespace

GF2::GF2(int w) : w_(w) {
    if (w < 1 || w > 16) throw BadFieldWidth("GF(2^w) supported for w in [1,16], got " +
                                             std::to_string(w));
    mod_ = kIrreducible[w];
}

uint32_t GF2::mul(uint32_t a, uint32_t b) const {
    // Carry-less multiply then reduce.
    uint64_t acc = 0;
    uint64_t aa = a;
    while (b) {
        if (b & 1) acc ^= aa;
        aa <<= 1;
        b >>= 1;
    }
    // Reduce the (2w-1)-bit product.
    for (int bit = 2 * w_ - 2; bit >= w_; --bit) {
        if (acc >> bit & 1) acc ^= static_cast<uint64_t>(mod_) << (bit - w_);
    }
    return static_cast<uint32_t>(acc);
}

KWiseFamily::KWiseFamily(int k, int a, int b) : k_(k), a_(a), b_(b), field_(std::max(a, b)) {
    if (k < 1) throw BadFieldWidth("k must be >= 1");
    if (a < 1 || b < 1) throw BadFieldWidth("input/output bits must be >= 1");
}

uint32_t KWiseFamily::eval(uint64_t seed, uint32_t x) const {
    const int w = field_.width();
    const uint32_t mask = (w == 32) ? ~0u : ((1u << w) - 1);
    // Horner evaluation, highest coefficient first.
    uint32_t val = 0;
    for (int i = k_ - 1; i >= 0; --i) {
        uint32_t coeff = static_cast<uint32_t>(seed >> (i * w)) & mask;
        val = field_.mul(val, x) ^ coeff;
    }
    return val & ((b_ >= 32) ? ~0u : ((1u << b_) - 1));
}

bool verify_kwise(const KWiseFamily& fam, uint64_t work_guard) {
    const int k = fam.k();
    const int a = fam.input_bits();
    const int b = fam.output_bits();
    const uint64_t seeds = 1ull << fam.seed_bits();
    const uint64_t inputs = 1ull << a;
    // Number of sorted k-tuples of distinct inputs, times seeds, is the work.
    double tuples = 1.0;
    for (int i = 0; i < k; ++i) tuples *= static_cast<double>(inputs - i) / (i + 1);
    if (tuples * static_cast<double>(seeds) > static_cast<double>(work_guard))
        throw TooLargeToEnumerate("verify_kwise: work beyond guard");

    // Precompute outputs for every (seed, input).
    std::vector<uint8_t> out(seeds * inputs);
    for (uint64_t s = 0; s < seeds; ++s)
        for (uint64_t x = 0; x < inputs; ++x)
            out[s * inputs + x] = static_cast<uint8_t>(fam.eval(s, static_cast<uint32_t>(x)));

    const uint64_t cells = 1ull << (static_cast<uint64_t>(k) * b);
    std::vector<uint64_t> hist(cells);
    const uint64_t expect = seeds / cells;
    if (seeds % cells != 0) return false;  // uniformity impossible

    // Enumerate sorted k-subsets of inputs.
    std::vector<uint32_t> tup(k);
    for (int i = 0; i < k; ++i) tup[i] = static_cast<uint32_t>(i);
    auto advance = [&]() -> bool {
        int i = k - 1;
        while (i >= 0 && tup[i] == inputs - static_cast<uint64_t>(k - i)) --i;
        if (i < 0) return false;
        ++tup[i];
        for (int j = i + 1; j < k; ++j) tup[j] = tup[j - 1] + 1;
        return true;
    };
    while (true) {
        std::fill(hist.begin(), hist.end(), 0);
        for (uint64_t s = 0; s < seeds; ++s) {
            const uint8_t* row = &out[s * inputs];
            uint64_t key = 0;
            for (int i = 0; i < k; ++i) key = (key << b) | row[tup[i]];
            ++hist[key];
        }
        for (uint64_t c = 0; c < cells; ++c)
            if (hist[c] != expect) return false;
        if (!advance()) break;
    }
    return true;
}

// --- toy PRG ---

namespace {
double uniform_mass(const std::vector<uint8_t>& test, int m) {
    uint64_t total = 1ull << m;
    uint64_t hit = 0;
    for (uint64_t x = 0; x < total; ++x)
        if (test[x]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(total);
}
}  // namespace

ToyPrg build_toy_prg(int m, double eps, const std::vector<std::vector<uint8_t>>& tests,
                     int d_max) {
    if (m < 1 || m > 20) throw TooLargeToEnumerate("toy PRG supports m in [1,20]");
    for (const auto& t : tests)
        if (t.size() != (1ull << m))
            throw ParseError("test characteristic vector has wrong size");
    std::vector<double> target(tests.size());
    for (size_t i = 0; i < tests.size(); ++i) target[i] = uniform_mass(tests[i], m);

    int d0 = 1;
    if (!tests.empty() && eps > 0) {
        double want = std::log(2.0 * static_cast<double>(tests.size())) / (2.0 * eps * eps);
        d0 = std::max(1, static_cast<int>(std::ceil(std::log2(std::max(1.0, want)))));
    }
    const uint32_t out_mask = (m == 32) ? ~0u : ((1u << m) - 1);
    for (int d = d0; d <= d_max; ++d) {
        uint64_t rows = 1ull << d;
        // Deterministic sequence of candidate tables.
        for (uint64_t attempt = 0; attempt < 64; ++attempt) {
            ToyPrg prg;
            prg.m = m;
            prg.d = d;
            prg.eps = eps;
            prg.table.resize(rows);
            for (uint64_t i = 0; i < rows; ++i)
                prg.table[i] =
                    static_cast<uint32_t>(splitmix64((attempt << 32) ^ i ^ 0x9e3779b9ull)) &
                    out_mask;
            bool ok = true;
            for (size_t t = 0; t < tests.size() && ok; ++t) {
                uint64_t hit = 0;
                for (uint64_t i = 0; i < rows; ++i)
                    if (tests[t][prg.table[i]]) ++hit;
                double mass = static_cast<double>(hit) / static_cast<double>(rows);
                if (std::abs(mass - target[t]) > eps) ok = false;
            }
            if (ok) return prg;
        }
    }
    throw NoTableFound("no table of size <= 2^" + std::to_string(d_max) + " passes all tests");
}

std::vector<uint8_t> serialize_toy_prg(const ToyPrg& prg) {
    auto put_u32 = [](std::vector<uint8_t>& out, uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    };
    std::vector<uint8_t> out;
    put_u32(out, static_cast<uint32_t>(prg.m));
    put_u32(out, static_cast<uint32_t>(prg.d));
    put_u32(out, static_cast<uint32_t>(std::llround(prg.eps * 1e6)));
    const int row_bytes = (prg.m + 7) / 8;
    for (uint32_t row : prg.table)
        for (int i = 0; i < row_bytes; ++i) out.push_back(static_cast<uint8_t>(row >> (8 * i)));
    return out;
}

ToyPrg deserialize_toy_prg(const std::vector<uint8_t>& bytes) {
    auto get_u32 = [&](size_t off) {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes.at(off + i)) << (8 * i);
        return v;
    };
    ToyPrg prg;
    prg.m = static_cast<int>(get_u32(0));
    prg.d = static_cast<int>(get_u32(4));
    prg.eps = static_cast<double>(get_u32(8)) / 1e6;
    const int row_bytes = (prg.m + 7) / 8;
    const uint64_t rows = 1ull << prg.d;
    if (bytes.size() != 12 + rows * row_bytes) throw ParseError("toy PRG blob size mismatch");
    prg.table.resize(rows);
    for (uint64_t r = 0; r < rows; ++r) {
        uint32_t v = 0;
        for (int i = 0; i < row_bytes; ++i)
            v |= static_cast<uint32_t>(bytes[12 + r * row_bytes + i]) << (8 * i);
        prg.table[r] = v;
    }
    return prg;
}

// --- coin sources ---

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

uint64_t CoinSource::bits(uint64_t id, uint32_t idx, int count, uint64_t seed) const {
    uint64_t v = 0;
    for (int i = 0; i < count; ++i) v = (v << 1) | static_cast<uint64_t>(bit(id, idx + i, seed));
    return v;
}

KWiseCoinSource::KWiseCoinSource(int k, int input_bits, int idx_bits)
    : fam_(k, input_bits, 1), idx_bits_(idx_bits) {
    if (idx_bits >= input_bits) throw BadFieldWidth("idx bits must leave room for the id");
}

int KWiseCoinSource::bit(uint64_t id, uint32_t idx, uint64_t seed) const {
    uint64_t x = (id << idx_bits_) | (idx & ((1u << idx_bits_) - 1));
    return static_cast<int>(fam_.eval(seed, static_cast<uint32_t>(x)) & 1);
}

int PrfCoinSource::bit(uint64_t id, uint32_t idx, uint64_t seed) const {
    // Bits are drawn in blocks of 64 per (id, block) pair.
    uint64_t block = idx >> 6;
    uint64_t word = splitmix64(seed * 0x100000001b3ull ^ splitmix64(id ^ (block << 40)));
    return static_cast<int>(word >> (idx & 63) & 1);
}

}  // namespace dcolor

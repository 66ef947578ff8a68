#include "spadrng/extraction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace spadrng {

namespace {

// One round over non-overlapping pairs of `s`. A trailing odd bit is dropped.
// Appends: von Neumann bits of differing pairs to *vn, the pairwise XOR
// sequence to *u, the shared bit of equal pairs to *v. Any sink may be null.
void peres_level(const BitVector& s, BitVector* vn, BitVector* u, BitVector* v) {
    const uint64_t n_pairs = s.size() / 2;
    const std::vector<uint64_t>& w = s.words();
    for (uint64_t wi = 0; wi * 32 < n_pairs; ++wi) {
        const unsigned pairs_here =
            static_cast<unsigned>(std::min<uint64_t>(32, n_pairs - wi * 32));
        const uint64_t word = w[wi];
        const uint32_t pairmask =
            pairs_here == 32 ? 0xFFFFFFFFu : ((uint32_t{1} << pairs_here) - 1);
        // First bits of each pair in e, second bits in o.
        const uint32_t e = static_cast<uint32_t>(extract_even_bits(word));
        const uint32_t o = static_cast<uint32_t>(extract_even_bits(word >> 1));
        const uint32_t diff = (e ^ o) & pairmask;
        const uint32_t same = ~diff & pairmask;
        if (vn && diff)
            vn->append_bits(compress_bits32(e, diff),
                            static_cast<unsigned>(std::popcount(diff)));
        if (u) u->append_bits(diff, pairs_here);
        if (v && same)
            v->append_bits(compress_bits32(e, same),
                           static_cast<unsigned>(std::popcount(same)));
    }
}

void peres_rec(BitVector s, unsigned depth, unsigned max_depth, BitVector& out,
               unsigned& deepest) {
    if (depth >= max_depth || s.size() < 2) return;
    deepest = std::max(deepest, depth + 1);
    BitVector u, v;
    u.reserve_bits(s.size() / 2);
    peres_level(s, &out, &u, &v);
    s.release();
    peres_rec(std::move(u), depth + 1, max_depth, out, deepest);
    peres_rec(std::move(v), depth + 1, max_depth, out, deepest);
}

} // namespace

BitVector von_neumann(const BitVector& in, ExtractorStats* stats) {
    BitVector out;
    out.reserve_bits(in.size() / 4 + 64);
    peres_level(in, &out, nullptr, nullptr);
    if (stats) {
        *stats = {};
        stats->n_in = in.size();
        stats->n_out = out.size();
        stats->depth_reached = in.size() >= 2 ? 1 : 0;
        stats->from_vn = out.size();
    }
    return out;
}

BitVector peres(const BitVector& in, unsigned max_depth, ExtractorStats* stats) {
    BitVector out;
    unsigned deepest = 0;
    uint64_t from_vn = 0, from_u = 0, from_v = 0;
    if (max_depth >= 1 && in.size() >= 2) {
        deepest = 1;
        BitVector u, v;
        u.reserve_bits(in.size() / 2);
        peres_level(in, &out, &u, &v);
        from_vn = out.size();
        uint64_t mark = out.size();
        peres_rec(std::move(u), 1, max_depth, out, deepest);
        from_u = out.size() - mark;
        mark = out.size();
        peres_rec(std::move(v), 1, max_depth, out, deepest);
        from_v = out.size() - mark;
    }
    if (stats) {
        *stats = {};
        stats->n_in = in.size();
        stats->n_out = out.size();
        stats->depth_reached = deepest;
        stats->from_vn = from_vn;
        stats->from_u = from_u;
        stats->from_v = from_v;
    }
    return out;
}

BitVector zhou_bruck(const SymbolStream& in, unsigned max_depth,
                     ExtractorStats* stats) {
    if (in.alphabet < 2)
        throw std::invalid_argument("zhou_bruck: alphabet must be at least 2");
    unsigned b = 1;
    while ((uint64_t{1} << b) < in.alphabet) ++b;
    for (uint16_t sym : in.symbols)
        if (sym >= in.alphabet)
            throw std::invalid_argument("zhou_bruck: symbol value outside alphabet");

    ExtractorStats agg;
    agg.n_in = static_cast<uint64_t>(b) * in.symbols.size();
    BitVector out;

    // Position 1 is the most significant bit of each symbol. Conditioning a
    // bit on its prefix makes every partition an i.i.d. coin, so the binary
    // extractor applies per partition.
    for (unsigned pos = 1; pos <= b; ++pos) {
        const unsigned prefix_bits = pos - 1;
        std::vector<BitVector> groups(size_t{1} << prefix_bits);
        for (uint16_t sym : in.symbols) {
            const uint32_t prefix = static_cast<uint32_t>(sym) >> (b - prefix_bits);
            groups[prefix].push_back((sym >> (b - pos)) & 1u);
        }
        for (BitVector& g : groups) {
            ExtractorStats st;
            BitVector ext = peres(g, max_depth, &st);
            g.release();
            out.append(ext);
            agg.depth_reached = std::max(agg.depth_reached, st.depth_reached);
            agg.from_vn += st.from_vn;
            agg.from_u += st.from_u;
            agg.from_v += st.from_v;
        }
    }
    agg.n_out = out.size();
    if (stats) *stats = agg;
    return out;
}

BitVector protocol_diff(const PhotonEventStream& ev) {
    BitVector out;
    const std::vector<uint64_t>& t = ev.t;
    if (t.size() >= 3) {
        out.reserve_bits(t.size() / 2);
        for (size_t k = 0; 2 * k + 2 < t.size(); ++k) {
            const uint64_t d1 = t[2 * k + 1] - t[2 * k];
            const uint64_t d2 = t[2 * k + 2] - t[2 * k + 1];
            if (d1 != d2) out.push_back(d1 < d2);
        }
    }
    return out;
}

BitVector protocol_odeven(const PhotonEventStream& ev, uint64_t interval_ticks) {
    if (interval_ticks == 0)
        throw std::invalid_argument("protocol_odeven: interval must be positive");
    const uint64_t n_bits = ev.tick_count / interval_ticks;
    BitVector out = BitVector::zeros(n_bits);
    size_t idx = 0;
    for (uint64_t j = 0; j < n_bits; ++j) {
        const uint64_t hi = (j + 1) * interval_ticks;
        uint64_t c = 0;
        while (idx < ev.t.size() && ev.t[idx] < hi) {
            ++idx;
            ++c;
        }
        if (c & 1) out.set(j);
    }
    return out;
}

double odeven_bias(double lambda_tau) {
    if (!(lambda_tau >= 0.0))
        throw std::invalid_argument("odeven_bias: lambda_tau must be nonnegative");
    return 0.5 * std::exp(-2.0 * lambda_tau);
}

} // namespace spadrng

#pragma once

#include <bit>
#include <cstdint>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grn/rng.hpp"

namespace grn {

using Word32 = std::uint32_t;

/// Number of complementary bits between two 32-bit signatures. Higher means
/// a stronger bind: a protein matches a site through complementarity.
inline int match_degree(Word32 a, Word32 b) { return std::popcount(a ^ b); }

/// Variable-length binary string, the evolvable unit. Bits are indexed left
/// to right; 32-bit windows are read most-significant bit first.
class BitGenome {
  public:
    BitGenome() = default;

    explicit BitGenome(std::size_t length_bits) : bits_(length_bits, 0) {
        if (length_bits == 0)
            throw std::invalid_argument("BitGenome: length must be positive");
    }

    explicit BitGenome(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
        if (bits_.empty())
            throw std::invalid_argument("BitGenome: length must be positive");
        for (auto b : bits_)
            if (b > 1)
                throw std::invalid_argument("BitGenome: bits must be 0 or 1");
    }

    std::size_t size() const { return bits_.size(); }

    std::uint8_t bit(std::size_t i) const { return bits_[i]; }
    void set_bit(std::size_t i, std::uint8_t v) { bits_[i] = v ? 1 : 0; }
    void flip_bit(std::size_t i) { bits_[i] ^= 1; }

    /// 32-bit window starting at bit `pos`, first bit into the MSB.
    Word32 word32_at(std::size_t pos) const {
        Word32 w = 0;
        for (std::size_t k = 0; k < 32; ++k)
            w = (w << 1) | bits_[pos + k];
        return w;
    }

    /// Appends a copy of the current content, flipping each copied bit with
    /// probability `mutation_rate` (one duplication-and-mutation event).
    void duplicate_with_mutation(double mutation_rate, Rng& rng) {
        const std::size_t n = bits_.size();
        bits_.reserve(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint8_t b = bits_[i];
            if (rng.bernoulli(mutation_rate))
                b ^= 1;
            bits_.push_back(b);
        }
    }

    bool operator==(const BitGenome& o) const { return bits_ == o.bits_; }

  private:
    std::vector<std::uint8_t> bits_;
};

enum class GeneKind { TF, P };

/// Typed genome region found by the promoter scan. Signatures are read back
/// from fixed offsets around promoter_start; the protein signature is the
/// majority-vote condensation of the 160-bit gene body.
struct Gene {
    GeneKind kind = GeneKind::TF;
    std::size_t promoter_start = 0;
    Word32 enhancer_sig = 0;
    Word32 inhibitor_sig = 0;
    Word32 protein_sig = 0;
};

constexpr std::size_t kPromoterBits = 32;
constexpr std::size_t kGeneBodyBits = 160;
constexpr std::size_t kUpstreamBits = 64;   // enhancer + inhibitor sites
constexpr std::size_t kGeneSpanBits = kPromoterBits + kGeneBodyBits;

/// Condenses a 160-bit gene body into a 32-bit protein signature: output bit
/// k is the majority vote over body bits {k, k+32, k+64, k+96, k+128}.
inline Word32 synthesize_protein(const BitGenome& genome, std::size_t body_start) {
    if (body_start + kGeneBodyBits > genome.size())
        throw std::invalid_argument("synthesize_protein: body exceeds genome");
    Word32 w = 0;
    for (std::size_t k = 0; k < 32; ++k) {
        int ones = 0;
        for (std::size_t rep = 0; rep < 5; ++rep)
            ones += genome.bit(body_start + k + 32 * rep);
        w = (w << 1) | static_cast<Word32>(ones >= 3);
    }
    return w;
}

/// Overload for a free-standing 160-bit body.
inline Word32 synthesize_protein(const std::vector<std::uint8_t>& body) {
    if (body.size() != kGeneBodyBits)
        throw std::invalid_argument("synthesize_protein: body must be 160 bits");
    Word32 w = 0;
    for (std::size_t k = 0; k < 32; ++k) {
        int ones = 0;
        for (std::size_t rep = 0; rep < 5; ++rep)
            ones += body[k + 32 * rep];
        w = (w << 1) | static_cast<Word32>(ones >= 3);
    }
    return w;
}

/// Scans the genome left to right at 1-bit granularity for promoter windows.
/// A promoter is a 32-bit window whose final 8 bits are all 0 (TF gene) or
/// all 1 (P gene); it is accepted only with 64 bits of upstream room for the
/// regulatory sites and 160 bits of downstream room for the gene body.
/// Accepted gene bodies do not overlap: scanning resumes past the body.
inline std::vector<Gene> scan_genes(const BitGenome& genome) {
    std::vector<Gene> genes;
    const std::size_t n = genome.size();
    if (n < kUpstreamBits + kGeneSpanBits)
        return genes;
    std::size_t pos = kUpstreamBits;
    const std::size_t last_start = n - kGeneSpanBits;
    while (pos <= last_start) {
        const Word32 window = genome.word32_at(pos);
        const Word32 tail = window & 0xffu;
        GeneKind kind;
        if (tail == 0x00u)
            kind = GeneKind::TF;
        else if (tail == 0xffu)
            kind = GeneKind::P;
        else {
            ++pos;
            continue;
        }
        Gene g;
        g.kind = kind;
        g.promoter_start = pos;
        g.enhancer_sig = genome.word32_at(pos - 64);
        g.inhibitor_sig = genome.word32_at(pos - 32);
        g.protein_sig = synthesize_protein(genome, pos + kPromoterBits);
        genes.push_back(g);
        pos += kGeneSpanBits;
    }
    return genes;
}

/// Uniform random genome of at least 256 bits.
inline BitGenome random_init(std::size_t length_bits, Rng& rng) {
    if (length_bits < 256)
        throw std::invalid_argument("random_init: length_bits must be >= 256");
    BitGenome g(length_bits);
    for (std::size_t i = 0; i < length_bits; ++i)
        g.set_bit(i, rng.bernoulli(0.5));
    return g;
}

/// Duplication-and-mutation initialization: a random 32-bit seed word is
/// doubled `duplication_events` times, mutating each appended copy per bit.
/// The result has exactly 32 * 2^duplication_events bits.
inline BitGenome dm_init(std::size_t duplication_events, double mutation_rate, Rng& rng) {
    if (duplication_events < 1)
        throw std::invalid_argument("dm_init: duplication_events must be >= 1");
    if (mutation_rate < 0.0 || mutation_rate > 1.0)
        throw std::invalid_argument("dm_init: mutation_rate must be in [0,1]");
    BitGenome g(32);
    for (std::size_t i = 0; i < 32; ++i)
        g.set_bit(i, rng.bernoulli(0.5));
    for (std::size_t d = 0; d < duplication_events; ++d)
        g.duplicate_with_mutation(mutation_rate, rng);
    return g;
}

struct MutationResult {
    BitGenome genome;
    std::size_t flips = 0;
};

/// Independent per-bit flip with the given probability.
inline MutationResult mutate(const BitGenome& genome, double rate, Rng& rng) {
    if (rate < 0.0 || rate > 1.0)
        throw std::invalid_argument("mutate: rate must be in [0,1]");
    MutationResult out{genome, 0};
    for (std::size_t i = 0; i < genome.size(); ++i) {
        if (rng.bernoulli(rate)) {
            out.genome.flip_bit(i);
            ++out.flips;
        }
    }
    return out;
}

// --- text serialization ----------------------------------------------------
//
// Line 1: "grn-genome v1 <length_bits>"
// Line 2: lowercase hex, most-significant bit of each digit first; trailing
//         bits of the final digit are zero-padded and ignored on load.

inline std::string genome_to_text(const BitGenome& genome) {
    std::string out = "grn-genome v1 " + std::to_string(genome.size()) + "\n";
    static const char* digits = "0123456789abcdef";
    const std::size_t n = genome.size();
    for (std::size_t i = 0; i < n; i += 4) {
        unsigned v = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            v <<= 1;
            if (i + k < n)
                v |= genome.bit(i + k);
        }
        out += digits[v];
    }
    out += '\n';
    return out;
}

inline BitGenome genome_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string magic, version;
    std::size_t length = 0;
    if (!(in >> magic >> version >> length) || magic != "grn-genome" || version != "v1")
        throw std::runtime_error("genome_from_text: bad header");
    if (length == 0)
        throw std::runtime_error("genome_from_text: zero length");
    std::string hex;
    if (!(in >> hex))
        throw std::runtime_error("genome_from_text: missing hex payload");
    const std::size_t expect_digits = (length + 3) / 4;
    if (hex.size() != expect_digits)
        throw std::runtime_error("genome_from_text: payload length mismatch");
    std::vector<std::uint8_t> bits(length, 0);
    for (std::size_t d = 0; d < hex.size(); ++d) {
        const char c = hex[d];
        unsigned v = 0;
        if (c >= '0' && c <= '9')
            v = static_cast<unsigned>(c - '0');
        else if (c >= 'a' && c <= 'f')
            v = static_cast<unsigned>(c - 'a') + 10;
        else
            throw std::runtime_error("genome_from_text: invalid hex digit");
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t i = 4 * d + k;
            if (i < length)
                bits[i] = (v >> (3 - k)) & 1u;
        }
    }
    return BitGenome(std::move(bits));
}

} // namespace grn

#pragma once

#include "grn/genome.hpp"

namespace fixtures {

// Genome with exactly one TF gene (promoter at 64) and one P gene (promoter
// at 320). Alternating filler bits cannot form an 8-run, so only the two
// planted promoter words are found. The single P gene's concentration is
// pinned at 1.0 by the independent normalization, which makes controllers
// built from this genome fully predictable.
inline grn::BitGenome single_p_genome() {
    // layout: 64 site bits | TF promoter | 160-bit body | 64 site bits |
    //         P promoter | 160-bit body | 32 spare bits
    grn::BitGenome g(64 + 192 + 64 + 192 + 32);
    for (std::size_t i = 0; i < g.size(); ++i)
        g.set_bit(i, i % 2);
    const auto put_word = [&](std::size_t pos, grn::Word32 w) {
        for (std::size_t k = 0; k < 32; ++k)
            g.set_bit(pos + k, (w >> (31 - k)) & 1u);
    };
    put_word(64, 0xaabbcc00u);            // TF promoter
    put_word(64 + 192 + 64, 0x112234ffu); // P promoter
    return g;
}

} // namespace fixtures

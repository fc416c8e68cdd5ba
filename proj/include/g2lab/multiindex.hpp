#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace g2lab {

/// Strictly increasing multi-indices are stored as bitmasks: bit i set means
/// the coordinate index i participates. Degree = popcount.
using Mask = std::uint32_t;

namespace mask {

inline int degree(Mask m) { return std::popcount(m); }

inline bool disjoint(Mask a, Mask b) { return (a & b) == 0; }

/// Sign of sorting the concatenation (A, B) of two increasing index lists,
/// i.e. the sign of e^A ^ e^B relative to e^{A|B}.
inline int merge_sign(Mask a, Mask b) {
    int inversions = 0;
    Mask bb = b;
    while (bb) {
        int j = std::countr_zero(bb);
        inversions += std::popcount(a >> (j + 1));
        bb &= bb - 1;
    }
    return (inversions & 1) ? -1 : +1;
}

/// Sign of e^i ^ e^I (i not in I).
inline int insert_sign(int i, Mask I) {
    return (std::popcount(I & ((Mask{1} << i) - 1)) & 1) ? -1 : +1;
}

/// Position (0-based) of index i within the increasing list I.
inline int rank_in(int i, Mask I) { return std::popcount(I & ((Mask{1} << i) - 1)); }

/// All increasing multi-indices of the given degree on dim coordinates,
/// in increasing bitmask order.
inline std::vector<Mask> all_of_degree(int dim, int k) {
    std::vector<Mask> out;
    for (Mask m = 0; m < (Mask{1} << dim); ++m)
        if (std::popcount(m) == k) out.push_back(m);
    return out;
}

inline std::vector<int> indices(Mask m) {
    std::vector<int> out;
    while (m) {
        out.push_back(std::countr_zero(m));
        m &= m - 1;
    }
    return out;
}

inline Mask full(int dim) { return (Mask{1} << dim) - 1; }

} // namespace mask
} // namespace g2lab

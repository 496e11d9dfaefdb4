#pragma once

// Reference superpositions for ratio 1, beta 0: lower-level amplitudes
// sign * sqrt(num/den) on psi_-J, psi_-J+2, ..., psi_J.

#include <vector>

namespace fstirap::ref {

struct Radical {
    int sign;
    int num;
    int den;
};

struct ReferenceTransition {
    int j;
    int jp;
    std::vector<Radical> amplitudes;
};

inline const std::vector<ReferenceTransition>& reference_transitions()
{
    static const std::vector<ReferenceTransition> table{
        {1, 0, {{+1, 1, 2}, {-1, 1, 2}}},
        {1, 1, {{+1, 1, 2}, {+1, 1, 2}}},
        {2, 1, {{+1, 1, 8}, {-1, 3, 4}, {+1, 1, 8}}},
        {2, 2, {{+1, 3, 8}, {+1, 1, 4}, {+1, 3, 8}}},
        {3, 2, {{+1, 1, 32}, {-1, 15, 32}, {+1, 15, 32}, {-1, 1, 32}}},
        {3, 3, {{+1, 5, 16}, {+1, 3, 16}, {+1, 3, 16}, {+1, 5, 16}}},
        {4, 3, {{+1, 1, 128}, {-1, 7, 32}, {+1, 35, 64}, {-1, 7, 32}, {+1, 1, 128}}},
        {4, 4, {{+1, 35, 128}, {+1, 5, 32}, {+1, 9, 64}, {+1, 5, 32}, {+1, 35, 128}}},
    };
    return table;
}

} // namespace fstirap::ref

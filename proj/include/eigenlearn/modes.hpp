#pragma once

#include <cstdint>
#include <string>

namespace eigenlearn {

// Identity of one eigenfunction: which family it belongs to, its
// frequency/level k, and the family-specific payload.
struct ModeLabel {
    enum class Family { CircleConstant, CircleCos, CircleSin, HypercubeParity, SphereHarmonic, Empirical };

    Family family = Family::Empirical;
    int k = 0;
    std::uint32_t subset = 0;  // HypercubeParity: bitmask of the sensitive coordinates, popcount == k
    int harmonic = 0;          // SphereHarmonic: index within the degenerate level

    std::string to_string() const;
};

std::string family_name(ModeLabel::Family family);

}  // namespace eigenlearn

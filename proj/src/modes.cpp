#include "eigenlearn/modes.hpp"

namespace eigenlearn {

std::string family_name(ModeLabel::Family family) {
    switch (family) {
        case ModeLabel::Family::CircleConstant: return "circle-constant";
        case ModeLabel::Family::CircleCos: return "circle-cos";
        case ModeLabel::Family::CircleSin: return "circle-sin";
        case ModeLabel::Family::HypercubeParity: return "hypercube-parity";
        case ModeLabel::Family::SphereHarmonic: return "sphere-harmonic";
        case ModeLabel::Family::Empirical: return "empirical";
    }
    return "unknown";
}

std::string ModeLabel::to_string() const {
    switch (family) {
        case Family::CircleConstant: return "k0";
        case Family::CircleCos: return "cos" + std::to_string(k);
        case Family::CircleSin: return "sin" + std::to_string(k);
        case Family::HypercubeParity: {
            std::string s = "S{";
            bool first = true;
            for (int i = 0; i < 32; ++i) {
                if (subset & (1u << i)) {
                    if (!first) s += ",";
                    s += std::to_string(i + 1);
                    first = false;
                }
            }
            return s + "}";
        }
        case Family::SphereHarmonic:
            return "Y" + std::to_string(k) + "." + std::to_string(harmonic);
        case Family::Empirical: return "e" + std::to_string(k);
    }
    return "?";
}

}  // namespace eigenlearn

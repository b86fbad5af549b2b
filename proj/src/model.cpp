#include "fibertwist/model.hpp"

namespace fibertwist {

std::vector<std::string> validate_beta(const CoefficientProfile& profile) {
    std::vector<std::string> warnings;
    if (profile.samples.empty()) {
        warnings.push_back("profile has no samples");
        return warnings;
    }
    const double scale = std::max(1.0, profile.max_abs());
    if (std::fabs(profile.samples[0]) > 1e-12 * scale)
        warnings.push_back("beta(0) != 0");
    if (profile.size() >= 2 && profile.step > 0.0) {
        const double slope =
            (profile.samples[1] - profile.samples[0]) / profile.step;
        if (std::fabs(slope) > 10.0 * profile.step)
            warnings.push_back("beta'(0) != 0");
    }
    return warnings;
}

} // namespace fibertwist

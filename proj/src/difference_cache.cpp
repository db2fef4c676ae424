#include "tap/difference_cache.hpp"

#include <string>

namespace tap {

std::vector<FeatureTensor> DifferenceStack::differences(int max_order) const {
    if (max_order < 0) throw InvalidConfig("difference order must be >= 0");
    const std::size_t needed = static_cast<std::size_t>(max_order) + 1;
    if (snapshots_.size() < needed) {
        throw InsufficientSnapshots("differences: needed " + std::to_string(needed) +
                                    " snapshots, have " + std::to_string(snapshots_.size()));
    }

    // work[j] holds the current-order difference anchored j windows back
    // (j = 0 is the newest window).
    std::vector<FeatureTensor> work(needed);
    for (std::size_t j = 0; j < needed; ++j) {
        work[j] = snapshots_[snapshots_.size() - 1 - j].value;
    }

    std::vector<FeatureTensor> result;
    result.reserve(needed);
    result.push_back(work[0]);
    for (int order = 1; order <= max_order; ++order) {
        for (std::size_t j = 0; j + order < needed; ++j) {
            work[j] = work[j + 1] - work[j];
        }
        result.push_back(work[0]);
    }
    return result;
}

}  // namespace tap

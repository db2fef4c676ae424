#pragma once

#include <functional>

#include "tap/tensor.hpp"

namespace tap {

// Abstract denoiser: a full model evaluation plus a cheap first-layer probe.
// Both must be deterministic in (x, step); the probe is assumed strictly
// cheaper than the full evaluation in the cost model.
struct Denoiser {
    std::function<FeatureTensor(const FeatureTensor&, int)> full_eval;
    std::function<FeatureTensor(const FeatureTensor&, int)> probe_eval;
};

}  // namespace tap

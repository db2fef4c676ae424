#pragma once

#include <deque>
#include <vector>

#include "tap/tensor.hpp"

namespace tap {

// One cached full-computation value, tagged with its sampling-order step
// index (0 = first denoising step).
struct Snapshot {
    int step_index = 0;
    FeatureTensor value;
};

// Bounded history of full-step snapshots from which forward differences
// are derived. Snapshots are kept oldest -> newest; pushing past capacity
// evicts the oldest. `spacing` is the nominal step gap between snapshots
// once the schedule is in steady state.
class DifferenceStack {
public:
    DifferenceStack() = default;

    explicit DifferenceStack(int capacity, int spacing = 1)
        : capacity_(capacity), spacing_(spacing) {
        if (capacity < 1) throw InvalidConfig("DifferenceStack capacity must be >= 1");
        if (spacing < 1) throw InvalidConfig("DifferenceStack spacing must be >= 1");
    }

    int capacity() const { return capacity_; }
    int spacing() const { return spacing_; }
    std::size_t size() const { return snapshots_.size(); }
    bool empty() const { return snapshots_.empty(); }

    const Snapshot& at(std::size_t i) const { return snapshots_.at(i); }
    const Snapshot& oldest() const { return snapshots_.front(); }
    const Snapshot& newest() const { return snapshots_.back(); }

    // Step gap between the two newest snapshots; falls back to the nominal
    // spacing when fewer than two are stored.
    int newest_gap() const {
        if (snapshots_.size() < 2) return spacing_;
        return snapshots_.back().step_index - snapshots_[snapshots_.size() - 2].step_index;
    }

    void push(int step_index, FeatureTensor value) {
        if (step_index < 0) throw NonMonotonicStep("step_index must be >= 0");
        if (!snapshots_.empty()) {
            if (step_index <= snapshots_.back().step_index) {
                throw NonMonotonicStep("snapshot step indices must be strictly increasing");
            }
            snapshots_.back().value.require_same_shape(value);
        }
        snapshots_.push_back({step_index, std::move(value)});
        if (static_cast<int>(snapshots_.size()) > capacity_) {
            snapshots_.pop_front();
        }
    }

    // Finite differences D0..Dm of the stored snapshots, taken toward larger
    // diffusion timestep: D0 is the newest snapshot and D(i+1) = Di over the
    // older window minus Di over the newer window. Under this sign convention
    // the (-k)^i factors of the Taylor forecast make order-1 prediction exact
    // on linear trajectories.
    std::vector<FeatureTensor> differences(int max_order) const;

    void clear() { snapshots_.clear(); }

private:
    int capacity_ = 1;
    int spacing_ = 1;
    std::deque<Snapshot> snapshots_;
};

// The compact per-run cache: probe history, residual history and bookkeeping
// for the elapsed distance since the last full computation.
struct CacheState {
    DifferenceStack probe_stack;
    DifferenceStack residual_stack;
    int last_full_step = -1;

    CacheState() = default;
    CacheState(int capacity, int spacing)
        : probe_stack(capacity, spacing), residual_stack(capacity, spacing) {}

    int steps_since_full(int current_step) const {
        return last_full_step < 0 ? current_step : current_step - last_full_step;
    }
};

// Full/skip schedule: the first `warmup` steps are always computed fully,
// then every `window`-th step anchored at index warmup-1.
struct Schedule {
    int total_steps = 0;
    int window = 1;
    int warmup = 1;

    void validate() const {
        if (warmup < 1) throw InvalidSchedule("warmup must be >= 1");
        if (window < 1) throw InvalidSchedule("window must be >= 1");
        if (total_steps < warmup) throw InvalidSchedule("total_steps must be >= warmup");
    }

    bool is_full_step(int step_index) const {
        if (step_index < 0 || step_index >= total_steps) {
            throw OutOfRange("step_index outside [0, total_steps)");
        }
        if (step_index < warmup) return true;
        return (step_index - (warmup - 1)) % window == 0;
    }

    int full_count() const {
        validate();
        int count = 0;
        for (int i = 0; i < total_steps; ++i) {
            if (is_full_step(i)) ++count;
        }
        return count;
    }
};

}  // namespace tap

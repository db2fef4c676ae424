#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tap/errors.hpp"

namespace tap {

// Dense real array shaped batch x tokens x channels, row-major.
// The universal value carrier for features, probes and residuals.
class FeatureTensor {
public:
    FeatureTensor() = default;

    FeatureTensor(int batch, int tokens, int channels, double fill = 0.0)
        : batch_(batch), tokens_(tokens), channels_(channels) {
        if (batch < 0 || tokens < 0 || channels < 0) {
            throw ShapeMismatch("FeatureTensor dimensions must be non-negative");
        }
        data_.assign(static_cast<std::size_t>(batch) * tokens * channels, fill);
    }

    static FeatureTensor zeros_like(const FeatureTensor& other) {
        return FeatureTensor(other.batch_, other.tokens_, other.channels_);
    }

    int batch() const { return batch_; }
    int tokens() const { return tokens_; }
    int channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& at(int b, int n, int d) { return data_[index(b, n, d)]; }
    double at(int b, int n, int d) const { return data_[index(b, n, d)]; }

    std::span<double> token(int b, int n) {
        return {data_.data() + index(b, n, 0), static_cast<std::size_t>(channels_)};
    }
    std::span<const double> token(int b, int n) const {
        return {data_.data() + index(b, n, 0), static_cast<std::size_t>(channels_)};
    }

    bool same_shape(const FeatureTensor& other) const {
        return batch_ == other.batch_ && tokens_ == other.tokens_ && channels_ == other.channels_;
    }

    void require_same_shape(const FeatureTensor& other) const {
        if (!same_shape(other)) {
            throw ShapeMismatch("tensor shapes differ");
        }
    }

    FeatureTensor& operator+=(const FeatureTensor& rhs) {
        require_same_shape(rhs);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
        return *this;
    }

    FeatureTensor& operator-=(const FeatureTensor& rhs) {
        require_same_shape(rhs);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
        return *this;
    }

    FeatureTensor& scale(double s) {
        for (double& v : data_) v *= s;
        return *this;
    }

    // this += s * rhs
    FeatureTensor& axpy(double s, const FeatureTensor& rhs) {
        require_same_shape(rhs);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * rhs.data_[i];
        return *this;
    }

    friend FeatureTensor operator+(FeatureTensor lhs, const FeatureTensor& rhs) {
        lhs += rhs;
        return lhs;
    }
    friend FeatureTensor operator-(FeatureTensor lhs, const FeatureTensor& rhs) {
        lhs -= rhs;
        return lhs;
    }

    bool operator==(const FeatureTensor& other) const = default;

private:
    std::size_t index(int b, int n, int d) const {
        return (static_cast<std::size_t>(b) * tokens_ + n) * channels_ + d;
    }

    int batch_ = 0;
    int tokens_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

inline double mean_squared_error(const FeatureTensor& a, const FeatureTensor& b) {
    a.require_same_shape(b);
    if (a.size() == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

inline double max_abs(const FeatureTensor& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double v = a.data()[i] < 0 ? -a.data()[i] : a.data()[i];
        if (v > m) m = v;
    }
    return m;
}

}  // namespace tap

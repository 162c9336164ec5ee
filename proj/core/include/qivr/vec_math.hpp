#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace qivr {

/// Dot product with four strided double accumulators combined as
/// ((s0+s1)+(s2+s3)); the fixed summation order makes results bit-stable
/// across builds and thread counts. Products of floats are exact in double.
inline float dot_f32(const float* a, const float* b, size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += static_cast<double>(a[i]) * static_cast<double>(b[i]);
        s1 += static_cast<double>(a[i + 1]) * static_cast<double>(b[i + 1]);
        s2 += static_cast<double>(a[i + 2]) * static_cast<double>(b[i + 2]);
        s3 += static_cast<double>(a[i + 3]) * static_cast<double>(b[i + 3]);
    }
    for (; i < n; ++i) {
        s0 += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return static_cast<float>((s0 + s1) + (s2 + s3));
}

inline double l2_norm(const float* v, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(v[i]) * static_cast<double>(v[i]);
    }
    return std::sqrt(acc);
}

/// Scale v to unit L2 norm in place. Throws on zero or non-finite norm.
inline void normalize_l2(float* v, size_t n) {
    const double norm = l2_norm(v, n);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw std::invalid_argument("normalize_l2: zero or non-finite norm");
    }
    const float inv = static_cast<float>(1.0 / norm);
    for (size_t i = 0; i < n; ++i) v[i] *= inv;
}

}  // namespace qivr

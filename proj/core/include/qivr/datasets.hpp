#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qivr {

/// Row-major dataset produced by the generators; every row is unit-norm.
struct Dataset {
    std::vector<float> data;
    size_t count = 0;
    uint32_t dim = 0;
    std::span<const float> row(size_t i) const { return {data.data() + i * dim, dim}; }
};

/// Uniform unit vectors: i.i.d. standard-Gaussian coordinates from a seeded
/// generator, L2-normalized.
Dataset gen_random_sphere(size_t n, uint32_t d, uint64_t seed);

struct SyntheticLrParams {
    uint32_t clusters = 256;
    uint32_t subdim = 64;
    float eps = 0.05f;     // per-coordinate noise std, applied in the subspace
    float zipf_s = 1.0f;   // Zipf exponent over cluster ranks
};

/// Low-rank clustered data: Zipf-weighted cluster centers on the
/// subdim-sphere, in-subspace Gaussian noise, embedded into d dims via a
/// seeded random orthonormal basis, then normalized. The signal is exactly
/// rank-subdim by construction.
///
/// cluster_out, when non-null, receives the per-point cluster assignment.
Dataset gen_synthetic_lr(size_t n, uint32_t d, uint64_t seed,
                         const SyntheticLrParams& params = {},
                         std::vector<uint32_t>* cluster_out = nullptr);

}  // namespace qivr

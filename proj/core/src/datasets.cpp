#include "qivr/datasets.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "qivr/vec_math.hpp"

namespace qivr {

Dataset gen_random_sphere(size_t n, uint32_t d, uint64_t seed) {
    if (n < 1 || d < 1) throw std::invalid_argument("gen_random_sphere: n, d must be >= 1");
    Dataset out;
    out.count = n;
    out.dim = d;
    out.data.resize(n * static_cast<size_t>(d));
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    for (size_t i = 0; i < n; ++i) {
        float* v = out.data.data() + i * d;
        for (uint32_t j = 0; j < d; ++j) v[j] = gauss(rng);
        normalize_l2(v, d);
    }
    return out;
}

Dataset gen_synthetic_lr(size_t n, uint32_t d, uint64_t seed,
                         const SyntheticLrParams& params,
                         std::vector<uint32_t>* cluster_out) {
    if (n < 1 || d < 1) throw std::invalid_argument("gen_synthetic_lr: n, d must be >= 1");
    if (params.subdim > d) throw std::invalid_argument("gen_synthetic_lr: subdim > d");
    if (params.clusters < 1) throw std::invalid_argument("gen_synthetic_lr: clusters < 1");
    const uint32_t sub = params.subdim;
    const uint32_t K = params.clusters;

    std::mt19937_64 rng(seed);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // Random orthonormal basis: d x sub Gaussian matrix, modified
    // Gram-Schmidt over columns.
    std::vector<float> basis(static_cast<size_t>(d) * sub);
    for (auto& v : basis) v = gauss(rng);
    for (uint32_t c = 0; c < sub; ++c) {
        float* col = basis.data() + static_cast<size_t>(c) * d;
        for (uint32_t p = 0; p < c; ++p) {
            const float* prev = basis.data() + static_cast<size_t>(p) * d;
            const float proj = dot_f32(col, prev, d);
            for (uint32_t j = 0; j < d; ++j) col[j] -= proj * prev[j];
        }
        normalize_l2(col, d);
    }

    // Cluster centers: uniform on the subdim-sphere.
    std::vector<float> centers(static_cast<size_t>(K) * sub);
    for (uint32_t c = 0; c < K; ++c) {
        float* ctr = centers.data() + static_cast<size_t>(c) * sub;
        for (uint32_t j = 0; j < sub; ++j) ctr[j] = gauss(rng);
        normalize_l2(ctr, sub);
    }

    // Zipf weights over cluster ranks: P(r) proportional to (r+1)^-s.
    std::vector<double> cdf(K);
    double total = 0.0;
    for (uint32_t r = 0; r < K; ++r) {
        total += 1.0 / std::pow(static_cast<double>(r + 1), params.zipf_s);
        cdf[r] = total;
    }
    for (double& c : cdf) c /= total;

    Dataset out;
    out.count = n;
    out.dim = d;
    out.data.resize(n * static_cast<size_t>(d));
    if (cluster_out) cluster_out->resize(n);

    std::vector<float> point(sub);
    for (size_t i = 0; i < n; ++i) {
        const double u = unif(rng);
        const uint32_t c = static_cast<uint32_t>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        const uint32_t cluster = std::min(c, K - 1);
        if (cluster_out) (*cluster_out)[i] = cluster;

        const float* ctr = centers.data() + static_cast<size_t>(cluster) * sub;
        for (uint32_t j = 0; j < sub; ++j) point[j] = ctr[j] + params.eps * gauss(rng);

        float* row = out.data.data() + i * d;
        std::fill(row, row + d, 0.0f);
        for (uint32_t s = 0; s < sub; ++s) {
            const float* col = basis.data() + static_cast<size_t>(s) * d;
            const float w = point[s];
            for (uint32_t j = 0; j < d; ++j) row[j] += w * col[j];
        }
        normalize_l2(row, d);
    }
    return out;
}

}  // namespace qivr

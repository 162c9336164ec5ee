#include "qivr/builder.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "qivr/vec_math.hpp"

namespace qivr {

namespace {

constexpr size_t kChunkSize = 1000;  // Stage 1 work unit

/// Run fn(worker, first, last) over [0, count) in chunks handed out by an
/// atomic counter. Exceptions from workers are rethrown on the caller.
template <typename Fn>
void parallel_chunks(size_t count, uint32_t threads, Fn&& fn) {
    const size_t num_chunks = (count + kChunkSize - 1) / kChunkSize;
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;

    auto worker = [&](uint32_t worker_id) {
        try {
            for (;;) {
                const size_t chunk = next.fetch_add(1, std::memory_order_relaxed);
                if (chunk >= num_chunks) return;
                const size_t first = chunk * kChunkSize;
                const size_t last = std::min(count, first + kChunkSize);
                fn(worker_id, first, last);
            }
        } catch (...) {
            std::lock_guard<std::mutex> g(error_mu);
            if (!error) error = std::current_exception();
        }
    };

    if (threads <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (uint32_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace

Index stage0_preinstall(const float* data, size_t count, uint32_t dim,
                        const BuildParams& params) {
    params.validate();
    if (count == 0) throw std::invalid_argument("stage0_preinstall: no vectors");
    if (dim == 0) throw std::invalid_argument("stage0_preinstall: zero dimension");
    if (count > static_cast<size_t>(UINT32_MAX)) {
        throw std::invalid_argument("stage0_preinstall: too many vectors for 32-bit ids");
    }

    std::vector<float> normalized(count * static_cast<size_t>(dim));
    std::memcpy(normalized.data(), data, normalized.size() * sizeof(float));

    Index index;
    index.params = params;
    index.dim = dim;
    index.signatures = SignatureStore(count, dim);

    parallel_chunks(count, params.threads, [&](uint32_t, size_t first, size_t last) {
        for (size_t i = first; i < last; ++i) {
            float* v = normalized.data() + i * dim;
            normalize_l2(v, dim);  // throws on zero-norm input
            index.signatures.encode(i, {v, dim});
        }
    });

    index.cold = ColdStore::owned(std::move(normalized), count, dim);
    index.adjacency = AdjacencyTable(static_cast<uint32_t>(count), params.max_degree());
    index.entry_point = select_entry_point(index.cold);
    return index;
}

uint32_t select_entry_point(const ColdStore& cold) {
    const size_t n = cold.count();
    const uint32_t d = cold.dim();
    const float* data = cold.raw();

    std::vector<double> centroid(d, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const float* v = data + i * d;
        for (uint32_t j = 0; j < d; ++j) centroid[j] += v[j];
    }
    double norm = 0.0;
    for (double c : centroid) norm += c * c;
    norm = std::sqrt(norm);
    std::vector<float> center(d, 0.0f);
    if (norm > 0.0) {
        for (uint32_t j = 0; j < d; ++j) {
            center[j] = static_cast<float>(centroid[j] / norm);
        }
    }

    uint32_t best = 0;
    float best_dot = dot_f32(data, center.data(), d);
    for (size_t i = 1; i < n; ++i) {
        const float dp = dot_f32(data + i * d, center.data(), d);
        if (dp > best_dot) {
            best_dot = dp;
            best = static_cast<uint32_t>(i);
        }
    }
    return best;
}

void link_node(uint32_t node, Index& index, const BuildParams& params,
               SearchContext& ctx, BuildAudit* audit) {
    const SignatureStore& sigs = index.signatures;
    auto candidates = beam_search_words(index, sigs.pos(node), sigs.strong(node),
                                        params.ef_c, index.entry_point, ctx.visited,
                                        ctx.row_scratch, /*lock_adjacency=*/true);
    std::erase_if(candidates, [node](const Candidate& c) { return c.id == node; });
    if (candidates.empty()) return;  // first linked node: reachable via reverse edges later

    auto dist_fn = [&sigs](uint32_t a, uint32_t b) { return sigs.distance(a, b); };
    auto pruned = robust_prune(std::move(candidates), dist_fn, params.max_degree(),
                               params.alpha);
    insert_bidirectional(node, pruned, index.adjacency, dist_fn, params, audit);
}

Index build_index(const float* data, size_t count, uint32_t dim,
                  const BuildParams& params, BuildAudit* audit) {
    Index index = stage0_preinstall(data, count, dim, params);
    if (audit) audit->reprune_count.assign(count, 0);

    std::vector<uint32_t> order(count);
    std::iota(order.begin(), order.end(), 0u);
    std::mt19937_64 rng(params.seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<SearchContext> contexts(params.threads);
    parallel_chunks(count, params.threads, [&](uint32_t worker, size_t first, size_t last) {
        SearchContext& ctx = contexts[worker];
        for (size_t i = first; i < last; ++i) {
            link_node(order[i], index, params, ctx, audit);
        }
    });
    return index;
}

}  // namespace qivr

#include "qivr/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <thread>

#include "qivr/vec_math.hpp"

namespace qivr {

namespace {

/// Bounded best-k tracker under (better-score, lower-id) order.
template <typename Score, typename Better>
class TopK {
public:
    TopK(uint32_t k, Better better) : k_(k), better_(better) {}

    void offer(uint32_t id, Score s) {
        if (heap_.size() < k_) {
            heap_.push_back({s, id});
            std::push_heap(heap_.begin(), heap_.end(), cmp());
        } else if (is_better(s, id, heap_.front().first, heap_.front().second)) {
            std::pop_heap(heap_.begin(), heap_.end(), cmp());
            heap_.back() = {s, id};
            std::push_heap(heap_.begin(), heap_.end(), cmp());
        }
    }

    std::vector<uint32_t> sorted_ids() {
        std::sort_heap(heap_.begin(), heap_.end(), cmp());
        std::vector<uint32_t> ids;
        ids.reserve(heap_.size());
        for (const auto& [s, id] : heap_) ids.push_back(id);
        return ids;
    }

private:
    bool is_better(Score sa, uint32_t ia, Score sb, uint32_t ib) const {
        if (better_(sa, sb)) return true;
        if (better_(sb, sa)) return false;
        return ia < ib;
    }
    auto cmp() const {  // heap top = worst element
        return [this](const std::pair<Score, uint32_t>& a,
                      const std::pair<Score, uint32_t>& b) {
            return is_better(a.first, a.second, b.first, b.second);
        };
    }

    uint32_t k_;
    Better better_;
    std::vector<std::pair<Score, uint32_t>> heap_;
};

template <typename Fn>
void parallel_for(size_t count, uint32_t threads, Fn&& fn) {
    if (threads <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (uint32_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

std::vector<std::vector<uint32_t>> brute_force_topk(
    const float* base, size_t n, const float* queries, size_t nq, uint32_t dim,
    uint32_t k, Scorer scorer, uint32_t threads, bool exclude_identity) {
    std::vector<std::vector<uint32_t>> out(nq);

    if (scorer == Scorer::float_cosine) {
        auto better = [](float a, float b) { return a > b; };
        parallel_for(nq, threads, [&](size_t qi) {
            const float* q = queries + qi * dim;
            TopK<float, decltype(better)> top(k, better);
            for (size_t j = 0; j < n; ++j) {
                if (exclude_identity && j == qi) continue;
                top.offer(static_cast<uint32_t>(j), dot_f32(q, base + j * dim, dim));
            }
            out[qi] = top.sorted_ids();
        });
        return out;
    }

    auto better = [](uint32_t a, uint32_t b) { return a < b; };
    if (scorer == Scorer::sm2) {
        SignatureStore store(n, dim);
        for (size_t j = 0; j < n; ++j) store.encode(j, {base + j * dim, dim});
        const size_t words = store.words();
        parallel_for(nq, threads, [&](size_t qi) {
            std::vector<uint64_t> sig(2 * words);
            encode_sm2_into({queries + qi * dim, dim}, sig.data(), sig.data() + words);
            TopK<uint32_t, decltype(better)> top(k, better);
            for (size_t j = 0; j < n; ++j) {
                if (j + 4 < n) {
                    const char* p = reinterpret_cast<const char*>(store.pos(j + 4));
                    __builtin_prefetch(p);
                    __builtin_prefetch(p + 64);
                    __builtin_prefetch(p + 128);
                }
                if (exclude_identity && j == qi) continue;
                top.offer(static_cast<uint32_t>(j),
                          store.distance_to(sig.data(), sig.data() + words, j));
            }
            out[qi] = top.sorted_ids();
        });
        return out;
    }

    if (scorer == Scorer::sign1) {
        const size_t words = words_for_dim(dim);
        std::vector<uint64_t> codes(n * words);
        for (size_t j = 0; j < n; ++j) {
            auto sb = encode_sign1({base + j * dim, dim});
            std::copy(sb.bits.begin(), sb.bits.end(), codes.begin() + j * words);
        }
        parallel_for(nq, threads, [&](size_t qi) {
            auto qb = encode_sign1({queries + qi * dim, dim});
            TopK<uint32_t, decltype(better)> top(k, better);
            for (size_t j = 0; j < n; ++j) {
                if (exclude_identity && j == qi) continue;
                top.offer(static_cast<uint32_t>(j),
                          hamming_distance_words(qb.bits.data(), codes.data() + j * words,
                                                 words));
            }
            out[qi] = top.sorted_ids();
        });
        return out;
    }

    // sq2
    std::vector<uint8_t> codes(n * static_cast<size_t>(dim));
    for (size_t j = 0; j < n; ++j) {
        auto c = encode_sq2({base + j * dim, dim});
        std::copy(c.codes.begin(), c.codes.end(), codes.begin() + j * dim);
    }
    parallel_for(nq, threads, [&](size_t qi) {
        auto qc = encode_sq2({queries + qi * dim, dim});
        TopK<uint32_t, decltype(better)> top(k, better);
        for (size_t j = 0; j < n; ++j) {
            if (j + 4 < n) {
                const char* p = reinterpret_cast<const char*>(codes.data() + (j + 4) * dim);
                __builtin_prefetch(p);
                __builtin_prefetch(p + 64);
                __builtin_prefetch(p + 128);
            }
            if (exclude_identity && j == qi) continue;
            top.offer(static_cast<uint32_t>(j),
                      sq2_distance_bytes(qc.codes.data(), codes.data() + j * dim, dim));
        }
        out[qi] = top.sorted_ids();
    });
    return out;
}

double recall_at_k(const std::vector<std::vector<uint32_t>>& results,
                   const std::vector<std::vector<uint32_t>>& ground_truth, uint32_t k) {
    if (results.size() != ground_truth.size()) {
        throw std::invalid_argument("recall_at_k: query count mismatch");
    }
    if (results.empty()) throw std::invalid_argument("recall_at_k: no queries");
    double total = 0.0;
    for (size_t qi = 0; qi < results.size(); ++qi) {
        if (ground_truth[qi].size() < k) {
            throw std::invalid_argument("recall_at_k: ground-truth row shorter than k");
        }
        const size_t rk = std::min<size_t>(k, results[qi].size());
        size_t hits = 0;
        for (size_t i = 0; i < rk; ++i) {
            for (size_t j = 0; j < k; ++j) {
                if (results[qi][i] == ground_truth[qi][j]) {
                    ++hits;
                    break;
                }
            }
        }
        total += static_cast<double>(hits) / k;
    }
    return total / static_cast<double>(results.size());
}

ProbeReport compatibility_probe(const float* data, size_t n, uint32_t dim,
                                size_t sample_size, uint32_t k, Scorer scorer) {
    const size_t sample_n = std::min(sample_size, n);
    if (sample_n < 100) {
        throw std::invalid_argument("compatibility_probe: sample too small (< 100)");
    }
    bool degenerate = true;
    for (size_t j = 1; j < sample_n && degenerate; ++j) {
        degenerate = std::memcmp(data, data + j * dim, dim * sizeof(float)) == 0;
    }
    if (degenerate) {
        throw std::invalid_argument("compatibility_probe: degenerate sample (all identical)");
    }

    const size_t nq = std::min<size_t>(1000, sample_n);
    const uint32_t threads = std::max(1u, std::thread::hardware_concurrency());
    auto float_lists = brute_force_topk(data, sample_n, data, nq, dim, k,
                                        Scorer::float_cosine, threads, true);
    auto bq_lists = brute_force_topk(data, sample_n, data, nq, dim, k,
                                     scorer, threads, true);
    ProbeReport rep;
    rep.sample_size = sample_n;
    rep.k = k;
    rep.overlap_at_k = recall_at_k(bq_lists, float_lists, k);
    rep.go = rep.overlap_at_k > 0.5;
    return rep;
}

std::vector<SearchResult> run_query_batch(const Index& index, const float* queries,
                                          size_t nq, const SearchParams& params,
                                          uint32_t threads) {
    std::vector<SearchResult> results(nq);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        SearchContext ctx;
        for (;;) {
            const size_t qi = next.fetch_add(1, std::memory_order_relaxed);
            if (qi >= nq) return;
            results[qi] = query(index, {queries + qi * index.dim, index.dim}, params, ctx);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (uint32_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return results;
}

EvalReport bench_sweep(const Index& index, const float* queries, size_t nq,
                       const std::vector<std::vector<uint32_t>>& ground_truth,
                       uint32_t k, std::vector<uint32_t> ef_list,
                       const std::vector<uint32_t>& thread_list, uint32_t runs) {
    if (thread_list.empty()) throw std::invalid_argument("bench_sweep: no thread counts");
    if (runs < 1) throw std::invalid_argument("bench_sweep: runs must be >= 1");
    std::sort(ef_list.begin(), ef_list.end());
    ef_list.erase(std::unique(ef_list.begin(), ef_list.end()), ef_list.end());

    EvalReport report;
    report.k = k;
    report.memory = memory_report(index);
    report.diagnostics = strong_bit_rate(index.signatures);

    for (uint32_t ef : ef_list) {
        SearchParams params{ef, k};
        EvalRow row;
        row.ef = ef;

        std::vector<double> qps_per_threads;
        for (uint32_t threads : thread_list) {
            double qps_sum = 0.0;
            for (uint32_t r = 0; r < runs; ++r) {
                const auto t0 = std::chrono::steady_clock::now();
                auto results = run_query_batch(index, queries, nq, params, threads);
                const auto t1 = std::chrono::steady_clock::now();
                const double secs = std::chrono::duration<double>(t1 - t0).count();
                qps_sum += static_cast<double>(nq) / secs;
                if (threads == thread_list.front() && r == 0) {
                    std::vector<std::vector<uint32_t>> ids(nq);
                    for (size_t qi = 0; qi < nq; ++qi) ids[qi] = results[qi].ids;
                    row.recall_at_k = recall_at_k(ids, ground_truth, k);
                }
            }
            qps_per_threads.push_back(qps_sum / runs);
        }
        row.qps_1t = qps_per_threads.front();
        row.qps_mt = qps_per_threads.back();

        index.cold.reset_access_count();
        run_query_batch(index, queries, nq, params, thread_list.front());
        row.mean_cold_accesses =
            static_cast<double>(index.cold.access_count()) / static_cast<double>(nq);

        report.rows.push_back(row);
    }
    return report;
}

}  // namespace qivr

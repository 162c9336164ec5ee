#pragma once

#include <cstdint>
#include <vector>

#include "qivr/encoding.hpp"
#include "qivr/index.hpp"
#include "qivr/search.hpp"
#include "qivr/store_io.hpp"

namespace qivr {

enum class Scorer { float_cosine, sm2, sign1, sq2 };

/// Exact linear-scan top-k per query under the chosen scorer. Float scores
/// rank descending, quantized distances ascending; ties broken by ascending
/// id. exclude_identity skips base row j == query index (used by the probe,
/// whose queries are drawn from the sample itself).
std::vector<std::vector<uint32_t>> brute_force_topk(
    const float* base, size_t n, const float* queries, size_t nq, uint32_t dim,
    uint32_t k, Scorer scorer, uint32_t threads = 1, bool exclude_identity = false);

/// Mean over queries of |results[0..k) ∩ gt[0..k)| / k.
double recall_at_k(const std::vector<std::vector<uint32_t>>& results,
                   const std::vector<std::vector<uint32_t>>& ground_truth, uint32_t k);

/// Go/no-go signal for BQ-native indexing on a vector sample: brute-force
/// top-k overlap between quantized and float rankings, go iff > 0.5.
struct ProbeReport {
    double overlap_at_k = 0.0;
    size_t sample_size = 0;
    uint32_t k = 10;
    bool go = false;
};

ProbeReport compatibility_probe(const float* data, size_t n, uint32_t dim,
                                size_t sample_size = 10000, uint32_t k = 10,
                                Scorer scorer = Scorer::sm2);

/// Run the full query batch at a fixed thread count; results are identical
/// to the single-threaded run for any thread count.
std::vector<SearchResult> run_query_batch(const Index& index, const float* queries,
                                          size_t nq, const SearchParams& params,
                                          uint32_t threads);

struct EvalRow {
    uint32_t ef = 0;
    double recall_at_k = 0.0;
    double qps_1t = 0.0;
    double qps_mt = 0.0;
    double mean_cold_accesses = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> rows;  // strictly increasing ef
    double build_seconds = 0.0;
    MemoryReport memory;
    EncodingDiagnostics diagnostics;
    uint32_t k = 10;
};

/// Recall/QPS sweep: for each ef, run the whole batch at each thread count,
/// `runs` times, and report mean wall-clock QPS. Recall is measured once per
/// ef (deterministic for a fixed index). The first thread count fills the
/// qps_1t column, the last fills qps_mt.
EvalReport bench_sweep(const Index& index, const float* queries, size_t nq,
                       const std::vector<std::vector<uint32_t>>& ground_truth,
                       uint32_t k, std::vector<uint32_t> ef_list,
                       const std::vector<uint32_t>& thread_list, uint32_t runs = 3);

}  // namespace qivr

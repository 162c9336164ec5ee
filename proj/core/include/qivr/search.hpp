#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qivr/index.hpp"

namespace qivr {

struct SearchParams {
    uint32_t ef = 64;
    uint32_t k = 10;

    void validate() const {
        if (k < 1) throw std::invalid_argument("SearchParams: k must be >= 1");
        if (ef < k) throw std::invalid_argument("SearchParams: ef must be >= k");
    }
};

/// Top-k ids with cosine scores, descending, ties broken by ascending id.
struct SearchResult {
    std::vector<uint32_t> ids;
    std::vector<float> scores;
};

/// Epoch-stamped visited flags, one slot per node. Reset between queries is
/// O(1) (epoch bump); the backing array is reused for the lifetime of a
/// searcher thread.
class VisitedSet {
public:
    VisitedSet() = default;
    explicit VisitedSet(size_t n) : stamp_(n, 0) {}

    void ensure(size_t n) {
        if (stamp_.size() < n) {
            stamp_.assign(n, 0);
            epoch_ = 0;
        }
    }

    void next_query() {
        if (++epoch_ == 0) {  // wrap: one full clear, then restart at 1
            std::fill(stamp_.begin(), stamp_.end(), 0u);
            epoch_ = 1;
        }
    }

    /// Returns true if already visited this query; marks visited otherwise.
    bool test_and_set(uint32_t id) {
        if (stamp_[id] == epoch_) return true;
        stamp_[id] = epoch_;
        return false;
    }

private:
    std::vector<uint32_t> stamp_;
    uint32_t epoch_ = 0;
};

/// Per-thread reusable search state: visited flags plus encode scratch.
struct SearchContext {
    VisitedSet visited;
    std::vector<float> query_scratch;
    std::vector<uint64_t> sig_scratch;  // qpos words followed by qstrong words
    std::vector<uint32_t> row_scratch;
};

/// Best-first beam search over the graph in BQ space.
///
/// Maintains a pool of the ef best (dist, id) visited nodes and a frontier
/// of unexpanded candidates; repeatedly expands the nearest unexpanded
/// candidate and stops once the nearest is farther than the worst pool entry
/// of a full pool. Returns the pool in ascending (dist, id) order.
///
/// `lock_adjacency` snapshots each slot under its lock — required while the
/// graph is under concurrent construction; a finished index reads lock-free.
std::vector<Candidate> beam_search_words(const Index& index, const uint64_t* qpos,
                                         const uint64_t* qstrong, uint32_t ef,
                                         uint32_t entry, VisitedSet& visited,
                                         std::vector<uint32_t>& row_scratch,
                                         bool lock_adjacency);

std::vector<Candidate> beam_search(const Index& index, const BQSignature& query_sig,
                                   uint32_t ef, uint32_t entry, VisitedSet& visited);

/// Exact cosine rerank of a candidate set via the cold store — the only
/// cold access on the query path. k larger than the candidate set returns
/// everything ranked.
SearchResult rerank(const Index& index, std::span<const Candidate> candidates,
                    std::span<const float> query_norm, uint32_t k);

/// Full two-stage query: normalize, encode once, beam search, rerank.
SearchResult query(const Index& index, std::span<const float> query_vec,
                   const SearchParams& params, SearchContext& ctx);
SearchResult query(const Index& index, std::span<const float> query_vec,
                   const SearchParams& params);

}  // namespace qivr

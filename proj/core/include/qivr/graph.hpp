#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define QIVR_HAS_PAUSE 1
#else
#define QIVR_HAS_PAUSE 0
#endif

namespace qivr {

/// A scored node: dist is an sm2 distance actually computed against some
/// reference point. Total order is (dist, id) ascending.
struct Candidate {
    uint32_t id = 0;
    uint32_t dist = 0;
};

inline bool candidate_less(const Candidate& a, const Candidate& b) {
    return a.dist != b.dist ? a.dist < b.dist : a.id < b.id;
}

struct BuildParams {
    uint32_t m = 32;        // max degree is 2m
    uint32_t ef_c = 128;    // construction beam width
    float alpha = 1.2f;     // diversity slack, >= 1
    uint32_t threads = std::thread::hardware_concurrency();
    uint64_t seed = 42;     // drives the insertion-order shuffle only

    uint32_t max_degree() const { return 2 * m; }

    void validate() const {
        if (m < 1) throw std::invalid_argument("BuildParams: m must be >= 1");
        if (ef_c < 1) throw std::invalid_argument("BuildParams: ef_c must be >= 1");
        if (!(alpha >= 1.0f)) throw std::invalid_argument("BuildParams: alpha must be >= 1.0");
        if (threads < 1) throw std::invalid_argument("BuildParams: threads must be >= 1");
    }
};

/// 1-byte spinlock, one per adjacency slot.
class Spinlock {
public:
    void lock() {
        while (flag_.test_and_set(std::memory_order_acquire)) {
#if QIVR_HAS_PAUSE
            _mm_pause();
#endif
        }
    }
    void unlock() { flag_.clear(std::memory_order_release); }

private:
    std::atomic_flag flag_ = ATOMIC_FLAG_INIT;
};

/// Flat fixed-slot adjacency: per node one uint32 degree followed by
/// max_degree uint32 neighbor ids, unused entries zero. This is also the
/// on-disk layout ((2m+1)*4 bytes per node, little-endian).
///
/// Callers that mutate or read a slot while the graph is under concurrent
/// construction must hold that slot's lock; after construction the table is
/// immutable and lock-free to read.
class AdjacencyTable {
public:
    AdjacencyTable() = default;
    AdjacencyTable(uint32_t num_nodes, uint32_t max_degree)
        : num_nodes_(num_nodes), max_degree_(max_degree),
          slots_(static_cast<size_t>(num_nodes) * (max_degree + 1), 0),
          locks_(std::make_unique<Spinlock[]>(num_nodes)) {}

    AdjacencyTable(AdjacencyTable&&) = default;
    AdjacencyTable& operator=(AdjacencyTable&&) = default;

    uint32_t num_nodes() const { return num_nodes_; }
    uint32_t max_degree() const { return max_degree_; }
    size_t size_bytes() const { return slots_.size() * sizeof(uint32_t); }

    uint32_t degree(uint32_t node) const { return slots_[slot_offset(node)]; }
    const uint32_t* neighbors(uint32_t node) const {
        return slots_.data() + slot_offset(node) + 1;
    }

    void lock(uint32_t node) const { locks_[node].lock(); }
    void unlock(uint32_t node) const { locks_[node].unlock(); }

    class Guard {
    public:
        Guard(const AdjacencyTable& t, uint32_t node) : t_(t), node_(node) { t_.lock(node_); }
        ~Guard() { t_.unlock(node_); }
        Guard(const Guard&) = delete;
        Guard& operator=(const Guard&) = delete;

    private:
        const AdjacencyTable& t_;
        uint32_t node_;
    };

    /// Copy a slot's neighbor list under its lock; returns the degree.
    /// `out` must have room for max_degree entries.
    uint32_t snapshot(uint32_t node, uint32_t* out) const {
        Guard g(*this, node);
        const uint32_t deg = degree(node);
        std::copy_n(neighbors(node), deg, out);
        return deg;
    }

    /// Replace a slot. Caller holds the slot lock (or is single-threaded).
    /// Unused tail entries are zeroed to keep the serialized form canonical.
    void set_neighbors(uint32_t node, std::span<const uint32_t> ids) {
        if (ids.size() > max_degree_) {
            throw std::invalid_argument("AdjacencyTable: degree cap exceeded");
        }
        uint32_t* slot = slots_.data() + slot_offset(node);
        slot[0] = static_cast<uint32_t>(ids.size());
        std::copy(ids.begin(), ids.end(), slot + 1);
        std::fill(slot + 1 + ids.size(), slot + 1 + max_degree_, 0u);
    }

    /// Append one id. Caller holds the slot lock and has checked capacity.
    void append_neighbor(uint32_t node, uint32_t id) {
        uint32_t* slot = slots_.data() + slot_offset(node);
        slot[1 + slot[0]] = id;
        slot[0] += 1;
    }

    const uint32_t* raw() const { return slots_.data(); }
    uint32_t* raw() { return slots_.data(); }

private:
    size_t slot_offset(uint32_t node) const {
        return static_cast<size_t>(node) * (max_degree_ + 1);
    }

    uint32_t num_nodes_ = 0;
    uint32_t max_degree_ = 0;
    std::vector<uint32_t> slots_;
    mutable std::unique_ptr<Spinlock[]> locks_;
};

/// Per-node count of re-prune events during a build; used by audits that
/// check every forward edge either has its reverse or lost it to a re-prune.
struct BuildAudit {
    std::vector<uint32_t> reprune_count;
};

/// Alg.-style diversity pruning over BQ distances.
///
/// Candidates are processed in ascending (dist, id) order; c is kept iff for
/// every already-kept s: dist(c, target) <= alpha * dist(c, s). Stops at
/// max_degree selections. The alpha comparison is done in float32 — BQ
/// distances are small integers and exact in float32, and alpha itself is a
/// float32 knob.
template <typename DistFn>
std::vector<uint32_t> robust_prune(std::vector<Candidate> candidates, DistFn&& dist_fn,
                                   uint32_t max_degree, float alpha) {
    std::sort(candidates.begin(), candidates.end(), candidate_less);
    std::vector<uint32_t> selected;
    selected.reserve(std::min<size_t>(candidates.size(), max_degree));
    for (const Candidate& c : candidates) {
        bool keep = true;
        for (uint32_t s : selected) {
            const float covered = alpha * static_cast<float>(dist_fn(c.id, s));
            if (static_cast<float>(c.dist) > covered) {
                keep = false;
                break;
            }
        }
        if (keep) {
            selected.push_back(c.id);
            if (selected.size() == max_degree) break;
        }
    }
    return selected;
}

/// Write `node`'s slot and offer the reverse edge to every selected
/// neighbor, re-pruning any neighbor that would exceed the degree cap.
/// Locks are held one slot at a time.
template <typename DistFn>
void insert_bidirectional(uint32_t node, std::span<const uint32_t> pruned_neighbors,
                          AdjacencyTable& table, DistFn&& dist_fn,
                          const BuildParams& params, BuildAudit* audit = nullptr) {
    const uint32_t R = params.max_degree();
    if (node >= table.num_nodes()) {
        throw std::invalid_argument("insert_bidirectional: unknown node id");
    }
    for (uint32_t b : pruned_neighbors) {
        if (b >= table.num_nodes()) {
            throw std::invalid_argument("insert_bidirectional: unknown neighbor id");
        }
    }

    {
        AdjacencyTable::Guard g(table, node);
        table.set_neighbors(node, pruned_neighbors);
    }

    for (uint32_t b : pruned_neighbors) {
        AdjacencyTable::Guard g(table, b);
        const uint32_t deg = table.degree(b);
        const uint32_t* nbrs = table.neighbors(b);
        if (std::find(nbrs, nbrs + deg, node) != nbrs + deg) continue;
        if (deg < R) {
            table.append_neighbor(b, node);
            continue;
        }
        // Overflow: re-prune b over its current neighbors plus node.
        std::vector<Candidate> cands;
        cands.reserve(deg + 1);
        for (uint32_t i = 0; i < deg; ++i) {
            cands.push_back({nbrs[i], dist_fn(nbrs[i], b)});
        }
        cands.push_back({node, dist_fn(node, b)});
        auto kept = robust_prune(std::move(cands), dist_fn, R, params.alpha);
        table.set_neighbors(b, kept);
        if (audit) audit->reprune_count[b] += 1;
    }
}

}  // namespace qivr

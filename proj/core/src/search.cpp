#include "qivr/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <queue>

#include "qivr/vec_math.hpp"

namespace qivr {

namespace {

struct MinOrder {  // frontier: nearest (dist, id) on top
    bool operator()(const Candidate& a, const Candidate& b) const {
        return candidate_less(b, a);
    }
};
struct MaxOrder {  // pool: worst (dist, id) on top
    bool operator()(const Candidate& a, const Candidate& b) const {
        return candidate_less(a, b);
    }
};

}  // namespace

std::vector<Candidate> beam_search_words(const Index& index, const uint64_t* qpos,
                                         const uint64_t* qstrong, uint32_t ef,
                                         uint32_t entry, VisitedSet& visited,
                                         std::vector<uint32_t>& row_scratch,
                                         bool lock_adjacency) {
    const SignatureStore& sigs = index.signatures;
    const AdjacencyTable& adj = index.adjacency;
    visited.ensure(sigs.count());
    visited.next_query();
    row_scratch.resize(adj.max_degree());

    std::priority_queue<Candidate, std::vector<Candidate>, MinOrder> frontier;
    std::priority_queue<Candidate, std::vector<Candidate>, MaxOrder> pool;

    const Candidate start{entry, sigs.distance_to(qpos, qstrong, entry)};
    visited.test_and_set(entry);
    frontier.push(start);
    pool.push(start);

    while (!frontier.empty()) {
        const Candidate cur = frontier.top();
        if (pool.size() == ef && cur.dist > pool.top().dist) break;
        frontier.pop();

        uint32_t deg;
        if (lock_adjacency) {
            deg = adj.snapshot(cur.id, row_scratch.data());
        } else {
            deg = adj.degree(cur.id);
            std::copy_n(adj.neighbors(cur.id), deg, row_scratch.data());
        }
        for (uint32_t i = 0; i < deg; ++i) {
            __builtin_prefetch(sigs.pos(row_scratch[i]));
        }
        for (uint32_t i = 0; i < deg; ++i) {
            const uint32_t v = row_scratch[i];
            if (visited.test_and_set(v)) continue;
            const Candidate c{v, sigs.distance_to(qpos, qstrong, v)};
            if (pool.size() < ef || candidate_less(c, pool.top())) {
                frontier.push(c);
                pool.push(c);
                if (pool.size() > ef) pool.pop();
            }
        }
    }

    std::vector<Candidate> out;
    out.reserve(pool.size());
    while (!pool.empty()) {
        out.push_back(pool.top());
        pool.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<Candidate> beam_search(const Index& index, const BQSignature& query_sig,
                                   uint32_t ef, uint32_t entry, VisitedSet& visited) {
    if (query_sig.dim != index.dim) {
        throw std::invalid_argument("beam_search: query dimension mismatch");
    }
    if (entry >= index.size()) {
        throw std::invalid_argument("beam_search: invalid entry point");
    }
    std::vector<uint32_t> row;
    return beam_search_words(index, query_sig.pos_bits.data(), query_sig.strong_bits.data(),
                             ef, entry, visited, row, /*lock_adjacency=*/false);
}

SearchResult rerank(const Index& index, std::span<const Candidate> candidates,
                    std::span<const float> query_norm, uint32_t k) {
    struct Scored {
        uint32_t id;
        float score;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (const Candidate& c : candidates) {
        const auto v = index.cold.vec(c.id);
        scored.push_back({c.id, dot_f32(query_norm.data(), v.data(), v.size())});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    const size_t take = std::min<size_t>(k, scored.size());
    SearchResult res;
    res.ids.reserve(take);
    res.scores.reserve(take);
    for (size_t i = 0; i < take; ++i) {
        res.ids.push_back(scored[i].id);
        res.scores.push_back(scored[i].score);
    }
    return res;
}

SearchResult query(const Index& index, std::span<const float> query_vec,
                   const SearchParams& params, SearchContext& ctx) {
    params.validate();
    if (query_vec.size() != index.dim) {
        throw std::invalid_argument("query: dimension mismatch");
    }
    ctx.query_scratch.assign(query_vec.begin(), query_vec.end());
    for (float v : ctx.query_scratch) {
        if (!std::isfinite(v)) throw std::invalid_argument("query: non-finite coordinate");
    }
    normalize_l2(ctx.query_scratch.data(), ctx.query_scratch.size());

    const size_t words = index.signatures.words();
    ctx.sig_scratch.resize(2 * words);
    encode_sm2_into(ctx.query_scratch, ctx.sig_scratch.data(), ctx.sig_scratch.data() + words);

    auto candidates = beam_search_words(index, ctx.sig_scratch.data(),
                                        ctx.sig_scratch.data() + words, params.ef,
                                        index.entry_point, ctx.visited, ctx.row_scratch,
                                        /*lock_adjacency=*/false);
    return rerank(index, candidates, ctx.query_scratch, params.k);
}

SearchResult query(const Index& index, std::span<const float> query_vec,
                   const SearchParams& params) {
    SearchContext ctx;
    return query(index, query_vec, params, ctx);
}

}  // namespace qivr

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "qivr/builder.hpp"
#include "qivr/datasets.hpp"
#include "qivr/eval.hpp"
#include "qivr/vec_math.hpp"

using namespace qivr;

namespace {

/// Hand-assembled index over explicit vectors and edges.
Index make_index(const std::vector<std::vector<float>>& vectors,
                 const std::vector<std::vector<uint32_t>>& edges, uint32_t m,
                 uint32_t entry) {
    const uint32_t dim = static_cast<uint32_t>(vectors[0].size());
    Index index;
    index.params.m = m;
    index.dim = dim;
    index.entry_point = entry;
    index.signatures = SignatureStore(vectors.size(), dim);
    std::vector<float> flat;
    for (size_t i = 0; i < vectors.size(); ++i) {
        auto v = vectors[i];
        normalize_l2(v.data(), dim);
        flat.insert(flat.end(), v.begin(), v.end());
        index.signatures.encode(i, v);
    }
    index.cold = ColdStore::owned(std::move(flat), vectors.size(), dim);
    index.adjacency = AdjacencyTable(static_cast<uint32_t>(vectors.size()), 2 * m);
    for (size_t u = 0; u < edges.size(); ++u) {
        index.adjacency.set_neighbors(static_cast<uint32_t>(u), edges[u]);
    }
    return index;
}

}  // namespace

TEST_CASE("beam search walks a path graph to the target") {
    // 0 - 1 - 2 chain; query is node 2's own vector.
    std::vector<std::vector<float>> vecs{
        {1.0f, 0.0f, 0.2f}, {0.6f, 0.6f, 0.2f}, {0.0f, 1.0f, 0.2f}};
    auto index = make_index(vecs, {{1}, {0, 2}, {1}}, 2, 0);

    auto v2 = vecs[2];
    normalize_l2(v2.data(), 3);
    auto sig = encode_sm2(v2);
    VisitedSet visited;
    auto pool = beam_search(index, sig, 3, 0, visited);
    REQUIRE(!pool.empty());
    CHECK(pool.front().id == 2);
    CHECK(pool.front().dist == 0);
    CHECK(pool.size() == 3);
}

TEST_CASE("single-node graph returns that node") {
    auto index = make_index({{0.3f, 0.4f}}, {{}}, 2, 0);
    VisitedSet visited;
    auto pool = beam_search(index, encode_sm2(std::vector<float>{0.6f, 0.8f}), 4, 0,
                            visited);
    REQUIRE(pool.size() == 1);
    CHECK(pool.front().id == 0);
}

TEST_CASE("beam search with ef >= N equals brute-force BQ ranking") {
    auto ds = gen_synthetic_lr(200, 64, 9, {.clusters = 16, .subdim = 16});
    BuildParams params;
    params.m = 4;
    params.ef_c = 32;
    params.threads = 1;
    auto index = build_index(ds.data.data(), ds.count, ds.dim, params);

    // reachable set from the entry point (a few nodes may be isolated)
    std::vector<bool> reachable(200, false);
    {
        std::vector<uint32_t> stack{index.entry_point};
        reachable[index.entry_point] = true;
        while (!stack.empty()) {
            const uint32_t u = stack.back();
            stack.pop_back();
            for (uint32_t i = 0; i < index.adjacency.degree(u); ++i) {
                const uint32_t v = index.adjacency.neighbors(u)[i];
                if (!reachable[v]) {
                    reachable[v] = true;
                    stack.push_back(v);
                }
            }
        }
    }

    std::mt19937_64 rng(4);
    VisitedSet visited;
    for (int t = 0; t < 20; ++t) {
        auto q = oracle::random_vector(rng, 64);
        normalize_l2(q.data(), 64);
        auto sig = encode_sm2(q);
        auto pool = beam_search(index, sig, 200, index.entry_point, visited);

        // brute-force BQ ranking over every reachable node
        std::vector<Candidate> all;
        for (uint32_t j = 0; j < 200; ++j) {
            if (!reachable[j]) continue;
            all.push_back({j, index.signatures.distance_to(sig.pos_bits.data(),
                                                           sig.strong_bits.data(), j)});
        }
        std::sort(all.begin(), all.end(), candidate_less);
        REQUIRE(pool.size() == all.size());
        for (size_t i = 0; i < pool.size(); ++i) {
            CHECK(pool[i].id == all[i].id);
            CHECK(pool[i].dist == all[i].dist);
        }
    }
}

TEST_CASE("beam search returns no duplicates and at most ef") {
    auto ds = gen_random_sphere(500, 64, 2);
    BuildParams params;
    params.m = 4;
    params.ef_c = 32;
    params.threads = 1;
    auto index = build_index(ds.data.data(), ds.count, ds.dim, params);
    VisitedSet visited;
    std::mt19937_64 rng(6);
    for (uint32_t ef : {1u, 7u, 33u, 100u}) {
        auto q = oracle::random_vector(rng, 64);
        normalize_l2(q.data(), 64);
        auto pool = beam_search(index, encode_sm2(q), ef, index.entry_point, visited);
        CHECK(pool.size() <= ef);
        std::set<uint32_t> ids;
        for (auto& c : pool) CHECK(ids.insert(c.id).second);
        CHECK(std::is_sorted(pool.begin(), pool.end(), candidate_less));
    }
}

TEST_CASE("rerank orders by exact cosine with id tie-break") {
    auto index = make_index(
        {{1.0f, 0.0f}, {0.9f, 0.1f}, {0.0f, 1.0f}, {1.0f, 0.0f}}, {{}, {}, {}, {}}, 2, 0);
    std::vector<float> q{1.0f, 0.0f};
    std::vector<Candidate> cands{{0, 0}, {1, 0}, {2, 0}, {3, 0}};

    auto res = rerank(index, cands, q, 4);
    REQUIRE(res.ids.size() == 4);
    CHECK(res.ids[0] == 0);  // ties (0 and 3 identical) break to lower id
    CHECK(res.ids[1] == 3);
    CHECK(res.ids[2] == 1);
    CHECK(res.ids[3] == 2);
    CHECK(res.scores[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::is_sorted(res.scores.rbegin(), res.scores.rend()));

    // k > |candidates| ranks everything, no error
    auto res2 = rerank(index, cands, q, 10);
    CHECK(res2.ids.size() == 4);

    // rerank order matches an independent float ordering of the subset
    std::vector<uint32_t> expect{0, 3, 1, 2};
    CHECK(res.ids == expect);
}

TEST_CASE("query finds a stored vector and respects the cold-access bound") {
    auto ds = gen_synthetic_lr(2000, 96, 77, {.clusters = 32, .subdim = 16});
    BuildParams params;
    params.m = 8;
    params.ef_c = 64;
    params.threads = 2;
    auto index = build_index(ds.data.data(), ds.count, ds.dim, params);

    SearchParams sp{64, 1};
    index.cold.reset_access_count();
    auto res = query(index, ds.row(123), sp);
    REQUIRE(res.ids.size() == 1);
    CHECK(res.ids[0] == 123);
    CHECK(res.scores[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(index.cold.access_count() <= 64);

    // k == ef reranks the entire pool
    SearchParams all{32, 32};
    auto res2 = query(index, ds.row(5), all);
    CHECK(res2.ids.size() == 32);

    CHECK_THROWS_AS(query(index, std::vector<float>(96, 0.0f), sp),
                    std::invalid_argument);
    std::vector<float> nanq(96, 0.0f);
    nanq[0] = NAN;
    CHECK_THROWS_AS(query(index, nanq, sp), std::invalid_argument);
    CHECK_THROWS_AS(query(index, std::vector<float>{1.0f}, sp), std::invalid_argument);
}

TEST_CASE("concurrent batches equal the single-threaded batch exactly") {
    auto ds = gen_synthetic_lr(3000, 96, 31, {.clusters = 32, .subdim = 16});
    BuildParams params;
    params.m = 8;
    params.ef_c = 64;
    params.threads = 2;
    auto index = build_index(ds.data.data(), ds.count, ds.dim, params);

    auto queries = gen_synthetic_lr(3000 + 200, 96, 31, {.clusters = 32, .subdim = 16});
    const float* q = queries.data.data() + 3000 * 96;  // held-out tail slice

    SearchParams sp{32, 10};
    auto seq = run_query_batch(index, q, 200, sp, 1);
    auto par = run_query_batch(index, q, 200, sp, 8);
    REQUIRE(seq.size() == par.size());
    for (size_t i = 0; i < seq.size(); ++i) {
        CHECK(seq[i].ids == par[i].ids);
        CHECK(seq[i].scores == par[i].scores);
    }
}

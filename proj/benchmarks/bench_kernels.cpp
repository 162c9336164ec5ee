// Distance-kernel and encode microbenchmarks.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "qivr/encoding.hpp"

namespace {

std::vector<float> random_vectors(size_t n, uint32_t d, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    std::vector<float> out(n * d);
    for (auto& v : out) v = gauss(rng);
    return out;
}

void BM_Sm2Distance(benchmark::State& state) {
    const uint32_t d = static_cast<uint32_t>(state.range(0));
    const size_t n = 1024;
    auto data = random_vectors(n, d, 1);
    qivr::SignatureStore store(n, d);
    for (size_t i = 0; i < n; ++i) store.encode(i, {data.data() + i * d, d});
    size_t i = 0;
    for (auto _ : state) {
        const size_t a = i % n, b = (i * 7 + 1) % n;
        benchmark::DoNotOptimize(store.distance(a, b));
        ++i;
    }
}
BENCHMARK(BM_Sm2Distance)->Arg(128)->Arg(384)->Arg(768)->Arg(1536);

void BM_HammingDistance(benchmark::State& state) {
    const uint32_t d = static_cast<uint32_t>(state.range(0));
    const size_t n = 1024;
    const size_t words = qivr::words_for_dim(d);
    auto data = random_vectors(n, d, 2);
    std::vector<uint64_t> codes(n * words);
    for (size_t i = 0; i < n; ++i) {
        auto sb = qivr::encode_sign1({data.data() + i * d, d});
        std::copy(sb.bits.begin(), sb.bits.end(), codes.begin() + i * words);
    }
    size_t i = 0;
    for (auto _ : state) {
        const size_t a = i % n, b = (i * 7 + 1) % n;
        benchmark::DoNotOptimize(qivr::hamming_distance_words(
            codes.data() + a * words, codes.data() + b * words, words));
        ++i;
    }
}
BENCHMARK(BM_HammingDistance)->Arg(768);

void BM_Sq2Distance(benchmark::State& state) {
    const uint32_t d = static_cast<uint32_t>(state.range(0));
    const size_t n = 1024;
    auto data = random_vectors(n, d, 3);
    std::vector<uint8_t> codes(n * d);
    for (size_t i = 0; i < n; ++i) {
        auto c = qivr::encode_sq2({data.data() + i * d, d});
        std::copy(c.codes.begin(), c.codes.end(), codes.begin() + i * d);
    }
    size_t i = 0;
    for (auto _ : state) {
        const size_t a = i % n, b = (i * 7 + 1) % n;
        benchmark::DoNotOptimize(
            qivr::sq2_distance_bytes(codes.data() + a * d, codes.data() + b * d, d));
        ++i;
    }
}
BENCHMARK(BM_Sq2Distance)->Arg(768);

void BM_EncodeSm2(benchmark::State& state) {
    const uint32_t d = static_cast<uint32_t>(state.range(0));
    auto data = random_vectors(64, d, 4);
    std::vector<uint64_t> sig(2 * qivr::words_for_dim(d));
    size_t i = 0;
    for (auto _ : state) {
        const float* v = data.data() + (i % 64) * d;
        qivr::encode_sm2_into({v, d}, sig.data(), sig.data() + qivr::words_for_dim(d));
        benchmark::DoNotOptimize(sig.data());
        ++i;
    }
}
BENCHMARK(BM_EncodeSm2)->Arg(768);

}  // namespace

BENCHMARK_MAIN();

#include "qivr/encoding.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>


namespace qivr {

namespace {

void check_finite(std::span<const float> vec) {
    for (float v : vec) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("encode: non-finite coordinate");
        }
    }
}

}  // namespace

float compute_threshold(std::span<const float> vec) {
    if (vec.empty()) {
        throw std::invalid_argument("compute_threshold: empty vector");
    }
    double acc = 0.0;
    for (float v : vec) acc += std::fabs(static_cast<double>(v));
    return static_cast<float>(acc / static_cast<double>(vec.size()));
}

float encode_sm2_into(std::span<const float> vec, uint64_t* pos_words,
                      uint64_t* strong_words) {
    check_finite(vec);
    const float tau = compute_threshold(vec);
    const size_t words = words_for_dim(vec.size());
    std::memset(pos_words, 0, words * sizeof(uint64_t));
    std::memset(strong_words, 0, words * sizeof(uint64_t));
    for (size_t i = 0; i < vec.size(); ++i) {
        const uint64_t bit = 1ULL << (i % 64);
        if (vec[i] > 0.0f) pos_words[i / 64] |= bit;
        if (std::fabs(vec[i]) > tau) strong_words[i / 64] |= bit;
    }
    return tau;
}

BQSignature encode_sm2(std::span<const float> vec) {
    if (vec.empty()) {
        throw std::invalid_argument("encode_sm2: empty vector");
    }
    BQSignature sig;
    sig.dim = static_cast<uint32_t>(vec.size());
    const size_t words = words_for_dim(vec.size());
    sig.pos_bits.assign(words, 0);
    sig.strong_bits.assign(words, 0);
    sig.tau = encode_sm2_into(vec, sig.pos_bits.data(), sig.strong_bits.data());
    return sig;
}

SignBits encode_sign1(std::span<const float> vec) {
    if (vec.empty()) {
        throw std::invalid_argument("encode_sign1: empty vector");
    }
    check_finite(vec);
    SignBits out;
    out.dim = static_cast<uint32_t>(vec.size());
    out.bits.assign(words_for_dim(vec.size()), 0);
    for (size_t i = 0; i < vec.size(); ++i) {
        if (vec[i] > 0.0f) out.bits[i / 64] |= 1ULL << (i % 64);
    }
    return out;
}

SQ2Code encode_sq2(std::span<const float> vec) {
    if (vec.empty()) {
        throw std::invalid_argument("encode_sq2: empty vector");
    }
    check_finite(vec);
    SQ2Code out;
    out.dim = static_cast<uint32_t>(vec.size());
    out.codes.resize(vec.size());

    // Four equal-width buckets over the per-vector mean +- 2*std range,
    // values outside clamped to the edge buckets. A raw min/max range lets
    // single extreme coordinates set the scale, which measurably degrades
    // ranking fidelity below the 2-bit sign-magnitude code.
    double mean = 0.0;
    for (float v : vec) mean += v;
    mean /= static_cast<double>(vec.size());
    double var = 0.0;
    for (float v : vec) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(vec.size()));

    // Degenerate zero-spread vector: everything lands in bucket 0.
    if (!(sd > 0.0)) {
        std::fill(out.codes.begin(), out.codes.end(), uint8_t{0});
        return out;
    }
    const float lo = static_cast<float>(mean - 2.0 * sd);
    const float width = static_cast<float>(sd);  // (4*sd range) / 4 buckets
    for (size_t i = 0; i < vec.size(); ++i) {
        int b = static_cast<int>((vec[i] - lo) / width);
        b = std::max(0, std::min(3, b));
        out.codes[i] = static_cast<uint8_t>(b);
    }
    return out;
}

uint32_t sm2_distance(const BQSignature& a, const BQSignature& b) {
    if (a.dim != b.dim) {
        throw std::invalid_argument("sm2_distance: dimension mismatch");
    }
    return sm2_distance_words(a.pos_bits.data(), a.strong_bits.data(),
                              b.pos_bits.data(), b.strong_bits.data(),
                              words_for_dim(a.dim));
}

uint32_t hamming_distance(const SignBits& a, const SignBits& b) {
    if (a.dim != b.dim) {
        throw std::invalid_argument("hamming_distance: dimension mismatch");
    }
    return hamming_distance_words(a.bits.data(), b.bits.data(), words_for_dim(a.dim));
}

uint32_t sq2_distance(const SQ2Code& a, const SQ2Code& b) {
    if (a.dim != b.dim) {
        throw std::invalid_argument("sq2_distance: dimension mismatch");
    }
    return sq2_distance_bytes(a.codes.data(), b.codes.data(), a.dim);
}

EncodingDiagnostics strong_bit_rate(const float* data, size_t count, uint32_t dim) {
    if (count == 0 || dim == 0) {
        throw std::invalid_argument("strong_bit_rate: empty sample");
    }
    const size_t words = words_for_dim(dim);
    std::vector<uint64_t> pos(words), strong(words);
    uint64_t strong_total = 0;
    for (size_t i = 0; i < count; ++i) {
        encode_sm2_into({data + i * dim, dim}, pos.data(), strong.data());
        for (uint64_t w : strong) strong_total += static_cast<uint64_t>(__builtin_popcountll(w));
    }
    EncodingDiagnostics d;
    d.sample_size = count;
    d.p_s = static_cast<double>(strong_total) / (static_cast<double>(count) * dim);
    d.nu2 = (1.0 + 3.0 * d.p_s) * (1.0 + 3.0 * d.p_s);
    return d;
}

EncodingDiagnostics strong_bit_rate(const SignatureStore& store) {
    if (store.count() == 0) {
        throw std::invalid_argument("strong_bit_rate: empty store");
    }
    uint64_t strong_total = 0;
    for (size_t i = 0; i < store.count(); ++i) {
        const uint64_t* s = store.strong(i);
        for (size_t w = 0; w < store.words(); ++w) {
            strong_total += static_cast<uint64_t>(__builtin_popcountll(s[w]));
        }
    }
    EncodingDiagnostics d;
    d.sample_size = store.count();
    d.p_s = static_cast<double>(strong_total) /
            (static_cast<double>(store.count()) * store.dim());
    d.nu2 = (1.0 + 3.0 * d.p_s) * (1.0 + 3.0 * d.p_s);
    return d;
}

}  // namespace qivr

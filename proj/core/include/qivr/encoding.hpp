#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#if defined(__AVX2__) || defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace qivr {

/// Number of 64-bit words needed to hold `dim` bits.
inline constexpr size_t words_for_dim(size_t dim) { return (dim + 63) / 64; }

/// 2-bit sign-magnitude signature of one vector.
///
/// pos_bits[i]    = 1  iff  x_i > 0          (strict)
/// strong_bits[i] = 1  iff  |x_i| > tau      (strict, tau = mean |x_i|)
///
/// Bits are packed little-endian into 64-bit words: bit i lives in word
/// i/64 at position i%64. Pad bits beyond dim are always zero, so whole-word
/// XOR/popcount needs no masking.
struct BQSignature {
    std::vector<uint64_t> pos_bits;
    std::vector<uint64_t> strong_bits;
    float tau = 0.0f;
    uint32_t dim = 0;
};

/// 1-bit sign-only signature (plain sign hash). Same packing rules.
struct SignBits {
    std::vector<uint64_t> bits;
    uint32_t dim = 0;
};

/// 2-bit uniform scalar quantization code, one byte per dimension in {0..3}.
/// Ablation baseline; not used on the hot path.
struct SQ2Code {
    std::vector<uint8_t> codes;
    uint32_t dim = 0;
};

/// Strong-bit statistics of a vector sample.
struct EncodingDiagnostics {
    double p_s = 0.0;        // Pr[|x_i| > tau] over the sample
    double nu2 = 1.0;        // (1 + 3*p_s)^2
    size_t sample_size = 0;
};

/// Mean absolute coordinate value. Throws std::invalid_argument on an
/// empty vector.
float compute_threshold(std::span<const float> vec);

BQSignature encode_sm2(std::span<const float> vec);
SignBits encode_sign1(std::span<const float> vec);
SQ2Code encode_sq2(std::span<const float> vec);

/// Low-level encode into caller-owned word storage (words_for_dim(dim) words
/// each, will be fully overwritten including pad bits). Returns tau.
float encode_sm2_into(std::span<const float> vec, uint64_t* pos_words,
                      uint64_t* strong_words);

// ---------------------------------------------------------------------------
// Distance kernels. Defined inline: every hot loop in the library (beam
// search, pruning, brute-force scans) funnels through these.
//
// sm2: per dimension with disagreeing signs, penalty 4 if both strong,
// 2 if exactly one strong, 1 if neither. With x = pos_a XOR pos_b this
// reduces to popcount(x) + popcount(x & (sa|sb)) + 2*popcount(x & (sa&sb)).
// ---------------------------------------------------------------------------

namespace detail {

#if defined(__AVX2__)
// Per-byte popcount via nibble lookup (no VPOPCNTDQ required).
inline __m256i popcount_bytes(__m256i v) {
    const __m256i lut = _mm256_setr_epi8(
        0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
        0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
    const __m256i low_mask = _mm256_set1_epi8(0x0F);
    __m256i lo = _mm256_and_si256(v, low_mask);
    __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
    return _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
}

inline uint64_t hsum_epi64(__m256i v) {
    __m128i lo = _mm256_castsi256_si128(v);
    __m128i hi = _mm256_extracti128_si256(v, 1);
    __m128i s = _mm_add_epi64(lo, hi);
    return static_cast<uint64_t>(_mm_extract_epi64(s, 0)) +
           static_cast<uint64_t>(_mm_extract_epi64(s, 1));
}
#endif

#if defined(__AVX512F__) && defined(__AVX512BW__)
inline __m512i popcount_bytes512(__m512i v) {
    const __m512i lut = _mm512_broadcast_i32x4(
        _mm_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4));
    const __m512i low_mask = _mm512_set1_epi8(0x0F);
    __m512i lo = _mm512_and_si512(v, low_mask);
    __m512i hi = _mm512_and_si512(_mm512_srli_epi16(v, 4), low_mask);
    return _mm512_add_epi8(_mm512_shuffle_epi8(lut, lo), _mm512_shuffle_epi8(lut, hi));
}
#endif

}  // namespace detail

inline uint32_t sm2_distance_words(const uint64_t* pos_a, const uint64_t* strong_a,
                                   const uint64_t* pos_b, const uint64_t* strong_b,
                                   size_t words) {
    uint64_t total = 0;
    size_t i = 0;
#if defined(__AVX512F__) && defined(__AVX512BW__)
    {
        // Full-width 512-bit lanes with a masked tail load; per-byte weighted
        // count <= 8 + 8 + 2*8 = 32, fits in a byte.
        __m512i acc = _mm512_setzero_si512();
        const __m512i zero = _mm512_setzero_si512();
        auto step = [&](__m512i pa, __m512i pb, __m512i sa, __m512i sb) {
            __m512i x = _mm512_xor_si512(pa, pb);
            __m512i x_or = _mm512_ternarylogic_epi64(x, sa, sb, 0xE0);   // x & (sa|sb)
            __m512i x_and = _mm512_ternarylogic_epi64(x, sa, sb, 0x80);  // x & sa & sb
            __m512i cnt_and = detail::popcount_bytes512(x_and);
            __m512i cnt = _mm512_add_epi8(detail::popcount_bytes512(x),
                                          detail::popcount_bytes512(x_or));
            cnt = _mm512_add_epi8(cnt, _mm512_add_epi8(cnt_and, cnt_and));
            acc = _mm512_add_epi64(acc, _mm512_sad_epu8(cnt, zero));
        };
        for (; i + 8 <= words; i += 8) {
            step(_mm512_loadu_si512(pos_a + i), _mm512_loadu_si512(pos_b + i),
                 _mm512_loadu_si512(strong_a + i), _mm512_loadu_si512(strong_b + i));
        }
        if (i < words) {
            const __mmask8 m = static_cast<__mmask8>((1u << (words - i)) - 1);
            step(_mm512_maskz_loadu_epi64(m, pos_a + i),
                 _mm512_maskz_loadu_epi64(m, pos_b + i),
                 _mm512_maskz_loadu_epi64(m, strong_a + i),
                 _mm512_maskz_loadu_epi64(m, strong_b + i));
            i = words;
        }
        total = _mm512_reduce_add_epi64(acc);
    }
#elif defined(__AVX2__)
    if (words >= 4) {
        __m256i acc = _mm256_setzero_si256();
        const __m256i zero = _mm256_setzero_si256();
        for (; i + 4 <= words; i += 4) {
            __m256i pa = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(pos_a + i));
            __m256i pb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(pos_b + i));
            __m256i sa =
                _mm256_loadu_si256(reinterpret_cast<const __m256i*>(strong_a + i));
            __m256i sb =
                _mm256_loadu_si256(reinterpret_cast<const __m256i*>(strong_b + i));
            __m256i x = _mm256_xor_si256(pa, pb);
            __m256i x_or = _mm256_and_si256(x, _mm256_or_si256(sa, sb));
            __m256i x_and = _mm256_and_si256(x, _mm256_and_si256(sa, sb));
            // Per-byte weighted count <= 8 + 8 + 2*8 = 32, fits in a byte.
            __m256i cnt_and = detail::popcount_bytes(x_and);
            __m256i cnt = _mm256_add_epi8(detail::popcount_bytes(x),
                                          detail::popcount_bytes(x_or));
            cnt = _mm256_add_epi8(cnt, _mm256_add_epi8(cnt_and, cnt_and));
            acc = _mm256_add_epi64(acc, _mm256_sad_epu8(cnt, zero));
        }
        total += detail::hsum_epi64(acc);
    }
#endif
    for (; i < words; ++i) {
        const uint64_t x = pos_a[i] ^ pos_b[i];
        const uint64_t s_or = strong_a[i] | strong_b[i];
        const uint64_t s_and = strong_a[i] & strong_b[i];
        total += static_cast<uint64_t>(__builtin_popcountll(x)) +
                 static_cast<uint64_t>(__builtin_popcountll(x & s_or)) +
                 2ULL * static_cast<uint64_t>(__builtin_popcountll(x & s_and));
    }
    return static_cast<uint32_t>(total);
}

inline uint32_t hamming_distance_words(const uint64_t* a, const uint64_t* b,
                                       size_t words) {
    uint64_t total = 0;
    size_t i = 0;
#if defined(__AVX2__)
    if (words >= 4) {
        __m256i acc = _mm256_setzero_si256();
        const __m256i zero = _mm256_setzero_si256();
        for (; i + 4 <= words; i += 4) {
            __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
            __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
            __m256i cnt = detail::popcount_bytes(_mm256_xor_si256(va, vb));
            acc = _mm256_add_epi64(acc, _mm256_sad_epu8(cnt, zero));
        }
        total += detail::hsum_epi64(acc);
    }
#endif
    for (; i < words; ++i) {
        total += static_cast<uint64_t>(__builtin_popcountll(a[i] ^ b[i]));
    }
    return static_cast<uint32_t>(total);
}

inline uint32_t sq2_distance_bytes(const uint8_t* a, const uint8_t* b, size_t n) {
    uint32_t acc = 0;
    for (size_t i = 0; i < n; ++i) {
        const int d = static_cast<int>(a[i]) - static_cast<int>(b[i]);
        acc += static_cast<uint32_t>(d < 0 ? -d : d);
    }
    return acc;
}

/// Checked wrappers; throw std::invalid_argument on dimension mismatch.
uint32_t sm2_distance(const BQSignature& a, const BQSignature& b);
uint32_t hamming_distance(const SignBits& a, const SignBits& b);
uint32_t sq2_distance(const SQ2Code& a, const SQ2Code& b);

/// Contiguous signature storage, node-major: per node, pos words followed by
/// strong words (stride 2*words). This is also the on-disk layout.
class SignatureStore {
public:
    SignatureStore() = default;
    SignatureStore(size_t count, uint32_t dim)
        : dim_(dim), words_(words_for_dim(dim)), count_(count),
          data_(count * 2 * words_for_dim(dim), 0) {}

    size_t count() const { return count_; }
    uint32_t dim() const { return dim_; }
    size_t words() const { return words_; }
    size_t size_bytes() const { return data_.size() * sizeof(uint64_t); }

    const uint64_t* pos(size_t i) const { return data_.data() + i * 2 * words_; }
    const uint64_t* strong(size_t i) const { return pos(i) + words_; }

    /// Encode vec into slot i; returns tau.
    float encode(size_t i, std::span<const float> vec) {
        uint64_t* p = data_.data() + i * 2 * words_;
        return encode_sm2_into(vec, p, p + words_);
    }

    uint32_t distance(size_t i, size_t j) const {
        return sm2_distance_words(pos(i), strong(i), pos(j), strong(j), words_);
    }
    uint32_t distance_to(const uint64_t* qpos, const uint64_t* qstrong, size_t i) const {
        return sm2_distance_words(qpos, qstrong, pos(i), strong(i), words_);
    }

    uint64_t* raw() { return data_.data(); }
    const uint64_t* raw() const { return data_.data(); }

private:
    uint32_t dim_ = 0;
    size_t words_ = 0;
    size_t count_ = 0;
    std::vector<uint64_t> data_;
};

/// p_s and nu2 over a flat row-major sample (count x dim). Throws on an
/// empty sample.
EncodingDiagnostics strong_bit_rate(const float* data, size_t count, uint32_t dim);

/// Same statistics recovered from already-encoded signatures.
EncodingDiagnostics strong_bit_rate(const SignatureStore& store);

}  // namespace qivr

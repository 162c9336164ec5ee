#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qivr/index.hpp"

namespace qivr {

/// On-disk index header. The file holds hot segments first so a streaming
/// loader can stop before the cold segment in mapped mode:
///   [header, 64 bytes] [signatures] [adjacency] [cold float32]
/// All integers little-endian; alpha persisted as milli-units to keep the
/// header integer-only.
struct IndexFileHeader {
    static constexpr char kMagic[4] = {'Q', 'I', 'V', 'R'};
    static constexpr uint32_t kVersion = 1;

    uint32_t version = kVersion;
    uint64_t num_nodes = 0;
    uint32_t dim = 0;
    uint32_t m = 0;
    uint32_t alpha_milli = 0;
    uint64_t entry_point = 0;
    uint64_t sig_offset = 0;
    uint64_t adj_offset = 0;
    uint64_t cold_offset = 0;
};

enum class ColdMode { eager, mapped };

void save_index(const Index& index, const std::string& path);

/// Load an index. In mapped mode the hot segments are read eagerly and the
/// cold segment is served from a read-only memory map of the file.
/// Throws std::runtime_error on bad magic/version, truncation, or
/// inconsistent offsets — never returns a partial index.
Index load_index(const std::string& path, ColdMode mode);

/// Logical (formula) sizes of the three stores, in bytes:
///   signatures  n * 2 * ceil(d/64) * 8
///   adjacency   n * (2m+1) * 4
///   cold        n * d * 4
struct MemoryReport {
    uint64_t hot_signatures_bytes = 0;
    uint64_t hot_adjacency_bytes = 0;
    uint64_t cold_vector_bytes = 0;
};

MemoryReport memory_report(const Index& index);
MemoryReport memory_report_for(uint64_t num_nodes, uint32_t dim, uint32_t m);

/// Row-major matrices for the fvecs/ivecs interchange formats: repeated
/// records of [int32 dim][dim x payload], all records sharing one dim.
struct FloatMatrix {
    std::vector<float> values;
    size_t count = 0;
    uint32_t dim = 0;
    std::span<const float> row(size_t i) const {
        return {values.data() + i * dim, dim};
    }
};

struct IntMatrix {
    std::vector<int32_t> values;
    size_t count = 0;
    uint32_t dim = 0;
    std::span<const int32_t> row(size_t i) const {
        return {values.data() + i * dim, dim};
    }
};

FloatMatrix read_fvecs(const std::string& path);
IntMatrix read_ivecs(const std::string& path);
void write_fvecs(const std::string& path, const float* data, size_t count, uint32_t dim);
void write_ivecs(const std::string& path, const int32_t* data, size_t count, uint32_t dim);

}  // namespace qivr

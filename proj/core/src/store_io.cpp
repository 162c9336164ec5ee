#include "qivr/store_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace qivr {

namespace {

constexpr size_t kHeaderBytes = 64;  // 60 bytes of fields, zero-padded

void put_u32(uint8_t* p, uint32_t v) {
    p[0] = static_cast<uint8_t>(v);
    p[1] = static_cast<uint8_t>(v >> 8);
    p[2] = static_cast<uint8_t>(v >> 16);
    p[3] = static_cast<uint8_t>(v >> 24);
}
void put_u64(uint8_t* p, uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<uint8_t>(v >> (8 * i));
}
uint32_t get_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
           static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}
uint64_t get_u64(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
}

void encode_header(const IndexFileHeader& h, uint8_t out[kHeaderBytes]) {
    std::memset(out, 0, kHeaderBytes);
    std::memcpy(out, IndexFileHeader::kMagic, 4);
    put_u32(out + 4, h.version);
    put_u64(out + 8, h.num_nodes);
    put_u32(out + 16, h.dim);
    put_u32(out + 20, h.m);
    put_u32(out + 24, h.alpha_milli);
    put_u64(out + 28, h.entry_point);
    put_u64(out + 36, h.sig_offset);
    put_u64(out + 44, h.adj_offset);
    put_u64(out + 52, h.cold_offset);
}

IndexFileHeader decode_header(const uint8_t in[kHeaderBytes]) {
    if (std::memcmp(in, IndexFileHeader::kMagic, 4) != 0) {
        throw std::runtime_error("load_index: bad magic");
    }
    IndexFileHeader h;
    h.version = get_u32(in + 4);
    if (h.version != IndexFileHeader::kVersion) {
        throw std::runtime_error("load_index: unsupported version " +
                                 std::to_string(h.version));
    }
    h.num_nodes = get_u64(in + 8);
    h.dim = get_u32(in + 16);
    h.m = get_u32(in + 20);
    h.alpha_milli = get_u32(in + 24);
    h.entry_point = get_u64(in + 28);
    h.sig_offset = get_u64(in + 36);
    h.adj_offset = get_u64(in + 44);
    h.cold_offset = get_u64(in + 52);
    return h;
}

struct SegmentSizes {
    uint64_t sig, adj, cold;
};

SegmentSizes segment_sizes(uint64_t n, uint32_t dim, uint32_t m) {
    return {n * 2 * words_for_dim(dim) * 8, n * (2ull * m + 1) * 4, n * dim * 4ull};
}

void validate_header(const IndexFileHeader& h, uint64_t file_size) {
    if (h.num_nodes == 0 || h.dim == 0 || h.m == 0) {
        throw std::runtime_error("load_index: degenerate header fields");
    }
    const auto sz = segment_sizes(h.num_nodes, h.dim, h.m);
    if (h.sig_offset < kHeaderBytes || h.adj_offset <= h.sig_offset ||
        h.cold_offset <= h.adj_offset) {
        throw std::runtime_error("load_index: offsets not strictly increasing");
    }
    if (h.adj_offset - h.sig_offset != sz.sig || h.cold_offset - h.adj_offset != sz.adj) {
        throw std::runtime_error("load_index: segment lengths inconsistent with header");
    }
    if (file_size != h.cold_offset + sz.cold) {
        throw std::runtime_error("load_index: truncated or oversized file");
    }
    if (h.entry_point >= h.num_nodes) {
        throw std::runtime_error("load_index: entry point out of range");
    }
}

}  // namespace

void save_index(const Index& index, const std::string& path) {
    const uint64_t n = index.size();
    const auto sz = segment_sizes(n, index.dim, index.params.m);

    IndexFileHeader h;
    h.num_nodes = n;
    h.dim = index.dim;
    h.m = index.params.m;
    h.alpha_milli = static_cast<uint32_t>(std::lround(index.params.alpha * 1000.0f));
    h.entry_point = index.entry_point;
    h.sig_offset = kHeaderBytes;
    h.adj_offset = h.sig_offset + sz.sig;
    h.cold_offset = h.adj_offset + sz.adj;

    uint8_t header_bytes[kHeaderBytes];
    encode_header(h, header_bytes);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_index: cannot open " + path);
    out.write(reinterpret_cast<const char*>(header_bytes), kHeaderBytes);
    out.write(reinterpret_cast<const char*>(index.signatures.raw()),
              static_cast<std::streamsize>(sz.sig));
    out.write(reinterpret_cast<const char*>(index.adjacency.raw()),
              static_cast<std::streamsize>(sz.adj));
    out.write(reinterpret_cast<const char*>(index.cold.raw()),
              static_cast<std::streamsize>(sz.cold));
    if (!out) throw std::runtime_error("save_index: write failed for " + path);
}

Index load_index(const std::string& path, ColdMode mode) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_index: cannot open " + path);
    in.seekg(0, std::ios::end);
    const uint64_t file_size = static_cast<uint64_t>(in.tellg());
    in.seekg(0);
    if (file_size < kHeaderBytes) throw std::runtime_error("load_index: truncated file");

    uint8_t header_bytes[kHeaderBytes];
    in.read(reinterpret_cast<char*>(header_bytes), kHeaderBytes);
    if (!in) throw std::runtime_error("load_index: header read failed");
    const IndexFileHeader h = decode_header(header_bytes);
    validate_header(h, file_size);

    const auto sz = segment_sizes(h.num_nodes, h.dim, h.m);
    Index index;
    index.dim = h.dim;
    index.entry_point = static_cast<uint32_t>(h.entry_point);
    index.params.m = h.m;
    index.params.alpha = static_cast<float>(h.alpha_milli) / 1000.0f;

    index.signatures = SignatureStore(h.num_nodes, h.dim);
    in.seekg(static_cast<std::streamoff>(h.sig_offset));
    in.read(reinterpret_cast<char*>(index.signatures.raw()),
            static_cast<std::streamsize>(sz.sig));

    index.adjacency = AdjacencyTable(static_cast<uint32_t>(h.num_nodes), 2 * h.m);
    in.read(reinterpret_cast<char*>(index.adjacency.raw()),
            static_cast<std::streamsize>(sz.adj));
    if (!in) throw std::runtime_error("load_index: hot segment read failed");

    if (mode == ColdMode::eager) {
        std::vector<float> cold(h.num_nodes * static_cast<size_t>(h.dim));
        in.read(reinterpret_cast<char*>(cold.data()), static_cast<std::streamsize>(sz.cold));
        if (!in) throw std::runtime_error("load_index: cold segment read failed");
        index.cold = ColdStore::owned(std::move(cold), h.num_nodes, h.dim);
    } else {
        auto file = std::make_shared<MappedFile>(path);
        index.cold = ColdStore::mapped(std::move(file), h.cold_offset, h.num_nodes, h.dim);
    }
    return index;
}

MemoryReport memory_report_for(uint64_t num_nodes, uint32_t dim, uint32_t m) {
    const auto sz = segment_sizes(num_nodes, dim, m);
    return {sz.sig, sz.adj, sz.cold};
}

MemoryReport memory_report(const Index& index) {
    return memory_report_for(index.size(), index.dim, index.params.m);
}

namespace {

template <typename T, typename Matrix>
Matrix read_xvecs(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(std::string(what) + ": cannot open " + path);
    in.seekg(0, std::ios::end);
    const uint64_t file_size = static_cast<uint64_t>(in.tellg());
    in.seekg(0);

    Matrix m;
    uint64_t offset = 0;
    while (offset < file_size) {
        if (file_size - offset < 4) {
            throw std::runtime_error(std::string(what) + ": truncated record header");
        }
        int32_t dim = 0;
        in.read(reinterpret_cast<char*>(&dim), 4);
        if (dim <= 0) throw std::runtime_error(std::string(what) + ": non-positive dim");
        if (m.count == 0) {
            m.dim = static_cast<uint32_t>(dim);
        } else if (static_cast<uint32_t>(dim) != m.dim) {
            throw std::runtime_error(std::string(what) + ": inconsistent dims");
        }
        const uint64_t payload = static_cast<uint64_t>(dim) * sizeof(T);
        if (file_size - offset - 4 < payload) {
            throw std::runtime_error(std::string(what) + ": truncated record payload");
        }
        m.values.resize(m.values.size() + dim);
        in.read(reinterpret_cast<char*>(m.values.data() + m.count * m.dim),
                static_cast<std::streamsize>(payload));
        if (!in) throw std::runtime_error(std::string(what) + ": read failed");
        m.count += 1;
        offset += 4 + payload;
    }
    return m;
}

template <typename T>
void write_xvecs(const std::string& path, const T* data, size_t count, uint32_t dim,
                 const char* what) {
    if (dim == 0 && count > 0) {
        throw std::invalid_argument(std::string(what) + ": zero dim");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(std::string(what) + ": cannot open " + path);
    const int32_t d = static_cast<int32_t>(dim);
    for (size_t i = 0; i < count; ++i) {
        out.write(reinterpret_cast<const char*>(&d), 4);
        out.write(reinterpret_cast<const char*>(data + i * dim),
                  static_cast<std::streamsize>(dim * sizeof(T)));
    }
    if (!out) throw std::runtime_error(std::string(what) + ": write failed");
}

}  // namespace

FloatMatrix read_fvecs(const std::string& path) {
    return read_xvecs<float, FloatMatrix>(path, "read_fvecs");
}
IntMatrix read_ivecs(const std::string& path) {
    return read_xvecs<int32_t, IntMatrix>(path, "read_ivecs");
}
void write_fvecs(const std::string& path, const float* data, size_t count, uint32_t dim) {
    write_xvecs(path, data, count, dim, "write_fvecs");
}
void write_ivecs(const std::string& path, const int32_t* data, size_t count, uint32_t dim) {
    write_xvecs(path, data, count, dim, "write_ivecs");
}

}  // namespace qivr

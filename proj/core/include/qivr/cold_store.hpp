#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qivr {

/// Read-only mmap of a whole file. Unmaps on destruction.
class MappedFile {
public:
    MappedFile() = default;
    explicit MappedFile(const std::string& path);
    ~MappedFile();

    MappedFile(MappedFile&& other) noexcept;
    MappedFile& operator=(MappedFile&& other) noexcept;
    MappedFile(const MappedFile&) = delete;
    MappedFile& operator=(const MappedFile&) = delete;

    const uint8_t* data() const { return base_; }
    size_t size() const { return size_; }
    bool valid() const { return base_ != nullptr; }

private:
    const uint8_t* base_ = nullptr;
    size_t size_ = 0;
};

/// The float32 side of the index: unit-normalized vectors touched only at
/// rerank time. Either owns a heap buffer (eager) or views a byte range of a
/// memory-mapped index file (mapped). vec() counts accesses so the
/// rerank-only contract is checkable.
class ColdStore {
public:
    ColdStore() = default;

    static ColdStore owned(std::vector<float> data, size_t count, uint32_t dim);
    static ColdStore mapped(std::shared_ptr<MappedFile> file, size_t byte_offset,
                            size_t count, uint32_t dim);

    size_t count() const { return count_; }
    uint32_t dim() const { return dim_; }
    bool is_mapped() const { return file_ != nullptr; }
    size_t size_bytes() const { return count_ * static_cast<size_t>(dim_) * sizeof(float); }

    /// Counted per-vector access — the query path goes through here.
    std::span<const float> vec(size_t i) const {
        accesses_.fetch_add(1, std::memory_order_relaxed);
        return {base_ + i * dim_, dim_};
    }

    /// Uncounted bulk view for construction, persistence and oracles.
    const float* raw() const { return base_; }

    uint64_t access_count() const { return accesses_.load(std::memory_order_relaxed); }
    void reset_access_count() const { accesses_.store(0, std::memory_order_relaxed); }

    ColdStore(ColdStore&& other) noexcept { *this = std::move(other); }
    ColdStore& operator=(ColdStore&& other) noexcept {
        owned_ = std::move(other.owned_);
        file_ = std::move(other.file_);
        base_ = other.base_;
        count_ = other.count_;
        dim_ = other.dim_;
        accesses_.store(other.accesses_.load(std::memory_order_relaxed),
                        std::memory_order_relaxed);
        return *this;
    }

private:
    std::vector<float> owned_;
    std::shared_ptr<MappedFile> file_;
    const float* base_ = nullptr;
    size_t count_ = 0;
    uint32_t dim_ = 0;
    mutable std::atomic<uint64_t> accesses_{0};
};

}  // namespace qivr

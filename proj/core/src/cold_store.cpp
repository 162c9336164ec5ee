#include "qivr/cold_store.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cstring>
#include <stdexcept>

namespace qivr {

MappedFile::MappedFile(const std::string& path) {
    int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) {
        throw std::runtime_error("MappedFile: cannot open " + path);
    }
    struct stat st {};
    if (::fstat(fd, &st) != 0) {
        ::close(fd);
        throw std::runtime_error("MappedFile: fstat failed for " + path);
    }
    size_ = static_cast<size_t>(st.st_size);
    if (size_ > 0) {
        void* addr = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
        if (addr == MAP_FAILED) {
            ::close(fd);
            throw std::runtime_error("MappedFile: mmap failed for " + path);
        }
        base_ = static_cast<const uint8_t*>(addr);
    }
    ::close(fd);
}

MappedFile::~MappedFile() {
    if (base_ != nullptr) {
        ::munmap(const_cast<uint8_t*>(base_), size_);
    }
}

MappedFile::MappedFile(MappedFile&& other) noexcept
    : base_(other.base_), size_(other.size_) {
    other.base_ = nullptr;
    other.size_ = 0;
}

MappedFile& MappedFile::operator=(MappedFile&& other) noexcept {
    if (this != &other) {
        if (base_ != nullptr) {
            ::munmap(const_cast<uint8_t*>(base_), size_);
        }
        base_ = other.base_;
        size_ = other.size_;
        other.base_ = nullptr;
        other.size_ = 0;
    }
    return *this;
}

ColdStore ColdStore::owned(std::vector<float> data, size_t count, uint32_t dim) {
    if (data.size() != count * static_cast<size_t>(dim)) {
        throw std::invalid_argument("ColdStore: buffer size does not match count*dim");
    }
    ColdStore s;
    s.owned_ = std::move(data);
    s.base_ = s.owned_.data();
    s.count_ = count;
    s.dim_ = dim;
    return s;
}

ColdStore ColdStore::mapped(std::shared_ptr<MappedFile> file, size_t byte_offset,
                            size_t count, uint32_t dim) {
    const size_t need = byte_offset + count * static_cast<size_t>(dim) * sizeof(float);
    if (!file || !file->valid() || file->size() < need) {
        throw std::invalid_argument("ColdStore: mapped region out of bounds");
    }
    if (byte_offset % alignof(float) != 0) {
        throw std::invalid_argument("ColdStore: misaligned cold segment");
    }
    ColdStore s;
    s.file_ = std::move(file);
    s.base_ = reinterpret_cast<const float*>(s.file_->data() + byte_offset);
    s.count_ = count;
    s.dim_ = dim;
    return s;
}

}  // namespace qivr

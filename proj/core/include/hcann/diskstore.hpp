#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "hcann/graphbuild.hpp"
#include "hcann/layout.hpp"
#include "hcann/vecdata.hpp"

namespace hcann {

/// On-disk layout (little-endian throughout):
///
///   block 0 (page_size bytes): header
///     char[8] magic "GOVI1\0\0\0", u32 version, u32 page_size, u32 dim, u32 R,
///     u64 n, u32 page_capacity, u32 layout_kind, u64 total_pages, u64 entry_id
///   block 1 + p: page p
///     u16 node_count, 6 reserved bytes, node_count slots, zero fill
///   slot: u64 node_id, dim f32, u16 degree, R u64 neighbor ids (unused = ~0)
struct IndexFileHeader {
    std::uint32_t page_size = 4096;
    std::uint32_t dim = 0;
    std::uint64_t n = 0;
    std::uint32_t max_degree = 0;
    std::uint32_t page_capacity = 0;
    std::uint64_t total_pages = 0;
    std::uint64_t entry_id = 0;
    LayoutKind layout_kind = LayoutKind::kInsertion;

    bool operator==(const IndexFileHeader&) const = default;
};

inline constexpr std::size_t kPageHeaderBytes = 8;
inline constexpr std::uint32_t kDefaultPageSize = 4096;

constexpr std::size_t slot_size(std::uint32_t dim, std::uint32_t max_degree) {
    return 8 + 4 * static_cast<std::size_t>(dim) + 2 + 8 * static_cast<std::size_t>(max_degree);
}

/// Most slots that fit one page; 0 when even a single slot does not fit.
constexpr std::uint32_t max_page_capacity(std::uint32_t dim, std::uint32_t max_degree, std::uint32_t page_size) {
    if (page_size <= kPageHeaderBytes) return 0;
    return static_cast<std::uint32_t>((page_size - kPageHeaderBytes) / slot_size(dim, max_degree));
}

struct NodeRecord {
    NodeId id = 0;
    std::vector<float> vector;
    std::vector<NodeId> neighbors;

    bool operator==(const NodeRecord&) const = default;
};

struct DiskPage {
    std::uint64_t page_id = 0;
    std::vector<NodeRecord> nodes;

    const NodeRecord* find(NodeId id) const;
};

struct IoStats {
    std::uint64_t io_ops = 0;
    std::uint64_t pages_read = 0;
    std::uint64_t bytes_read = 0;

    IoStats& operator+=(const IoStats& o) {
        io_ops += o.io_ops;
        pages_read += o.pages_read;
        bytes_read += o.bytes_read;
        return *this;
    }
    bool operator==(const IoStats&) const = default;
};

/// Writes header + pages in page order. Byte-deterministic for fixed inputs.
/// Throws ConfigError when layout.page_capacity slots do not fit page_size.
void write_index(const std::string& path, const VectorDataset& dataset, const GraphIndex& graph,
                 const LayoutMap& layout, std::uint32_t page_size = kDefaultPageSize);

/// Read-only handle on an index file. Reads are positional (pread) so one
/// handle serves concurrent readers; I/O counters are atomic.
class DiskIndex {
  public:
    /// `try_direct_io` requests O_DIRECT; direct_io_active() reports whether it stuck.
    explicit DiskIndex(const std::string& path, bool try_direct_io = false);
    ~DiskIndex();

    DiskIndex(const DiskIndex&) = delete;
    DiskIndex& operator=(const DiskIndex&) = delete;

    const IndexFileHeader& header() const { return header_; }
    bool direct_io_active() const { return direct_; }

    /// One request for one page.
    DiskPage read_page(std::uint64_t page_id) const;
    /// One request for a contiguous run of pages.
    std::vector<DiskPage> read_page_range(const ReadInterval& interval) const;

    IoStats stats() const;
    void reset_stats();

  private:
    void read_blocks(std::uint64_t first_page, std::uint64_t count, std::uint8_t* dst) const;
    DiskPage decode_page(std::uint64_t page_id, const std::uint8_t* bytes) const;

    std::string path_;
    int fd_ = -1;
    bool direct_ = false;
    IndexFileHeader header_;
    mutable std::atomic<std::uint64_t> io_ops_{0};
    mutable std::atomic<std::uint64_t> pages_read_{0};
    mutable std::atomic<std::uint64_t> bytes_read_{0};
};

IndexFileHeader read_index_header(const std::string& path);

}  // namespace hcann

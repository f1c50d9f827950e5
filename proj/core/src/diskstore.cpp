#include "hcann/diskstore.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>

#include "hcann/binary_io.hpp"
#include "hcann/error.hpp"

namespace hcann {

namespace {

constexpr char kIndexMagic[8] = {'G', 'O', 'V', 'I', '1', 0, 0, 0};
constexpr std::uint32_t kIndexVersion = 1;
constexpr std::uint64_t kNoNeighbor = std::numeric_limits<std::uint64_t>::max();
constexpr std::size_t kIoAlign = 4096;

struct AlignedFree {
    void operator()(std::uint8_t* p) const { std::free(p); }
};
using AlignedBuffer = std::unique_ptr<std::uint8_t, AlignedFree>;

AlignedBuffer aligned_buffer(std::size_t bytes) {
    const std::size_t rounded = (bytes + kIoAlign - 1) / kIoAlign * kIoAlign;
    auto* p = static_cast<std::uint8_t*>(std::aligned_alloc(kIoAlign, rounded));
    if (p == nullptr) throw std::bad_alloc();
    return AlignedBuffer(p);
}

IndexFileHeader decode_header(const std::uint8_t* bytes, std::size_t size, const std::string& path) {
    binio::Cursor cur({bytes, size}, path);
    auto magic = cur.take_bytes(8);
    if (std::memcmp(magic.data(), kIndexMagic, 8) != 0) throw FormatError(path + ": bad index magic");
    if (cur.take<std::uint32_t>() != kIndexVersion) throw FormatError(path + ": unsupported index version");
    IndexFileHeader h;
    h.page_size = cur.take<std::uint32_t>();
    h.dim = cur.take<std::uint32_t>();
    h.max_degree = cur.take<std::uint32_t>();
    h.n = cur.take<std::uint64_t>();
    h.page_capacity = cur.take<std::uint32_t>();
    const auto kind = cur.take<std::uint32_t>();
    h.total_pages = cur.take<std::uint64_t>();
    h.entry_id = cur.take<std::uint64_t>();
    if (kind > 1) throw FormatError(path + ": bad layout kind in header");
    h.layout_kind = static_cast<LayoutKind>(kind);
    if (h.page_capacity == 0 || h.dim == 0 ||
        h.page_capacity > max_page_capacity(h.dim, h.max_degree, h.page_size) ||
        h.total_pages != (h.n + h.page_capacity - 1) / h.page_capacity || h.entry_id >= h.n) {
        throw FormatError(path + ": inconsistent index header");
    }
    return h;
}

}  // namespace

const NodeRecord* DiskPage::find(NodeId id) const {
    for (const auto& rec : nodes) {
        if (rec.id == id) return &rec;
    }
    return nullptr;
}

void write_index(const std::string& path, const VectorDataset& dataset, const GraphIndex& graph,
                 const LayoutMap& layout, std::uint32_t page_size) {
    const std::size_t n = dataset.size();
    if (graph.size() != n || layout.size() != n) {
        throw ArgumentError("write_index: dataset, graph and layout disagree on node count");
    }
    const std::uint32_t dim = dataset.dim();
    const std::uint32_t R = graph.max_degree;
    const std::size_t slot = slot_size(dim, R);
    if (page_size < 64) {
        throw ConfigError("write_index: page_size must be >= 64 bytes to hold the header");
    }
    const std::size_t need = kPageHeaderBytes + slot * layout.page_capacity;
    if (need > page_size) {
        throw ConfigError("write_index: " + std::to_string(layout.page_capacity) + " slots of " +
                          std::to_string(slot) + " bytes need page_size >= " + std::to_string(need) +
                          ", got " + std::to_string(page_size));
    }
    IndexFileHeader h;
    h.page_size = page_size;
    h.dim = dim;
    h.n = n;
    h.max_degree = R;
    h.page_capacity = layout.page_capacity;
    h.total_pages = layout.total_pages();
    h.entry_id = graph.entry_id;
    h.layout_kind = layout.kind;

    std::vector<std::uint8_t> out((h.total_pages + 1) * page_size, 0);
    std::uint8_t* hp = out.data();
    std::memcpy(hp, kIndexMagic, 8);
    binio::store<std::uint32_t>(hp + 8, kIndexVersion);
    binio::store<std::uint32_t>(hp + 12, h.page_size);
    binio::store<std::uint32_t>(hp + 16, h.dim);
    binio::store<std::uint32_t>(hp + 20, h.max_degree);
    binio::store<std::uint64_t>(hp + 24, h.n);
    binio::store<std::uint32_t>(hp + 32, h.page_capacity);
    binio::store<std::uint32_t>(hp + 36, static_cast<std::uint32_t>(h.layout_kind));
    binio::store<std::uint64_t>(hp + 40, h.total_pages);
    binio::store<std::uint64_t>(hp + 48, h.entry_id);

    for (std::uint64_t p = 0; p < h.total_pages; ++p) {
        std::uint8_t* page = out.data() + (p + 1) * page_size;
        const auto nodes = layout.page_nodes(p);
        binio::store<std::uint16_t>(page, static_cast<std::uint16_t>(nodes.size()));
        std::uint8_t* s = page + kPageHeaderBytes;
        for (NodeId id : nodes) {
            const auto& adj = graph.adjacency[id];
            if (adj.size() > R) throw ArgumentError("write_index: node degree exceeds R");
            binio::store<std::uint64_t>(s, id);
            auto vec = dataset.row(id);
            for (std::uint32_t j = 0; j < dim; ++j) binio::store<float>(s + 8 + 4 * j, vec[j]);
            std::uint8_t* a = s + 8 + 4 * static_cast<std::size_t>(dim);
            binio::store<std::uint16_t>(a, static_cast<std::uint16_t>(adj.size()));
            for (std::uint32_t r = 0; r < R; ++r) {
                binio::store<std::uint64_t>(a + 2 + 8 * r, r < adj.size() ? adj[r] : kNoNeighbor);
            }
            s += slot;
        }
    }
    binio::write_file(path, out);
}

IndexFileHeader read_index_header(const std::string& path) {
    const auto bytes = binio::read_file(path);
    return decode_header(bytes.data(), bytes.size(), path);
}

DiskIndex::DiskIndex(const std::string& path, bool try_direct_io) : path_(path) {
    fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd_ < 0) {
        throw ArgumentError("cannot open index file " + path + ": " + std::strerror(errno));
    }
    std::uint8_t head[64];
    const auto got = ::pread(fd_, head, sizeof(head), 0);
    if (got != static_cast<ssize_t>(sizeof(head))) {
        ::close(fd_);
        throw CorruptionError(path + ": short read on index header");
    }
    try {
        header_ = decode_header(head, sizeof(head), path);
    } catch (...) {
        ::close(fd_);
        throw;
    }
#ifdef O_DIRECT
    if (try_direct_io && header_.page_size % kIoAlign == 0) {
        const int dfd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC | O_DIRECT);
        if (dfd >= 0) {
            ::close(fd_);
            fd_ = dfd;
            direct_ = true;
        }
    }
#else
    (void)try_direct_io;
#endif
}

DiskIndex::~DiskIndex() {
    if (fd_ >= 0) ::close(fd_);
}

void DiskIndex::read_blocks(std::uint64_t first_page, std::uint64_t count, std::uint8_t* dst) const {
    const std::size_t want = count * header_.page_size;
    const auto offset = static_cast<off_t>((first_page + 1) * header_.page_size);
    std::size_t done = 0;
    while (done < want) {
        const auto got = ::pread(fd_, dst + done, want - done, offset + static_cast<off_t>(done));
        if (got < 0 && errno == EINTR) continue;
        if (got <= 0) {
            throw CorruptionError(path_ + ": short read at page " + std::to_string(first_page) + " (" +
                                  std::to_string(done) + " of " + std::to_string(want) + " bytes)");
        }
        done += static_cast<std::size_t>(got);
    }
    io_ops_.fetch_add(1, std::memory_order_relaxed);
    pages_read_.fetch_add(count, std::memory_order_relaxed);
    bytes_read_.fetch_add(want, std::memory_order_relaxed);
}

DiskPage DiskIndex::decode_page(std::uint64_t page_id, const std::uint8_t* bytes) const {
    const auto count = binio::load<std::uint16_t>(bytes);
    const std::uint64_t expected =
        std::min<std::uint64_t>(header_.page_capacity, header_.n - page_id * header_.page_capacity);
    if (count != expected) {
        throw CorruptionError(path_ + ": page " + std::to_string(page_id) + " holds " + std::to_string(count) +
                              " nodes, expected " + std::to_string(expected));
    }
    const std::size_t slot = slot_size(header_.dim, header_.max_degree);
    DiskPage page;
    page.page_id = page_id;
    page.nodes.resize(count);
    const std::uint8_t* s = bytes + kPageHeaderBytes;
    for (auto& rec : page.nodes) {
        const auto id = binio::load<std::uint64_t>(s);
        if (id >= header_.n) throw CorruptionError(path_ + ": slot node id out of range");
        rec.id = static_cast<NodeId>(id);
        rec.vector.resize(header_.dim);
        for (std::uint32_t j = 0; j < header_.dim; ++j) rec.vector[j] = binio::load<float>(s + 8 + 4 * j);
        const std::uint8_t* a = s + 8 + 4 * static_cast<std::size_t>(header_.dim);
        const auto degree = binio::load<std::uint16_t>(a);
        if (degree > header_.max_degree) throw CorruptionError(path_ + ": slot degree exceeds R");
        rec.neighbors.resize(degree);
        for (std::uint16_t r = 0; r < degree; ++r) {
            const auto nb = binio::load<std::uint64_t>(a + 2 + 8 * r);
            if (nb >= header_.n) throw CorruptionError(path_ + ": neighbor id out of range");
            rec.neighbors[r] = static_cast<NodeId>(nb);
        }
        s += slot;
    }
    return page;
}

DiskPage DiskIndex::read_page(std::uint64_t page_id) const {
    if (page_id >= header_.total_pages) {
        throw ArgumentError("read_page: page " + std::to_string(page_id) + " out of range (total " +
                            std::to_string(header_.total_pages) + ")");
    }
    auto buf = aligned_buffer(header_.page_size);
    read_blocks(page_id, 1, buf.get());
    return decode_page(page_id, buf.get());
}

std::vector<DiskPage> DiskIndex::read_page_range(const ReadInterval& interval) const {
    if (interval.page_count == 0 || interval.end_page() > header_.total_pages) {
        throw ArgumentError("read_page_range: [" + std::to_string(interval.start_page) + ", +" +
                            std::to_string(interval.page_count) + ") out of range (total " +
                            std::to_string(header_.total_pages) + ")");
    }
    auto buf = aligned_buffer(interval.page_count * header_.page_size);
    read_blocks(interval.start_page, interval.page_count, buf.get());
    std::vector<DiskPage> pages;
    pages.reserve(interval.page_count);
    for (std::uint64_t i = 0; i < interval.page_count; ++i) {
        pages.push_back(decode_page(interval.start_page + i, buf.get() + i * header_.page_size));
    }
    return pages;
}

IoStats DiskIndex::stats() const {
    return IoStats{io_ops_.load(), pages_read_.load(), bytes_read_.load()};
}

void DiskIndex::reset_stats() {
    io_ops_ = 0;
    pages_read_ = 0;
    bytes_read_ = 0;
}

}  // namespace hcann

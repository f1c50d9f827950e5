#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace hcann::binio {

// Little-endian encoding into and out of byte buffers. All on-disk formats
// in this library go through these helpers.

template <class T>
inline void put(std::vector<std::uint8_t>& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes, bytes + sizeof(T));
    }
    out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <class T>
inline void store(std::uint8_t* dst, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::memcpy(dst, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(dst, dst + sizeof(T));
    }
}

template <class T>
inline T load(const std::uint8_t* src) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t bytes[sizeof(T)];
    std::memcpy(bytes, src, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes, bytes + sizeof(T));
    }
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

/// Sequential reader over a byte buffer; throws FormatError on overrun.
class Cursor {
  public:
    Cursor(std::span<const std::uint8_t> bytes, std::string what)
        : bytes_(bytes), what_(std::move(what)) {}

    template <class T>
    T take() {
        require(sizeof(T));
        T v = load<T>(bytes_.data() + pos_);
        pos_ += sizeof(T);
        return v;
    }

    std::span<const std::uint8_t> take_bytes(std::size_t count) {
        require(count);
        auto s = bytes_.subspan(pos_, count);
        pos_ += count;
        return s;
    }

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

  private:
    void require(std::size_t count) const;

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::string what_;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace hcann::binio

#include "hcann/binary_io.hpp"

#include <fstream>

#include "hcann/error.hpp"

namespace hcann::binio {

void Cursor::require(std::size_t count) const {
    if (bytes_.size() - pos_ < count) {
        throw FormatError(what_ + ": truncated at byte offset " + std::to_string(pos_) +
                          " (need " + std::to_string(count) + " bytes, have " +
                          std::to_string(bytes_.size() - pos_) + ")");
    }
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) {
        throw ArgumentError("cannot open file: " + path);
    }
    const auto size = static_cast<std::size_t>(in.tellg());
    std::vector<std::uint8_t> bytes(size);
    in.seekg(0);
    if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
        throw FormatError("short read on " + path);
    }
    return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ArgumentError("cannot create file: " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("write failed: " + path);
    }
}

}  // namespace hcann::binio

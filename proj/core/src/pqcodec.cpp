#include "hcann/pqcodec.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "hcann/binary_io.hpp"
#include "hcann/error.hpp"
#include "hcann/kmeans.hpp"

namespace hcann {

namespace {

constexpr char kPqMagic[4] = {'G', 'O', 'V', 'P'};
constexpr std::uint32_t kPqVersion = 1;

void check_dim(std::size_t got, const PQCodebook& codebook, const char* what) {
    if (got != codebook.dim) {
        throw DimensionError(std::string(what) + ": vector has " + std::to_string(got) +
                             " components, codebook expects " + std::to_string(codebook.dim));
    }
}

}  // namespace

std::uint32_t default_pq_subspaces(std::uint32_t dim) {
    std::uint32_t cap = std::max<std::uint32_t>(1, dim / 8);
    for (std::uint32_t m = cap; m > 1; --m) {
        if (dim % m == 0) return m;
    }
    return 1;
}

PQCodebook pq_train(const VectorDataset& dataset, const PQTrainParams& params) {
    const std::uint32_t dim = dataset.dim();
    if (params.m == 0 || dim % params.m != 0) {
        throw ArgumentError("pq_train: m=" + std::to_string(params.m) + " does not divide dim=" + std::to_string(dim));
    }
    if (params.c == 0 || params.c > 256) {
        throw ArgumentError("pq_train: c=" + std::to_string(params.c) + " must be in [1, 256]");
    }
    if (params.c > dataset.size()) {
        throw ArgumentError("pq_train: c=" + std::to_string(params.c) + " exceeds n=" +
                            std::to_string(dataset.size()));
    }
    PQCodebook book;
    book.dim = dim;
    book.m = params.m;
    book.c = params.c;
    book.sub_dim = dim / params.m;
    book.centroids.resize(static_cast<std::size_t>(book.m) * book.c * book.sub_dim);

    const std::size_t n = dataset.size();
    for (std::uint32_t j = 0; j < book.m; ++j) {
        std::vector<float> sub(n * book.sub_dim);
        for (std::size_t i = 0; i < n; ++i) {
            auto r = dataset.row(i).subspan(static_cast<std::size_t>(j) * book.sub_dim, book.sub_dim);
            std::copy(r.begin(), r.end(), sub.begin() + static_cast<std::ptrdiff_t>(i * book.sub_dim));
        }
        const auto clusters = kmeans(VectorDataset(book.sub_dim, std::move(sub)), book.c, params.iterations,
                                     params.seed + j);
        auto src = clusters.centroids.values();
        std::copy(src.begin(), src.end(),
                  book.centroids.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j) * book.c * book.sub_dim));
    }
    return book;
}

std::vector<std::uint8_t> pq_encode(std::span<const float> vector, const PQCodebook& codebook) {
    check_dim(vector.size(), codebook, "pq_encode");
    std::vector<std::uint8_t> code(codebook.m);
    for (std::uint32_t j = 0; j < codebook.m; ++j) {
        const float* sub = vector.data() + static_cast<std::size_t>(j) * codebook.sub_dim;
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_i = 0;
        for (std::uint32_t i = 0; i < codebook.c; ++i) {
            const double d = l2_squared_unchecked(sub, codebook.centroid(j, i).data(), codebook.sub_dim);
            if (d < best) {
                best = d;
                best_i = i;
            }
        }
        code[j] = static_cast<std::uint8_t>(best_i);
    }
    return code;
}

std::vector<float> pq_decode(std::span<const std::uint8_t> code, const PQCodebook& codebook) {
    if (code.size() != codebook.m) {
        throw ArgumentError("pq_decode: code has " + std::to_string(code.size()) + " bytes, codebook m=" +
                            std::to_string(codebook.m));
    }
    std::vector<float> out;
    out.reserve(codebook.dim);
    for (std::uint32_t j = 0; j < codebook.m; ++j) {
        auto c = codebook.centroid(j, code[j]);
        out.insert(out.end(), c.begin(), c.end());
    }
    return out;
}

DistanceTable::DistanceTable(std::span<const float> query, const PQCodebook& codebook)
    : m_(codebook.m), c_(codebook.c), table_(static_cast<std::size_t>(codebook.m) * codebook.c) {
    check_dim(query.size(), codebook, "build_distance_table");
    for (std::uint32_t j = 0; j < m_; ++j) {
        const float* sub = query.data() + static_cast<std::size_t>(j) * codebook.sub_dim;
        for (std::uint32_t i = 0; i < c_; ++i) {
            table_[static_cast<std::size_t>(j) * c_ + i] =
                static_cast<float>(l2_squared_unchecked(sub, codebook.centroid(j, i).data(), codebook.sub_dim));
        }
    }
}

float DistanceTable::distance(std::span<const std::uint8_t> code) const {
    double acc = 0.0;
    for (std::uint32_t j = 0; j < m_; ++j) {
        acc += table_[static_cast<std::size_t>(j) * c_ + code[j]];
    }
    return static_cast<float>(std::sqrt(acc));
}

PQCodes pq_encode_all(const VectorDataset& dataset, const PQCodebook& codebook) {
    PQCodes codes;
    codes.m = codebook.m;
    codes.bytes.reserve(dataset.size() * codebook.m);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        auto c = pq_encode(dataset.row(i), codebook);
        codes.bytes.insert(codes.bytes.end(), c.begin(), c.end());
    }
    return codes;
}

void write_pq(const std::string& path, const PQCodebook& codebook, const PQCodes& codes) {
    std::vector<std::uint8_t> out(kPqMagic, kPqMagic + 4);
    binio::put<std::uint32_t>(out, kPqVersion);
    binio::put<std::uint32_t>(out, codebook.dim);
    binio::put<std::uint32_t>(out, codebook.m);
    binio::put<std::uint32_t>(out, codebook.c);
    for (float v : codebook.centroids) binio::put<float>(out, v);
    binio::put<std::uint64_t>(out, codes.size());
    out.insert(out.end(), codes.bytes.begin(), codes.bytes.end());
    binio::write_file(path, out);
}

void read_pq(const std::string& path, PQCodebook& codebook, PQCodes& codes) {
    const auto bytes = binio::read_file(path);
    binio::Cursor cur(bytes, path);
    auto magic = cur.take_bytes(4);
    if (std::memcmp(magic.data(), kPqMagic, 4) != 0) {
        throw FormatError(path + ": bad PQ sidecar magic");
    }
    if (cur.take<std::uint32_t>() != kPqVersion) {
        throw FormatError(path + ": unsupported PQ sidecar version");
    }
    PQCodebook book;
    book.dim = cur.take<std::uint32_t>();
    book.m = cur.take<std::uint32_t>();
    book.c = cur.take<std::uint32_t>();
    if (book.m == 0 || book.dim % book.m != 0 || book.c == 0 || book.c > 256) {
        throw FormatError(path + ": inconsistent PQ header");
    }
    book.sub_dim = book.dim / book.m;
    book.centroids.resize(static_cast<std::size_t>(book.m) * book.c * book.sub_dim);
    for (auto& v : book.centroids) v = cur.take<float>();
    const auto n = cur.take<std::uint64_t>();
    auto raw = cur.take_bytes(n * book.m);
    PQCodes out;
    out.m = book.m;
    out.bytes.assign(raw.begin(), raw.end());
    for (auto b : out.bytes) {
        if (b >= book.c) throw FormatError(path + ": code index out of range");
    }
    codebook = std::move(book);
    codes = std::move(out);
}

}  // namespace hcann

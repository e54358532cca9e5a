#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uqkit/tensor.hpp"

// File ingestion and serialization.
//
// UQTK container: bytes 0-3 magic "UQTK"; byte 4 version (=1); byte 5 rank
// in {1,2,3}; then `rank` little-endian u64 dims; then row-major payload of
// 32-bit little-endian IEEE-754 floats.
//
// IDX: standard big-endian magic + dims + uint8 payload.

namespace uqkit {

enum class IoErrorKind { BadMagic, BadVersion, RankMismatch, Truncated, Malformed, NotFound };

class IoError : public std::runtime_error {
public:
    IoError(IoErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    IoErrorKind kind() const { return kind_; }

private:
    IoErrorKind kind_;
};

struct TensorFile {
    int rank = 0;
    std::vector<std::uint64_t> dims;
    std::vector<double> values;  // widened from the float32 payload
};

namespace detail {

inline void put_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

inline std::uint32_t get_u32_be(const unsigned char* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

inline std::vector<unsigned char> read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(IoErrorKind::NotFound, "cannot open file: " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    return buf;
}

}  // namespace detail

// Write whole-file contents atomically (temp + rename in the same directory).
inline void atomic_write(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(IoErrorKind::NotFound, "cannot write file: " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw IoError(IoErrorKind::Malformed, "short write: " + tmp.string());
    }
    fs::rename(tmp, target);
}

inline void save_tensor(const std::string& path, const std::vector<std::uint64_t>& dims,
                        const std::vector<double>& values) {
    if (dims.empty() || dims.size() > 3)
        throw std::invalid_argument("save_tensor: rank must be 1, 2 or 3");
    std::uint64_t count = 1;
    for (auto d : dims) count *= d;
    if (count != values.size()) throw std::invalid_argument("save_tensor: shape mismatch");

    std::string out;
    out.reserve(6 + 8 * dims.size() + 4 * values.size());
    out += "UQTK";
    out.push_back('\x01');
    out.push_back(static_cast<char>(dims.size()));
    for (auto d : dims) detail::put_u64_le(out, d);
    for (double v : values) {
        float f = static_cast<float>(v);
        std::array<char, 4> bytes{};
        std::memcpy(bytes.data(), &f, 4);  // little-endian host assumed, checked in tests
        out.append(bytes.data(), 4);
    }
    atomic_write(path, out);
}

inline TensorFile load_tensor(const std::string& path, int expected_rank = 0) {
    auto buf = detail::read_all(path);
    if (buf.size() < 6) throw IoError(IoErrorKind::Truncated, "file too short: " + path);
    if (std::memcmp(buf.data(), "UQTK", 4) != 0)
        throw IoError(IoErrorKind::BadMagic, "bad magic: " + path);
    if (buf[4] != 1)
        throw IoError(IoErrorKind::BadVersion, "unsupported container version in " + path);
    int rank = buf[5];
    if (rank < 1 || rank > 3)
        throw IoError(IoErrorKind::Malformed, "invalid rank byte in " + path);
    if (expected_rank != 0 && rank != expected_rank)
        throw IoError(IoErrorKind::RankMismatch,
                      "rank mismatch: file " + path + " has rank " + std::to_string(rank) +
                          ", expected " + std::to_string(expected_rank));

    std::size_t off = 6;
    if (buf.size() < off + 8 * static_cast<std::size_t>(rank))
        throw IoError(IoErrorKind::Truncated, "truncated dim header: " + path);
    TensorFile tf;
    tf.rank = rank;
    std::uint64_t count = 1;
    for (int i = 0; i < rank; ++i) {
        std::uint64_t d = detail::get_u64_le(buf.data() + off);
        off += 8;
        tf.dims.push_back(d);
        count *= d;
    }
    if (buf.size() != off + 4 * count)
        throw IoError(IoErrorKind::Truncated, "payload size mismatch: " + path);
    tf.values.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        float f;
        std::memcpy(&f, buf.data() + off + 4 * i, 4);
        tf.values[i] = static_cast<double>(f);
    }
    return tf;
}

inline void save_prob_matrix(const std::string& path, const ProbMatrix& m) {
    save_tensor(path, {m.n_samples(), m.n_classes()}, m.values());
}

inline ProbMatrix load_prob_matrix(const std::string& path) {
    auto tf = load_tensor(path, 2);
    return ProbMatrix(tf.dims[0], tf.dims[1], std::move(tf.values));
}

inline void save_pass_tensor(const std::string& path, const PassTensor& t) {
    save_tensor(path, {t.n_passes(), t.n_samples(), t.n_classes()}, t.values());
}

inline PassTensor load_pass_tensor(const std::string& path) {
    auto tf = load_tensor(path, 3);
    return PassTensor(tf.dims[0], tf.dims[1], tf.dims[2], std::move(tf.values));
}

inline void save_weight_vector(const std::string& path, const WeightVector& w) {
    save_tensor(path, {w.values.size()}, w.values);
}

inline WeightVector load_weight_vector(const std::string& path, const std::string& tag = "") {
    auto tf = load_tensor(path, 1);
    return WeightVector(std::move(tf.values), tag.empty() ? path : tag);
}

// Labels as CSV: one non-negative integer per line, optional "label" header.
inline Labels load_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(IoErrorKind::NotFound, "cannot open file: " + path);
    std::vector<std::size_t> values;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && line == "label") { first = false; continue; }
        first = false;
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(line, &pos);
        } catch (const std::exception&) {
            throw IoError(IoErrorKind::Malformed, "bad label line in " + path + ": " + line);
        }
        if (pos != line.size() || line[0] == '-')
            throw IoError(IoErrorKind::Malformed, "bad label line in " + path + ": " + line);
        values.push_back(static_cast<std::size_t>(v));
    }
    return Labels(std::move(values));
}

inline void save_labels_csv(const std::string& path, const Labels& labels) {
    std::ostringstream out;
    out << "label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) out << labels.at(i) << "\n";
    atomic_write(path, out.str());
}

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// IDX image file -> N x (rows*cols) matrix of pixels scaled to [0,1].
struct IdxImages {
    std::size_t n = 0;
    std::size_t dim = 0;  // rows*cols, flattened row-major
    std::vector<double> values;
};

inline IdxImages load_idx_images(const std::string& path) {
    auto buf = detail::read_all(path);
    if (buf.size() < 16) throw IoError(IoErrorKind::Truncated, "IDX header too short: " + path);
    if (detail::get_u32_be(buf.data()) != kIdxImageMagic)
        throw IoError(IoErrorKind::BadMagic, "bad IDX image magic: " + path);
    std::uint64_t n = detail::get_u32_be(buf.data() + 4);
    std::uint64_t rows = detail::get_u32_be(buf.data() + 8);
    std::uint64_t cols = detail::get_u32_be(buf.data() + 12);
    std::uint64_t count = n * rows * cols;
    if (rows == 0 || cols == 0 || (n != 0 && count / (rows * cols) != n))
        throw IoError(IoErrorKind::Malformed, "IDX dim overflow: " + path);
    if (buf.size() != 16 + count)
        throw IoError(IoErrorKind::Truncated, "IDX payload size mismatch: " + path);
    IdxImages img;
    img.n = n;
    img.dim = rows * cols;
    img.values.resize(count);
    for (std::uint64_t i = 0; i < count; ++i)
        img.values[i] = static_cast<double>(buf[16 + i]) / 255.0;
    return img;
}

inline Labels load_idx_labels(const std::string& path) {
    auto buf = detail::read_all(path);
    if (buf.size() < 8) throw IoError(IoErrorKind::Truncated, "IDX header too short: " + path);
    if (detail::get_u32_be(buf.data()) != kIdxLabelMagic)
        throw IoError(IoErrorKind::BadMagic, "bad IDX label magic: " + path);
    std::uint64_t n = detail::get_u32_be(buf.data() + 4);
    if (buf.size() != 8 + n)
        throw IoError(IoErrorKind::Truncated, "IDX payload size mismatch: " + path);
    std::vector<std::size_t> values(n);
    for (std::uint64_t i = 0; i < n; ++i) values[i] = buf[8 + i];
    return Labels(std::move(values));
}

}  // namespace uqkit

#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "uqkit/io.hpp"
#include "uqkit/rng.hpp"

using namespace uqkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("uqkit_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static inline int counter = 0;
};

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string be32(std::uint32_t v) {
    std::string s;
    s.push_back(static_cast<char>((v >> 24) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>(v & 0xff));
    return s;
}

}  // namespace

TEST_CASE("UQTK tensors round-trip bitwise") {
    TempDir dir;
    Rng rng(3);
    // Values at float32 precision, as the container stores.
    std::vector<double> values(12);
    for (auto& v : values) v = static_cast<double>(static_cast<float>(rng.next_double()));

    auto path = dir.file("m.uqtk");
    save_tensor(path, {3, 4}, values);
    auto tf = load_tensor(path, 2);
    CHECK(tf.rank == 2);
    CHECK(tf.dims == std::vector<std::uint64_t>{3, 4});
    CHECK(tf.values == values);

    // load(save(load(x))) is also byte-identical on disk.
    auto path2 = dir.file("m2.uqtk");
    save_tensor(path2, tf.dims, tf.values);
    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
}

TEST_CASE("UQTK load failures carry distinct error kinds") {
    TempDir dir;
    SECTION("bad magic") {
        write_bytes(dir.file("bad.uqtk"), std::string("NOPE\x01\x01", 6) + std::string(8, '\0'));
        try {
            load_tensor(dir.file("bad.uqtk"));
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(e.kind() == IoErrorKind::BadMagic);
        }
    }
    SECTION("rank mismatch") {
        save_tensor(dir.file("r3.uqtk"), {1, 1, 2}, {0.5, 0.5});
        try {
            load_tensor(dir.file("r3.uqtk"), 2);
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(e.kind() == IoErrorKind::RankMismatch);
        }
    }
    SECTION("truncated payload") {
        save_tensor(dir.file("t.uqtk"), {2, 2}, {0.1, 0.2, 0.3, 0.4});
        auto full = detail::read_all(dir.file("t.uqtk"));
        write_bytes(dir.file("t.uqtk"),
                    std::string(reinterpret_cast<char*>(full.data()), full.size() - 3));
        try {
            load_tensor(dir.file("t.uqtk"));
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(e.kind() == IoErrorKind::Truncated);
        }
    }
    SECTION("missing file") {
        try {
            load_tensor(dir.file("nope.uqtk"));
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(e.kind() == IoErrorKind::NotFound);
        }
    }
}

TEST_CASE("labels CSV round-trips with and without header") {
    TempDir dir;
    Labels labels({3, 0, 9, 1});
    save_labels_csv(dir.file("y.csv"), labels);
    auto loaded = load_labels_csv(dir.file("y.csv"));
    CHECK(loaded.values() == labels.values());

    write_bytes(dir.file("noheader.csv"), "2\n4\n");
    CHECK(load_labels_csv(dir.file("noheader.csv")).values() == std::vector<std::size_t>{2, 4});

    write_bytes(dir.file("bad.csv"), "label\n1\nx\n");
    CHECK_THROWS_AS(load_labels_csv(dir.file("bad.csv")), IoError);
}

TEST_CASE("IDX image loading scales bytes to [0,1]") {
    TempDir dir;
    SECTION("all-zero image") {
        write_bytes(dir.file("img.idx"),
                    be32(0x803) + be32(1) + be32(28) + be32(28) + std::string(784, '\0'));
        auto img = load_idx_images(dir.file("img.idx"));
        CHECK(img.n == 1);
        CHECK(img.dim == 784);
        for (double v : img.values) CHECK(v == 0.0);
    }
    SECTION("byte 255 maps to exactly 1.0") {
        write_bytes(dir.file("img.idx"),
                    be32(0x803) + be32(1) + be32(1) + be32(2) + std::string("\xff\x80", 2));
        auto img = load_idx_images(dir.file("img.idx"));
        CHECK(img.values[0] == 1.0);
        CHECK(img.values[1] == 128.0 / 255.0);
    }
    SECTION("wrong magic rejected") {
        write_bytes(dir.file("img.idx"), be32(0x801) + be32(1) + be32(1) + be32(1) + "\0");
        CHECK_THROWS_AS(load_idx_images(dir.file("img.idx")), IoError);
    }
}

TEST_CASE("IDX label loading") {
    TempDir dir;
    write_bytes(dir.file("y.idx"), be32(0x801) + be32(3) + std::string("\x09\x00\x05", 3));
    auto labels = load_idx_labels(dir.file("y.idx"));
    CHECK(labels.values() == std::vector<std::size_t>{9, 0, 5});

    write_bytes(dir.file("short.idx"), be32(0x801) + be32(5) + std::string("\x01", 1));
    CHECK_THROWS_AS(load_idx_labels(dir.file("short.idx")), IoError);
}

TEST_CASE("prob matrix and pass tensor container helpers") {
    TempDir dir;
    ProbMatrix p(2, 2, {0.25, 0.75, 1.0, 0.0});
    save_prob_matrix(dir.file("p.uqtk"), p);
    auto p2 = load_prob_matrix(dir.file("p.uqtk"));
    CHECK(p2.values() == p.values());

    PassTensor t(2, 1, 2, {0.5, 0.5, 1.0, 0.0});
    save_pass_tensor(dir.file("t.uqtk"), t);
    auto t2 = load_pass_tensor(dir.file("t.uqtk"));
    CHECK(t2.values() == t.values());

    WeightVector w({0.5, -0.25, 0.0}, "test");
    save_weight_vector(dir.file("w.uqtk"), w);
    CHECK(load_weight_vector(dir.file("w.uqtk")).values == w.values);
}

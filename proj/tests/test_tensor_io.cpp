#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "nnrules/npy.hpp"

using namespace nnrules;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

Tensor random_tensor(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> rank_dist(0, 3);
    std::uniform_int_distribution<std::size_t> dim_dist(1, 5);
    std::uniform_int_distribution<int> dtype_dist(0, 3);
    std::vector<std::size_t> shape;
    int rank = rank_dist(rng);
    for (int d = 0; d < rank; ++d) shape.push_back(dim_dist(rng));
    std::size_t n = Tensor::shape_numel(shape);
    Dtype dt = static_cast<Dtype>(dtype_dist(rng));
    if (dtype_is_float(dt)) {
        std::uniform_real_distribution<double> val(-100.0, 100.0);
        std::vector<double> vals(n);
        for (double& v : vals) {
            v = val(rng);
            if (dt == Dtype::f32) v = static_cast<float>(v);
        }
        return Tensor::from_f64(shape, vals, dt);
    }
    std::uniform_int_distribution<std::int64_t> val(-1000000, 1000000);
    std::vector<std::int64_t> vals(n);
    for (auto& v : vals) v = val(rng);
    return Tensor::from_i64(shape, vals, dt);
}

}  // namespace

TEST_CASE("npy header matches the documented v1.0 layout") {
    Tensor t = Tensor::from_f64({2, 3}, {1, 2, 3, 4, 5, 6});
    std::vector<std::uint8_t> bytes = write_npy_bytes(t);
    REQUIRE(bytes.size() >= 10);
    CHECK(bytes[0] == 0x93);
    CHECK(std::memcmp(bytes.data() + 1, "NUMPY", 5) == 0);
    CHECK(bytes[6] == 1);
    CHECK(bytes[7] == 0);
    std::size_t hlen = bytes[8] | (std::size_t(bytes[9]) << 8);
    CHECK((10 + hlen) % 64 == 0);
    std::string header(bytes.begin() + 10, bytes.begin() + 10 + hlen);
    CHECK(header.find("{'descr': '<f8', 'fortran_order': False, 'shape': (2, 3), }") == 0);
    CHECK(header.back() == '\n');
    CHECK(bytes.size() == 10 + hlen + 6 * 8);
}

TEST_CASE("npy reads the documented 2x3 f64 file") {
    std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (2, 3), }";
    while ((10 + header.size() + 1) % 64 != 0) header += ' ';
    header += '\n';
    std::vector<std::uint8_t> bytes = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
    bytes.push_back(static_cast<std::uint8_t>(header.size() & 0xff));
    bytes.push_back(static_cast<std::uint8_t>(header.size() >> 8));
    bytes.insert(bytes.end(), header.begin(), header.end());
    for (int i = 0; i < 6; ++i) {
        double v = i + 0.5;
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        bytes.insert(bytes.end(), p, p + 8);
    }
    Tensor t = read_npy_bytes(bytes);
    CHECK(t.dtype() == Dtype::f64);
    CHECK(t.shape() == std::vector<std::size_t>{2, 3});
    CHECK(t.f64_at(0) == 0.5);
    CHECK(t.f64_at(5) == 5.5);
}

TEST_CASE("npy scalar shape () round trip") {
    Tensor t = Tensor::from_f64({}, {5.0});
    std::vector<std::uint8_t> bytes = write_npy_bytes(t);
    Tensor back = read_npy_bytes(bytes);
    CHECK(back.shape().empty());
    CHECK(back.numel() == 1);
    CHECK(back.f64_at(0) == 5.0);
    // scalar dict does not fit the first 64-byte block, so the preamble
    // doubles and the payload follows it
    CHECK(bytes.size() == 128 + 8);
}

TEST_CASE("npy i64 payload is little-endian") {
    Tensor t = Tensor::from_i64({3}, {1, 2, 3});
    std::vector<std::uint8_t> bytes = write_npy_bytes(t);
    std::size_t off = bytes.size() - 24;
    CHECK(bytes[off] == 1);
    for (int k = 1; k < 8; ++k) CHECK(bytes[off + k] == 0);
    CHECK(bytes[off + 8] == 2);
    CHECK(bytes[off + 16] == 3);
}

TEST_CASE("npy f32 file round-trips byte-identically") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<float> val(-5.0f, 5.0f);
    std::vector<double> vals(28);
    for (double& v : vals) v = val(rng);
    Tensor t = Tensor::from_f64({7, 4}, vals, Dtype::f32);

    std::string path = temp_path("nnrules_roundtrip.npy");
    write_npy(t, path);
    Tensor back = read_npy(path);
    CHECK(back.bit_equal(t));
    std::string path2 = temp_path("nnrules_roundtrip2.npy");
    write_npy(back, path2);

    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}

TEST_CASE("npy round trip preserves every dtype and shape") {
    std::mt19937_64 rng(123);
    for (int i = 0; i < 50; ++i) {
        Tensor t = random_tensor(rng);
        Tensor back = read_npy_bytes(write_npy_bytes(t));
        CHECK(back.bit_equal(t));
    }
}

TEST_CASE("npy error paths") {
    std::vector<std::uint8_t> bad = {'B', 'A', 'D', 0, 0, 0, 1, 0, 0, 0};
    CHECK_THROWS_AS(read_npy_bytes(bad), Error);

    Tensor t = Tensor::from_f64({4}, {1, 2, 3, 4});
    std::vector<std::uint8_t> bytes = write_npy_bytes(t);

    std::vector<std::uint8_t> short_payload(bytes.begin(), bytes.end() - 8);
    try {
        read_npy_bytes(short_payload);
        FAIL("expected TruncatedFile");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TruncatedFile);
    }

    std::vector<std::uint8_t> v2 = bytes;
    v2[6] = 2;
    try {
        read_npy_bytes(v2);
        FAIL("expected UnsupportedFormat");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnsupportedFormat);
    }

    std::string fortran = "{'descr': '<f8', 'fortran_order': True, 'shape': (4,), }";
    while ((10 + fortran.size() + 1) % 64 != 0) fortran += ' ';
    fortran += '\n';
    std::vector<std::uint8_t> fbytes = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
    fbytes.push_back(static_cast<std::uint8_t>(fortran.size() & 0xff));
    fbytes.push_back(static_cast<std::uint8_t>(fortran.size() >> 8));
    fbytes.insert(fbytes.end(), fortran.begin(), fortran.end());
    fbytes.resize(fbytes.size() + 32, 0);
    try {
        read_npy_bytes(fbytes);
        FAIL("expected UnsupportedFormat");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnsupportedFormat);
    }
}

TEST_CASE("npy bool arrays widen to i64") {
    std::string header = "{'descr': '|b1', 'fortran_order': False, 'shape': (3,), }";
    while ((10 + header.size() + 1) % 64 != 0) header += ' ';
    header += '\n';
    std::vector<std::uint8_t> bytes = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
    bytes.push_back(static_cast<std::uint8_t>(header.size() & 0xff));
    bytes.push_back(static_cast<std::uint8_t>(header.size() >> 8));
    bytes.insert(bytes.end(), header.begin(), header.end());
    bytes.push_back(1);
    bytes.push_back(0);
    bytes.push_back(1);
    Tensor t = read_npy_bytes(bytes);
    CHECK(t.dtype() == Dtype::i64);
    CHECK(t.as_i64() == std::vector<std::int64_t>{1, 0, 1});
}

TEST_CASE("dataset label count must match inputs") {
    Tensor inputs = Tensor::from_f64({3, 2}, {1, 2, 3, 4, 5, 6});
    Tensor labels = Tensor::from_i64({2}, {0, 1});
    CHECK_THROWS_AS(make_dataset(inputs, labels), Error);
    Tensor good = Tensor::from_i64({3}, {0, 1, 0});
    CHECK_NOTHROW(make_dataset(inputs, good));
}

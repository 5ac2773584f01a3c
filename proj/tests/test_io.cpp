#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"

#include "jano/io.hpp"
#include "jano/rng.hpp"

using namespace jano;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / (std::string("jano_io_") + name);
}

LatentTensor sample_tensor() {
    LatentTensor x(2, 3, 4, 5);
    Rng rng(99);
    for (float& v : x.data) v = rng.normal_f();
    x.data[0] = -0.0f;
    x.data[1] = 1.1754944e-38f;  // smallest normal
    return x;
}

}  // namespace

TEST_CASE("latent save/load round trip is bit exact") {
    const fs::path p = temp_file("roundtrip.jlat");
    const LatentTensor x = sample_tensor();
    save_latent(x, p);
    const LatentTensor y = load_latent(p);
    REQUIRE(y.data.size() == x.data.size());
    CHECK(y.channels == x.channels);
    CHECK(y.frames == x.frames);
    CHECK(y.height == x.height);
    CHECK(y.width == x.width);
    for (size_t i = 0; i < x.data.size(); ++i) {
        CHECK(std::memcmp(&x.data[i], &y.data[i], 4) == 0);
    }
    // Negative zero survives with its sign bit.
    CHECK(std::signbit(y.data[0]));
    fs::remove(p);
}

TEST_CASE("truncated file raises a format error") {
    const fs::path p = temp_file("trunc.jlat");
    save_latent(sample_tensor(), p);
    const auto full = fs::file_size(p);
    fs::resize_file(p, full - 7);
    CHECK_THROWS_AS(load_latent(p), FormatError);
    fs::resize_file(p, 10);  // inside the header
    CHECK_THROWS_AS(load_latent(p), FormatError);
    fs::remove(p);
}

TEST_CASE("bad magic and version are rejected with offsets") {
    const fs::path p = temp_file("magic.jlat");
    save_latent(sample_tensor(), p);
    {
        std::fstream f(p, std::ios::binary | std::ios::in | std::ios::out);
        f.put('X');
    }
    try {
        load_latent(p);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.byte_offset == 0);
    }
    save_latent(sample_tensor(), p);
    {
        std::fstream f(p, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(4);
        const uint32_t bad = 999;
        f.write(reinterpret_cast<const char*>(&bad), 4);
    }
    try {
        load_latent(p);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.byte_offset == 4);
    }
    fs::remove(p);
}

TEST_CASE("header dims inconsistent with payload length") {
    const fs::path p = temp_file("dims.jlat");
    save_latent(sample_tensor(), p);
    {
        std::fstream f(p, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(8);
        const uint32_t c = 3;  // actual payload was written for 2 channels
        f.write(reinterpret_cast<const char*>(&c), 4);
    }
    CHECK_THROWS_AS(load_latent(p), FormatError);
    fs::remove(p);
}

TEST_CASE("non-finite payload is rejected") {
    const fs::path p = temp_file("nan.jlat");
    save_latent(sample_tensor(), p);
    {
        std::fstream f(p, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(24);
        const float bad = std::numeric_limits<float>::infinity();
        f.write(reinterpret_cast<const char*>(&bad), 4);
    }
    CHECK_THROWS_AS(load_latent(p), FormatError);
    fs::remove(p);
}

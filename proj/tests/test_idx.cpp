#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <vector>

#include "sslac/idx.hpp"
#include "sslac/rng.hpp"

using namespace sslac;

namespace {

std::vector<std::uint8_t> idx_bytes(std::initializer_list<int> bytes) {
    std::vector<std::uint8_t> out;
    for (int b : bytes) out.push_back(static_cast<std::uint8_t>(b));
    return out;
}

}  // namespace

TEST_CASE("decodes a 1-d vector") {
    const auto bytes = idx_bytes({0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x03, 0x05, 0x00, 0x02});
    const NdArray a = parse_idx(bytes);
    REQUIRE(a.shape() == std::vector<std::size_t>{3});
    CHECK(a[0] == 5.0);
    CHECK(a[1] == 0.0);
    CHECK(a[2] == 2.0);
}

TEST_CASE("decodes a (1,2,2) array") {
    const auto bytes = idx_bytes({0x00, 0x00, 0x08, 0x03,
                                  0x00, 0x00, 0x00, 0x01,
                                  0x00, 0x00, 0x00, 0x02,
                                  0x00, 0x00, 0x00, 0x02,
                                  0x00, 0xFF, 0x80, 0x01});
    const NdArray a = parse_idx(bytes);
    REQUIRE(a.shape() == std::vector<std::size_t>({1, 2, 2}));
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 255.0);
    CHECK(a[2] == 128.0);
    CHECK(a[3] == 1.0);
}

TEST_CASE("truncated payload reports the failing offset") {
    // Declares 3 elements but carries 2.
    const auto bytes = idx_bytes({0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x03, 0x05, 0x00});
    CHECK_THROWS_AS(parse_idx(bytes), IdxError);
    try {
        parse_idx(bytes);
    } catch (const IdxError& e) {
        CHECK(e.offset() == 10);  // header (8) + available payload (2)
    }
}

TEST_CASE("rejects unsupported type codes and bad dimension counts") {
    CHECK_THROWS_AS(parse_idx(idx_bytes({0x00, 0x00, 0x0D, 0x01, 0x00, 0x00, 0x00, 0x00})),
                    IdxError);
    CHECK_THROWS_AS(parse_idx(idx_bytes({0x00, 0x00, 0x08, 0x00})), IdxError);
    CHECK_THROWS_AS(parse_idx(idx_bytes({0x00, 0x00, 0x08, 0x05})), IdxError);
    CHECK_THROWS_AS(parse_idx(idx_bytes({0x01, 0x00, 0x08, 0x01})), IdxError);
    CHECK_THROWS_AS(parse_idx(idx_bytes({})), IdxError);
}

TEST_CASE("round trip over random well-formed inputs") {
    RngStream rng(20240817);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t ndim = 1 + rng.index(4);
        std::vector<std::uint8_t> bytes = {0x00, 0x00, 0x08, static_cast<std::uint8_t>(ndim)};
        std::size_t count = 1;
        for (std::size_t d = 0; d < ndim; ++d) {
            const std::uint32_t dim = static_cast<std::uint32_t>(1 + rng.index(6));
            count *= dim;
            bytes.push_back(static_cast<std::uint8_t>(dim >> 24));
            bytes.push_back(static_cast<std::uint8_t>(dim >> 16));
            bytes.push_back(static_cast<std::uint8_t>(dim >> 8));
            bytes.push_back(static_cast<std::uint8_t>(dim));
        }
        for (std::size_t i = 0; i < count; ++i) {
            bytes.push_back(static_cast<std::uint8_t>(rng.index(256)));
        }
        CHECK(serialize_idx(parse_idx(bytes)) == bytes);
    }
}

TEST_CASE("serialize rejects non-byte values") {
    CHECK_THROWS(serialize_idx(NdArray({2}, {0.5, 1.0})));
    CHECK_THROWS(serialize_idx(NdArray({1}, {256.0})));
    CHECK_THROWS(serialize_idx(NdArray({1}, {-1.0})));
}

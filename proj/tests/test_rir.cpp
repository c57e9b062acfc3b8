#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <fstream>

#include "reap/rir.hpp"

using namespace reap;

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("an empty stream is just the 16-byte header", "[rir]") {
    const std::vector<std::uint8_t> bytes = serialize(RirStream{});
    REQUIRE(bytes.size() == 16);
    REQUIRE(bytes[0] == 'R');
    REQUIRE(bytes[1] == 'I');
    REQUIRE(bytes[2] == 'R');
    REQUIRE(bytes[3] == '1');
    const RirStream back = deserialize(bytes);
    REQUIRE(back == RirStream{});
}

TEST_CASE("a single bundle encodes elements, shared feature, then metadata", "[rir]") {
    RirStream s;
    s.kernel = StreamKernel::csr;
    s.capacity = 32;
    s.rows = 3;
    s.cols = 6;
    RirBundle b;
    b.shared = 2;
    b.last_of_feature = true;
    b.elements = {{5, 1.0f}};
    s.records.emplace_back(b);

    const std::vector<std::uint8_t> bytes = serialize(s);
    // header + dimension descriptor + one 16-byte record
    REQUIRE(bytes.size() == 16 + 24 + 16);

    const std::vector<std::uint8_t> record(bytes.end() - 16, bytes.end());
    const std::vector<std::uint8_t> expected = {
        0x05, 0x00, 0x00, 0x00,   // distinct 5
        0x00, 0x00, 0x80, 0x3F,   // value 1.0f
        0x02, 0x00, 0x00, 0x00,   // shared feature 2
        0x01, 0x00, 0x01, 0x00,   // meta: count=1, last_of_feature, kind=data
    };
    REQUIRE(record == expected);

    REQUIRE(deserialize(bytes) == s);
}

TEST_CASE("oversized features split greedily with only the tail flagged", "[rir]") {
    CooMatrix coo;
    coo.rows = 2;
    coo.cols = 100;
    for (index_t c = 0; c < 70; ++c) coo.entries.push_back({1, c, float(c)});
    const RirStream s = compress_csr(coo_to_csr(coo), 32);

    REQUIRE(s.records.size() == 3);
    const auto& b0 = std::get<RirBundle>(s.records[0]);
    const auto& b1 = std::get<RirBundle>(s.records[1]);
    const auto& b2 = std::get<RirBundle>(s.records[2]);
    REQUIRE(b0.elements.size() == 32);
    REQUIRE(b1.elements.size() == 32);
    REQUIRE(b2.elements.size() == 6);
    REQUIRE_FALSE(b0.last_of_feature);
    REQUIRE_FALSE(b1.last_of_feature);
    REQUIRE(b2.last_of_feature);
    REQUIRE(b0.shared == 1);
    REQUIRE(b1.shared == 1);
    REQUIRE(b2.shared == 1);
    // Row 0 is empty and emits nothing.
    REQUIRE(std::get<RirBundle>(s.records.front()).shared == 1);
}

TEST_CASE("bundle count is ceil(nnz/capacity) per feature", "[rir]") {
    for (index_t nnz : {1u, 31u, 32u, 33u, 64u, 65u, 1000u}) {
        CooMatrix coo;
        coo.rows = 1;
        coo.cols = 1024;
        for (index_t c = 0; c < nnz; ++c) coo.entries.push_back({0, c, 1.0f});
        const RirStream s = compress_csr(coo_to_csr(coo), 32);
        REQUIRE(s.records.size() == (nnz + 31) / 32);
        std::size_t total = 0;
        for (const auto& rec : s.records) {
            const auto& b = std::get<RirBundle>(rec);
            REQUIRE(b.elements.size() <= 32);
            total += b.elements.size();
        }
        REQUIRE(total == nnz);
    }
}

TEST_CASE("csr and csc round trips are exact across capacities", "[rir]") {
    const index_t caps[] = {1, 2, 32, 1024};
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const CsrMatrix m = random_sparse(37, 29, 0.15, seed * 31 + 1);
        const CscMatrix t = csr_to_csc(m);
        for (index_t cap : caps) {
            const RirStream s = compress_csr(m, cap);
            REQUIRE(decompress_to_csr(s) == m);
            REQUIRE(decompress_to_csr(deserialize(serialize(s))) == m);

            const RirStream sc = compress_csc(t, cap);
            REQUIRE(decompress_to_csc(sc) == t);
            REQUIRE(decompress_to_csc(deserialize(serialize(sc))) == t);
        }
    }
}

TEST_CASE("extent records survive serialization", "[rir]") {
    RirStream s;
    s.kernel = StreamKernel::cholesky;
    s.capacity = 8;
    s.rows = s.cols = 4;
    RirBundle b;
    b.shared = 0;
    b.last_of_feature = true;
    b.elements = {{0, 2.0f}, {3, 1.0f}};
    s.records.emplace_back(b);
    ExtentRecord x;
    x.column = 0;
    x.extents = {{0, 0, 0}, {3, 5, 5}};
    s.records.emplace_back(x);

    const RirStream back = deserialize(serialize(s));
    REQUIRE(back == s);
    REQUIRE(std::get<ExtentRecord>(back.records[1]).extents[1].start == 5);
}

TEST_CASE("decoder rejects malformed streams", "[rir]") {
    RirStream s;
    s.rows = s.cols = 2;
    RirBundle b;
    b.shared = 0;
    b.last_of_feature = true;
    b.elements = {{0, 1.0f}, {1, 2.0f}};
    s.records.emplace_back(b);
    std::vector<std::uint8_t> bytes = serialize(s);

    SECTION("bad magic") {
        bytes[0] = 'X';
        REQUIRE_THROWS_AS(deserialize(bytes), StreamError);
    }
    SECTION("unsupported version") {
        bytes[4] = 9;
        REQUIRE_THROWS_WITH(deserialize(bytes), Catch::Matchers::ContainsSubstring("version"));
    }
    SECTION("unknown kernel tag") {
        bytes[6] = 7;
        REQUIRE_THROWS_AS(deserialize(bytes), StreamError);
    }
    SECTION("shorter than a header") {
        bytes.resize(10);
        REQUIRE_THROWS_WITH(deserialize(bytes), Catch::Matchers::ContainsSubstring("truncated"));
    }
    SECTION("record chopped mid-body") {
        for (std::size_t cut = 17; cut < bytes.size(); cut += 3) {
            std::vector<std::uint8_t> chopped(bytes.begin(), bytes.begin() + cut);
            REQUIRE_THROWS_AS(deserialize(chopped), StreamError);
        }
    }
    SECTION("reserved metadata bits") {
        bytes.back() |= 0x80;
        REQUIRE_THROWS_AS(deserialize(bytes), StreamError);
    }
    SECTION("bundle wider than the stream capacity") {
        std::vector<std::uint8_t> narrow = bytes;
        narrow[8] = 1;  // capacity 1, but the bundle holds 2 elements
        REQUIRE_THROWS_WITH(deserialize(narrow), Catch::Matchers::ContainsSubstring("capacity"));
    }
}

TEST_CASE("decompress guards stream shape", "[rir]") {
    const CsrMatrix m = random_sparse(6, 6, 0.3, 5);
    RirStream s = compress_csr(m, 4);

    RirStream wrong = s;
    wrong.kernel = StreamKernel::csc;
    REQUIRE_THROWS_AS(decompress_to_csr(wrong), StreamError);

    RirStream unordered = s;
    std::swap(unordered.records.front(), unordered.records.back());
    REQUIRE_THROWS_AS(decompress_to_csr(unordered), StreamError);

    // Dropping the flagged tail of a split feature must be caught.
    RirStream split = compress_csr(m, 1);
    for (std::size_t i = 0; i < split.records.size(); ++i) {
        if (std::get<RirBundle>(split.records[i]).last_of_feature) {
            split.records.erase(split.records.begin() + i);
            break;
        }
    }
    REQUIRE_THROWS_AS(decompress_to_csr(split), StreamError);
}

TEST_CASE("wire bytes stay stable against the committed golden stream", "[rir]") {
    CooMatrix coo;
    coo.rows = 5;
    coo.cols = 9;
    coo.entries = {
        {0, 0, 1.0f},    {0, 3, -2.5f}, {0, 8, 0.125f}, {1, 2, 3.0f},
        {3, 1, 0.0f},    {3, 4, 7.5f},  {3, 5, -1.0f},  {3, 6, 2.0f},
        {3, 7, 4.0f},    {4, 8, -0.5f},
    };
    const RirStream s = compress_csr(coo_to_csr(coo), 2);
    const std::vector<std::uint8_t> bytes = serialize(s);
    const std::vector<std::uint8_t> golden =
        read_file(std::string(REAP_TEST_GOLDEN_DIR) + "/stream_cap2.rir");
    REQUIRE(bytes == golden);
    REQUIRE(deserialize(golden) == s);
}

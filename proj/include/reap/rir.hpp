// Bundle stream representation and its binary wire format.
//
// A bundle groups up to `capacity` (distinct index, value) pairs that share
// one feature index: the row id for CSR streams, the column id for CSC and
// factorization streams.  Rows larger than the capacity are split greedily,
// full bundles first, and only the final piece carries last_of_feature.
//
// On the wire each record stores its elements first, then the shared
// feature, then a metadata word.  A decoder therefore walks the file
// backwards: metadata first, shared feature next, elements last.  That
// matches a hardware FIFO that pushes payload before header words and pops
// in reverse.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "reap/matrix.hpp"

namespace reap {

inline constexpr index_t kDefaultBundleCapacity = 32;

enum class StreamKernel : std::uint16_t { csr = 0, csc = 1, cholesky = 2 };

inline const char* kernel_name(StreamKernel k) {
    switch (k) {
        case StreamKernel::csr: return "csr";
        case StreamKernel::csc: return "csc";
        case StreamKernel::cholesky: return "cholesky";
    }
    return "?";
}

struct StreamError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BundleElement {
    index_t distinct = 0;  // column id in CSR streams, row id in CSC streams
    float value = 0.0f;

    bool operator==(const BundleElement&) const = default;
};

struct RirBundle {
    index_t shared = 0;
    bool last_of_feature = false;
    std::vector<BundleElement> elements;

    bool operator==(const RirBundle&) const = default;
};

// Per-row extent triple consumed by the factorization kernel: where row
// `row` of the factor starts and how far it is filled before this column
// writes to it.
struct RowExtent {
    index_t row = 0;
    index_t start = 0;
    index_t end = 0;

    bool operator==(const RowExtent&) const = default;
};

struct ExtentRecord {
    index_t column = 0;
    std::vector<RowExtent> extents;

    bool operator==(const ExtentRecord&) const = default;
};

using RirRecord = std::variant<RirBundle, ExtentRecord>;

struct RirStream {
    StreamKernel kernel = StreamKernel::csr;
    index_t capacity = kDefaultBundleCapacity;
    index_t rows = 0;
    index_t cols = 0;
    std::vector<RirRecord> records;

    bool operator==(const RirStream&) const = default;
};

namespace detail {

enum : std::uint32_t { kKindData = 0, kKindExtent = 1, kKindDescriptor = 2 };

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

inline std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

inline std::uint32_t pack_meta(std::uint32_t count, bool last, std::uint32_t kind) {
    return (count & 0xFFFFu) | (last ? 1u << 16 : 0u) | (kind << 17);
}

}  // namespace detail

inline constexpr std::uint16_t kStreamVersion = 1;
inline constexpr char kStreamMagic[4] = {'R', 'I', 'R', '1'};
inline constexpr std::size_t kStreamHeaderBytes = 16;

inline std::size_t bundle_wire_bytes(std::size_t element_count) {
    return element_count * 8 + 8;
}

inline std::size_t extent_wire_bytes(std::size_t triple_count) {
    return triple_count * 12 + 8;
}

// Splits one feature's pairs into bundles: full bundles first, remainder
// last, final bundle flagged.  An empty feature emits nothing.
inline void append_bundles(std::vector<RirRecord>& out, index_t shared,
                           const BundleElement* elems, std::size_t count,
                           index_t capacity) {
    if (capacity == 0)
        throw std::invalid_argument("bundle capacity must be positive");
    for (std::size_t done = 0; done < count;) {
        const std::size_t take = std::min<std::size_t>(capacity, count - done);
        RirBundle b;
        b.shared = shared;
        b.elements.assign(elems + done, elems + done + take);
        done += take;
        b.last_of_feature = done == count;
        out.push_back(std::move(b));
    }
}

inline RirStream compress_csr(const CsrMatrix& m, index_t capacity = kDefaultBundleCapacity) {
    validate_csr(m);
    RirStream s;
    s.kernel = StreamKernel::csr;
    s.capacity = capacity;
    s.rows = m.rows;
    s.cols = m.cols;
    std::vector<BundleElement> row;
    for (index_t r = 0; r < m.rows; ++r) {
        row.clear();
        for (index_t i = m.row_ptr[r]; i < m.row_ptr[r + 1]; ++i)
            row.push_back({m.col_idx[i], m.values[i]});
        append_bundles(s.records, r, row.data(), row.size(), capacity);
    }
    return s;
}

inline RirStream compress_csc(const CscMatrix& m, index_t capacity = kDefaultBundleCapacity) {
    validate_csc(m);
    RirStream s;
    s.kernel = StreamKernel::csc;
    s.capacity = capacity;
    s.rows = m.rows;
    s.cols = m.cols;
    std::vector<BundleElement> col;
    for (index_t c = 0; c < m.cols; ++c) {
        col.clear();
        for (index_t i = m.col_ptr[c]; i < m.col_ptr[c + 1]; ++i)
            col.push_back({m.row_idx[i], m.values[i]});
        append_bundles(s.records, c, col.data(), col.size(), capacity);
    }
    return s;
}

inline CsrMatrix decompress_to_csr(const RirStream& s) {
    if (s.kernel != StreamKernel::csr)
        throw StreamError(std::string("expected a csr stream, found ") + kernel_name(s.kernel));
    CooMatrix coo;
    coo.rows = s.rows;
    coo.cols = s.cols;
    index_t prev_feature = 0;
    bool open = false;  // inside a split row whose last bundle is pending
    for (const RirRecord& rec : s.records) {
        const auto* b = std::get_if<RirBundle>(&rec);
        if (!b)
            throw StreamError("extent record in a data stream");
        if (b->elements.size() > s.capacity)
            throw StreamError("bundle exceeds stream capacity");
        if (!b->last_of_feature && b->elements.size() != s.capacity)
            throw StreamError("non-final bundle of a feature must be full");
        if (open && b->shared != prev_feature)
            throw StreamError("feature " + std::to_string(prev_feature) +
                              " never saw its last_of_feature bundle");
        if (!open && b->shared < prev_feature)
            throw StreamError("features must appear in ascending order");
        for (const BundleElement& e : b->elements)
            coo.entries.push_back({b->shared, e.distinct, e.value});
        prev_feature = b->shared;
        open = !b->last_of_feature;
    }
    if (open)
        throw StreamError("stream ends inside a split feature");
    CsrMatrix out = coo_to_csr(coo);
    validate_csr(out);
    return out;
}

// A csc stream is structurally a csr stream over the transpose, so reuse
// the csr decoder and reinterpret its arrays.
inline CscMatrix decompress_to_csc(const RirStream& s) {
    if (s.kernel != StreamKernel::csc)
        throw StreamError(std::string("expected a csc stream, found ") + kernel_name(s.kernel));
    RirStream t = s;
    t.kernel = StreamKernel::csr;
    std::swap(t.rows, t.cols);
    CsrMatrix tr = decompress_to_csr(t);
    CscMatrix out;
    out.rows = s.rows;
    out.cols = s.cols;
    out.col_ptr = std::move(tr.row_ptr);
    out.row_idx = std::move(tr.col_idx);
    out.values = std::move(tr.values);
    return out;
}

inline std::vector<std::uint8_t> serialize(const RirStream& s) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kStreamMagic, kStreamMagic + 4);
    detail::put_u16(out, kStreamVersion);
    detail::put_u16(out, static_cast<std::uint16_t>(s.kernel));
    detail::put_u32(out, s.capacity);
    detail::put_u32(out, 0);  // reserved

    const bool empty = s.records.empty() && s.rows == 0 && s.cols == 0;
    if (!empty) {
        // Dimension descriptor travels as the first record.
        detail::put_u32(out, s.rows);
        detail::put_f32(out, 0.0f);
        detail::put_u32(out, s.cols);
        detail::put_f32(out, 0.0f);
        detail::put_u32(out, 0);
        detail::put_u32(out, detail::pack_meta(2, true, detail::kKindDescriptor));
    }

    for (const RirRecord& rec : s.records) {
        if (const auto* b = std::get_if<RirBundle>(&rec)) {
            if (b->elements.size() > 0xFFFF)
                throw StreamError("bundle too large for the 16-bit count field");
            for (const BundleElement& e : b->elements) {
                detail::put_u32(out, e.distinct);
                detail::put_f32(out, e.value);
            }
            detail::put_u32(out, b->shared);
            detail::put_u32(out, detail::pack_meta(
                                     static_cast<std::uint32_t>(b->elements.size()),
                                     b->last_of_feature, detail::kKindData));
        } else {
            const auto& x = std::get<ExtentRecord>(rec);
            if (x.extents.size() > 0xFFFF)
                throw StreamError("extent record too large for the 16-bit count field");
            for (const RowExtent& t : x.extents) {
                detail::put_u32(out, t.row);
                detail::put_u32(out, t.start);
                detail::put_u32(out, t.end);
            }
            detail::put_u32(out, x.column);
            detail::put_u32(out, detail::pack_meta(
                                     static_cast<std::uint32_t>(x.extents.size()),
                                     true, detail::kKindExtent));
        }
    }
    return out;
}

inline RirStream deserialize(const std::uint8_t* data, std::size_t size) {
    if (size < kStreamHeaderBytes)
        throw StreamError("truncated stream: shorter than the 16-byte header");
    if (std::memcmp(data, kStreamMagic, 4) != 0)
        throw StreamError("bad magic, not a bundle stream");
    const std::uint16_t version = detail::get_u16(data + 4);
    if (version != kStreamVersion)
        throw StreamError("unsupported stream version " + std::to_string(version));
    const std::uint16_t kernel = detail::get_u16(data + 6);
    if (kernel > 2)
        throw StreamError("unknown kernel tag " + std::to_string(kernel));

    RirStream s;
    s.kernel = static_cast<StreamKernel>(kernel);
    s.capacity = detail::get_u32(data + 8);
    if (s.capacity == 0)
        throw StreamError("stream capacity must be positive");

    // Records end-to-front: metadata word, shared feature, elements.
    std::size_t pos = size;
    std::vector<RirRecord> reversed;
    bool saw_descriptor = false;
    while (pos > kStreamHeaderBytes) {
        if (pos - kStreamHeaderBytes < 8)
            throw StreamError("truncated record trailer");
        const std::uint32_t meta = detail::get_u32(data + pos - 4);
        const std::uint32_t shared = detail::get_u32(data + pos - 8);
        const std::uint32_t count = meta & 0xFFFFu;
        const bool last = (meta >> 16) & 1u;
        const std::uint32_t kind = (meta >> 17) & 3u;
        if (meta >> 19)
            throw StreamError("reserved metadata bits set");
        const std::size_t body =
            kind == detail::kKindExtent ? count * 12u : count * 8u;
        if (pos - kStreamHeaderBytes < 8 + body)
            throw StreamError("truncated record body");
        const std::uint8_t* elems = data + pos - 8 - body;

        switch (kind) {
            case detail::kKindData: {
                RirBundle b;
                b.shared = shared;
                b.last_of_feature = last;
                b.elements.resize(count);
                for (std::uint32_t i = 0; i < count; ++i) {
                    b.elements[i].distinct = detail::get_u32(elems + 8 * i);
                    b.elements[i].value =
                        std::bit_cast<float>(detail::get_u32(elems + 8 * i + 4));
                }
                if (b.elements.size() > s.capacity)
                    throw StreamError("bundle exceeds stream capacity");
                reversed.emplace_back(std::move(b));
                break;
            }
            case detail::kKindExtent: {
                ExtentRecord x;
                x.column = shared;
                x.extents.resize(count);
                for (std::uint32_t i = 0; i < count; ++i) {
                    x.extents[i].row = detail::get_u32(elems + 12 * i);
                    x.extents[i].start = detail::get_u32(elems + 12 * i + 4);
                    x.extents[i].end = detail::get_u32(elems + 12 * i + 8);
                }
                reversed.emplace_back(std::move(x));
                break;
            }
            case detail::kKindDescriptor: {
                if (pos - 8 - body != kStreamHeaderBytes)
                    throw StreamError("descriptor record is only valid at the stream head");
                if (count != 2)
                    throw StreamError("dimension descriptor must carry two elements");
                s.rows = detail::get_u32(elems);
                s.cols = detail::get_u32(elems + 8);
                saw_descriptor = true;
                break;
            }
            default:
                throw StreamError("unknown record kind " + std::to_string(kind));
        }
        pos -= 8 + body;
    }
    if (!saw_descriptor && size > kStreamHeaderBytes)
        throw StreamError("stream payload without a dimension descriptor");

    s.records.assign(std::make_move_iterator(reversed.rbegin()),
                     std::make_move_iterator(reversed.rend()));
    return s;
}

inline RirStream deserialize(const std::vector<std::uint8_t>& bytes) {
    return deserialize(bytes.data(), bytes.size());
}

inline void save_stream_file(const std::string& path, const RirStream& s) {
    const std::vector<std::uint8_t> bytes = serialize(s);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw StreamError(path + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw StreamError(path + ": write failed");
}

inline RirStream load_stream_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw StreamError(path + ": cannot open for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace reap

// Sparse matrix containers (COO, CSR, CSC) and conversions between them.
//
// Canonical form everywhere: entries sorted by (row, col) for CSR and
// (col, row) for CSC, duplicates summed at construction time, explicit
// zeros kept.  Indices are 0-based uint32, values are float.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace reap {

using index_t = std::uint32_t;

struct CooEntry {
    index_t row = 0;
    index_t col = 0;
    float value = 0.0f;

    bool operator==(const CooEntry&) const = default;
};

struct CooMatrix {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<CooEntry> entries;

    bool operator==(const CooMatrix&) const = default;
};

struct CsrMatrix {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<index_t> row_ptr;   // size rows + 1
    std::vector<index_t> col_idx;   // size nnz, ascending within a row
    std::vector<float> values;

    index_t nnz() const { return row_ptr.empty() ? 0 : row_ptr.back(); }

    bool operator==(const CsrMatrix&) const = default;
};

struct CscMatrix {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<index_t> col_ptr;   // size cols + 1
    std::vector<index_t> row_idx;   // size nnz, ascending within a column
    std::vector<float> values;

    index_t nnz() const { return col_ptr.empty() ? 0 : col_ptr.back(); }

    bool operator==(const CscMatrix&) const = default;
};

namespace detail {

inline void check_dims(index_t rows, index_t cols) {
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("matrix dimensions must be positive");
}

}  // namespace detail

// Sorts by (row, col), sums duplicates in arrival order, keeps exact zeros.
inline CsrMatrix coo_to_csr(const CooMatrix& m) {
    detail::check_dims(m.rows, m.cols);
    for (const CooEntry& e : m.entries) {
        if (e.row >= m.rows || e.col >= m.cols)
            throw std::invalid_argument(
                "entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                ") outside " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                " matrix");
    }

    std::vector<CooEntry> sorted = m.entries;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const CooEntry& a, const CooEntry& b) {
                         return a.row != b.row ? a.row < b.row : a.col < b.col;
                     });

    CsrMatrix out;
    out.rows = m.rows;
    out.cols = m.cols;
    out.row_ptr.assign(m.rows + 1, 0);
    out.col_idx.reserve(sorted.size());
    out.values.reserve(sorted.size());

    for (std::size_t i = 0; i < sorted.size();) {
        const index_t r = sorted[i].row;
        const index_t c = sorted[i].col;
        float sum = 0.0f;
        for (; i < sorted.size() && sorted[i].row == r && sorted[i].col == c; ++i)
            sum += sorted[i].value;
        out.col_idx.push_back(c);
        out.values.push_back(sum);
        out.row_ptr[r + 1]++;
    }
    for (index_t r = 0; r < m.rows; ++r)
        out.row_ptr[r + 1] += out.row_ptr[r];
    return out;
}

inline CooMatrix csr_to_coo(const CsrMatrix& m) {
    CooMatrix out;
    out.rows = m.rows;
    out.cols = m.cols;
    out.entries.reserve(m.nnz());
    for (index_t r = 0; r < m.rows; ++r)
        for (index_t i = m.row_ptr[r]; i < m.row_ptr[r + 1]; ++i)
            out.entries.push_back({r, m.col_idx[i], m.values[i]});
    return out;
}

// Counting transpose; preserves relative order, so the result is canonical.
inline CscMatrix csr_to_csc(const CsrMatrix& m) {
    CscMatrix out;
    out.rows = m.rows;
    out.cols = m.cols;
    out.col_ptr.assign(m.cols + 1, 0);
    out.row_idx.resize(m.nnz());
    out.values.resize(m.nnz());

    for (index_t i = 0; i < m.nnz(); ++i)
        out.col_ptr[m.col_idx[i] + 1]++;
    for (index_t c = 0; c < m.cols; ++c)
        out.col_ptr[c + 1] += out.col_ptr[c];

    std::vector<index_t> next(out.col_ptr.begin(), out.col_ptr.end() - 1);
    for (index_t r = 0; r < m.rows; ++r)
        for (index_t i = m.row_ptr[r]; i < m.row_ptr[r + 1]; ++i) {
            const index_t dst = next[m.col_idx[i]]++;
            out.row_idx[dst] = r;
            out.values[dst] = m.values[i];
        }
    return out;
}

inline CsrMatrix csc_to_csr(const CscMatrix& m) {
    CsrMatrix out;
    out.rows = m.rows;
    out.cols = m.cols;
    out.row_ptr.assign(m.rows + 1, 0);
    out.col_idx.resize(m.nnz());
    out.values.resize(m.nnz());

    for (index_t i = 0; i < m.nnz(); ++i)
        out.row_ptr[m.row_idx[i] + 1]++;
    for (index_t r = 0; r < m.rows; ++r)
        out.row_ptr[r + 1] += out.row_ptr[r];

    std::vector<index_t> next(out.row_ptr.begin(), out.row_ptr.end() - 1);
    for (index_t c = 0; c < m.cols; ++c)
        for (index_t i = m.col_ptr[c]; i < m.col_ptr[c + 1]; ++i) {
            const index_t dst = next[m.row_idx[i]]++;
            out.col_idx[dst] = c;
            out.values[dst] = m.values[i];
        }
    return out;
}

inline CooMatrix csc_to_coo(const CscMatrix& m) { return csr_to_coo(csc_to_csr(m)); }

inline double density(const CsrMatrix& m) {
    detail::check_dims(m.rows, m.cols);
    return static_cast<double>(m.nnz()) /
           (static_cast<double>(m.rows) * static_cast<double>(m.cols));
}

// Structural sanity check used by tests and the stream decoder.
inline void validate_csr(const CsrMatrix& m) {
    detail::check_dims(m.rows, m.cols);
    if (m.row_ptr.size() != m.rows + 1 || m.row_ptr.front() != 0)
        throw std::invalid_argument("malformed row pointer array");
    if (m.col_idx.size() != m.values.size() || m.col_idx.size() != m.row_ptr.back())
        throw std::invalid_argument("index/value arrays disagree with row pointers");
    for (index_t r = 0; r < m.rows; ++r) {
        if (m.row_ptr[r] > m.row_ptr[r + 1])
            throw std::invalid_argument("row pointers must be non-decreasing");
        for (index_t i = m.row_ptr[r]; i < m.row_ptr[r + 1]; ++i) {
            if (m.col_idx[i] >= m.cols)
                throw std::invalid_argument("column index out of range");
            if (i > m.row_ptr[r] && m.col_idx[i - 1] >= m.col_idx[i])
                throw std::invalid_argument("column indices must be strictly ascending");
        }
    }
}

inline void validate_csc(const CscMatrix& m) {
    detail::check_dims(m.rows, m.cols);
    if (m.col_ptr.size() != m.cols + 1 || m.col_ptr.front() != 0)
        throw std::invalid_argument("malformed column pointer array");
    if (m.row_idx.size() != m.values.size() || m.row_idx.size() != m.col_ptr.back())
        throw std::invalid_argument("index/value arrays disagree with column pointers");
    for (index_t c = 0; c < m.cols; ++c) {
        if (m.col_ptr[c] > m.col_ptr[c + 1])
            throw std::invalid_argument("column pointers must be non-decreasing");
        for (index_t i = m.col_ptr[c]; i < m.col_ptr[c + 1]; ++i) {
            if (m.row_idx[i] >= m.rows)
                throw std::invalid_argument("row index out of range");
            if (i > m.col_ptr[c] && m.row_idx[i - 1] >= m.row_idx[i])
                throw std::invalid_argument("row indices must be strictly ascending");
        }
    }
}

namespace detail {

// Bounded uniform draw without std::uniform_int_distribution, which is
// implementation-defined; this keeps generated fixtures stable everywhere.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(rng()) * bound) >> 64);
}

inline float unit_value(std::mt19937_64& rng) {
    // Uniform in [0.1, 1).  Strictly positive values keep products and
    // accumulations away from catastrophic cancellation.
    const auto mantissa = static_cast<float>(rng() >> 40);  // 24 bits
    return 0.1f + 0.9f * (mantissa * 0x1.0p-24f);
}

}  // namespace detail

// Exact-count uniform sampling: nnz == round(density * rows * cols).
// Same seed, same matrix.
inline CsrMatrix random_sparse(index_t rows, index_t cols, double density,
                               std::uint64_t seed) {
    detail::check_dims(rows, cols);
    if (density < 0.0 || density > 1.0)
        throw std::invalid_argument("density must lie in [0, 1]");

    const std::uint64_t total = static_cast<std::uint64_t>(rows) * cols;
    const auto target = static_cast<std::uint64_t>(std::llround(density * static_cast<double>(total)));

    std::mt19937_64 rng(seed);
    std::unordered_set<std::uint64_t> picked;
    const bool complement = target > total / 2;
    const std::uint64_t draws = complement ? total - target : target;
    picked.reserve(draws * 2 + 16);
    while (picked.size() < draws)
        picked.insert(detail::bounded_draw(rng, total));

    std::vector<std::uint64_t> flat;
    flat.reserve(target);
    if (complement) {
        for (std::uint64_t i = 0; i < total; ++i)
            if (!picked.count(i)) flat.push_back(i);
    } else {
        flat.assign(picked.begin(), picked.end());
        std::sort(flat.begin(), flat.end());
    }

    CooMatrix coo;
    coo.rows = rows;
    coo.cols = cols;
    coo.entries.reserve(flat.size());
    for (std::uint64_t f : flat)
        coo.entries.push_back({static_cast<index_t>(f / cols),
                               static_cast<index_t>(f % cols),
                               detail::unit_value(rng)});
    return coo_to_csr(coo);
}

// Symmetrize and shift: S = (M + M^T)/2 + alpha*I with alpha chosen so the
// result is strictly diagonally dominant, hence positive definite.
inline CsrMatrix make_spd(const CsrMatrix& m) {
    if (m.rows != m.cols)
        throw std::invalid_argument("make_spd requires a square matrix");

    CooMatrix sym;
    sym.rows = m.rows;
    sym.cols = m.cols;
    sym.entries.reserve(2 * static_cast<std::size_t>(m.nnz()) + m.rows);
    for (index_t r = 0; r < m.rows; ++r)
        for (index_t i = m.row_ptr[r]; i < m.row_ptr[r + 1]; ++i) {
            sym.entries.push_back({r, m.col_idx[i], 0.5f * m.values[i]});
            sym.entries.push_back({m.col_idx[i], r, 0.5f * m.values[i]});
        }
    CsrMatrix s = coo_to_csr(sym);

    float shift = 1.0f;
    for (index_t r = 0; r < s.rows; ++r) {
        float off = 0.0f, diag = 0.0f;
        for (index_t i = s.row_ptr[r]; i < s.row_ptr[r + 1]; ++i) {
            if (s.col_idx[i] == r)
                diag = s.values[i];
            else
                off += std::fabs(s.values[i]);
        }
        shift = std::max(shift, off - diag + 1.0f);
    }

    CooMatrix shifted = csr_to_coo(s);
    for (index_t r = 0; r < s.rows; ++r)
        shifted.entries.push_back({r, r, shift});
    return coo_to_csr(shifted);
}

}  // namespace reap

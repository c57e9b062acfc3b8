// Left-looking sparse Cholesky: elimination tree, symbolic fill pattern,
// and a numeric factorization that walks factor rows with sparse dot
// products, the same dataflow the accelerator model executes.
//
// The factor is stored row-major with extents preallocated from the
// symbolic counts, so writing L(r,k) is an append at row r's fill cursor.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "reap/dense.hpp"
#include "reap/matrix.hpp"

namespace reap {

inline constexpr index_t kNoParent = 0xFFFFFFFFu;

struct EliminationTree {
    std::vector<index_t> parent;  // parent[k] > k, or kNoParent for roots
};

namespace detail {

inline void check_symmetric_structure(const CscMatrix& a) {
    if (a.rows != a.cols)
        throw std::invalid_argument("factorization needs a square matrix");
    const CsrMatrix t = csc_to_csr(a);
    // struct(A) == struct(A^T) exactly when the compressed axes agree.
    if (t.row_ptr != a.col_ptr || t.col_idx != a.row_idx)
        throw std::invalid_argument("matrix structure is not symmetric");
}

}  // namespace detail

// Liu's algorithm with path compression on an ancestor forest.
inline EliminationTree build_etree(const CscMatrix& a) {
    detail::check_symmetric_structure(a);
    const index_t n = a.cols;
    EliminationTree t;
    t.parent.assign(n, kNoParent);
    std::vector<index_t> ancestor(n, kNoParent);
    for (index_t j = 0; j < n; ++j) {
        for (index_t p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
            index_t i = a.row_idx[p];
            while (i != kNoParent && i < j) {
                const index_t next = ancestor[i];
                ancestor[i] = j;
                if (next == kNoParent) t.parent[i] = j;
                i = next;
            }
        }
    }
    return t;
}

struct SymbolicPattern {
    index_t n = 0;
    std::vector<std::vector<index_t>> column_rows;  // pattern of L(:,k), ascending
    std::vector<index_t> row_counts;                // nnz per factor row
    std::vector<index_t> row_offsets;               // prefix sums, size n+1

    std::uint64_t nnz() const { return row_offsets.empty() ? 0 : row_offsets.back(); }
};

// struct(L(:,k)) = struct(lower A(:,k)) + union over children j of
// struct(L(:,j)) minus j itself, processed bottom-up.
inline SymbolicPattern symbolic_pattern(const CscMatrix& a, const EliminationTree& t) {
    detail::check_symmetric_structure(a);
    const index_t n = a.cols;
    if (t.parent.size() != n)
        throw std::invalid_argument("tree size disagrees with the matrix");

    std::vector<std::vector<index_t>> children(n);
    for (index_t k = 0; k < n; ++k)
        if (t.parent[k] != kNoParent) children[t.parent[k]].push_back(k);

    SymbolicPattern out;
    out.n = n;
    out.column_rows.resize(n);
    out.row_counts.assign(n, 0);

    std::vector<index_t> mark(n, kNoParent);
    for (index_t k = 0; k < n; ++k) {
        std::vector<index_t>& rows = out.column_rows[k];
        mark[k] = k;
        rows.push_back(k);
        for (index_t p = a.col_ptr[k]; p < a.col_ptr[k + 1]; ++p) {
            const index_t r = a.row_idx[p];
            if (r > k && mark[r] != k) {
                mark[r] = k;
                rows.push_back(r);
            }
        }
        for (index_t child : children[k])
            for (index_t r : out.column_rows[child])
                if (r > k && mark[r] != k) {
                    mark[r] = k;
                    rows.push_back(r);
                }
        std::sort(rows.begin(), rows.end());
        for (index_t r : rows) out.row_counts[r]++;
    }

    out.row_offsets.assign(n + 1, 0);
    for (index_t r = 0; r < n; ++r)
        out.row_offsets[r + 1] = out.row_offsets[r] + out.row_counts[r];
    return out;
}

// Row-major factor with per-row extents fixed up front by the symbolic
// pass.  row_fill[r] is the write cursor; the row occupies
// [row_offsets[r], row_offsets[r] + row_fill[r]).
struct LFactor {
    index_t n = 0;
    std::vector<index_t> row_offsets;  // size n+1
    std::vector<index_t> row_fill;     // size n
    std::vector<index_t> cols;
    std::vector<float> values;

    std::span<const index_t> row_cols(index_t r) const {
        return {cols.data() + row_offsets[r], row_fill[r]};
    }
    std::span<const float> row_values(index_t r) const {
        return {values.data() + row_offsets[r], row_fill[r]};
    }
};

struct CholeskyStats {
    std::uint64_t dot_multiplies = 0;
    std::uint64_t divides = 0;
    std::uint64_t sqrts = 0;

    std::uint64_t flops() const { return 2 * dot_multiplies + divides + sqrts; }
};

// Two-pointer product of two factor rows over columns strictly below
// `limit`.  Both column lists are ascending, so this is a linear merge.
inline float sparse_dot(std::span<const index_t> cols_a, std::span<const float> vals_a,
                        std::span<const index_t> cols_b, std::span<const float> vals_b,
                        index_t limit, std::uint64_t* multiplies = nullptr) {
    float sum = 0.0f;
    std::size_t i = 0, j = 0;
    while (i < cols_a.size() && j < cols_b.size()) {
        if (cols_a[i] >= limit || cols_b[j] >= limit) break;
        if (cols_a[i] < cols_b[j]) {
            ++i;
        } else if (cols_a[i] > cols_b[j]) {
            ++j;
        } else {
            sum += vals_a[i] * vals_b[j];
            if (multiplies) ++*multiplies;
            ++i;
            ++j;
        }
    }
    return sum;
}

// Left-looking column factorization over the symbolic pattern.  Throws
// NotSpdError naming the first column whose pivot is not positive.
inline LFactor factorize(const CscMatrix& a, const SymbolicPattern& pattern,
                         CholeskyStats* stats = nullptr) {
    detail::check_symmetric_structure(a);
    const index_t n = a.cols;
    if (pattern.n != n)
        throw std::invalid_argument("pattern size disagrees with the matrix");

    LFactor l;
    l.n = n;
    l.row_offsets.assign(pattern.row_offsets.begin(), pattern.row_offsets.end());
    l.row_fill.assign(n, 0);
    l.cols.resize(pattern.nnz());
    l.values.resize(pattern.nnz());

    std::vector<float> dot(n, 0.0f);
    auto append = [&l](index_t r, index_t c, float v) {
        const index_t at = l.row_offsets[r] + l.row_fill[r]++;
        l.cols[at] = c;
        l.values[at] = v;
    };

    for (index_t k = 0; k < n; ++k) {
        const std::vector<index_t>& rows = pattern.column_rows[k];

        // Seed with the lower triangle of A(:,k); fill-in rows start at 0.
        for (index_t p = a.col_ptr[k]; p < a.col_ptr[k + 1]; ++p)
            if (a.row_idx[p] >= k) dot[a.row_idx[p]] = a.values[p];

        for (index_t r : rows)
            dot[r] -= sparse_dot(l.row_cols(r), l.row_values(r), l.row_cols(k),
                                 l.row_values(k), k,
                                 stats ? &stats->dot_multiplies : nullptr);

        const float pivot = dot[k];
        if (!(pivot > 0.0f)) {
            for (index_t r : rows) dot[r] = 0.0f;
            throw NotSpdError(k);
        }
        const float lkk = std::sqrt(pivot);
        if (stats) ++stats->sqrts;
        append(k, k, lkk);

        for (index_t r : rows) {
            if (r != k) {
                append(r, k, dot[r] / lkk);
                if (stats) ++stats->divides;
            }
            dot[r] = 0.0f;
        }
    }

    for (index_t r = 0; r < n; ++r)
        if (l.row_fill[r] != pattern.row_counts[r])
            throw std::logic_error("factor extents disagree with the symbolic counts");
    return l;
}

// Lower-triangular factor as a CSR matrix (rows already sorted by column).
inline CsrMatrix factor_to_csr(const LFactor& l) {
    CsrMatrix out;
    out.rows = out.cols = l.n;
    out.row_ptr.assign(l.n + 1, 0);
    for (index_t r = 0; r < l.n; ++r) {
        const auto cs = l.row_cols(r);
        const auto vs = l.row_values(r);
        out.col_idx.insert(out.col_idx.end(), cs.begin(), cs.end());
        out.values.insert(out.values.end(), vs.begin(), vs.end());
        out.row_ptr[r + 1] = static_cast<index_t>(out.col_idx.size());
    }
    return out;
}

struct FactorResidual {
    double max_abs_error = 0.0;   // max |LL^T - A|
    double max_abs_input = 0.0;   // max |A|
    double relative() const {
        return max_abs_input == 0.0 ? max_abs_error : max_abs_error / max_abs_input;
    }
};

inline FactorResidual verify_factor(const CscMatrix& a, const LFactor& l) {
    const DenseMatrix ad = densify(a);
    const index_t n = l.n;
    DenseMatrix llt(n, n);
    for (index_t r = 0; r < n; ++r) {
        const auto rc = l.row_cols(r);
        const auto rv = l.row_values(r);
        for (index_t c = 0; c <= r; ++c) {
            const auto cc = l.row_cols(c);
            const auto cv = l.row_values(c);
            double sum = 0.0;
            std::size_t i = 0, j = 0;
            while (i < rc.size() && j < cc.size()) {
                if (rc[i] < cc[j])
                    ++i;
                else if (rc[i] > cc[j])
                    ++j;
                else
                    sum += static_cast<double>(rv[i++]) * static_cast<double>(cv[j++]);
            }
            llt.at(r, c) = sum;
            llt.at(c, r) = sum;
        }
    }
    FactorResidual res;
    for (std::size_t i = 0; i < ad.data.size(); ++i) {
        res.max_abs_error = std::max(res.max_abs_error, std::fabs(llt.data[i] - ad.data[i]));
        res.max_abs_input = std::max(res.max_abs_input, std::fabs(ad.data[i]));
    }
    return res;
}

}  // namespace reap

// Work scheduling for the pipeline model.
//
// Multiply: result rows are assigned to pipelines in groups of `pipelines`
// consecutive non-empty A rows; each group stores the per-row A bundles
// plus the ascending union of B rows the group needs, so a B row fetched
// once serves every pipeline in the group.
//
// Factorization: one stream per column holding the column's A bundles
// followed by an extent record that tells each pipeline where the factor
// rows it must read start and how far they are filled before this column
// writes to them.

#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "reap/cholesky.hpp"
#include "reap/rir.hpp"

namespace reap {

struct SpgemmRowTask {
    index_t a_row = 0;
    std::vector<RirBundle> a_bundles;
};

struct SpgemmGroup {
    std::vector<SpgemmRowTask> rows;               // at most `pipelines`
    std::vector<index_t> b_rows;                   // ascending union
    std::vector<std::vector<RirBundle>> b_bundles; // parallel to b_rows
};

struct SpgemmSchedule {
    index_t pipelines = 1;
    index_t capacity = kDefaultBundleCapacity;
    index_t result_rows = 0;
    index_t result_cols = 0;
    index_t inner = 0;
    std::vector<SpgemmGroup> groups;
};

inline SpgemmSchedule build_spgemm_schedule(const CsrMatrix& a, const CsrMatrix& b,
                                            index_t pipelines,
                                            index_t capacity = kDefaultBundleCapacity) {
    if (a.cols != b.rows)
        throw std::invalid_argument("inner dimensions disagree");
    if (pipelines == 0)
        throw std::invalid_argument("pipeline count must be positive");

    SpgemmSchedule s;
    s.pipelines = pipelines;
    s.capacity = capacity;
    s.result_rows = a.rows;
    s.result_cols = b.cols;
    s.inner = a.cols;

    std::vector<BundleElement> scratch;
    auto row_bundles = [&](const CsrMatrix& m, index_t r) {
        scratch.clear();
        for (index_t i = m.row_ptr[r]; i < m.row_ptr[r + 1]; ++i)
            scratch.push_back({m.col_idx[i], m.values[i]});
        std::vector<RirRecord> recs;
        append_bundles(recs, r, scratch.data(), scratch.size(), capacity);
        std::vector<RirBundle> out;
        out.reserve(recs.size());
        for (RirRecord& rec : recs)
            out.push_back(std::move(std::get<RirBundle>(rec)));
        return out;
    };

    SpgemmGroup group;
    std::vector<bool> wanted(b.rows, false);
    auto flush = [&] {
        if (group.rows.empty()) return;
        for (const SpgemmRowTask& t : group.rows)
            for (const RirBundle& bun : t.a_bundles)
                for (const BundleElement& e : bun.elements)
                    wanted[e.distinct] = true;
        for (index_t r = 0; r < b.rows; ++r)
            if (wanted[r]) {
                group.b_rows.push_back(r);
                group.b_bundles.push_back(row_bundles(b, r));
                wanted[r] = false;
            }
        s.groups.push_back(std::move(group));
        group = SpgemmGroup{};
    };

    for (index_t r = 0; r < a.rows; ++r) {
        if (a.row_ptr[r] == a.row_ptr[r + 1]) continue;  // empty rows take no slot
        group.rows.push_back({r, row_bundles(a, r)});
        if (group.rows.size() == pipelines) flush();
    }
    flush();
    return s;
}

// Column streams for the factorization: per column k, bundles over the
// lower triangle of A(:,k) and then the extent record.  `end` is the fill
// of factor row r before column k writes to it, so a fresh row has
// end == start and the diagonal row's extent covers everything the dot
// product must read.
inline RirStream build_cholesky_schedule(const CscMatrix& a, const SymbolicPattern& pattern,
                                         index_t capacity = kDefaultBundleCapacity) {
    detail::check_symmetric_structure(a);
    if (pattern.n != a.cols)
        throw std::invalid_argument("pattern size disagrees with the matrix");

    RirStream s;
    s.kernel = StreamKernel::cholesky;
    s.capacity = capacity;
    s.rows = a.rows;
    s.cols = a.cols;

    std::vector<index_t> fill(pattern.n, 0);
    std::vector<BundleElement> scratch;
    for (index_t k = 0; k < pattern.n; ++k) {
        scratch.clear();
        for (index_t p = a.col_ptr[k]; p < a.col_ptr[k + 1]; ++p)
            if (a.row_idx[p] >= k)
                scratch.push_back({a.row_idx[p], a.values[p]});
        append_bundles(s.records, k, scratch.data(), scratch.size(), capacity);

        ExtentRecord x;
        x.column = k;
        if (pattern.column_rows[k].size() > 0xFFFF)
            throw StreamError("column pattern too large for the 16-bit count field");
        for (index_t r : pattern.column_rows[k]) {
            const index_t start = pattern.row_offsets[r];
            x.extents.push_back({r, start, start + fill[r]});
            fill[r]++;
        }
        s.records.emplace_back(std::move(x));
    }
    return s;
}

}  // namespace reap

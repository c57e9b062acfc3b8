// Row-by-row sparse matrix-matrix multiply, written the way the streaming
// datapath evaluates it: for each result row, the A-row bundle is held in a
// CAM keyed by column index, every element of the referenced B rows is
// broadcast past it, hits produce partial products, and the partials are
// sorted by output column and merged left to right.
//
// Accumulation order is fixed (bundle order, then B-stream order, then
// sorted order), so results are bit-reproducible and match the pipeline
// model exactly.

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "reap/rir.hpp"

namespace reap {

struct PartialProduct {
    index_t col = 0;
    float value = 0.0f;

    bool operator==(const PartialProduct&) const = default;
};

struct SpgemmStats {
    std::uint64_t partial_products = 0;
    std::uint64_t merge_adds = 0;

    std::uint64_t flops() const { return partial_products + merge_adds; }
};

// Content-addressable table of one A-row bundle: key is the A column index,
// payload the A value.
class CamTable {
public:
    explicit CamTable(std::size_t capacity) : capacity_(capacity) {
        slots_.reserve(capacity);
    }

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return slots_.size(); }

    void clear() { slots_.clear(); }

    void load(const RirBundle& bundle) {
        clear();
        for (const BundleElement& e : bundle.elements) {
            if (slots_.size() == capacity_)
                throw std::length_error("CAM overflow: bundle wider than the table");
            slots_.emplace(e.distinct, e.value);
        }
    }

    // nullptr on miss.
    const float* lookup(index_t key) const {
        auto it = slots_.find(key);
        return it == slots_.end() ? nullptr : &it->second;
    }

private:
    std::size_t capacity_;
    std::unordered_map<index_t, float> slots_;
};

// Streams one B row past the CAM.  The shared feature of the B bundles is
// the B row id; a hit means the held A row has a coefficient for it.
inline void match_multiply(const CamTable& cam, std::span<const RirBundle> b_row,
                           std::vector<PartialProduct>& out) {
    for (const RirBundle& b : b_row) {
        const float* a = cam.lookup(b.shared);
        if (!a) continue;
        for (const BundleElement& e : b.elements)
            out.push_back({e.distinct, *a * e.value});
    }
}

inline std::vector<PartialProduct> sort_partials(std::vector<PartialProduct> ps) {
    std::stable_sort(ps.begin(), ps.end(),
                     [](const PartialProduct& a, const PartialProduct& b) {
                         return a.col < b.col;
                     });
    return ps;
}

// Single left-to-right pass summing runs of equal columns.  Exact zeros
// produced by cancellation are kept.
inline std::vector<PartialProduct> merge_partials(std::span<const PartialProduct> sorted) {
    std::vector<PartialProduct> out;
    for (std::size_t i = 0; i < sorted.size();) {
        if (i > 0 && sorted[i - 1].col > sorted[i].col)
            throw std::invalid_argument("merge input must be sorted by column");
        const index_t col = sorted[i].col;
        float sum = 0.0f;
        for (; i < sorted.size() && sorted[i].col == col; ++i)
            sum += sorted[i].value;
        out.push_back({col, sum});
    }
    return out;
}

namespace detail {

// One result row, given the A-row bundles and the B rows they reference
// (ascending, possibly a superset: rows absent from the CAM contribute
// nothing).  This is the single compute path shared by the functional
// engine and the pipeline model.
inline std::vector<PartialProduct> compute_result_row(
    std::span<const RirBundle> a_bundles,
    std::span<const std::vector<RirBundle>* const> b_rows, std::size_t cam_capacity,
    SpgemmStats* stats) {
    std::vector<PartialProduct> partials;
    CamTable cam(cam_capacity);
    for (const RirBundle& a : a_bundles) {
        cam.load(a);
        for (const auto* b_row : b_rows)
            match_multiply(cam, *b_row, partials);
    }
    if (stats) stats->partial_products += partials.size();
    return merge_partials(sort_partials(std::move(partials)));
}

}  // namespace detail

inline CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b,
                        index_t capacity = kDefaultBundleCapacity,
                        SpgemmStats* stats = nullptr) {
    if (a.cols != b.rows)
        throw std::invalid_argument("inner dimensions disagree");

    // B rows as bundle lists, built once.
    std::vector<std::vector<RirBundle>> b_rows(b.rows);
    {
        std::vector<BundleElement> scratch;
        for (index_t r = 0; r < b.rows; ++r) {
            scratch.clear();
            for (index_t i = b.row_ptr[r]; i < b.row_ptr[r + 1]; ++i)
                scratch.push_back({b.col_idx[i], b.values[i]});
            std::vector<RirRecord> recs;
            append_bundles(recs, r, scratch.data(), scratch.size(), capacity);
            for (RirRecord& rec : recs)
                b_rows[r].push_back(std::move(std::get<RirBundle>(rec)));
        }
    }

    CsrMatrix c;
    c.rows = a.rows;
    c.cols = b.cols;
    c.row_ptr.assign(a.rows + 1, 0);

    std::vector<BundleElement> a_scratch;
    for (index_t r = 0; r < a.rows; ++r) {
        a_scratch.clear();
        std::vector<const std::vector<RirBundle>*> needed;
        for (index_t i = a.row_ptr[r]; i < a.row_ptr[r + 1]; ++i) {
            a_scratch.push_back({a.col_idx[i], a.values[i]});
            needed.push_back(&b_rows[a.col_idx[i]]);
        }
        std::vector<RirRecord> recs;
        append_bundles(recs, r, a_scratch.data(), a_scratch.size(), capacity);
        std::vector<RirBundle> a_bundles;
        for (RirRecord& rec : recs)
            a_bundles.push_back(std::move(std::get<RirBundle>(rec)));

        const std::uint64_t before = stats ? stats->partial_products : 0;
        const std::vector<PartialProduct> row =
            detail::compute_result_row(a_bundles, needed, capacity, stats);
        if (stats)
            stats->merge_adds += (stats->partial_products - before) - row.size();

        for (const PartialProduct& p : row) {
            c.col_idx.push_back(p.col);
            c.values.push_back(p.value);
        }
        c.row_ptr[r + 1] = static_cast<index_t>(c.col_idx.size());
    }
    return c;
}

// Gustavson-style scatter/gather with double accumulators; the independent
// check against the streaming path.
inline CsrMatrix reference_spgemm(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.cols != b.rows)
        throw std::invalid_argument("inner dimensions disagree");

    CsrMatrix c;
    c.rows = a.rows;
    c.cols = b.cols;
    c.row_ptr.assign(a.rows + 1, 0);

    std::vector<double> acc(b.cols, 0.0);
    std::vector<bool> seen(b.cols, false);
    std::vector<index_t> touched;
    for (index_t r = 0; r < a.rows; ++r) {
        touched.clear();
        for (index_t i = a.row_ptr[r]; i < a.row_ptr[r + 1]; ++i) {
            const index_t k = a.col_idx[i];
            const double av = a.values[i];
            for (index_t j = b.row_ptr[k]; j < b.row_ptr[k + 1]; ++j) {
                const index_t col = b.col_idx[j];
                if (!seen[col]) {
                    seen[col] = true;
                    touched.push_back(col);
                }
                acc[col] += av * b.values[j];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (index_t col : touched) {
            c.col_idx.push_back(col);
            c.values.push_back(static_cast<float>(acc[col]));
            acc[col] = 0.0;
            seen[col] = false;
        }
        c.row_ptr[r + 1] = static_cast<index_t>(c.col_idx.size());
    }
    return c;
}

}  // namespace reap

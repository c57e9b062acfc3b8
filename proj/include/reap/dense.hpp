// Dense double-precision mirror of the sparse types, used as the reference
// arithmetic for tests and verification.  Everything here favours clarity
// over speed.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "reap/matrix.hpp"

namespace reap {

struct DenseMatrix {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<double> data;  // row-major

    DenseMatrix() = default;
    DenseMatrix(index_t r, index_t c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(index_t r, index_t c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(index_t r, index_t c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

struct NotSpdError : std::runtime_error {
    index_t column;
    explicit NotSpdError(index_t k)
        : std::runtime_error("matrix is not positive definite at column " + std::to_string(k)),
          column(k) {}
};

inline DenseMatrix densify(const CsrMatrix& m) {
    DenseMatrix out(m.rows, m.cols);
    for (index_t r = 0; r < m.rows; ++r)
        for (index_t i = m.row_ptr[r]; i < m.row_ptr[r + 1]; ++i)
            out.at(r, m.col_idx[i]) += m.values[i];
    return out;
}

inline DenseMatrix densify(const CscMatrix& m) { return densify(csc_to_csr(m)); }

inline DenseMatrix densify(const CooMatrix& m) { return densify(coo_to_csr(m)); }

inline DenseMatrix dense_spgemm_oracle(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows)
        throw std::invalid_argument("inner dimensions disagree");
    DenseMatrix c(a.rows, b.cols);
    for (index_t i = 0; i < a.rows; ++i)
        for (index_t k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (index_t j = 0; j < b.cols; ++j)
                c.at(i, j) += aik * b.at(k, j);
        }
    return c;
}

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
// Throws NotSpdError carrying the first failing column.
inline DenseMatrix dense_cholesky_oracle(const DenseMatrix& a) {
    if (a.rows != a.cols)
        throw std::invalid_argument("Cholesky needs a square matrix");
    const index_t n = a.rows;
    DenseMatrix l(n, n);
    for (index_t k = 0; k < n; ++k) {
        double d = a.at(k, k);
        for (index_t j = 0; j < k; ++j)
            d -= l.at(k, j) * l.at(k, j);
        if (!(d > 0.0))
            throw NotSpdError(k);
        const double lkk = std::sqrt(d);
        l.at(k, k) = lkk;
        for (index_t r = k + 1; r < n; ++r) {
            double v = a.at(r, k);
            for (index_t j = 0; j < k; ++j)
                v -= l.at(r, j) * l.at(k, j);
            l.at(r, k) = v / lkk;
        }
    }
    return l;
}

}  // namespace reap

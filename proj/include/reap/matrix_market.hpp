// Matrix Market coordinate I/O.
//
// Reader accepts real/integer/pattern fields with general or symmetric
// symmetry; symmetric input is expanded to full storage on load.  Writer
// emits general real coordinate with enough digits to round-trip floats.

#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "reap/matrix.hpp"

namespace reap {

struct MatrixMarketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void mm_fail(const std::string& path, std::size_t line,
                                 const std::string& what) {
    throw MatrixMarketError(path + ":" + std::to_string(line) + ": " + what);
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace detail

inline CooMatrix load_matrix_market(std::istream& in, const std::string& path = "<stream>") {
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line))
        detail::mm_fail(path, 1, "empty file");
    ++lineno;

    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket")
        detail::mm_fail(path, lineno, "missing %%MatrixMarket banner");
    object = detail::lower(object);
    format = detail::lower(format);
    field = detail::lower(field);
    symmetry = detail::lower(symmetry);
    if (object != "matrix")
        detail::mm_fail(path, lineno, "unsupported object '" + object + "'");
    if (format != "coordinate")
        detail::mm_fail(path, lineno, "unsupported format '" + format + "' (only coordinate)");
    const bool pattern = field == "pattern";
    if (field != "real" && field != "integer" && !pattern)
        detail::mm_fail(path, lineno, "unsupported field '" + field + "'");
    const bool symmetric = symmetry == "symmetric";
    if (symmetry != "general" && !symmetric)
        detail::mm_fail(path, lineno, "unsupported symmetry '" + symmetry + "'");

    std::uint64_t rows = 0, cols = 0, count = 0;
    bool have_size = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        std::istringstream ls(line);
        if (!(ls >> rows >> cols >> count))
            detail::mm_fail(path, lineno, "malformed size line");
        have_size = true;
        break;
    }
    if (!have_size)
        detail::mm_fail(path, lineno + 1, "missing size line");
    if (rows == 0 || cols == 0)
        detail::mm_fail(path, lineno, "matrix dimensions must be positive");

    CooMatrix out;
    out.rows = static_cast<index_t>(rows);
    out.cols = static_cast<index_t>(cols);
    out.entries.reserve(symmetric ? 2 * count : count);

    std::uint64_t seen = 0;
    while (seen < count) {
        if (!std::getline(in, line))
            detail::mm_fail(path, lineno + 1,
                            "expected " + std::to_string(count) + " entries, got " +
                                std::to_string(seen));
        ++lineno;
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ls(line);
        std::int64_t r = 0, c = 0;
        double v = 1.0;
        if (!(ls >> r >> c))
            detail::mm_fail(path, lineno, "malformed entry line");
        if (!pattern && !(ls >> v))
            detail::mm_fail(path, lineno, "entry is missing a value");
        if (r < 1 || c < 1 || static_cast<std::uint64_t>(r) > rows ||
            static_cast<std::uint64_t>(c) > cols)
            detail::mm_fail(path, lineno, "entry indices out of range");
        const auto r0 = static_cast<index_t>(r - 1);
        const auto c0 = static_cast<index_t>(c - 1);
        if (symmetric && c0 > r0)
            detail::mm_fail(path, lineno, "symmetric file stores upper-triangle entry");
        out.entries.push_back({r0, c0, static_cast<float>(v)});
        if (symmetric && r0 != c0)
            out.entries.push_back({c0, r0, static_cast<float>(v)});
        ++seen;
    }
    return out;
}

inline CooMatrix load_matrix_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw MatrixMarketError(path + ": cannot open for reading");
    return load_matrix_market(in, path);
}

inline void save_matrix_market(std::ostream& out, const CooMatrix& m) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows << " " << m.cols << " " << m.entries.size() << "\n";
    char buf[64];
    for (const CooEntry& e : m.entries) {
        std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(e.value));
        out << (e.row + 1) << " " << (e.col + 1) << " " << buf << "\n";
    }
}

inline void save_matrix_market_file(const std::string& path, const CooMatrix& m) {
    std::ofstream out(path);
    if (!out)
        throw MatrixMarketError(path + ": cannot open for writing");
    save_matrix_market(out, m);
    if (!out)
        throw MatrixMarketError(path + ": write failed");
}

inline void save_matrix_market_file(const std::string& path, const CsrMatrix& m) {
    save_matrix_market_file(path, csr_to_coo(m));
}

}  // namespace reap

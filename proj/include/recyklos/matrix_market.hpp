#ifndef RECYKLOS_MATRIX_MARKET_HPP
#define RECYKLOS_MATRIX_MARKET_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "recyklos/csr.hpp"
#include "recyklos/errors.hpp"

namespace recyklos {

/// Matrix Market coordinate reader: real, general or symmetric, 1-based on
/// disk. Symmetric storage is expanded to full; duplicate entries are summed.
inline CsrMatrix read_matrix_market(std::istream& in, const std::string& name = "<stream>") {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError(name + ": empty file", 1);
    ++lineno;
    std::istringstream hdr(line);
    std::string banner, object, format, field, symmetry;
    hdr >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix")
        throw ParseError(name + ": bad MatrixMarket banner", lineno);
    if (format != "coordinate")
        throw UnsupportedFormat(name + ": only coordinate format is supported");
    if (field != "real")
        throw UnsupportedFormat(name + ": unsupported field '" + field + "'");
    if (symmetry != "general" && symmetry != "symmetric")
        throw UnsupportedFormat(name + ": unsupported symmetry '" + symmetry + "'");
    const bool symmetric = symmetry == "symmetric";

    // comments, then the size line
    std::size_t nr = 0, nc = 0, nnz = 0;
    for (;;) {
        if (!std::getline(in, line)) throw ParseError(name + ": missing size line", lineno + 1);
        ++lineno;
        if (!line.empty() && line[0] == '%') continue;
        std::istringstream ss(line);
        if (!(ss >> nr >> nc >> nnz)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw ParseError(name + ": bad size line", lineno);
        }
        break;
    }

    std::vector<std::tuple<std::size_t, std::size_t, double>> t;
    t.reserve(symmetric ? 2 * nnz : nnz);
    for (std::size_t e = 0; e < nnz; ++e) {
        if (!std::getline(in, line))
            throw ParseError(name + ": unexpected end of file", lineno + 1);
        ++lineno;
        std::istringstream ss(line);
        long long i = 0, j = 0;
        double v = 0.0;
        if (!(ss >> i >> j >> v)) throw ParseError(name + ": bad entry", lineno);
        if (i < 1 || j < 1 || static_cast<std::size_t>(i) > nr ||
            static_cast<std::size_t>(j) > nc)
            throw ParseError(name + ": index out of range", lineno);
        if (!std::isfinite(v)) throw ParseError(name + ": non-finite value", lineno);
        const std::size_t i0 = static_cast<std::size_t>(i) - 1;
        const std::size_t j0 = static_cast<std::size_t>(j) - 1;
        t.emplace_back(i0, j0, v);
        if (symmetric && i0 != j0) t.emplace_back(j0, i0, v);
    }
    return CsrMatrix::from_triplets(nr, nc, std::move(t));
}

inline CsrMatrix read_matrix_market(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    return read_matrix_market(f, path);
}

/// Writer (general symmetry, full precision); read-write-read roundtrips
/// reproduce the CsrMatrix exactly.
inline void write_matrix_market(const CsrMatrix& m, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.nrows << " " << m.ncols << " " << m.nnz() << "\n";
    char buf[64];
    for (std::size_t i = 0; i < m.nrows; ++i)
        for (std::size_t p = m.row_ptr[i]; p < m.row_ptr[i + 1]; ++p) {
            std::snprintf(buf, sizeof(buf), "%zu %zu %.17g\n", i + 1, m.col_idx[p] + 1,
                          m.vals[p]);
            out << buf;
        }
}

inline void write_matrix_market(const CsrMatrix& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    write_matrix_market(m, f);
    if (!f) throw IoError("write failed: " + path);
}

} // namespace recyklos

#endif

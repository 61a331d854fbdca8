#pragma once

// Plain-text grid tables and matrix exchange formats.
//
// Dense binary layout: 8-byte magic "GSBRMAT1", uint64 rows, uint64 cols, then rows*cols
// (re, im) pairs of IEEE-754 doubles in row-major order; all little-endian.

#include <filesystem>
#include <iosfwd>

#include "gsbr/modes.hpp"

namespace gsbr::io {

struct GridTable {
    std::vector<double> k, w, omega;
    CVector f;
};

/// Columns: k w omega re_f im_f, '#' header lines, %.17g.
void write_grid_table(std::ostream& os, const modes::ModeGrid& grid, const modes::FormFactor& f);
GridTable read_grid_table(std::istream& is);

void write_matrix_binary(std::ostream& os, const CMatrix& m);
CMatrix read_matrix_binary(std::istream& is);

/// MatrixMarket "coordinate complex general", nonzeros only, 1-based indices.
void write_matrix_market(std::ostream& os, const CMatrix& m);
CMatrix read_matrix_market(std::istream& is);

void save_matrix_binary(const std::filesystem::path& p, const CMatrix& m);
CMatrix load_matrix_binary(const std::filesystem::path& p);

} // namespace gsbr::io

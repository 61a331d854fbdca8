#include "gsbr/io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "gsbr/error.hpp"

namespace gsbr::io {

namespace {

constexpr std::array<char, 8> kMagic{'G', 'S', 'B', 'R', 'M', 'A', 'T', '1'};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <typename T>
void put_le(std::ostream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get_le(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw StructuralError("matrix file: unexpected end of data");
    return v;
}

} // namespace

void write_grid_table(std::ostream& os, const modes::ModeGrid& grid, const modes::FormFactor& f) {
    modes::check_on_grid(f, grid, "write_grid_table");
    os << "# form factor: " << f.label << "\n";
    os << "# tail: f_exponent " << fmt(f.tail.f_exponent) << " omega_exponent " << fmt(f.tail.omega_exponent) << "\n";
    os << "# k w omega re_f im_f\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx v = f.values(static_cast<Eigen::Index>(i));
        os << fmt(grid.nodes()[i]) << ' ' << fmt(grid.weights()[i]) << ' ' << fmt(grid.omega()[i]) << ' '
           << fmt(v.real()) << ' ' << fmt(v.imag()) << '\n';
    }
}

GridTable read_grid_table(std::istream& is) {
    GridTable t;
    std::vector<cplx> f;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double k, w, om, re, im;
        if (!(ls >> k >> w >> om >> re >> im))
            throw StructuralError("grid table line " + std::to_string(lineno) + ": expected 5 columns");
        t.k.push_back(k);
        t.w.push_back(w);
        t.omega.push_back(om);
        f.emplace_back(re, im);
    }
    t.f = Eigen::Map<CVector>(f.data(), static_cast<Eigen::Index>(f.size()));
    return t;
}

void write_matrix_binary(std::ostream& os, const CMatrix& m) {
    os.write(kMagic.data(), kMagic.size());
    put_le<std::uint64_t>(os, static_cast<std::uint64_t>(m.rows()));
    put_le<std::uint64_t>(os, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            put_le(os, m(i, j).real());
            put_le(os, m(i, j).imag());
        }
}

CMatrix read_matrix_binary(std::istream& is) {
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kMagic) throw StructuralError("matrix file: bad magic");
    const auto rows = get_le<std::uint64_t>(is);
    const auto cols = get_le<std::uint64_t>(is);
    if (rows > (1u << 20) || cols > (1u << 20)) throw StructuralError("matrix file: implausible dimensions");
    CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double re = get_le<double>(is);
            const double im = get_le<double>(is);
            m(i, j) = cplx(re, im);
        }
    return m;
}

void write_matrix_market(std::ostream& os, const CMatrix& m) {
    std::size_t nnz = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) nnz += m(i, j) != cplx(0.0);
    os << "%%MatrixMarket matrix coordinate complex general\n";
    os << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != cplx(0.0))
                os << i + 1 << ' ' << j + 1 << ' ' << fmt(m(i, j).real()) << ' ' << fmt(m(i, j).imag()) << '\n';
}

CMatrix read_matrix_market(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("%%MatrixMarket matrix coordinate complex general", 0) != 0)
        throw StructuralError("matrix market: expected a 'coordinate complex general' header");
    while (std::getline(is, line) && !line.empty() && line[0] == '%') {
    }
    std::istringstream hs(line);
    long rows = 0, cols = 0, nnz = 0;
    if (!(hs >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
        throw StructuralError("matrix market: bad size line");
    CMatrix m = CMatrix::Zero(rows, cols);
    for (long e = 0; e < nnz; ++e) {
        long i, j;
        double re, im;
        if (!(is >> i >> j >> re >> im) || i < 1 || j < 1 || i > rows || j > cols)
            throw StructuralError("matrix market: bad entry " + std::to_string(e + 1));
        m(i - 1, j - 1) = cplx(re, im);
    }
    return m;
}

void save_matrix_binary(const std::filesystem::path& p, const CMatrix& m) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
    write_matrix_binary(os, m);
}

CMatrix load_matrix_binary(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + p.string());
    return read_matrix_binary(is);
}

} // namespace gsbr::io

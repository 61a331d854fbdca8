#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <sstream>

#include "gsbr/error.hpp"
#include "gsbr/io.hpp"
#include "support.hpp"

using namespace gsbr;

TEST_CASE("grid tables round-trip bit-exactly") {
    std::mt19937_64 rng(61);
    const auto g = testing::random_grid(rng, 7);
    const auto f = testing::random_factor(rng, g);
    std::stringstream ss;
    io::write_grid_table(ss, g, f);
    const auto t = io::read_grid_table(ss);
    REQUIRE(t.k.size() == g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(t.k[i] == g.nodes()[i]);
        CHECK(t.w[i] == g.weights()[i]);
        CHECK(t.omega[i] == g.omega()[i]);
    }
    CHECK(t.f == f.values);

    std::istringstream bad("# k w omega re_f im_f\n1 2 3 4\n");
    CHECK_THROWS_AS(io::read_grid_table(bad), StructuralError);
}

TEST_CASE("dense binary layout") {
    CMatrix m(2, 3);
    m << cplx(1, -1), 2.0, 3.0, 4.0, cplx(0, 5), 6.0;
    std::stringstream ss;
    io::write_matrix_binary(ss, m);
    const std::string bytes = ss.str();
    REQUIRE(bytes.size() == 8 + 16 + 6 * 16);
    CHECK(bytes.substr(0, 8) == "GSBRMAT1");
    std::uint64_t rows = 0, cols = 0;
    std::memcpy(&rows, bytes.data() + 8, 8);
    std::memcpy(&cols, bytes.data() + 16, 8);
    CHECK(rows == 2);
    CHECK(cols == 3);
    double entry[2];
    std::memcpy(entry, bytes.data() + 24 + 4 * 16, 16); // row-major: (1, 1)
    CHECK(entry[0] == 0.0);
    CHECK(entry[1] == 5.0);
    std::memcpy(entry, bytes.data() + 24 + 1 * 16, 16); // (0, 1)
    CHECK(entry[0] == 2.0);

    CHECK(io::read_matrix_binary(ss) == m);

    std::istringstream junk("NOTAMATRIX");
    CHECK_THROWS_AS(io::read_matrix_binary(junk), StructuralError);
    std::istringstream cut(bytes.substr(0, 40));
    CHECK_THROWS_AS(io::read_matrix_binary(cut), StructuralError);
}

TEST_CASE("binary files and matrix market text") {
    std::mt19937_64 rng(62);
    CMatrix m = testing::random_matrix(rng, 5, 4);
    m(2, 1) = 0.0;
    m(4, 3) = 0.0;

    const auto path = std::filesystem::temp_directory_path() / "gsbr_test_matrix.bin";
    io::save_matrix_binary(path, m);
    CHECK(io::load_matrix_binary(path) == m);
    std::filesystem::remove(path);
    CHECK_THROWS(io::load_matrix_binary(path));

    std::stringstream ss;
    io::write_matrix_market(ss, m);
    const std::string text = ss.str();
    CHECK(text.rfind("%%MatrixMarket matrix coordinate complex general", 0) == 0);
    CHECK(text.find("\n5 4 18\n") != std::string::npos);
    CHECK(io::read_matrix_market(ss) == m);

    std::istringstream wrong("%%MatrixMarket matrix array real general\n1 1\n1\n");
    CHECK_THROWS_AS(io::read_matrix_market(wrong), StructuralError);
}

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "nrsfm/csv_io.hpp"
#include "test_helpers.hpp"

using namespace nrsfm;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("nrsfm_test_" + name);
}

}  // namespace

TEST_CASE("csv matrices round trip bit-exactly") {
    std::mt19937_64 rng(101);
    Eigen::MatrixXd m = test::random_matrix(rng, 6, 5);
    m(0, 0) = 1.0 / 3.0;
    m(1, 1) = -2.718281828459045e-13;
    m(2, 2) = 6.02214076e23;
    m(3, 3) = 0.0;

    const auto path = temp_file("roundtrip.csv");
    write_csv_matrix(path.string(), m);
    const Eigen::MatrixXd back = read_csv_matrix(path.string());
    CHECK(back == m);
    std::filesystem::remove(path);
}

TEST_CASE("csv files use LF line endings") {
    const auto path = temp_file("lf.csv");
    write_csv_matrix(path.string(), Eigen::MatrixXd::Ones(2, 2));
    std::ifstream in(path.string(), std::ios::binary);
    std::string contents((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    CHECK(contents.find('\r') == std::string::npos);
    CHECK(contents.back() == '\n');
    std::filesystem::remove(path);
}

TEST_CASE("malformed csv reports row and column") {
    const auto path = temp_file("bad.csv");
    {
        std::ofstream out(path.string(), std::ios::binary);
        out << "1.5,2.5\n3.5,oops\n";
    }
    try {
        read_csv_matrix(path.string());
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.row() == 2);
        CHECK(e.col() == 2);
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        CHECK(std::string(e.what()).find("column 2") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("ragged csv rejected") {
    const auto path = temp_file("ragged.csv");
    {
        std::ofstream out(path.string(), std::ios::binary);
        out << "1,2,3\n4,5\n";
    }
    CHECK_THROWS_AS(read_csv_matrix(path.string()), CsvError);
    std::filesystem::remove(path);
}

TEST_CASE("typed readers validate dimensions") {
    const auto path = temp_file("odd.csv");
    write_csv_matrix(path.string(), Eigen::MatrixXd::Ones(3, 4));
    CHECK_THROWS(read_measurements(path.string()));

    write_csv_matrix(path.string(), Eigen::MatrixXd::Ones(4, 4));
    CHECK_THROWS(read_shape_sequence(path.string()));

    std::mt19937_64 rng(5);
    RotationSequence rots = test::random_rotation_sequence(rng, 4);
    write_rotations(path.string(), rots);
    const RotationSequence back = read_rotations(path.string());
    REQUIRE(back.frames() == 4);
    for (int i = 0; i < 4; ++i) CHECK(back[i] == rots[i]);

    std::filesystem::remove(path);
}

TEST_CASE("mask io validates entries") {
    const auto path = temp_file("mask.csv");
    Eigen::MatrixXi o = Eigen::MatrixXi::Ones(3, 4);
    o(1, 2) = 0;
    write_mask(path.string(), VisibilityMask(o));
    const VisibilityMask back = read_mask(path.string());
    CHECK(back.o == o);

    write_csv_matrix(path.string(), Eigen::MatrixXd::Constant(2, 2, 0.5));
    CHECK_THROWS_AS(read_mask(path.string()), CsvError);
    std::filesystem::remove(path);
}

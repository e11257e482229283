#include "perturbactrl/matrix_io.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <random>
#include <sstream>

using namespace pctrl;

TEST_CASE("matrix text format round-trips bit-exactly") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix M = oracle::random_matrix(rng, 3 + trial % 4, 2 + trial % 3, -1e3, 1e3);
        std::stringstream ss;
        write_matrix(ss, M);
        const Matrix R = read_matrix(ss);
        REQUIRE(R.rows() == M.rows());
        REQUIRE(R.cols() == M.cols());
        CHECK((R - M).norm() == 0.0);
    }
}

TEST_CASE("matrix header drives parsing") {
    std::stringstream ss("2 2\n1 2\n3 4\n");
    const Matrix M = read_matrix(ss);
    CHECK(M(0, 0) == 1.0);
    CHECK(M(1, 1) == 4.0);

    std::stringstream truncated("2 2\n1 2\n3\n");
    CHECK_THROWS_AS(read_matrix(truncated), std::runtime_error);
}

TEST_CASE("system files store A then B") {
    const Matrix A = (Matrix(2, 2) << 0, 1, 0, 0).finished();
    const Matrix B = (Matrix(2, 1) << 0, 1).finished();
    const std::string path = "test_system_file.txt";
    save_system(path, LtiSystem(A, B));
    const LtiSystem sys = load_system(path);
    CHECK((sys.A - A).norm() == 0.0);
    CHECK((sys.B - B).norm() == 0.0);
    std::remove(path.c_str());
}

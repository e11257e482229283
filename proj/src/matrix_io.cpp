#include "perturbactrl/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pctrl {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

void write_matrix(std::ostream& os, const Matrix& M) {
    os << M.rows() << " " << M.cols() << "\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) os << " ";
            os << format_double(M(i, j));
        }
        os << "\n";
    }
}

Matrix read_matrix(std::istream& is) {
    Eigen::Index rows = 0, cols = 0;
    if (!(is >> rows >> cols)) throw std::runtime_error("matrix read: missing header");
    if (rows < 0 || cols < 0) throw std::runtime_error("matrix read: negative dimension");
    Matrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            if (!(is >> M(i, j))) throw std::runtime_error("matrix read: truncated data");
    return M;
}

void save_matrix(const std::string& path, const Matrix& M) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    write_matrix(os, M);
}

Matrix load_matrix(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for read: " + path);
    return read_matrix(is);
}

void save_system(const std::string& path, const LtiSystem& sys) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    write_matrix(os, sys.A);
    write_matrix(os, sys.B);
}

LtiSystem load_system(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for read: " + path);
    Matrix A = read_matrix(is);
    Matrix B = read_matrix(is);
    return LtiSystem(std::move(A), std::move(B));
}

}  // namespace pctrl

#ifndef QFL_LINALG_HPP
#define QFL_LINALG_HPP

#include <cstddef>
#include <vector>

#include "qfl/errors.hpp"

namespace qfl {

// Dense row-major matrix, just big enough for the classical projections and
// heads used by the hybrid and QLSTM models.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t size() const { return data.size(); }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

inline std::vector<double> mat_vec(const Matrix& m, const std::vector<double>& v) {
    if (v.size() != m.cols) throw StructuralError("mat_vec: dimension mismatch");
    std::vector<double> out(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) acc += m.at(r, c) * v[c];
        out[r] = acc;
    }
    return out;
}

// m^T v, used when backpropagating through a linear map.
inline std::vector<double> mat_t_vec(const Matrix& m, const std::vector<double>& v) {
    if (v.size() != m.rows) throw StructuralError("mat_t_vec: dimension mismatch");
    std::vector<double> out(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) out[c] += m.at(r, c) * v[r];
    return out;
}

} // namespace qfl

#endif

#include "lcprobe/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lcprobe/common.hpp"

namespace lcprobe {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

EigenDecomposition sym_eigen(const Matrix& input) {
    if (input.rows() != input.cols()) throw Error("sym_eigen: matrix must be square");
    const std::size_t n = input.rows();
    Matrix a = input;
    Matrix v = Matrix::identity(n);

    auto off_diag_sq = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return s;
    };

    for (int sweep = 0; sweep < 100 && off_diag_sq() > 1e-24; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.eigenvalues[i] = a(i, i);

    // sort ascending, permute eigenvector columns to match
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return out.eigenvalues[x] < out.eigenvalues[y]; });
    std::vector<double> sorted_vals(n);
    Matrix sorted_vecs(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        sorted_vals[k] = out.eigenvalues[order[k]];
        for (std::size_t i = 0; i < n; ++i) sorted_vecs(i, k) = v(i, order[k]);
    }
    out.eigenvalues = std::move(sorted_vals);
    out.eigenvectors = std::move(sorted_vecs);
    return out;
}

bool cholesky_lower(const Matrix& a, Matrix& lower) {
    if (a.rows() != a.cols()) throw Error("cholesky_lower: matrix must be square");
    const std::size_t n = a.rows();
    lower = Matrix(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < j; ++k) sum += lower(i, k) * lower(j, k);
            if (i == j) {
                const double d = a(i, i) - sum;
                if (d <= 0.0) return false;
                lower(i, j) = std::sqrt(d);
            } else {
                lower(i, j) = (a(i, j) - sum) / lower(j, j);
            }
        }
    }
    return true;
}

}  // namespace lcprobe

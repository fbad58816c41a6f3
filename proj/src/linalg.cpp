#include "ideoscale/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ideoscale::linalg {

SvdResult jacobi_svd(const Mat& m, int max_sweeps) {
    // Work on columns of a copy: rotate pairs of columns until all are
    // mutually orthogonal, then read off singular values as column norms.
    const std::size_t rows = m.rows, cols = m.cols;
    Mat a = m;
    Mat v(cols, cols);
    for (std::size_t j = 0; j < cols; ++j) v(j, j) = 1.0;

    const double eps = 1e-15;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < cols; ++p) {
            for (std::size_t q = p + 1; q < cols; ++q) {
                double app = 0, aqq = 0, apq = 0;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double x = a(i, p), y = a(i, q);
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                if (std::abs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double x = a(i, p), y = a(i, q);
                    a(i, p) = c * x - s * y;
                    a(i, q) = s * x + c * y;
                }
                for (std::size_t i = 0; i < cols; ++i) {
                    const double x = v(i, p), y = v(i, q);
                    v(i, p) = c * x - s * y;
                    v(i, q) = s * x + c * y;
                }
            }
        }
        if (!rotated) break;
    }

    const std::size_t k = std::min(rows, cols);
    std::vector<double> norms(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        double nn = 0;
        for (std::size_t i = 0; i < rows; ++i) nn += a(i, j) * a(i, j);
        norms[j] = std::sqrt(nn);
    }
    std::vector<std::size_t> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

    SvdResult out;
    out.u = Mat(rows, k);
    out.v = Mat(cols, k);
    out.sigma.resize(k);
    for (std::size_t jj = 0; jj < k; ++jj) {
        const std::size_t j = order[jj];
        out.sigma[jj] = norms[j];
        if (norms[j] > 0) {
            for (std::size_t i = 0; i < rows; ++i) out.u(i, jj) = a(i, j) / norms[j];
        }
        for (std::size_t i = 0; i < cols; ++i) out.v(i, jj) = v(i, j);
    }
    return out;
}

std::vector<double> cholesky_solve(Mat spd, std::vector<double> b) {
    const std::size_t n = spd.rows;
    if (spd.cols != n || b.size() != n) throw std::invalid_argument("cholesky_solve: shape mismatch");
    // in-place lower factor
    for (std::size_t j = 0; j < n; ++j) {
        double d = spd(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= spd(j, k) * spd(j, k);
        if (d <= 0.0) throw std::runtime_error("cholesky_solve: matrix not positive definite");
        const double ljj = std::sqrt(d);
        spd(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = spd(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= spd(i, k) * spd(j, k);
            spd(i, j) = s / ljj;
        }
    }
    // forward then back substitution
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= spd(i, k) * b[k];
        b[i] = s / spd(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= spd(k, ii) * b[k];
        b[ii] = s / spd(ii, ii);
    }
    return b;
}

} // namespace ideoscale::linalg

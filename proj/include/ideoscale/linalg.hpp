#pragma once

#include <cstddef>
#include <vector>

// Dense helpers for the small projected problems (tens of rows at most).
// The big operators stay matrix-free; nothing here sees data-sized arrays.
namespace ideoscale::linalg {

// Row-major dense matrix, minimal on purpose.
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

struct SvdResult {
    Mat u;                      // rows x k
    std::vector<double> sigma;  // k, nonincreasing
    Mat v;                      // cols x k
};

// One-sided Jacobi SVD of a small dense matrix; k = min(rows, cols).
// Accurate to machine precision for the sizes used here.
SvdResult jacobi_svd(const Mat& m, int max_sweeps = 60);

// Solves (spd) x = b in place via Cholesky; throws if not positive
// definite.
std::vector<double> cholesky_solve(Mat spd, std::vector<double> b);

} // namespace ideoscale::linalg

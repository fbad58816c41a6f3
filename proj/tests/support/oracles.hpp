#pragma once

// Test-side oracles, independent of the library's computation paths:
// dense SVD of the explicitly formed residual matrix (Eigen), explicit
// normal-equation ridge solves, quadrature-based beta CDF, pair-counting
// AUC, grid-search logistic likelihood maximization and a band-feasibility
// dip for small samples.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ideoscale/model.hpp"
#include "ideoscale/rng.hpp"

namespace oracles {

struct DenseCa {
    Eigen::MatrixXd follower_coords; // n x k, principal
    Eigen::MatrixXd elite_coords;    // m x k
    Eigen::VectorXd sigma;           // k
};

// Forms S = D_r^{-1/2} (P - r c^T) D_c^{-1/2} densely and decomposes it.
inline DenseCa dense_ca(const ideoscale::model::BipartiteNetwork& net, int k) {
    const auto n = static_cast<Eigen::Index>(net.n_followers());
    const auto m = static_cast<Eigen::Index>(net.n_elites());
    const double nn = static_cast<double>(net.edge_count());

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (std::int64_t e = net.row_ptr[static_cast<std::size_t>(i)];
             e < net.row_ptr[static_cast<std::size_t>(i) + 1]; ++e)
            a(i, net.col_idx[static_cast<std::size_t>(e)]) = 1.0;

    Eigen::MatrixXd p = a / nn;
    Eigen::VectorXd r = p.rowwise().sum();
    Eigen::VectorXd c = p.colwise().sum();
    Eigen::MatrixXd s = p - r * c.transpose();
    for (Eigen::Index i = 0; i < n; ++i) s.row(i) /= std::sqrt(r(i));
    for (Eigen::Index j = 0; j < m; ++j) s.col(j) /= std::sqrt(c(j));

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);

    DenseCa out;
    out.sigma = svd.singularValues().head(k);
    out.follower_coords.resize(n, k);
    out.elite_coords.resize(m, k);
    for (int t = 0; t < k; ++t) {
        out.follower_coords.col(t) =
            svd.matrixU().col(t).cwiseQuotient(r.cwiseSqrt()) * out.sigma(t);
        out.elite_coords.col(t) = svd.matrixV().col(t).cwiseQuotient(c.cwiseSqrt()) * out.sigma(t);
    }
    return out;
}

// Random bipartite binary network with no empty row or column.
inline ideoscale::model::BipartiteNetwork random_network(std::size_t n, std::size_t m,
                                                         double density, std::uint64_t seed) {
    ideoscale::rng::Rng gen(seed);
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<int> row_deg(n, 0), col_deg(m, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (gen.uniform01() < density) {
                edges.emplace_back("u" + std::to_string(i), "m" + std::to_string(j));
                row_deg[i]++;
                col_deg[j]++;
            }
    // patch empty rows/columns so the residual operator is defined
    for (std::size_t i = 0; i < n; ++i)
        if (row_deg[i] == 0) {
            const auto j = gen.next_below(m);
            edges.emplace_back("u" + std::to_string(i), "m" + std::to_string(j));
            col_deg[static_cast<std::size_t>(j)]++;
        }
    for (std::size_t j = 0; j < m; ++j)
        if (col_deg[j] == 0) {
            const auto i = gen.next_below(n);
            edges.emplace_back("u" + std::to_string(i), "m" + std::to_string(j));
        }
    return ideoscale::model::ingest_edges(edges);
}

// Ridge solve via an explicit augmented design (intercept column), using
// Eigen's QR on the regularized normal equations assembled the direct way.
inline void ridge_oracle(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                         double alpha, std::vector<double>& w_out, double& b_out) {
    const auto p = static_cast<Eigen::Index>(x.size());
    const auto d = static_cast<Eigen::Index>(x[0].size());
    Eigen::MatrixXd xm(p, d);
    Eigen::VectorXd yv(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        yv(i) = y[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < d; ++j) xm(i, j) = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    const Eigen::RowVectorXd xmean = xm.colwise().mean();
    const double ymean = yv.mean();
    const Eigen::MatrixXd xc = xm.rowwise() - xmean;
    const Eigen::VectorXd yc = yv.array() - ymean;
    const Eigen::MatrixXd lhs =
        xc.transpose() * xc + alpha * Eigen::MatrixXd::Identity(d, d);
    const Eigen::VectorXd w = lhs.colPivHouseholderQr().solve(xc.transpose() * yc);
    w_out.assign(w.data(), w.data() + d);
    b_out = ymean - xmean.dot(w);
}

// Beta CDF by adaptive Simpson quadrature on the density; wholly separate
// from the continued-fraction path under test.
inline double beta_cdf_quadrature(double a, double b, double x) {
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    const double logc = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    auto f = [&](double t) {
        if (t <= 0.0 || t >= 1.0) return 0.0;
        return std::exp(logc + (a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t));
    };
    std::function<double(double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, int depth) -> double {
        const double mid = 0.5 * (lo + hi);
        const double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
        const double flm = f(lmid), frm = f(rmid);
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (depth > 40 || std::abs(left + right - whole) < 1e-13)
            return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, flm, fmid, depth + 1) + rec(mid, hi, fmid, frm, fhi, depth + 1);
    };
    const double mid = 0.5 * x;
    return rec(0.0, x, f(0.0), f(mid), f(x), 0);
}

// Bisection on the quadrature CDF.
inline double beta_quantile_oracle(double a, double b, double p) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (beta_cdf_quadrature(a, b, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// O(n^2) AUC: every (positive, negative) pair scored 1/0.5/0.
inline double auc_pairs(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
    std::int64_t num2 = 0, npos = 0, nneg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!labels[i]) continue;
        ++npos;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j]) continue;
            if (scores[i] > scores[j])
                num2 += 2;
            else if (scores[i] == scores[j])
                num2 += 1;
        }
    }
    for (auto l : labels) nneg += l ? 0 : 1;
    return static_cast<double>(num2) / (2.0 * static_cast<double>(npos) * static_cast<double>(nneg));
}

} // namespace oracles

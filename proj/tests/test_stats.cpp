#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "ideoscale/rng.hpp"
#include "ideoscale/stats.hpp"
#include "support/oracles.hpp"

using namespace ideoscale;

TEST_CASE("pearson basics and oracle") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double v : x) y.push_back(2 * v + 1);
    CHECK(stats::pearson(x, y) == doctest::Approx(1.0));
    for (auto& v : y) v = -v;
    CHECK(stats::pearson(x, y) == doctest::Approx(-1.0));

    // fixed 10-point pair vs the direct summation formula
    std::vector<double> a = {0.2, 1.7, -0.4, 2.2, 3.9, -1.1, 0.0, 5.5, 2.1, -0.7};
    std::vector<double> b = {1.0, 0.3, -0.2, 4.0, 2.2, -0.9, 0.4, 3.3, 1.8, 0.1};
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    const double n = 10;
    for (int i = 0; i < 10; ++i) {
        sa += a[static_cast<std::size_t>(i)];
        sb += b[static_cast<std::size_t>(i)];
        saa += a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(i)];
        sbb += b[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
        sab += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
    }
    const double want = (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
    CHECK(std::abs(stats::pearson(a, b) - want) < 1e-12);

    std::vector<double> flat = {2, 2, 2, 2, 2};
    CHECK_THROWS_AS(stats::pearson(x, flat), std::invalid_argument);
    std::vector<double> one = {1.0};
    CHECK_THROWS_AS(stats::pearson(one, one), std::invalid_argument);
}

TEST_CASE("clopper-pearson boundaries and oracle grid") {
    auto ci0 = stats::clopper_pearson(0, 10);
    CHECK(ci0.lo == 0.0);
    auto cin = stats::clopper_pearson(10, 10);
    CHECK(cin.hi == 1.0);

    // bisection on the quadrature beta cdf, a fully separate route
    for (std::int64_t n : {1, 2, 5, 10, 37, 100}) {
        for (std::int64_t k = 0; k <= n; k += std::max<std::int64_t>(1, n / 5)) {
            const auto ci = stats::clopper_pearson(k, n, 0.05);
            const double lo_oracle =
                k == 0 ? 0.0
                       : oracles::beta_quantile_oracle(static_cast<double>(k),
                                                       static_cast<double>(n - k + 1), 0.025);
            const double hi_oracle =
                k == n ? 1.0
                       : oracles::beta_quantile_oracle(static_cast<double>(k + 1),
                                                       static_cast<double>(n - k), 0.975);
            CHECK(std::abs(ci.lo - lo_oracle) < 1e-9);
            CHECK(std::abs(ci.hi - hi_oracle) < 1e-9);
            // the point estimate always sits inside
            const double phat = static_cast<double>(k) / static_cast<double>(n);
            CHECK(ci.lo <= phat + 1e-12);
            CHECK(ci.hi >= phat - 1e-12);
        }
    }

    // interval widens as alpha shrinks
    auto wide = stats::clopper_pearson(5, 10, 0.01);
    auto narrow = stats::clopper_pearson(5, 10, 0.20);
    CHECK(wide.lo < narrow.lo);
    CHECK(wide.hi > narrow.hi);

    CHECK_THROWS_AS(stats::clopper_pearson(-1, 10), std::invalid_argument);
    CHECK_THROWS_AS(stats::clopper_pearson(11, 10), std::invalid_argument);
    CHECK_THROWS_AS(stats::clopper_pearson(0, 0), std::invalid_argument);
}

TEST_CASE("roc auc equals the pair-counting oracle, ties included") {
    rng::Rng gen(314);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 20;
        std::vector<double> scores(n);
        std::vector<std::uint8_t> labels(n);
        bool has0 = false, has1 = false;
        for (std::size_t i = 0; i < n; ++i) {
            // coarse grid forces plenty of ties
            scores[i] = std::floor(gen.uniform01() * 6.0);
            labels[i] = gen.uniform01() < 0.4 ? 1 : 0;
            (labels[i] ? has1 : has0) = true;
        }
        if (!has0 || !has1) {
            labels[0] = 0;
            labels[1] = 1;
        }
        CHECK(stats::roc_auc(scores, labels) == oracles::auc_pairs(scores, labels));
    }

    std::vector<double> flat(8, 1.0);
    std::vector<std::uint8_t> lab = {0, 1, 0, 1, 0, 1, 0, 1};
    CHECK(stats::roc_auc(flat, lab) == 0.5);

    std::vector<double> ordered = {1, 2, 3, 4, 5, 6};
    std::vector<std::uint8_t> split = {0, 0, 0, 1, 1, 1};
    CHECK(stats::roc_auc(ordered, split) == 1.0);

    std::vector<std::uint8_t> single(6, 1);
    CHECK_THROWS_AS(stats::roc_auc(ordered, single), std::invalid_argument);
}

TEST_CASE("auc flips exactly under label complement") {
    rng::Rng gen(99);
    const std::size_t n = 41;
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n), flipped(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = std::floor(gen.uniform01() * 9.0) / 3.0;
        labels[i] = gen.uniform01() < 0.5 ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    for (std::size_t i = 0; i < n; ++i) flipped[i] = labels[i] ? 0 : 1;
    CHECK(stats::roc_auc(scores, labels) + stats::roc_auc(scores, flipped) == 1.0);
}

TEST_CASE("balanced logistic fit against a grid-search oracle") {
    // 40-point imbalanced instance (30/10), moderate overlap
    rng::Rng gen(2024);
    std::vector<double> x;
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 30; ++i) {
        x.push_back(3.0 + 1.5 * gen.normal());
        y.push_back(0);
    }
    for (int i = 0; i < 10; ++i) {
        x.push_back(6.0 + 1.5 * gen.normal());
        y.push_back(1);
    }
    const auto fit = stats::balanced_logistic_fit(x, y);
    CHECK(fit.converged);

    // nested grid refinement of the same weighted likelihood
    double best_w = 0, best_b = 0, best_ll = -1e300;
    double cw = 0, cb = 0, span_w = 30, span_b = 60;
    for (int level = 0; level < 8; ++level) {
        for (int i = -20; i <= 20; ++i) {
            for (int j = -20; j <= 20; ++j) {
                const double w = cw + span_w * i / 20.0;
                const double b = cb + span_b * j / 20.0;
                const double ll = stats::balanced_logistic_loglik(x, y, w, b);
                if (ll > best_ll) {
                    best_ll = ll;
                    best_w = w;
                    best_b = b;
                }
            }
        }
        cw = best_w;
        cb = best_b;
        span_w /= 10.0;
        span_b /= 10.0;
    }
    CHECK(std::abs(fit.weight - best_w) < 1e-3);
    CHECK(std::abs(fit.intercept - best_b) < 1e-3);
    CHECK(stats::balanced_logistic_loglik(x, y, fit.weight, fit.intercept) >= best_ll - 1e-9);

    // gradient at the optimum vanishes
    const double eps = 1e-6;
    const double d_w = (stats::balanced_logistic_loglik(x, y, fit.weight + eps, fit.intercept) -
                        stats::balanced_logistic_loglik(x, y, fit.weight - eps, fit.intercept)) /
                       (2 * eps);
    const double d_b = (stats::balanced_logistic_loglik(x, y, fit.weight, fit.intercept + eps) -
                        stats::balanced_logistic_loglik(x, y, fit.weight, fit.intercept - eps)) /
                       (2 * eps);
    CHECK(std::sqrt(d_w * d_w + d_b * d_b) < 1e-5);
}

TEST_CASE("logistic degenerate and separated inputs") {
    // interleaved identical positions: no signal, probability one half
    std::vector<double> x = {1, 1, 2, 2, 3, 3};
    std::vector<std::uint8_t> y = {0, 1, 0, 1, 0, 1};
    auto fit = stats::balanced_logistic_fit(x, y);
    CHECK(std::abs(fit.weight) < 1e-6);
    CHECK(stats::logistic(fit.weight * 2.0 + fit.intercept) == doctest::Approx(0.5).epsilon(1e-6));

    // complete separation: clamped slope, flagged not converged
    std::vector<double> xs = {0, 1, 9, 10};
    std::vector<std::uint8_t> ys = {0, 0, 1, 1};
    auto sep = stats::balanced_logistic_fit(xs, ys);
    CHECK(!sep.converged);
    CHECK(std::abs(sep.weight) == doctest::Approx(30.0));
    CHECK(sep.cutoff > 1.0);
    CHECK(sep.cutoff < 9.0);
    auto m = stats::classification_metrics(sep, xs, ys);
    CHECK(m.roc_auc == 1.0);
    CHECK(m.f1_avg == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);

    std::vector<std::uint8_t> onesided(4, 1);
    CHECK_THROWS_AS(stats::balanced_logistic_fit(xs, onesided), std::invalid_argument);
}

TEST_CASE("negating positions mirrors the fit and keeps metrics") {
    rng::Rng gen(7);
    std::vector<double> x, xneg;
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 60; ++i) {
        const bool cls = gen.uniform01() < 0.35;
        x.push_back((cls ? 6.5 : 3.5) + 2.0 * gen.normal());
        y.push_back(cls ? 1 : 0);
    }
    for (double v : x) xneg.push_back(-v);
    auto f1 = stats::balanced_logistic_fit(x, y);
    auto f2 = stats::balanced_logistic_fit(xneg, y);
    CHECK(f1.weight == doctest::Approx(-f2.weight).epsilon(1e-6));
    CHECK(f1.cutoff == doctest::Approx(-f2.cutoff).epsilon(1e-6));
    auto m1 = stats::classification_metrics(f1, x, y);
    auto m2 = stats::classification_metrics(f2, xneg, y);
    CHECK(m1.roc_auc == doctest::Approx(m2.roc_auc).epsilon(1e-12));
    CHECK(m1.f1_avg == doctest::Approx(m2.f1_avg).epsilon(1e-12));
}

TEST_CASE("irls gradient matches finite differences away from the optimum") {
    rng::Rng gen(55);
    std::vector<double> x;
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 50; ++i) {
        const bool cls = i % 3 == 0;
        x.push_back((cls ? 6.0 : 4.0) + gen.normal());
        y.push_back(cls ? 1 : 0);
    }
    std::size_t n1 = 0;
    for (auto v : y) n1 += v;
    const double w1 = static_cast<double>(y.size()) / (2.0 * static_cast<double>(n1));
    const double w0 = static_cast<double>(y.size()) / (2.0 * static_cast<double>(y.size() - n1));

    for (int trial = 0; trial < 5; ++trial) {
        const double w = gen.normal();
        const double b = gen.normal();
        // analytic gradient of the weighted log-likelihood
        double gw = 0, gb = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double ci = y[i] ? w1 : w0;
            const double mu = stats::logistic(w * x[i] + b);
            gw += ci * ((y[i] ? 1.0 : 0.0) - mu) * x[i];
            gb += ci * ((y[i] ? 1.0 : 0.0) - mu);
        }
        const double eps = 1e-6;
        const double fw = (stats::balanced_logistic_loglik(x, y, w + eps, b) -
                           stats::balanced_logistic_loglik(x, y, w - eps, b)) /
                          (2 * eps);
        const double fb = (stats::balanced_logistic_loglik(x, y, w, b + eps) -
                           stats::balanced_logistic_loglik(x, y, w, b - eps)) /
                          (2 * eps);
        CHECK(std::abs(fw - gw) < 1e-5 * (1.0 + std::abs(gw)));
        CHECK(std::abs(fb - gb) < 1e-5 * (1.0 + std::abs(gb)));
    }
}

TEST_CASE("classification metrics identities") {
    stats::LogisticFit fit;
    fit.weight = 2.0;
    fit.intercept = -10.0; // cutoff at 5
    fit.cutoff = 5.0;
    fit.converged = true;
    std::vector<double> x = {1, 2, 3, 6, 7, 8, 4.5, 5.5};
    std::vector<std::uint8_t> a = {0, 0, 0, 1, 1, 1, 0, 1};
    auto m = stats::classification_metrics(fit, x, a);
    CHECK(m.n_a == 4);
    CHECK(m.n_b == 4);
    CHECK(m.f1_avg == doctest::Approx(0.5 * (m.f1_a_as_success + m.f1_b_as_success)));
    // swapping the orientation swaps the two F1 values
    std::vector<std::uint8_t> b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) b[i] = a[i] ? 0 : 1;
    stats::LogisticFit fit2;
    fit2.weight = -2.0;
    fit2.intercept = 10.0;
    fit2.cutoff = 5.0;
    auto m2 = stats::classification_metrics(fit2, x, b);
    CHECK(m.f1_a_as_success == doctest::Approx(m2.f1_a_as_success));
    CHECK(m.f1_b_as_success == doctest::Approx(m2.f1_b_as_success));
    CHECK(m.f1_avg == doctest::Approx(m2.f1_avg));
}

#include "ideoscale/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ideoscale/kernels.hpp"
#include "ideoscale/parallel.hpp"
#include "ideoscale/rng.hpp"

namespace ideoscale::stats {

double logistic(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("pearson: need at least two points");
    const double mx = kernels::sum(x.data(), n) / static_cast<double>(n);
    const double my = kernels::sum(y.data(), n) / static_cast<double>(n);
    const double sxx = kernels::centered_dot(x.data(), mx, x.data(), mx, n);
    const double syy = kernels::centered_dot(y.data(), my, y.data(), my, n);
    if (sxx <= 0.0 || syy <= 0.0) throw std::invalid_argument("pearson: zero variance input");
    const double sxy = kernels::centered_dot(x.data(), mx, y.data(), my, n);
    return sxy / std::sqrt(sxx * syy);
}

// ------------------------------------------------------------------ beta --

namespace {

// continued fraction for the incomplete beta (modified Lentz)
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (a <= 0 || b <= 0) throw std::invalid_argument("incomplete_beta: parameters must be positive");
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) + b * std::log1p(-x) +
                          a * std::log(x)) *
                     beta_cf(b, a, 1.0 - x) / b;
}

double beta_quantile(double a, double b, double p) {
    if (p <= 0) return 0.0;
    if (p >= 1) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (incomplete_beta(a, b, mid) < p)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15) break;
    }
    return 0.5 * (lo + hi);
}

Interval clopper_pearson(std::int64_t k, std::int64_t n, double alpha) {
    if (n < 1 || k < 0 || k > n) throw std::invalid_argument("clopper_pearson: need 0 <= k <= n, n >= 1");
    if (alpha <= 0 || alpha >= 1) throw std::invalid_argument("clopper_pearson: alpha in (0,1)");
    Interval ci;
    const double ak = static_cast<double>(k), an = static_cast<double>(n);
    ci.lo = (k == 0) ? 0.0 : beta_quantile(ak, an - ak + 1.0, alpha / 2.0);
    ci.hi = (k == n) ? 1.0 : beta_quantile(ak + 1.0, an - ak, 1.0 - alpha / 2.0);
    return ci;
}

// ------------------------------------------------------------------- dip --

namespace {

// Hartigan & Hartigan's iteration in count units: shrink the candidate
// modal interval [lo, hi] using the greatest convex minorant and least
// concave majorant of the empirical cdf, collecting the worst fit error
// of the tails on the way. The returned value is in counts; dip = D/(2n).
double dip_counts(const std::vector<double>& x) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    double dip = 1.0; // a sample never fits a unimodal cdf closer than 1/(2n)
    if (n < 2 || x[static_cast<std::size_t>(n - 1)] == x[0]) return dip;

    // xv[1..n], 1-based to keep the index arithmetic readable
    std::vector<double> xv(static_cast<std::size_t>(n) + 1);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        xv[static_cast<std::size_t>(i + 1)] = x[static_cast<std::size_t>(i)];
        if (i > 0 && x[static_cast<std::size_t>(i)] < x[static_cast<std::size_t>(i - 1)])
            throw std::invalid_argument("dip: input not sorted");
    }

    // mn[j]: previous touch candidate of the convex minorant ending at j;
    // mj[k]: next touch candidate of the concave majorant starting at k
    std::vector<std::ptrdiff_t> mn(static_cast<std::size_t>(n) + 1),
        mj(static_cast<std::size_t>(n) + 1), gcm(static_cast<std::size_t>(n) + 2),
        lcm(static_cast<std::size_t>(n) + 2);

    mn[1] = 1;
    for (std::ptrdiff_t j = 2; j <= n; ++j) {
        mn[static_cast<std::size_t>(j)] = j - 1;
        for (;;) {
            const auto mnj = mn[static_cast<std::size_t>(j)];
            const auto mnmnj = mn[static_cast<std::size_t>(mnj)];
            if (mnj == 1 ||
                (xv[static_cast<std::size_t>(j)] - xv[static_cast<std::size_t>(mnj)]) *
                        static_cast<double>(mnj - mnmnj) <
                    (xv[static_cast<std::size_t>(mnj)] - xv[static_cast<std::size_t>(mnmnj)]) *
                        static_cast<double>(j - mnj))
                break;
            mn[static_cast<std::size_t>(j)] = mnmnj;
        }
    }
    mj[static_cast<std::size_t>(n)] = n;
    for (std::ptrdiff_t k = n - 1; k >= 1; --k) {
        mj[static_cast<std::size_t>(k)] = k + 1;
        for (;;) {
            const auto mjk = mj[static_cast<std::size_t>(k)];
            const auto mjmjk = mj[static_cast<std::size_t>(mjk)];
            if (mjk == n ||
                (xv[static_cast<std::size_t>(k)] - xv[static_cast<std::size_t>(mjk)]) *
                        static_cast<double>(mjk - mjmjk) <
                    (xv[static_cast<std::size_t>(mjk)] - xv[static_cast<std::size_t>(mjmjk)]) *
                        static_cast<double>(k - mjk))
                break;
            mj[static_cast<std::size_t>(k)] = mjmjk;
        }
    }

    std::ptrdiff_t low = 1, high = n;
    for (std::ptrdiff_t guard = 0; guard <= n + 2; ++guard) {
        // touch points of the two hulls on [low, high]
        std::ptrdiff_t l_gcm, l_lcm;
        gcm[1] = high;
        {
            std::ptrdiff_t i = 1;
            while (gcm[static_cast<std::size_t>(i)] > low) {
                gcm[static_cast<std::size_t>(i + 1)] = mn[static_cast<std::size_t>(gcm[static_cast<std::size_t>(i)])];
                ++i;
            }
            l_gcm = i;
        }
        lcm[1] = low;
        {
            std::ptrdiff_t i = 1;
            while (lcm[static_cast<std::size_t>(i)] < high) {
                lcm[static_cast<std::size_t>(i + 1)] = mj[static_cast<std::size_t>(lcm[static_cast<std::size_t>(i)])];
                ++i;
            }
            l_lcm = i;
        }

        std::ptrdiff_t ig = l_gcm, ih = l_lcm;
        double d = 0.0;
        if (l_gcm != 2 || l_lcm != 2) {
            // walk both touch sequences upward; at each touch measure the
            // gap between majorant and minorant
            std::ptrdiff_t ix = l_gcm - 1, iv = 2;
            do {
                const auto gcmix = gcm[static_cast<std::size_t>(ix)];
                const auto lcmiv = lcm[static_cast<std::size_t>(iv)];
                double dx;
                if (gcmix > lcmiv) {
                    const auto gcmi1 = gcm[static_cast<std::size_t>(ix + 1)];
                    dx = static_cast<double>(lcmiv - gcmi1 + 1) -
                         (xv[static_cast<std::size_t>(lcmiv)] - xv[static_cast<std::size_t>(gcmi1)]) *
                             static_cast<double>(gcmix - gcmi1) /
                             (xv[static_cast<std::size_t>(gcmix)] - xv[static_cast<std::size_t>(gcmi1)]);
                    ++iv;
                    if (dx >= d) {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    const auto lcmiv1 = lcm[static_cast<std::size_t>(iv - 1)];
                    dx = (xv[static_cast<std::size_t>(gcmix)] - xv[static_cast<std::size_t>(lcmiv1)]) *
                             static_cast<double>(lcmiv - lcmiv1) /
                             (xv[static_cast<std::size_t>(lcmiv)] - xv[static_cast<std::size_t>(lcmiv1)]) -
                         static_cast<double>(gcmix - lcmiv1 - 1);
                    --ix;
                    if (dx >= d) {
                        d = dx;
                        ig = ix + 1;
                        ih = iv;
                    }
                }
                if (ix < 1) ix = 1;
                if (iv > l_lcm) iv = l_lcm;
            } while (gcm[static_cast<std::size_t>(ix)] != lcm[static_cast<std::size_t>(iv)]);
        } else {
            d = 1.0;
        }
        if (d < dip) break;

        // worst fit of the convex minorant on [low, gcm[ig]]
        double dip_l = 0.0;
        for (std::ptrdiff_t j = ig; j < l_gcm; ++j) {
            double max_t = 1.0;
            const auto jb = gcm[static_cast<std::size_t>(j + 1)];
            const auto je = gcm[static_cast<std::size_t>(j)];
            if (je - jb > 1 && xv[static_cast<std::size_t>(je)] != xv[static_cast<std::size_t>(jb)]) {
                const double c =
                    static_cast<double>(je - jb) /
                    (xv[static_cast<std::size_t>(je)] - xv[static_cast<std::size_t>(jb)]);
                for (std::ptrdiff_t jj = jb + 1; jj <= je; ++jj) {
                    const double t =
                        static_cast<double>(jj - jb + 1) -
                        (xv[static_cast<std::size_t>(jj)] - xv[static_cast<std::size_t>(jb)]) * c;
                    if (t > max_t) max_t = t;
                }
            }
            if (max_t > dip_l) dip_l = max_t;
        }

        // worst fit of the concave majorant on [lcm[ih], high]
        double dip_u = 0.0;
        for (std::ptrdiff_t j = ih; j < l_lcm; ++j) {
            double max_t = 1.0;
            const auto jb = lcm[static_cast<std::size_t>(j)];
            const auto je = lcm[static_cast<std::size_t>(j + 1)];
            if (je - jb > 1 && xv[static_cast<std::size_t>(je)] != xv[static_cast<std::size_t>(jb)]) {
                const double c =
                    static_cast<double>(je - jb) /
                    (xv[static_cast<std::size_t>(je)] - xv[static_cast<std::size_t>(jb)]);
                for (std::ptrdiff_t jj = jb + 1; jj <= je; ++jj) {
                    const double t =
                        (xv[static_cast<std::size_t>(jj)] - xv[static_cast<std::size_t>(jb)]) * c -
                        static_cast<double>(jj - jb - 1);
                    if (t > max_t) max_t = t;
                }
            }
            if (max_t > dip_u) dip_u = max_t;
        }

        dip = std::max(dip, std::max(dip_l, dip_u));
        if (low == gcm[static_cast<std::size_t>(ig)] && high == lcm[static_cast<std::size_t>(ih)])
            break;
        low = gcm[static_cast<std::size_t>(ig)];
        high = lcm[static_cast<std::size_t>(ih)];
    }
    return dip;
}

} // namespace

double dip_statistic_sorted(const std::vector<double>& sorted) {
    if (sorted.size() < 2) throw std::invalid_argument("dip: need at least two samples");
    return dip_counts(sorted) / (2.0 * static_cast<double>(sorted.size()));
}

double dip_statistic(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    return dip_statistic_sorted(samples);
}

DipResult dip_test(std::span<const double> samples, int n_boot, std::uint64_t seed, int threads) {
    std::vector<double> clean;
    clean.reserve(samples.size());
    for (double v : samples)
        if (std::isfinite(v)) clean.push_back(v);
    if (clean.size() < 2) throw std::invalid_argument("dip_test: fewer than two finite samples");
    if (n_boot < 1) throw std::invalid_argument("dip_test: n_boot must be positive");
    std::sort(clean.begin(), clean.end());

    DipResult res;
    res.n = clean.size();
    res.n_boot = n_boot;
    res.seed = seed;
    res.dip = dip_statistic_sorted(clean);

    const std::size_t n = clean.size();
    std::atomic<std::int64_t> exceed{0};
    parallel_for(static_cast<std::size_t>(n_boot), threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> draw(n);
        std::int64_t local = 0;
        for (std::size_t r = lo; r < hi; ++r) {
            auto gen = rng::substream(seed, r);
            for (auto& v : draw) v = gen.uniform01();
            std::sort(draw.begin(), draw.end());
            if (dip_statistic_sorted(draw) >= res.dip) ++local;
        }
        exceed += local;
    });
    res.p_value = static_cast<double>(exceed.load()) / static_cast<double>(n_boot);
    return res;
}

// -------------------------------------------------------------- logistic --

double balanced_logistic_loglik(std::span<const double> positions, std::span<const std::uint8_t> labels,
                                double weight, double intercept) {
    if (positions.size() != labels.size())
        throw std::invalid_argument("logistic: length mismatch");
    std::size_t n1 = 0;
    for (auto l : labels) n1 += l ? 1 : 0;
    const std::size_t n = labels.size();
    const std::size_t n0 = n - n1;
    if (n1 == 0 || n0 == 0) throw std::invalid_argument("logistic: both classes must be present");
    const double w1 = static_cast<double>(n) / (2.0 * static_cast<double>(n1));
    const double w0 = static_cast<double>(n) / (2.0 * static_cast<double>(n0));

    auto softplus = [](double z) {
        if (z > 35.0) return z;
        if (z < -35.0) return std::exp(z);
        return std::log1p(std::exp(z));
    };
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double eta = weight * positions[i] + intercept;
        // log p(y|eta): -softplus(-eta) for y=1, -softplus(eta) for y=0
        ll += labels[i] ? -w1 * softplus(-eta) : -w0 * softplus(eta);
    }
    return ll;
}

LogisticFit balanced_logistic_fit(std::span<const double> positions,
                                  std::span<const std::uint8_t> labels) {
    if (positions.size() != labels.size())
        throw std::invalid_argument("logistic: length mismatch");
    const std::size_t n = positions.size();
    std::size_t n1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(positions[i]))
            throw std::invalid_argument("logistic: non-finite position");
        n1 += labels[i] ? 1 : 0;
    }
    const std::size_t n0 = n - n1;
    if (n1 == 0 || n0 == 0) throw std::invalid_argument("logistic: both classes must be present");
    const double w1 = static_cast<double>(n) / (2.0 * static_cast<double>(n1));
    const double w0 = static_cast<double>(n) / (2.0 * static_cast<double>(n0));

    constexpr double kWeightCap = 30.0;
    constexpr int kMaxIter = 100;
    constexpr double kStepTol = 1e-8;

    LogisticFit fit;
    double w = 0.0, b = 0.0;
    double ll = balanced_logistic_loglik(positions, labels, w, b);
    bool capped = false;

    // complete separation: the likelihood has no finite maximizer, so the
    // slope is pinned at the cap up front
    {
        double max0 = -std::numeric_limits<double>::infinity();
        double min0 = std::numeric_limits<double>::infinity();
        double max1 = max0, min1 = min0;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i]) {
                max1 = std::max(max1, positions[i]);
                min1 = std::min(min1, positions[i]);
            } else {
                max0 = std::max(max0, positions[i]);
                min0 = std::min(min0, positions[i]);
            }
        }
        if (max0 < min1)
            w = kWeightCap, capped = true;
        else if (max1 < min0)
            w = -kWeightCap, capped = true;
    }

    int it = 0;
    for (; it < kMaxIter && !capped; ++it) {
        double gw = 0, gb = 0, hww = 0, hwb = 0, hbb = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ci = labels[i] ? w1 : w0;
            const double mu = logistic(w * positions[i] + b);
            const double r = ci * ((labels[i] ? 1.0 : 0.0) - mu);
            const double s = ci * mu * (1.0 - mu);
            gw += r * positions[i];
            gb += r;
            hww += s * positions[i] * positions[i];
            hwb += s * positions[i];
            hbb += s;
        }
        // Newton step on the 2x2 system, ridge-stabilized when nearly singular
        double det = hww * hbb - hwb * hwb;
        if (det < 1e-12 * (hww * hbb + 1e-300)) {
            hww += 1e-10;
            hbb += 1e-10;
            det = hww * hbb - hwb * hwb;
        }
        double dw = (hbb * gw - hwb * gb) / det;
        double db = (hww * gb - hwb * gw) / det;

        // damping: halve until the weighted likelihood does not decrease
        double step = 1.0;
        double nw = w, nb = b, nll = ll;
        for (int h = 0; h < 40; ++h) {
            nw = w + step * dw;
            nb = b + step * db;
            nll = balanced_logistic_loglik(positions, labels, nw, nb);
            if (nll >= ll - 1e-14) break;
            step *= 0.5;
        }
        const double step_w = std::abs(nw - w), step_b = std::abs(nb - b);
        w = nw;
        b = nb;
        ll = nll;

        if (std::abs(w) > kWeightCap) {
            capped = true;
            w = w > 0 ? kWeightCap : -kWeightCap;
            break;
        }
        if (std::max(step_w, step_b) < kStepTol) {
            fit.converged = true;
            ++it;
            break;
        }
    }

    if (capped) {
        // separation: slope pinned at the cap, intercept fitted alone.
        // Start at the gap midpoint; starting at zero leaves every point
        // saturated and the Newton step degenerate.
        double max0 = -std::numeric_limits<double>::infinity();
        double min0 = std::numeric_limits<double>::infinity();
        double max1 = max0, min1 = min0;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i]) {
                max1 = std::max(max1, positions[i]);
                min1 = std::min(min1, positions[i]);
            } else {
                max0 = std::max(max0, positions[i]);
                min0 = std::min(min0, positions[i]);
            }
        }
        const double midpoint = w > 0 ? 0.5 * (max0 + min1) : 0.5 * (max1 + min0);
        b = -w * midpoint;
        for (int j = 0; j < 60; ++j) {
            double gb = 0, hbb = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double ci = labels[i] ? w1 : w0;
                const double mu = logistic(w * positions[i] + b);
                gb += ci * ((labels[i] ? 1.0 : 0.0) - mu);
                hbb += ci * mu * (1.0 - mu);
            }
            if (hbb < 1e-12) break;
            const double db = gb / hbb;
            b += std::clamp(db, -10.0, 10.0);
            if (std::abs(db) < kStepTol) break;
        }
        fit.converged = false;
    }

    fit.weight = w;
    fit.intercept = b;
    fit.iterations = it;
    fit.cutoff = (w != 0.0) ? -b / w : std::numeric_limits<double>::quiet_NaN();
    return fit;
}

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: length mismatch");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    std::int64_t pos_total = 0;
    for (auto l : labels) pos_total += l ? 1 : 0;
    const std::int64_t neg_total = static_cast<std::int64_t>(n) - pos_total;
    if (pos_total == 0 || neg_total == 0)
        throw std::invalid_argument("roc_auc: both classes must be present");

    // exact win/tie counting over tie groups; ties count one half
    std::int64_t wins2 = 0; // 2*wins + ties
    std::int64_t neg_seen = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        std::int64_t pos_g = 0, neg_g = 0;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]])
                ++pos_g;
            else
                ++neg_g;
            ++j;
        }
        wins2 += 2 * neg_seen * pos_g + pos_g * neg_g;
        neg_seen += neg_g;
        i = j;
    }
    return static_cast<double>(wins2) / (2.0 * static_cast<double>(pos_total) * static_cast<double>(neg_total));
}

BinaryMetrics classification_metrics(const LogisticFit& fit, std::span<const double> positions,
                                     std::span<const std::uint8_t> labels_a) {
    if (positions.size() != labels_a.size())
        throw std::invalid_argument("classification_metrics: length mismatch");
    const std::size_t n = positions.size();

    BinaryMetrics m;
    std::vector<double> eta(n);
    for (std::size_t i = 0; i < n; ++i) eta[i] = fit.weight * positions[i] + fit.intercept;
    m.roc_auc = roc_auc(eta, labels_a);

    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool pred_a = eta[i] > 0.0; // probability > 0.5
        if (labels_a[i]) {
            ++(pred_a ? tp : fn);
        } else {
            ++(pred_a ? fp : tn);
        }
    }
    m.n_a = tp + fn;
    m.n_b = fp + tn;

    auto f1 = [](std::int64_t tp_, std::int64_t fp_, std::int64_t fn_) {
        const double denom = static_cast<double>(2 * tp_ + fp_ + fn_);
        return denom > 0 ? 2.0 * static_cast<double>(tp_) / denom : 0.0;
    };
    m.f1_a_as_success = f1(tp, fp, fn);
    m.f1_b_as_success = f1(tn, fn, fp);
    m.f1_avg = 0.5 * (m.f1_a_as_success + m.f1_b_as_success);
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    return m;
}

} // namespace ideoscale::stats

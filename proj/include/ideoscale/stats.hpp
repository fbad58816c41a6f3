#pragma once

#include <cstdint>
#include <span>
#include <vector>

// Self-contained statistics kernels. Everything here is pure and
// reentrant; bootstrap replicates draw from per-replicate substreams so
// parallel scheduling cannot change a p-value.
namespace ideoscale::stats {

// Sample Pearson correlation; throws on length mismatch, n < 2, or zero
// variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Regularized incomplete beta I_x(a,b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Quantile of the Beta(a,b) distribution (Newton + bisection hybrid).
double beta_quantile(double a, double b, double p);

struct Interval {
    double lo = 0.0, hi = 1.0;
};

// Exact binomial interval: lo = BetaQ(alpha/2; k, n-k+1) (0 at k=0),
// hi = BetaQ(1-alpha/2; k+1, n-k) (1 at k=n).
Interval clopper_pearson(std::int64_t k, std::int64_t n, double alpha = 0.05);

struct DipResult {
    double dip = 0.0;
    double p_value = 1.0;
    int n_boot = 0;
    std::uint64_t seed = 0;
    std::size_t n = 0; // samples used after dropping non-finite values
};

// Hartigan & Hartigan's dip statistic: the largest ECDF deviation from
// the closest unimodal distribution function, computed with the usual
// greatest-convex-minorant / least-concave-majorant iteration.
double dip_statistic(std::vector<double> samples_will_be_sorted);

// Same, for data that is already sorted ascending.
double dip_statistic_sorted(const std::vector<double>& sorted);

// Dip plus a Monte Carlo p-value against the uniform(0,1) null:
// p = (# of n_boot uniform samples of the same size with dip >= observed) / n_boot.
DipResult dip_test(std::span<const double> samples, int n_boot = 2000, std::uint64_t seed = 0,
                   int threads = 1);

struct LogisticFit {
    double weight = 0.0;    // per position unit
    double intercept = 0.0;
    double cutoff = 0.0;    // position where the predicted probability is 0.5
    bool converged = false;
    int iterations = 0;
};

// Logistic regression of a binary label on one position, with samples
// weighted n_total / (2 n_class) so class imbalance does not tilt the
// fit. Damped IRLS; under complete separation the slope is clamped at
// |weight| = 30 and the fit flagged converged = false.
LogisticFit balanced_logistic_fit(std::span<const double> positions, std::span<const std::uint8_t> labels);

// Weighted log-likelihood of a candidate (weight, intercept), exposed so
// oracles can score the same objective.
double balanced_logistic_loglik(std::span<const double> positions, std::span<const std::uint8_t> labels,
                                double weight, double intercept);

// Rank-based (Mann-Whitney) AUC with mid-rank ties, computed from exact
// win/tie counts. Throws when only one class is present.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct BinaryMetrics {
    double roc_auc = 0.0;
    double f1_a_as_success = 0.0;
    double f1_b_as_success = 0.0;
    double f1_avg = 0.0;
    double precision = 0.0; // orientation: label A as success
    double recall = 0.0;
    std::int64_t n_a = 0;
    std::int64_t n_b = 0;
};

// Metrics at the 0.5 probability threshold for a fitted model, where
// label true means class A. F1 is computed for both orientations and
// averaged; precision/recall are reported for the A-as-success
// orientation with plain (unweighted) counts.
BinaryMetrics classification_metrics(const LogisticFit& fit, std::span<const double> positions,
                                     std::span<const std::uint8_t> labels_a);

double logistic(double x);

} // namespace ideoscale::stats

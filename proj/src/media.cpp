#include "ideoscale/media.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "ideoscale/csv.hpp"
#include "ideoscale/parallel.hpp"
#include "ideoscale/rng.hpp"

namespace ideoscale::media {

namespace {

struct DomainAccum {
    std::set<std::string> users; // distinct sharers, ordered for determinism
    std::int64_t tweets = 0;
};

} // namespace

std::vector<DomainProfile> aggregate_shares(const std::vector<ShareRecord>& records,
                                            const PositionTable& positions,
                                            const AggregateOptions& opts, AggregateReport* report) {
    const auto& rows = positions.id_rows();
    std::map<std::string, DomainAccum> by_domain; // ordered: deterministic iteration
    std::size_t dropped = 0;

    for (const auto& rec : records) {
        if (rec.domain.empty()) throw std::invalid_argument("aggregate_shares: empty domain");
        if (rec.tweet_count < 1)
            throw std::invalid_argument("aggregate_shares: tweet_count must be >= 1");
        if (!rows.count(rec.pseudo_id)) {
            ++dropped;
            continue;
        }
        auto& acc = by_domain[rec.domain];
        acc.users.insert(rec.pseudo_id);
        acc.tweets += rec.tweet_count;
    }

    const std::size_t ndim = positions.n_dims();
    std::vector<DomainProfile> profiles;
    for (const auto& [domain, acc] : by_domain) {
        if (static_cast<std::int64_t>(acc.users.size()) < opts.min_users) continue;
        DomainProfile p;
        p.domain = domain;
        p.user_count = static_cast<std::int64_t>(acc.users.size());
        p.tweet_count = acc.tweets;
        p.mean.assign(ndim, 0.0);
        p.stddev.assign(ndim, 0.0);
        p.quintile.assign(ndim, 0);
        p.dip.assign(ndim, std::numeric_limits<double>::quiet_NaN());
        p.dip_pval.assign(ndim, std::numeric_limits<double>::quiet_NaN());
        profiles.push_back(std::move(p));
    }

    // per-domain statistics are independent; compute them in parallel
    std::vector<const DomainAccum*> accs;
    for (auto& p : profiles) accs.push_back(&by_domain.at(p.domain));
    parallel_for(profiles.size(), opts.threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<double> vals;
        for (std::size_t idx = lo; idx < hi; ++idx) {
            DomainProfile& p = profiles[idx];
            const DomainAccum& acc = *accs[idx];
            const std::size_t nu = acc.users.size();
            std::vector<std::size_t> user_rows;
            user_rows.reserve(nu);
            for (const auto& u : acc.users) user_rows.push_back(rows.at(u));
            for (std::size_t d = 0; d < ndim; ++d) {
                vals.clear();
                double s = 0.0;
                for (auto r : user_rows) {
                    const double v = positions.at(r, d);
                    vals.push_back(v);
                    s += v;
                }
                const double mean = s / static_cast<double>(nu);
                double ss = 0.0;
                for (double v : vals) ss += (v - mean) * (v - mean);
                p.mean[d] = mean;
                p.stddev[d] = std::sqrt(ss / static_cast<double>(nu));
                if (nu >= 2) {
                    // seed keyed by names so the result survives reordering
                    std::uint64_t key = rng::fnv1a(p.domain.data(), p.domain.size());
                    key = rng::fnv1a(positions.dimensions[d].data(), positions.dimensions[d].size(), key);
                    auto res = stats::dip_test(vals, opts.dip_boot, opts.seed ^ key, 1);
                    p.dip[d] = res.dip;
                    p.dip_pval[d] = res.p_value;
                }
            }
        }
    });

    std::sort(profiles.begin(), profiles.end(), [](const DomainProfile& a, const DomainProfile& b) {
        if (a.user_count != b.user_count) return a.user_count > b.user_count;
        return a.domain < b.domain;
    });
    for (std::size_t d = 0; d < ndim; ++d) assign_quintiles(profiles, d);

    if (report) {
        report->records_total = records.size();
        report->records_dropped_unknown_user = dropped;
        report->domains_observed = by_domain.size();
        report->domains_retained = profiles.size();
    }
    return profiles;
}

void assign_quintiles(std::vector<DomainProfile>& profiles, std::size_t dim_index) {
    const std::size_t n = profiles.size();
    if (n == 0) return;
    std::vector<double> means(n);
    for (std::size_t i = 0; i < n; ++i) means[i] = profiles[i].mean[dim_index];
    std::vector<double> sorted = means;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) {
        // competition rank: ties take the lowest rank, hence the lower bucket
        const auto rank =
            static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), means[i]) -
                                     sorted.begin()) +
            1;
        profiles[i].quintile[dim_index] = static_cast<int>(5 * (rank - 1) / n) + 1;
    }
}

std::vector<CategorySummary> category_distributions(const std::vector<DomainProfile>& profiles,
                                                    const std::map<std::string, std::string>& categories,
                                                    std::size_t dim_index) {
    std::map<std::string, CategorySummary> by_cat;
    for (const auto& p : profiles) {
        auto it = categories.find(p.domain);
        if (it == categories.end()) continue;
        auto& cs = by_cat[it->second];
        cs.category = it->second;
        cs.values.push_back(p.mean[dim_index]);
    }
    if (by_cat.empty())
        throw std::runtime_error("category_distributions: no categorized domain present");

    std::vector<CategorySummary> out;
    for (auto& [cat, cs] : by_cat) {
        cs.count = cs.values.size();
        double s = 0.0;
        for (double v : cs.values) s += v;
        cs.mean = s / static_cast<double>(cs.count);
        double ss = 0.0;
        for (double v : cs.values) ss += (v - cs.mean) * (v - cs.mean);
        cs.stddev = std::sqrt(ss / static_cast<double>(cs.count));
        out.push_back(std::move(cs));
    }
    return out;
}

std::vector<ShareRecord> load_shares_csv(const std::string& csv_text, const std::string& source_name) {
    const auto t = csv::read_string(csv_text, source_name);
    const auto ci = t.col("pseudo_id");
    const auto cd = t.col("domain");
    const auto cc = t.col("tweet_count");
    std::vector<ShareRecord> out;
    out.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string ctx = source_name + ":" + std::to_string(r + 2);
        ShareRecord rec;
        rec.pseudo_id = row[ci];
        rec.domain = row[cd];
        for (char& c : rec.domain) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (rec.domain.find('/') != std::string::npos || rec.domain.find(':') != std::string::npos)
            throw std::runtime_error(ctx + ": domain must be a bare hostname");
        rec.tweet_count = csv::parse_int(row[cc], ctx);
        if (rec.tweet_count < 1) throw std::runtime_error(ctx + ": tweet_count must be >= 1");
        out.push_back(std::move(rec));
    }
    return out;
}

std::map<std::string, std::string> load_categories_csv(const std::string& csv_text,
                                                       const std::string& source_name) {
    const auto t = csv::read_string(csv_text, source_name);
    const auto cd = t.col("domain");
    const auto cc = t.col("media_category");
    std::map<std::string, std::string> out;
    for (const auto& row : t.rows) {
        std::string dom = row[cd];
        for (char& c : dom) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out[dom] = row[cc];
    }
    return out;
}

} // namespace ideoscale::media

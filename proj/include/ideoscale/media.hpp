#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ideoscale/positions.hpp"
#include "ideoscale/stats.hpp"

namespace ideoscale::media {

struct ShareRecord {
    std::string pseudo_id;
    std::string domain; // normalized hostname, lowercase, no scheme/path
    std::int64_t tweet_count = 1;
};

// Per-dimension sharing statistics of one web domain. Positions come from
// the distinct users who shared the domain; multiplicity never enters a
// positional statistic.
struct DomainProfile {
    std::string domain;
    std::string media_category; // empty when uncategorized
    std::int64_t user_count = 0;
    std::int64_t tweet_count = 0;
    std::vector<double> mean;     // per dimension
    std::vector<double> stddev;   // population std
    std::vector<int> quintile;    // 1..5, assigned over all retained domains
    std::vector<double> dip;      // NaN when fewer than two users
    std::vector<double> dip_pval;
};

struct AggregateOptions {
    std::int64_t min_users = 100;
    int dip_boot = 2000;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct AggregateReport {
    std::size_t records_total = 0;
    std::size_t records_dropped_unknown_user = 0;
    std::size_t domains_observed = 0;
    std::size_t domains_retained = 0;
};

// Groups share records by domain, deduplicates users, computes the
// positional statistics per dimension, drops domains below the user
// threshold and sorts by (user_count desc, domain asc). Quintiles are
// filled for all dimensions afterwards.
std::vector<DomainProfile> aggregate_shares(const std::vector<ShareRecord>& records,
                                            const PositionTable& positions,
                                            const AggregateOptions& opts,
                                            AggregateReport* report = nullptr);

// Ranks domains by their per-dimension mean and stores quintile indices
// {1..5}; tied means share the lower index.
void assign_quintiles(std::vector<DomainProfile>& profiles, std::size_t dim_index);

struct CategorySummary {
    std::string category;
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;          // population std across domain means
    std::vector<double> values;   // raw per-domain means, plot-ready
};

// Distribution of domain positions per media category on one dimension.
std::vector<CategorySummary> category_distributions(const std::vector<DomainProfile>& profiles,
                                                    const std::map<std::string, std::string>& categories,
                                                    std::size_t dim_index);

std::vector<ShareRecord> load_shares_csv(const std::string& csv_text, const std::string& source_name);
std::map<std::string, std::string> load_categories_csv(const std::string& csv_text,
                                                       const std::string& source_name);

} // namespace ideoscale::media

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ideoscale::model {

// Binary follower -> elite graph in CSR form plus the transpose, which is
// what both the filter step and the decomposition consume. Edges are
// deduplicated and column indices sorted within each row, so the edge set
// has one canonical representation.
struct BipartiteNetwork {
    std::vector<std::string> follower_ids; // first-seen order
    std::vector<std::string> elite_ids;

    std::vector<std::int64_t> row_ptr; // size n_followers()+1
    std::vector<std::int32_t> col_idx; // elite index per edge, sorted per row

    std::vector<std::int64_t> colt_ptr; // transpose, size n_elites()+1
    std::vector<std::int32_t> rowt_idx; // follower index per edge

    // Platform follower counts of the follower accounts themselves;
    // empty when unknown, otherwise one entry per follower. Needed only
    // for the optional popularity cut.
    std::vector<std::int64_t> follower_account_followers;

    std::size_t n_followers() const { return follower_ids.size(); }
    std::size_t n_elites() const { return elite_ids.size(); }
    std::int64_t edge_count() const { return static_cast<std::int64_t>(col_idx.size()); }

    std::int64_t out_degree(std::size_t follower) const {
        return row_ptr[follower + 1] - row_ptr[follower];
    }
    std::int64_t in_degree(std::size_t elite) const {
        return colt_ptr[elite + 1] - colt_ptr[elite];
    }

    // Structural checks: bounds, sortedness, no duplicates, transpose
    // consistency. Throws on violation.
    void check_consistent() const;
};

struct EntityRecord {
    std::string pseudo_id;
    bool is_elite = false;
    std::string name;  // elites only
    std::string party; // elites only
};

struct ActivityRecord {
    std::string pseudo_id;
    double mean_tweets_per_day = 0.0;
    std::int64_t followers = 0;
    std::int64_t followees = 0;
};

struct DegreeSummary {
    double mean_elite_in_degree = 0.0;
    double mean_follower_out_degree = 0.0;
};

struct FilterReport {
    std::size_t followers_before = 0, followers_after = 0;
    std::size_t elites_before = 0, elites_after = 0;
    std::int64_t edges_before = 0, edges_after = 0;
};

// Build a network from (follower_id, elite_id) pairs; duplicates collapse,
// indices assigned in first-seen order. No filtering happens here.
BipartiteNetwork ingest_edges(const std::vector<std::pair<std::string, std::string>>& edges);

// Same, from a CSV with header `follower_id,elite_id`. Parse errors carry
// the 1-based line number.
BipartiteNetwork ingest_edges_csv(const std::string& csv_text, const std::string& source_name);

// Keep followers with out-degree >= min_elites_followed (and, when given,
// account followers >= min_account_followers), then drop elites left with
// in-degree 0. One pass; applying it again with the same thresholds is a
// no-op.
BipartiteNetwork filter_network(const BipartiteNetwork& net, int min_elites_followed = 3,
                                std::optional<std::int64_t> min_account_followers = std::nullopt,
                                FilterReport* report = nullptr);

DegreeSummary degree_summary(const BipartiteNetwork& net);

// days elapsed = whole calendar days between the two dates (partial days
// truncated); posts divided by that span.
ActivityRecord compute_activity(const std::string& pseudo_id, std::int64_t total_posts,
                                const std::string& created_at, const std::string& collected_at,
                                std::int64_t followers, std::int64_t followees);

// Days since civil epoch for an ISO-8601 date (time-of-day suffix ignored).
std::int64_t parse_date_days(const std::string& iso_date);

// Seeded 128-bit hex pseudo ids, one per raw id, collision-checked.
// The raw->pseudo mapping is the only place raw ids survive.
class PseudoIdMap {
public:
    PseudoIdMap(const std::vector<std::string>& raw_ids, std::uint64_t seed);

    const std::string& pseudo(const std::string& raw_id) const;
    const std::unordered_map<std::string, std::string>& mapping() const { return map_; }

    // `raw_id,pseudo_id` sidecar, meant to be kept private
    std::string to_csv() const;

private:
    std::unordered_map<std::string, std::string> map_;
    std::vector<std::string> raw_order_;
};

// Applies pseudo ids to both sides of a network in place.
void anonymize_network(BipartiteNetwork& net, const PseudoIdMap& followers, const PseudoIdMap& elites);

// Loaders for the external CSV schemas.
std::vector<EntityRecord> load_elite_metadata(const std::string& csv_text, const std::string& source_name);
std::vector<ActivityRecord> load_activity(const std::string& csv_text, const std::string& source_name);

// Little-endian binary cache (magic "IDNT", version 1); the transpose is
// rebuilt on load.
std::string network_to_bytes(const BipartiteNetwork& net);
BipartiteNetwork network_from_bytes(const std::string& bytes);

} // namespace ideoscale::model

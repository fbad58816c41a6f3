#include "ideoscale/model.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

#include "ideoscale/csv.hpp"
#include "ideoscale/rng.hpp"

namespace ideoscale::model {

namespace {

// Shared CSR/CSC assembly from an edge list that is already deduplicated
// and index-mapped.
void build_adjacency(BipartiteNetwork& net, std::vector<std::pair<std::int32_t, std::int32_t>>& pairs) {
    const std::size_t n = net.follower_ids.size();
    const std::size_t m = net.elite_ids.size();
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    net.row_ptr.assign(n + 1, 0);
    net.col_idx.resize(pairs.size());
    for (const auto& [f, e] : pairs) net.row_ptr[static_cast<std::size_t>(f) + 1]++;
    for (std::size_t i = 0; i < n; ++i) net.row_ptr[i + 1] += net.row_ptr[i];
    {
        std::vector<std::int64_t> cursor(net.row_ptr.begin(), net.row_ptr.end() - 1);
        for (const auto& [f, e] : pairs) net.col_idx[static_cast<std::size_t>(cursor[f]++)] = e;
    }

    net.colt_ptr.assign(m + 1, 0);
    net.rowt_idx.resize(pairs.size());
    for (const auto& [f, e] : pairs) net.colt_ptr[static_cast<std::size_t>(e) + 1]++;
    for (std::size_t j = 0; j < m; ++j) net.colt_ptr[j + 1] += net.colt_ptr[j];
    {
        std::vector<std::int64_t> cursor(net.colt_ptr.begin(), net.colt_ptr.end() - 1);
        // pairs are sorted by follower, so each transpose column ends up
        // sorted by follower index as well
        for (const auto& [f, e] : pairs) net.rowt_idx[static_cast<std::size_t>(cursor[e]++)] = f;
    }
}

} // namespace

void BipartiteNetwork::check_consistent() const {
    const std::size_t n = n_followers();
    const std::size_t m = n_elites();
    if (row_ptr.size() != n + 1 || colt_ptr.size() != m + 1)
        throw std::runtime_error("network: pointer array size mismatch");
    if (col_idx.size() != rowt_idx.size())
        throw std::runtime_error("network: edge count mismatch between csr and csc");
    if (!follower_account_followers.empty() && follower_account_followers.size() != n)
        throw std::runtime_error("network: follower metadata size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (row_ptr[i] > row_ptr[i + 1]) throw std::runtime_error("network: row_ptr not monotone");
        for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            const auto j = col_idx[static_cast<std::size_t>(k)];
            if (j < 0 || static_cast<std::size_t>(j) >= m)
                throw std::runtime_error("network: elite index out of bounds");
            if (k > row_ptr[i] && col_idx[static_cast<std::size_t>(k - 1)] >= j)
                throw std::runtime_error("network: duplicate or unsorted edge");
        }
    }
    std::vector<std::int64_t> in_deg(m, 0);
    for (auto j : col_idx) in_deg[static_cast<std::size_t>(j)]++;
    for (std::size_t j = 0; j < m; ++j)
        if (in_deg[j] != colt_ptr[j + 1] - colt_ptr[j])
            throw std::runtime_error("network: transpose degree mismatch");
}

BipartiteNetwork ingest_edges(const std::vector<std::pair<std::string, std::string>>& edges) {
    BipartiteNetwork net;
    std::unordered_map<std::string, std::int32_t> fidx, eidx;
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    pairs.reserve(edges.size());
    for (const auto& [f, e] : edges) {
        if (f.empty() || e.empty()) throw std::runtime_error("ingest: empty id in edge record");
        auto [fit, fnew] = fidx.try_emplace(f, static_cast<std::int32_t>(net.follower_ids.size()));
        if (fnew) net.follower_ids.push_back(f);
        auto [eit, enew] = eidx.try_emplace(e, static_cast<std::int32_t>(net.elite_ids.size()));
        if (enew) net.elite_ids.push_back(e);
        pairs.emplace_back(fit->second, eit->second);
    }
    build_adjacency(net, pairs);
    return net;
}

BipartiteNetwork ingest_edges_csv(const std::string& csv_text, const std::string& source_name) {
    const auto table = csv::read_string(csv_text, source_name);
    const auto cf = table.col("follower_id");
    const auto ce = table.col("elite_id");
    std::vector<std::pair<std::string, std::string>> edges;
    edges.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row[cf].empty() || row[ce].empty())
            throw std::runtime_error(source_name + ":" + std::to_string(r + 2) + ": empty id");
        edges.emplace_back(row[cf], row[ce]);
    }
    return ingest_edges(edges);
}

BipartiteNetwork filter_network(const BipartiteNetwork& net, int min_elites_followed,
                                std::optional<std::int64_t> min_account_followers,
                                FilterReport* report) {
    if (min_elites_followed < 1)
        throw std::invalid_argument("filter_network: min_elites_followed must be >= 1");
    if (min_account_followers && net.follower_account_followers.empty())
        throw std::invalid_argument(
            "filter_network: follower-count threshold given but the network has no account metadata");

    const std::size_t n = net.n_followers();
    const std::size_t m = net.n_elites();

    std::vector<bool> keep_follower(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (net.out_degree(i) < min_elites_followed) continue;
        if (min_account_followers && net.follower_account_followers[i] < *min_account_followers)
            continue;
        keep_follower[i] = true;
    }

    // Elites drop out only when no retained follower reaches them.
    std::vector<std::int64_t> in_deg(m, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!keep_follower[i]) continue;
        for (std::int64_t k = net.row_ptr[i]; k < net.row_ptr[i + 1]; ++k)
            in_deg[static_cast<std::size_t>(net.col_idx[static_cast<std::size_t>(k)])]++;
    }

    std::vector<std::int32_t> fmap(n, -1), emap(m, -1);
    BipartiteNetwork out;
    for (std::size_t i = 0; i < n; ++i) {
        if (!keep_follower[i]) continue;
        fmap[i] = static_cast<std::int32_t>(out.follower_ids.size());
        out.follower_ids.push_back(net.follower_ids[i]);
        if (!net.follower_account_followers.empty())
            out.follower_account_followers.push_back(net.follower_account_followers[i]);
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (in_deg[j] == 0) continue;
        emap[j] = static_cast<std::int32_t>(out.elite_ids.size());
        out.elite_ids.push_back(net.elite_ids[j]);
    }

    std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
    pairs.reserve(static_cast<std::size_t>(net.edge_count()));
    for (std::size_t i = 0; i < n; ++i) {
        if (fmap[i] < 0) continue;
        for (std::int64_t k = net.row_ptr[i]; k < net.row_ptr[i + 1]; ++k) {
            const auto j = net.col_idx[static_cast<std::size_t>(k)];
            pairs.emplace_back(fmap[i], emap[static_cast<std::size_t>(j)]);
        }
    }
    build_adjacency(out, pairs);

    if (report) {
        report->followers_before = n;
        report->followers_after = out.n_followers();
        report->elites_before = m;
        report->elites_after = out.n_elites();
        report->edges_before = net.edge_count();
        report->edges_after = out.edge_count();
    }
    return out;
}

DegreeSummary degree_summary(const BipartiteNetwork& net) {
    if (net.n_followers() == 0 || net.n_elites() == 0)
        throw std::runtime_error("degree_summary: empty network");
    DegreeSummary s;
    const double e = static_cast<double>(net.edge_count());
    s.mean_elite_in_degree = e / static_cast<double>(net.n_elites());
    s.mean_follower_out_degree = e / static_cast<double>(net.n_followers());
    return s;
}

// Howard Hinnant's days-from-civil
static std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::int64_t parse_date_days(const std::string& iso_date) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (std::sscanf(iso_date.c_str(), "%4d-%2u-%2u", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 ||
        d > 31)
        throw std::runtime_error("invalid ISO-8601 date: '" + iso_date + "'");
    return days_from_civil(y, m, d);
}

ActivityRecord compute_activity(const std::string& pseudo_id, std::int64_t total_posts,
                                const std::string& created_at, const std::string& collected_at,
                                std::int64_t followers, std::int64_t followees) {
    if (total_posts < 0) throw std::invalid_argument("compute_activity: negative post count");
    const std::int64_t days = parse_date_days(collected_at) - parse_date_days(created_at);
    if (days <= 0)
        throw std::runtime_error("compute_activity: collection date not after creation date (" +
                                 created_at + " .. " + collected_at + ")");
    ActivityRecord rec;
    rec.pseudo_id = pseudo_id;
    rec.mean_tweets_per_day = static_cast<double>(total_posts) / static_cast<double>(days);
    rec.followers = followers;
    rec.followees = followees;
    return rec;
}

PseudoIdMap::PseudoIdMap(const std::vector<std::string>& raw_ids, std::uint64_t seed) {
    rng::Rng gen(seed);
    std::unordered_set<std::string> used;
    map_.reserve(raw_ids.size());
    for (const auto& raw : raw_ids) {
        if (raw.empty()) throw std::invalid_argument("pseudo ids: empty raw id");
        if (map_.count(raw)) throw std::invalid_argument("pseudo ids: duplicate raw id '" + raw + "'");
        std::string pid;
        do {
            char buf[33];
            std::snprintf(buf, sizeof buf, "%016llx%016llx",
                          static_cast<unsigned long long>(gen.next_u64()),
                          static_cast<unsigned long long>(gen.next_u64()));
            pid.assign(buf, 32);
        } while (!used.insert(pid).second);
        map_.emplace(raw, std::move(pid));
        raw_order_.push_back(raw);
    }
}

const std::string& PseudoIdMap::pseudo(const std::string& raw_id) const {
    auto it = map_.find(raw_id);
    if (it == map_.end()) throw std::runtime_error("pseudo ids: unknown raw id '" + raw_id + "'");
    return it->second;
}

std::string PseudoIdMap::to_csv() const {
    std::string out = "raw_id,pseudo_id\n";
    for (const auto& raw : raw_order_) out += csv::join_row({raw, map_.at(raw)});
    return out;
}

void anonymize_network(BipartiteNetwork& net, const PseudoIdMap& followers, const PseudoIdMap& elites) {
    for (auto& id : net.follower_ids) id = followers.pseudo(id);
    for (auto& id : net.elite_ids) id = elites.pseudo(id);
}

std::vector<EntityRecord> load_elite_metadata(const std::string& csv_text,
                                              const std::string& source_name) {
    const auto t = csv::read_string(csv_text, source_name);
    const auto ci = t.col("id");
    const auto cn = t.col("name");
    const auto cp = t.col("party");
    std::vector<EntityRecord> out;
    out.reserve(t.rows.size());
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        EntityRecord rec;
        rec.pseudo_id = row[ci];
        rec.is_elite = true;
        rec.name = row[cn];
        rec.party = row[cp];
        if (rec.pseudo_id.empty() || rec.name.empty() || rec.party.empty())
            throw std::runtime_error(source_name + ":" + std::to_string(r + 2) +
                                     ": elite rows need id, name and party");
        if (!seen.insert(rec.pseudo_id).second)
            throw std::runtime_error(source_name + ": duplicate elite id '" + rec.pseudo_id + "'");
        out.push_back(std::move(rec));
    }
    return out;
}

namespace {

void put_u64(std::string& s, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    s.append(buf, 8);
}

std::uint64_t get_u64(const std::string& s, std::size_t& pos) {
    if (pos + 8 > s.size()) throw std::runtime_error("network cache: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos + i])) << (8 * i);
    pos += 8;
    return v;
}

void put_str(std::string& s, const std::string& x) {
    put_u64(s, x.size());
    s += x;
}

std::string get_str(const std::string& s, std::size_t& pos) {
    const auto len = get_u64(s, pos);
    if (pos + len > s.size()) throw std::runtime_error("network cache: truncated string");
    std::string out = s.substr(pos, len);
    pos += len;
    return out;
}

} // namespace

std::string network_to_bytes(const BipartiteNetwork& net) {
    std::string s;
    s += "IDNT";
    s.push_back('\x01');
    s.push_back(net.follower_account_followers.empty() ? '\x00' : '\x01');
    put_u64(s, net.n_followers());
    put_u64(s, net.n_elites());
    put_u64(s, static_cast<std::uint64_t>(net.edge_count()));
    for (const auto& id : net.follower_ids) put_str(s, id);
    for (const auto& id : net.elite_ids) put_str(s, id);
    for (auto p : net.row_ptr) put_u64(s, static_cast<std::uint64_t>(p));
    for (auto c : net.col_idx) put_u64(s, static_cast<std::uint64_t>(static_cast<std::uint32_t>(c)));
    for (auto f : net.follower_account_followers) put_u64(s, static_cast<std::uint64_t>(f));
    return s;
}

BipartiteNetwork network_from_bytes(const std::string& bytes) {
    if (bytes.size() < 6 || bytes.compare(0, 4, "IDNT") != 0)
        throw std::runtime_error("network cache: bad magic");
    if (bytes[4] != '\x01') throw std::runtime_error("network cache: unsupported version");
    const bool has_meta = bytes[5] == '\x01';
    std::size_t pos = 6;
    BipartiteNetwork net;
    const auto n = get_u64(bytes, pos);
    const auto m = get_u64(bytes, pos);
    const auto e = get_u64(bytes, pos);
    net.follower_ids.resize(n);
    for (auto& id : net.follower_ids) id = get_str(bytes, pos);
    net.elite_ids.resize(m);
    for (auto& id : net.elite_ids) id = get_str(bytes, pos);
    net.row_ptr.resize(n + 1);
    for (auto& p : net.row_ptr) p = static_cast<std::int64_t>(get_u64(bytes, pos));
    net.col_idx.resize(e);
    for (auto& c : net.col_idx) c = static_cast<std::int32_t>(get_u64(bytes, pos));
    if (has_meta) {
        net.follower_account_followers.resize(n);
        for (auto& f : net.follower_account_followers)
            f = static_cast<std::int64_t>(get_u64(bytes, pos));
    }
    if (pos != bytes.size()) throw std::runtime_error("network cache: trailing bytes");

    // rebuild the transpose
    net.colt_ptr.assign(m + 1, 0);
    net.rowt_idx.resize(e);
    for (auto c : net.col_idx) net.colt_ptr[static_cast<std::size_t>(c) + 1]++;
    for (std::size_t j = 0; j < m; ++j) net.colt_ptr[j + 1] += net.colt_ptr[j];
    std::vector<std::int64_t> cursor(net.colt_ptr.begin(), net.colt_ptr.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::int64_t k = net.row_ptr[i]; k < net.row_ptr[i + 1]; ++k) {
            const auto j = static_cast<std::size_t>(net.col_idx[static_cast<std::size_t>(k)]);
            net.rowt_idx[static_cast<std::size_t>(cursor[j]++)] = static_cast<std::int32_t>(i);
        }
    net.check_consistent();
    return net;
}

std::vector<ActivityRecord> load_activity(const std::string& csv_text, const std::string& source_name) {
    const auto t = csv::read_string(csv_text, source_name);
    const auto ci = t.col("id");
    const auto cp = t.col("total_posts");
    const auto cc = t.col("created_at");
    const auto cd = t.col("collected_at");
    const auto cf = t.col("followers");
    const auto ce = t.col("followees");
    std::vector<ActivityRecord> out;
    out.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string ctx = source_name + ":" + std::to_string(r + 2);
        out.push_back(compute_activity(row[ci], csv::parse_int(row[cp], ctx), row[cc], row[cd],
                                       csv::parse_int(row[cf], ctx), csv::parse_int(row[ce], ctx)));
    }
    return out;
}

} // namespace ideoscale::model

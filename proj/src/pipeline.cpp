#include "ideoscale/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ideoscale/calibrate.hpp"
#include "ideoscale/csv.hpp"
#include "ideoscale/media.hpp"
#include "ideoscale/model.hpp"
#include "ideoscale/parallel.hpp"
#include "ideoscale/rng.hpp"
#include "ideoscale/validate.hpp"

namespace fs = std::filesystem;

namespace ideoscale::pipeline {

int Config::effective_threads() const { return threads > 0 ? threads : default_threads(); }

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& ctx) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error(ctx + ": expected a boolean, got '" + v + "'");
}

} // namespace

Config parse_config_text(const std::string& text, const std::string& source_name) {
    Config cfg;
    std::string section;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string ctx = source_name + ":" + std::to_string(line_no);
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw std::runtime_error(ctx + ": malformed section header");
            section = s.substr(1, s.size() - 2);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw std::runtime_error(ctx + ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));

        auto as_int = [&] { return csv::parse_int(val, ctx); };
        auto as_double = [&] { return csv::parse_double(val, ctx); };

        if (section == "model") {
            if (key == "edges") cfg.edges_path = val;
            else if (key == "elites") cfg.elites_path = val;
            else if (key == "activity") cfg.activity_path = val;
            else if (key == "min_elites_followed") cfg.min_elites_followed = static_cast<int>(as_int());
            else if (key == "min_account_followers") cfg.min_account_followers = as_int();
            else if (key == "anonymize") cfg.anonymize = parse_bool(val, ctx);
            else if (key == "id_sidecar") cfg.id_sidecar_path = val;
            else throw std::runtime_error(ctx + ": unknown key '" + key + "' in [model]");
        } else if (section == "ca") {
            if (key == "k_dims") cfg.k_dims = static_cast<int>(as_int());
            else if (key == "tolerance") cfg.solver_tolerance = as_double();
            else if (key == "max_iterations") cfg.max_iterations = static_cast<int>(as_int());
            else throw std::runtime_error(ctx + ": unknown key '" + key + "' in [ca]");
        } else if (section == "calibrate") {
            if (key == "survey") cfg.survey_path = val;
            else if (key == "manifest") cfg.manifest_path = val;
            else if (key == "alpha") cfg.ridge_alpha = as_double();
            else throw std::runtime_error(ctx + ": unknown key '" + key + "' in [calibrate]");
        } else if (section == "media") {
            if (key == "shares") cfg.shares_path = val;
            else if (key == "categories") cfg.categories_path = val;
            else if (key == "min_users") cfg.media_min_users = as_int();
            else if (key == "dip_boot") cfg.dip_boot = static_cast<int>(as_int());
            else throw std::runtime_error(ctx + ": unknown key '" + key + "' in [media]");
        } else if (section == "validate") {
            if (key == "human_labels") cfg.human_labels_path = val;
            else if (key == "llm_labels") cfg.llm_labels_path = val;
            else if (key == "plan") cfg.plan_path = val;
            else if (key == "mps_positions") cfg.mps_positions_path = val;
            else if (key == "followers_positions") cfg.followers_positions_path = val;
            else throw std::runtime_error(ctx + ": unknown key '" + key + "' in [validate]");
        } else if (section == "synth") {
            if (key == "n_followers") cfg.synth.n_followers = static_cast<int>(as_int());
            else if (key == "n_elites") cfg.synth.n_elites = static_cast<int>(as_int());
            else if (key == "latent_dim") cfg.synth.latent_dim = static_cast<int>(as_int());
            else if (key == "gamma") cfg.synth.gamma = as_double();
            else if (key == "party_count") cfg.synth.party_count = static_cast<int>(as_int());
            else if (key == "within_party_std") cfg.synth.within_party_std = as_double();
            else if (key == "follower_std") cfg.synth.follower_std = as_double();
            else if (key == "alpha_mean") cfg.synth.alpha_mean = as_double();
            else if (key == "alpha_std") cfg.synth.alpha_std = as_double();
            else if (key == "beta_mean") cfg.synth.beta_mean = as_double();
            else if (key == "beta_std") cfg.synth.beta_std = as_double();
            else throw std::runtime_error(ctx + ": unknown key '" + key + "' in [synth]");
        } else if (section == "output") {
            if (key == "dir") cfg.out_dir = val;
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_int());
            else if (key == "threads") cfg.threads = static_cast<int>(as_int());
            else throw std::runtime_error(ctx + ": unknown key '" + key + "' in [output]");
        } else {
            throw std::runtime_error(ctx + ": key outside a known section");
        }
    }
    return cfg;
}

Config parse_config_file(const std::string& path) {
    return parse_config_text(csv::read_whole_file(path), path);
}

std::uint64_t Config::config_hash() const {
    std::ostringstream ss;
    ss << edges_path << '|' << elites_path << '|' << activity_path << '|' << min_elites_followed
       << '|' << (min_account_followers ? *min_account_followers : -1) << '|' << anonymize << '|'
       << k_dims << '|' << solver_tolerance << '|' << max_iterations << '|' << survey_path << '|'
       << manifest_path << '|' << ridge_alpha << '|' << shares_path << '|' << categories_path << '|'
       << media_min_users << '|' << dip_boot << '|' << human_labels_path << '|' << llm_labels_path
       << '|' << plan_path << '|' << synth.n_followers << '|' << synth.n_elites << '|'
       << synth.latent_dim << '|' << synth.gamma << '|' << synth.party_count << '|'
       << synth.within_party_std << '|' << synth.follower_std << '|' << seed;
    const std::string s = ss.str();
    return rng::fnv1a(s.data(), s.size());
}

// -------------------------------------------------------------- helpers --

namespace {

std::string out_path(const Config& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

std::string require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw std::runtime_error("missing configuration: no path for " + what);
    if (!fs::exists(path)) throw std::runtime_error(what + " not found: " + path);
    return csv::read_whole_file(path);
}

void write_manifest(const Config& cfg, const std::string& stage,
                    const std::vector<std::pair<std::string, std::string>>& inputs,
                    const std::vector<std::string>& notes = {}) {
    std::ostringstream ss;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.config_hash()));
    ss << "stage: " << stage << "\n";
    ss << "config_hash: " << hash << "\n";
    ss << "seed: " << cfg.seed << "\n";
    ss << "threads: " << cfg.effective_threads() << "\n";
    for (const auto& [name, contents] : inputs) {
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(rng::fnv1a(contents.data(), contents.size())));
        ss << "input: " << name << " digest: " << hash << "\n";
    }
    for (const auto& n : notes) ss << n << "\n";
    csv::write_file_atomic(out_path(cfg, stage + "_manifest.txt"), ss.str());
}

struct EliteMeta {
    std::map<std::string, std::string> name;
    std::map<std::string, std::string> party;
};

EliteMeta load_elites(const Config& cfg) {
    EliteMeta meta;
    // prefer the normalized copy written by cmd_ingest
    std::string path = out_path(cfg, "elites.csv");
    if (!fs::exists(path)) path = cfg.elites_path;
    const auto recs = model::load_elite_metadata(require_file(path, "elite metadata"), path);
    for (const auto& r : recs) {
        meta.name[r.pseudo_id] = r.name;
        meta.party[r.pseudo_id] = r.party;
    }
    return meta;
}

} // namespace

std::string positions_csv(const PositionTable& table, bool with_name_party) {
    std::vector<std::string> header = {"pseudo_id"};
    if (with_name_party) {
        header.push_back("name");
        header.push_back("party");
    }
    for (const auto& d : table.dimensions) header.push_back(d);
    std::string out = csv::join_row(header);
    std::vector<std::string> row;
    for (std::size_t i = 0; i < table.n_rows(); ++i) {
        row.clear();
        row.push_back(table.ids[i]);
        if (with_name_party) {
            row.push_back(table.names.empty() ? "" : table.names[i]);
            row.push_back(table.parties.empty() ? "" : table.parties[i]);
        }
        for (std::size_t d = 0; d < table.n_dims(); ++d)
            row.push_back(csv::format_float(table.at(i, d), 3));
        out += csv::join_row(row);
    }
    return out;
}

PositionTable positions_from_csv(const std::string& text, const std::string& source_name,
                                 bool with_name_party) {
    const auto t = csv::read_string(text, source_name);
    PositionTable table;
    const auto ci = t.col("pseudo_id");
    std::size_t cn = 0, cp = 0;
    if (with_name_party) {
        cn = t.col("name");
        cp = t.col("party");
    }
    std::vector<std::size_t> dim_cols;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (c == ci || (with_name_party && (c == cn || c == cp))) continue;
        dim_cols.push_back(c);
        table.dimensions.push_back(t.header[c]);
    }
    table.ids.reserve(t.rows.size());
    table.values.reserve(t.rows.size() * dim_cols.size());
    for (const auto& row : t.rows) {
        table.ids.push_back(row[ci]);
        if (with_name_party) {
            table.names.push_back(row[cn]);
            table.parties.push_back(row[cp]);
        }
        for (auto c : dim_cols) table.values.push_back(csv::parse_double(row[c], source_name));
    }
    return table;
}

// ---------------------------------------------------------------- stages --

void cmd_ingest(const Config& cfg) {
    const std::string edges_text = require_file(cfg.edges_path, "edge list");
    auto net = model::ingest_edges_csv(edges_text, cfg.edges_path);

    std::vector<std::pair<std::string, std::string>> inputs = {{cfg.edges_path, edges_text}};
    std::vector<std::string> notes;
    notes.push_back("followers_raw: " + std::to_string(net.n_followers()));
    notes.push_back("elites_raw: " + std::to_string(net.n_elites()));
    notes.push_back("edges_raw: " + std::to_string(net.edge_count()));

    model::FilterReport freport;
    net = model::filter_network(net, cfg.min_elites_followed, cfg.min_account_followers, &freport);
    notes.push_back("followers_filtered: " + std::to_string(freport.followers_after));
    notes.push_back("elites_filtered: " + std::to_string(freport.elites_after));
    notes.push_back("edges_filtered: " + std::to_string(freport.edges_after));
    if (net.edge_count() > 0) {
        const auto deg = model::degree_summary(net);
        notes.push_back("mean_elite_in_degree: " + csv::format_float(deg.mean_elite_in_degree, 3));
        notes.push_back("mean_follower_out_degree: " +
                        csv::format_float(deg.mean_follower_out_degree, 3));
    }

    // elite metadata, re-keyed if we anonymize
    std::vector<model::EntityRecord> elites;
    std::string elites_text;
    if (!cfg.elites_path.empty()) {
        elites_text = require_file(cfg.elites_path, "elite metadata");
        elites = model::load_elite_metadata(elites_text, cfg.elites_path);
        inputs.emplace_back(cfg.elites_path, elites_text);
    }

    std::string activity_text;
    std::vector<model::ActivityRecord> activity;
    if (!cfg.activity_path.empty()) {
        activity_text = require_file(cfg.activity_path, "activity input");
        activity = model::load_activity(activity_text, cfg.activity_path);
        inputs.emplace_back(cfg.activity_path, activity_text);
    }

    if (cfg.anonymize) {
        std::vector<std::string> all_raw = net.follower_ids;
        all_raw.insert(all_raw.end(), net.elite_ids.begin(), net.elite_ids.end());
        model::PseudoIdMap idmap(all_raw, cfg.seed ^ 0x9d5eed);
        for (auto& id : net.follower_ids) id = idmap.pseudo(id);
        for (auto& id : net.elite_ids) id = idmap.pseudo(id);
        for (auto& r : elites) r.pseudo_id = idmap.pseudo(r.pseudo_id);
        for (auto& r : activity) {
            if (idmap.mapping().count(r.pseudo_id)) r.pseudo_id = idmap.pseudo(r.pseudo_id);
        }
        if (!cfg.id_sidecar_path.empty())
            csv::write_file_atomic(cfg.id_sidecar_path, idmap.to_csv());
    }

    csv::write_file_atomic(out_path(cfg, "network.bin"), model::network_to_bytes(net));

    if (!elites.empty()) {
        std::string out = "id,name,party\n";
        for (const auto& r : elites) out += csv::join_row({r.pseudo_id, r.name, r.party});
        csv::write_file_atomic(out_path(cfg, "elites.csv"), out);
    }

    if (!activity.empty()) {
        std::set<std::string> elite_ids;
        for (const auto& r : elites) elite_ids.insert(r.pseudo_id);
        std::map<std::string, const model::EntityRecord*> elite_by_id;
        for (const auto& r : elites) elite_by_id[r.pseudo_id] = &r;

        std::string mps = "pseudo_id,name,party,mean_tweets_per_day,followers,followees\n";
        std::string fol = "pseudo_id,mean_tweets_per_day,followers,followees\n";
        for (const auto& r : activity) {
            if (elite_ids.count(r.pseudo_id)) {
                const auto* e = elite_by_id.at(r.pseudo_id);
                mps += csv::join_row({r.pseudo_id, e->name, e->party,
                                      csv::format_float(r.mean_tweets_per_day, 5),
                                      csv::format_float(static_cast<double>(r.followers), 3),
                                      csv::format_float(static_cast<double>(r.followees), 3)});
            } else {
                fol += csv::join_row({r.pseudo_id, csv::format_float(r.mean_tweets_per_day, 5),
                                      csv::format_float(static_cast<double>(r.followers), 3),
                                      csv::format_float(static_cast<double>(r.followees), 3)});
            }
        }
        csv::write_file_atomic(out_path(cfg, "mps_activity.csv"), mps);
        csv::write_file_atomic(out_path(cfg, "followers_activity.csv"), fol);
    }

    write_manifest(cfg, "ingest", inputs, notes);
}

void cmd_embed(const Config& cfg) {
    const std::string net_bytes = require_file(out_path(cfg, "network.bin"), "network cache");

    // cache key covers the configuration and the exact network content
    const std::uint64_t cache_key =
        rng::fnv1a(net_bytes.data(), net_bytes.size(), cfg.config_hash());
    const std::string cache_path = out_path(cfg, "embedding.bin");
    if (fs::exists(cache_path)) {
        std::uint64_t stored = 0;
        try {
            ca::embedding_from_bytes(csv::read_whole_file(cache_path), &stored);
        } catch (const std::exception&) {
            stored = 0;
        }
        if (stored == cache_key) {
            write_manifest(cfg, "embed", {{"network.bin", net_bytes}},
                           {"cache: hit, decomposition skipped"});
            return;
        }
    }

    const auto net = model::network_from_bytes(net_bytes);

    ca::CaConfig ca_cfg;
    ca_cfg.k_dims = cfg.k_dims;
    ca_cfg.solver_tolerance = cfg.solver_tolerance;
    ca_cfg.max_iterations = cfg.max_iterations;
    ca_cfg.seed = cfg.seed;
    ca_cfg.threads = cfg.effective_threads();
    const auto emb = ca::correspondence_analysis(net, ca_cfg);

    csv::write_file_atomic(cache_path, ca::embedding_to_bytes(emb, cache_key));

    std::vector<std::string> notes;
    std::string sv = "singular_values:";
    for (double s : emb.singular_values) sv += " " + csv::format_float(s, 6);
    notes.push_back(sv);
    write_manifest(cfg, "embed", {{"network.bin", net_bytes}}, notes);
}

namespace {

std::vector<calibrate::DimensionSpec> load_manifest(const Config& cfg) {
    if (cfg.manifest_path.empty()) return calibrate::default_dimension_manifest();
    const auto t = csv::read_file(cfg.manifest_path);
    const auto cd = t.col("dimension");
    const auto cw = t.col("wave");
    std::vector<calibrate::DimensionSpec> manifest;
    for (const auto& row : t.rows) manifest.push_back({row[cd], row[cw]});
    if (manifest.empty()) throw std::runtime_error("dimension manifest is empty");
    return manifest;
}

} // namespace

void cmd_calibrate(const Config& cfg) {
    const std::string emb_bytes = require_file(out_path(cfg, "embedding.bin"), "embedding cache");
    const auto emb = ca::embedding_from_bytes(emb_bytes);
    const auto meta = load_elites(cfg);
    const std::string survey_text = require_file(cfg.survey_path, "survey reference");
    const auto waves = calibrate::load_survey_csv(survey_text, cfg.survey_path);
    const auto manifest = load_manifest(cfg);

    std::map<std::string, std::string> elite_party;
    for (const auto& id : emb.elite_ids) {
        auto it = meta.party.find(id);
        if (it == meta.party.end())
            throw std::runtime_error("calibrate: no party for elite '" + id + "'");
        elite_party.emplace(id, it->second);
    }
    const auto centroids = ca::party_centroids(emb, elite_party);
    const auto set = calibrate::fit_all(centroids, waves, manifest, cfg.ridge_alpha);

    std::string out =
        "wave,dimension,latent_dims_used,intercept,fidelity_pearson,fidelity_mean_abs_diff,weights\n";
    double fid_r = 0.0, fid_mad = 0.0;
    for (const auto& cal : set.calibrations) {
        std::string w;
        for (std::size_t i = 0; i < cal.weights.size(); ++i) {
            if (i) w += ';';
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", cal.weights[i]);
            w += buf;
        }
        char ibuf[40];
        std::snprintf(ibuf, sizeof ibuf, "%.17g", cal.intercept);
        out += csv::join_row({cal.wave, cal.dimension, std::to_string(cal.latent_dims_used), ibuf,
                              csv::format_float(cal.fidelity_pearson, 3),
                              csv::format_float(cal.fidelity_mean_abs_diff, 3), w});
        fid_r += cal.fidelity_pearson;
        fid_mad += cal.fidelity_mean_abs_diff;
    }
    csv::write_file_atomic(out_path(cfg, "calibrations.csv"), out);

    write_manifest(cfg, "calibrate", {{"embedding.bin", emb_bytes}, {cfg.survey_path, survey_text}},
                   {"mean_fidelity_pearson: " +
                        csv::format_float(fid_r / static_cast<double>(set.calibrations.size()), 3),
                    "mean_fidelity_abs_diff: " +
                        csv::format_float(fid_mad / static_cast<double>(set.calibrations.size()), 3)});
}

namespace {

std::vector<calibrate::AffineCalibration> load_calibrations(const std::string& text,
                                                            const std::string& source) {
    const auto t = csv::read_string(text, source);
    const auto cw = t.col("wave");
    const auto cd = t.col("dimension");
    const auto cl = t.col("latent_dims_used");
    const auto ci = t.col("intercept");
    const auto cwe = t.col("weights");
    std::vector<calibrate::AffineCalibration> calibs;
    for (const auto& row : t.rows) {
        calibrate::AffineCalibration cal;
        cal.wave = row[cw];
        cal.dimension = row[cd];
        cal.latent_dims_used = static_cast<int>(csv::parse_int(row[cl], source));
        cal.intercept = csv::parse_double(row[ci], source);
        std::istringstream ws(row[cwe]);
        std::string piece;
        while (std::getline(ws, piece, ';')) cal.weights.push_back(csv::parse_double(piece, source));
        if (static_cast<int>(cal.weights.size()) != cal.latent_dims_used)
            throw std::runtime_error(source + ": weight count mismatch");
        calibs.push_back(std::move(cal));
    }
    return calibs;
}

struct SummaryRow {
    std::string dimension;
    double mean, stddev, pct_outliers;
};

// per-dimension mean/std/%outliers pooled over followers and MPs
std::vector<SummaryRow> position_summary(const PositionTable& followers,
                                         const PositionTable& elites) {
    std::vector<SummaryRow> rows;
    for (std::size_t d = 0; d < followers.n_dims(); ++d) {
        const auto& dim = followers.dimensions[d];
        const std::size_t de = elites.dim_index(dim);
        double s = 0.0;
        std::size_t n = 0, out = 0;
        for (std::size_t i = 0; i < followers.n_rows(); ++i) {
            const double v = followers.at(i, d);
            if (!std::isfinite(v)) continue;
            s += v;
            ++n;
            if (v < 0 || v > 10) ++out;
        }
        for (std::size_t i = 0; i < elites.n_rows(); ++i) {
            const double v = elites.at(i, de);
            if (!std::isfinite(v)) continue;
            s += v;
            ++n;
            if (v < 0 || v > 10) ++out;
        }
        const double mean = s / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < followers.n_rows(); ++i) {
            const double v = followers.at(i, d);
            if (std::isfinite(v)) ss += (v - mean) * (v - mean);
        }
        for (std::size_t i = 0; i < elites.n_rows(); ++i) {
            const double v = elites.at(i, de);
            if (std::isfinite(v)) ss += (v - mean) * (v - mean);
        }
        rows.push_back({dim, mean, std::sqrt(ss / static_cast<double>(n)),
                        100.0 * static_cast<double>(out) / static_cast<double>(n)});
    }
    return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "dimension,mean,std,pct_outliers\n";
    for (const auto& r : rows)
        out += csv::join_row({r.dimension, csv::format_float(r.mean, 3),
                              csv::format_float(r.stddev, 3), csv::format_float(r.pct_outliers, 3)});
    return out;
}

} // namespace

void cmd_positions(const Config& cfg) {
    const std::string emb_bytes = require_file(out_path(cfg, "embedding.bin"), "embedding cache");
    const auto emb = ca::embedding_from_bytes(emb_bytes);
    const std::string cal_text = require_file(out_path(cfg, "calibrations.csv"), "calibrations");
    const auto calibs = load_calibrations(cal_text, "calibrations.csv");
    const auto meta = load_elites(cfg);

    auto tables = calibrate::apply_calibration(emb, calibs);
    tables.elites.names.resize(tables.elites.n_rows());
    tables.elites.parties.resize(tables.elites.n_rows());
    for (std::size_t i = 0; i < tables.elites.n_rows(); ++i) {
        auto nit = meta.name.find(tables.elites.ids[i]);
        auto pit = meta.party.find(tables.elites.ids[i]);
        if (nit != meta.name.end()) tables.elites.names[i] = nit->second;
        if (pit != meta.party.end()) tables.elites.parties[i] = pit->second;
    }

    csv::write_file_atomic(out_path(cfg, "mps_positions.csv"), positions_csv(tables.elites, true));
    csv::write_file_atomic(out_path(cfg, "followers_positions.csv"),
                           positions_csv(tables.followers, false));
    csv::write_file_atomic(out_path(cfg, "positions_summary.csv"),
                           summary_csv(position_summary(tables.followers, tables.elites)));

    write_manifest(cfg, "positions", {{"embedding.bin", emb_bytes}, {"calibrations.csv", cal_text}});
}

void cmd_media(const Config& cfg) {
    std::string fol_path = cfg.followers_positions_path.empty()
                               ? out_path(cfg, "followers_positions.csv")
                               : cfg.followers_positions_path;
    const std::string fol_text = require_file(fol_path, "follower positions");
    const auto followers = positions_from_csv(fol_text, fol_path, false);
    const std::string shares_text = require_file(cfg.shares_path, "share records");
    const auto records = media::load_shares_csv(shares_text, cfg.shares_path);

    media::AggregateOptions opts;
    opts.min_users = cfg.media_min_users;
    opts.dip_boot = cfg.dip_boot;
    opts.seed = cfg.seed;
    opts.threads = cfg.effective_threads();
    media::AggregateReport rep;
    auto profiles = media::aggregate_shares(records, followers, opts, &rep);

    std::map<std::string, std::string> categories;
    if (!cfg.categories_path.empty()) {
        const std::string cat_text = require_file(cfg.categories_path, "media categories");
        categories = media::load_categories_csv(cat_text, cfg.categories_path);
        for (auto& p : profiles) {
            auto it = categories.find(p.domain);
            if (it != categories.end()) p.media_category = it->second;
        }
    }

    // Table layout: identity columns, then all means, stds, quantiles,
    // dips, pvals grouped by statistic.
    std::vector<std::string> header = {"domain", "media_category", "user_count", "tweet_count"};
    for (const auto& d : followers.dimensions) header.push_back(d + "_mean");
    for (const auto& d : followers.dimensions) header.push_back(d + "_std");
    for (const auto& d : followers.dimensions) header.push_back(d + "_quantile");
    for (const auto& d : followers.dimensions) header.push_back(d + "_dip");
    for (const auto& d : followers.dimensions) header.push_back(d + "_pval");
    std::string out = csv::join_row(header);
    for (const auto& p : profiles) {
        std::vector<std::string> row = {p.domain, p.media_category, std::to_string(p.user_count),
                                        std::to_string(p.tweet_count)};
        for (double v : p.mean) row.push_back(csv::format_float(v, 3));
        for (double v : p.stddev) row.push_back(csv::format_float(v, 3));
        for (int q : p.quintile) row.push_back(std::to_string(q));
        for (double v : p.dip) row.push_back(csv::format_float(v, 3));
        for (double v : p.dip_pval) row.push_back(csv::format_float(v, 3));
        out += csv::join_row(row);
    }
    csv::write_file_atomic(out_path(cfg, "domains_positions.csv"), out);

    if (!categories.empty() && !profiles.empty()) {
        std::string stats_csv = "dimension,category,count,mean,std\n";
        std::string values_csv = "dimension,category,value\n";
        for (std::size_t d = 0; d < followers.dimensions.size(); ++d) {
            const auto cats = media::category_distributions(profiles, categories, d);
            for (const auto& c : cats) {
                stats_csv += csv::join_row({followers.dimensions[d], c.category,
                                            std::to_string(c.count), csv::format_float(c.mean, 3),
                                            csv::format_float(c.stddev, 3)});
                for (double v : c.values)
                    values_csv += csv::join_row(
                        {followers.dimensions[d], c.category, csv::format_float(v, 3)});
            }
        }
        csv::write_file_atomic(out_path(cfg, "media_categories_summary.csv"), stats_csv);
        csv::write_file_atomic(out_path(cfg, "media_categories_values.csv"), values_csv);
    }

    write_manifest(cfg, "media", {{fol_path, fol_text}, {cfg.shares_path, shares_text}},
                   {"records_total: " + std::to_string(rep.records_total),
                    "records_dropped_unknown_user: " + std::to_string(rep.records_dropped_unknown_user),
                    "domains_observed: " + std::to_string(rep.domains_observed),
                    "domains_retained: " + std::to_string(rep.domains_retained)});
}

void cmd_validate(const Config& cfg) {
    const std::string mps_path =
        cfg.mps_positions_path.empty() ? out_path(cfg, "mps_positions.csv") : cfg.mps_positions_path;
    const std::string fol_path = cfg.followers_positions_path.empty()
                                     ? out_path(cfg, "followers_positions.csv")
                                     : cfg.followers_positions_path;
    const std::string mps_text = require_file(mps_path, "MP positions");
    const std::string fol_text = require_file(fol_path, "follower positions");
    const auto elites = positions_from_csv(mps_text, mps_path, true);
    const auto followers = positions_from_csv(fol_text, fol_path, false);

    std::vector<std::pair<std::string, std::string>> inputs = {{mps_path, mps_text},
                                                               {fol_path, fol_text}};
    std::vector<std::string> notes;

    // Table-1-style summary over followers + MPs
    csv::write_file_atomic(out_path(cfg, "positions_summary.csv"),
                           summary_csv(position_summary(followers, elites)));

    // labels
    validate::LabelTable human, llm;
    bool have_human = false, have_llm = false;
    if (!cfg.human_labels_path.empty()) {
        const std::string text = require_file(cfg.human_labels_path, "human labels");
        human = validate::load_labels_csv(text, cfg.human_labels_path, validate::LabelSource::human);
        inputs.emplace_back(cfg.human_labels_path, text);
        have_human = true;
    }
    if (!cfg.llm_labels_path.empty()) {
        const std::string text = require_file(cfg.llm_labels_path, "llm labels");
        llm = validate::load_labels_csv(text, cfg.llm_labels_path, validate::LabelSource::llm);
        inputs.emplace_back(cfg.llm_labels_path, text);
        have_llm = true;
        validate::SanitizeReport srep;
        llm = validate::sanitize_labels(std::move(llm), validate::default_opposite_pairs(), &srep);
        for (const auto& [pair, n] : srep.discarded)
            if (n > 0)
                notes.push_back("contradictory " + pair + ": " + std::to_string(n) + " (" +
                                csv::format_float(100.0 * static_cast<double>(n) /
                                                      static_cast<double>(srep.rows_total),
                                                  3) +
                                "%)");
    }

    const auto plan = cfg.plan_path.empty()
                          ? validate::default_validation_plan()
                          : validate::load_plan_csv(require_file(cfg.plan_path, "validation plan"),
                                                    cfg.plan_path);

    if (have_human || have_llm) {
        // separation metrics
        std::vector<validate::PlanRow> usable;
        for (const auto& pr : plan) {
            if (pr.annotator == validate::LabelSource::human && !have_human) continue;
            if (pr.annotator == validate::LabelSource::llm && !have_llm) continue;
            usable.push_back(pr);
        }
        const auto rows =
            validate::separation_report(usable, followers, human, llm, cfg.effective_threads());

        std::string out =
            "dimension,wave,annotator,label_a,label_b,n_a,n_b,roc_auc,f1_a,f1_b,f1_avg,precision,"
            "recall,weight,intercept,cutoff,converged,skipped,skip_reason\n";
        for (const auto& r : rows) {
            out += csv::join_row(
                {r.plan.dimension, r.plan.wave,
                 r.plan.annotator == validate::LabelSource::human ? "human" : "llm", r.plan.label_a,
                 r.plan.label_b, std::to_string(r.metrics.n_a), std::to_string(r.metrics.n_b),
                 csv::format_float(r.metrics.roc_auc, 3),
                 csv::format_float(r.metrics.f1_a_as_success, 3),
                 csv::format_float(r.metrics.f1_b_as_success, 3),
                 csv::format_float(r.metrics.f1_avg, 3), csv::format_float(r.metrics.precision, 3),
                 csv::format_float(r.metrics.recall, 3), csv::format_float(r.fit.weight, 3),
                 csv::format_float(r.fit.intercept, 3), csv::format_float(r.fit.cutoff, 3),
                 r.fit.converged ? "1" : "0", r.skipped ? "1" : "0", r.skip_reason});
        }
        csv::write_file_atomic(out_path(cfg, "separation_report.csv"), out);

        // bin concentrations for every label in the plan
        std::string bins =
            "annotator,dimension,label,bin_lo,bin_hi,n_total,n_labeled,fraction,ci_lo,ci_hi\n";
        std::set<std::string> done;
        for (const auto& pr : usable) {
            const std::string column = pr.dimension + "_" + pr.wave.substr(pr.wave.size() - 2);
            const auto& labels = pr.annotator == validate::LabelSource::human ? human : llm;
            const std::string ann =
                pr.annotator == validate::LabelSource::human ? "human" : "llm";
            for (const std::string& label : {pr.label_a, pr.label_b}) {
                const std::string key = ann + "|" + column + "|" + label;
                if (!done.insert(key).second) continue;
                bool have_label = false;
                for (const auto& n : labels.label_names) have_label = have_label || n == label;
                if (!have_label || !followers.has_dim(column)) continue;
                const auto rows2 = validate::bin_concentration(followers, labels, column, label);
                for (const auto& b : rows2) {
                    bins += csv::join_row({ann, column, label, csv::format_float(b.lo, 3),
                                           csv::format_float(b.hi, 3), std::to_string(b.n_total),
                                           std::to_string(b.n_labeled),
                                           csv::format_float(b.fraction, 3),
                                           csv::format_float(b.ci_lo, 3),
                                           csv::format_float(b.ci_hi, 3)});
                }
            }
        }
        csv::write_file_atomic(out_path(cfg, "bin_concentration.csv"), bins);
    }

    // cross-wave consistency whenever both waves are present
    bool have_waves = true;
    for (const std::string& dim : {"lrecon", "eu_position", "galtan", "antielite_salience"})
        have_waves = have_waves && followers.has_dim(dim + "_19") && followers.has_dim(dim + "_23");
    if (have_waves) {
        const auto rows = validate::cross_wave_report(followers, elites);
        std::string out = "dimension,followers_r,elites_r,party_r\n";
        for (const auto& r : rows) {
            out += csv::join_row({r.dimension, csv::format_float(r.followers_r, 3),
                                  csv::format_float(r.elites_r, 3),
                                  csv::format_float(r.party_r, 3)});
            notes.push_back("cross_wave " + r.dimension + ": followers " +
                            csv::format_float(r.followers_r, 3));
        }
        csv::write_file_atomic(out_path(cfg, "cross_wave.csv"), out);
    }

    // combined human-readable summary
    {
        std::ostringstream ss;
        ss << "validation summary\n";
        ss << "entities: " << followers.n_rows() << " followers, " << elites.n_rows() << " MPs\n";
        const auto summary = position_summary(followers, elites);
        for (const auto& r : summary)
            ss << "dimension " << r.dimension << ": mean " << csv::format_float(r.mean, 3)
               << " std " << csv::format_float(r.stddev, 3) << " outliers "
               << csv::format_float(r.pct_outliers, 3) << "%\n";
        for (const auto& n : notes) ss << n << "\n";
        csv::write_file_atomic(out_path(cfg, "validation_summary.txt"), ss.str());
    }

    write_manifest(cfg, "validate", inputs, notes);
}

void cmd_synth(const Config& cfg) {
    synth::SyntheticModelParams params = cfg.synth;
    params.seed = cfg.seed;
    params.threads = cfg.effective_threads();

    const auto inst = synth::generate_network(params);

    // generated network, ground truth and the recovery report
    {
        std::string out = "follower_id,elite_id\n";
        const auto& net = inst.network;
        for (std::size_t i = 0; i < net.n_followers(); ++i)
            for (std::int64_t k2 = net.row_ptr[i]; k2 < net.row_ptr[i + 1]; ++k2)
                out += csv::join_row(
                    {net.follower_ids[i],
                     net.elite_ids[static_cast<std::size_t>(net.col_idx[static_cast<std::size_t>(k2)])]});
        csv::write_file_atomic(out_path(cfg, "synth_edges.csv"), out);
    }
    csv::write_file_atomic(out_path(cfg, "synth_truth_positions.csv"),
                           positions_csv(inst.truth.follower_survey, false));

    const auto rep = synth::recovery_benchmark(params);
    std::string out = "dimension,pearson\n";
    for (std::size_t d = 0; d < rep.survey_dimensions.size(); ++d)
        out += csv::join_row({rep.survey_dimensions[d], csv::format_float(rep.pearson[d], 3)});
    out += csv::join_row({"mean", csv::format_float(rep.mean_pearson, 3)});
    csv::write_file_atomic(out_path(cfg, "recovery_report.csv"), out);

    std::ostringstream summary;
    summary << "synthetic recovery benchmark\n";
    summary << "followers_retained: " << rep.followers_retained << "\n";
    summary << "elites_retained: " << rep.elites_retained << "\n";
    summary << "mean_pearson: " << csv::format_float(rep.mean_pearson, 3) << "\n";
    summary << "party_fidelity_pearson: " << csv::format_float(rep.party_fidelity_pearson, 3) << "\n";
    summary << "party_fidelity_mean_abs_diff: " << csv::format_float(rep.party_fidelity_mad, 3)
            << "\n";
    csv::write_file_atomic(out_path(cfg, "synth_summary.txt"), summary.str());

    write_manifest(cfg, "synth", {});
}

void cmd_report(const Config& cfg) {
    const std::string mps_path =
        cfg.mps_positions_path.empty() ? out_path(cfg, "mps_positions.csv") : cfg.mps_positions_path;
    const std::string fol_path = cfg.followers_positions_path.empty()
                                     ? out_path(cfg, "followers_positions.csv")
                                     : cfg.followers_positions_path;
    const std::string mps_text = require_file(mps_path, "MP positions");
    const std::string fol_text = require_file(fol_path, "follower positions");
    const auto elites = positions_from_csv(mps_text, mps_path, true);
    const auto followers = positions_from_csv(fol_text, fol_path, false);
    const auto rows = position_summary(followers, elites);
    csv::write_file_atomic(out_path(cfg, "report.csv"), summary_csv(rows));
    write_manifest(cfg, "report", {{mps_path, mps_text}, {fol_path, fol_text}});
}

} // namespace ideoscale::pipeline

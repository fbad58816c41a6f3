#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ideoscale/ca.hpp"
#include "ideoscale/synth.hpp"

namespace ideoscale::pipeline {

// Everything the stages need, filled from the config file (flat
// key = value lines under [section] headers) and command-line overrides.
struct Config {
    // [model]
    std::string edges_path;
    std::string elites_path;
    std::string activity_path;
    int min_elites_followed = 3;
    std::optional<std::int64_t> min_account_followers;
    bool anonymize = false;
    std::string id_sidecar_path;

    // [ca]
    int k_dims = 12;
    double solver_tolerance = 1e-10;
    int max_iterations = 1000;

    // [calibrate]
    std::string survey_path;
    std::string manifest_path; // optional, default = built-in 16 pairs
    double ridge_alpha = 1.0;

    // [media]
    std::string shares_path;
    std::string categories_path;
    std::int64_t media_min_users = 100;
    int dip_boot = 2000;

    // [validate]
    std::string human_labels_path;
    std::string llm_labels_path;
    std::string plan_path;               // optional, default = built-in battery
    std::string mps_positions_path;      // optional: validate existing files
    std::string followers_positions_path;

    // [synth]
    synth::SyntheticModelParams synth;

    // [output]
    std::string out_dir = "out";
    std::uint64_t seed = 42;
    int threads = 0; // 0 = all cores

    int effective_threads() const;
    std::uint64_t config_hash() const;
};

Config parse_config_file(const std::string& path);
Config parse_config_text(const std::string& text, const std::string& source_name);

// Stage entry points; artifacts land under cfg.out_dir, written
// atomically, each with a manifest recording the config hash, seed and
// input digests. Throws on broken input, missing files or failed
// invariants.
void cmd_ingest(const Config& cfg);
void cmd_embed(const Config& cfg);
void cmd_calibrate(const Config& cfg);
void cmd_positions(const Config& cfg);
void cmd_media(const Config& cfg);
void cmd_validate(const Config& cfg);
void cmd_synth(const Config& cfg);
void cmd_report(const Config& cfg);

// Serialization helpers shared by stages and tests.
std::string positions_csv(const PositionTable& table, bool with_name_party);
PositionTable positions_from_csv(const std::string& text, const std::string& source_name,
                                 bool with_name_party);

} // namespace ideoscale::pipeline

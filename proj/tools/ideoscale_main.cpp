#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "ideoscale/pipeline.hpp"

using ideoscale::pipeline::Config;

int main(int argc, char** argv) {
    CLI::App app{"ideoscale: survey-calibrated ideology positions from follower networks"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    int threads = -1;
    int min_mps = -1;
    long long min_followers = -1;

    app.add_option("--config", config_path, "configuration file (ini-style sections)");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--seed", seed, "seed (overrides config)");
    app.add_option("--threads", threads, "worker threads, 0 = all cores (overrides config)");
    app.add_option("--min-mps", min_mps, "minimum elites a follower must follow (default 3)");
    app.add_option("--min-followers", min_followers,
                   "drop accounts with fewer platform followers than this");

    auto* ingest = app.add_subcommand("ingest", "parse and filter the follower network");
    auto* embed = app.add_subcommand("embed", "latent coordinates from the filtered network");
    auto* calibrate = app.add_subcommand("calibrate", "fit latent-to-survey affine maps");
    auto* positions = app.add_subcommand("positions", "project entities into survey space");
    auto* media = app.add_subcommand("media", "position web domains from share records");
    auto* validate = app.add_subcommand("validate", "run the validation battery on positions");
    auto* synth = app.add_subcommand("synth", "generate a synthetic instance and benchmark recovery");
    auto* report = app.add_subcommand("report", "per-dimension summary of position files");

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg;
        if (!config_path.empty()) cfg = ideoscale::pipeline::parse_config_file(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (threads >= 0) cfg.threads = threads;
        if (min_mps >= 0) cfg.min_elites_followed = min_mps;
        if (min_followers >= 0) cfg.min_account_followers = min_followers;

        if (ingest->parsed()) ideoscale::pipeline::cmd_ingest(cfg);
        if (embed->parsed()) ideoscale::pipeline::cmd_embed(cfg);
        if (calibrate->parsed()) ideoscale::pipeline::cmd_calibrate(cfg);
        if (positions->parsed()) ideoscale::pipeline::cmd_positions(cfg);
        if (media->parsed()) ideoscale::pipeline::cmd_media(cfg);
        if (validate->parsed()) ideoscale::pipeline::cmd_validate(cfg);
        if (synth->parsed()) ideoscale::pipeline::cmd_synth(cfg);
        if (report->parsed()) ideoscale::pipeline::cmd_report(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

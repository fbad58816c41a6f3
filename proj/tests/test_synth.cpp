#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "ideoscale/model.hpp"
#include "ideoscale/stats.hpp"
#include "ideoscale/synth.hpp"

using namespace ideoscale;

namespace {

synth::SyntheticModelParams base_params() {
    synth::SyntheticModelParams p;
    p.n_followers = 1200;
    p.n_elites = 60;
    p.latent_dim = 2;
    p.gamma = 2.0;
    p.party_count = 6;
    p.within_party_std = 0.4;
    p.follower_std = 1.0;
    p.seed = 21;
    return p;
}

// adjacency lookup for frequency checks
std::map<std::pair<std::string, std::string>, bool> edge_set(const model::BipartiteNetwork& net) {
    std::map<std::pair<std::string, std::string>, bool> out;
    for (std::size_t i = 0; i < net.n_followers(); ++i)
        for (std::int64_t k = net.row_ptr[i]; k < net.row_ptr[i + 1]; ++k)
            out[{net.follower_ids[i],
                 net.elite_ids[static_cast<std::size_t>(net.col_idx[static_cast<std::size_t>(k)])]}] =
                true;
    return out;
}

} // namespace

TEST_CASE("gamma zero with silent propensities gives a half-density coin flip") {
    auto p = base_params();
    p.gamma = 0.0;
    p.alpha_mean = 0.0;
    p.alpha_std = 0.0;
    p.beta_mean = 0.0;
    p.beta_std = 0.0;
    auto inst = synth::generate_network(p);
    // each of the n*m trials is an independent fair coin
    const double trials = static_cast<double>(p.n_followers) * p.n_elites;
    const double density = static_cast<double>(inst.network.edge_count()) / trials;
    const double sigma = std::sqrt(0.25 / trials);
    CHECK(std::abs(density - 0.5) < 3.0 * sigma);
    // and the truth reports probability exactly one half
    CHECK(inst.truth.edge_probability(0, 0, 0.0) == 0.5);
}

TEST_CASE("deeply negative propensity silences a follower") {
    auto p = base_params();
    p.n_followers = 300;
    p.alpha_mean = -10.0;
    p.alpha_std = 0.0;
    p.beta_std = 0.5;
    p.gamma = 2.0;
    auto inst = synth::generate_network(p);
    // each edge probability is below logistic(-10 + ~3 sigma of beta)
    CHECK(inst.network.edge_count() < 8); // expected well under one edge per 1000 trials
}

TEST_CASE("binned empirical frequencies track the closed-form probabilities") {
    for (double gamma : {0.0, 2.0}) {
        auto p = base_params();
        p.n_followers = 2000;
        p.n_elites = 100;
        p.gamma = gamma;
        p.seed = 33 + static_cast<std::uint64_t>(gamma);
        auto inst = synth::generate_network(p);
        auto edges = edge_set(inst.network);

        // group (i,j) cells by predicted probability decile
        struct Bin {
            double psum = 0;
            std::int64_t n = 0, hits = 0;
        };
        std::vector<Bin> bins(10);
        for (std::size_t i = 0; i < inst.truth.follower_ids.size(); ++i) {
            for (std::size_t j = 0; j < inst.truth.elite_ids.size(); ++j) {
                const double prob = inst.truth.edge_probability(i, j, gamma);
                auto& b = bins[std::min<std::size_t>(9, static_cast<std::size_t>(prob * 10.0))];
                b.psum += prob;
                b.n++;
                if (edges.count({inst.truth.follower_ids[i], inst.truth.elite_ids[j]})) b.hits++;
            }
        }
        for (const auto& b : bins) {
            if (b.n < 200) continue; // too small for a 3-sigma band to mean much
            const double pbar = b.psum / static_cast<double>(b.n);
            const double freq = static_cast<double>(b.hits) / static_cast<double>(b.n);
            const double sigma = std::sqrt(std::max(pbar * (1.0 - pbar), 1e-12) /
                                           static_cast<double>(b.n));
            CHECK(std::abs(freq - pbar) < 3.0 * sigma + 1e-9);
        }
    }
}

TEST_CASE("same seed reproduces the instance and the report bit for bit") {
    auto p = base_params();
    auto a = synth::generate_network(p);
    auto b = synth::generate_network(p);
    CHECK(a.network.col_idx == b.network.col_idx);
    CHECK(a.network.row_ptr == b.network.row_ptr);
    CHECK(a.truth.follower_latent == b.truth.follower_latent);
    CHECK(a.truth.survey_map == b.truth.survey_map);

    auto r1 = synth::recovery_benchmark(p);
    auto r2 = synth::recovery_benchmark(p);
    CHECK(r1.pearson == r2.pearson);
    CHECK(r1.mean_pearson == r2.mean_pearson);

    p.seed = 22;
    auto c = synth::generate_network(p);
    CHECK(a.network.col_idx != c.network.col_idx);
}

TEST_CASE("recovery on separated parties") {
    // one latent dimension, three well-separated parties
    auto p1 = base_params();
    p1.latent_dim = 1;
    p1.party_count = 3;
    p1.n_followers = 2000;
    p1.n_elites = 100;
    p1.within_party_std = 0.3;
    p1.follower_std = 0.8;
    auto r1 = synth::recovery_benchmark(p1);
    CHECK(r1.pearson[0] >= 0.95);

    // two dimensions, six parties on a hexagon
    auto p2 = base_params();
    p2.n_followers = 2000;
    p2.n_elites = 100;
    auto r2 = synth::recovery_benchmark(p2);
    for (double r : r2.pearson) CHECK(r >= 0.9);
    CHECK(r2.runtime_seconds < 60.0);
}

TEST_CASE("no homophily means no recoverable signal") {
    auto p = base_params();
    p.gamma = 0.0;
    p.n_followers = 1500;
    auto r = synth::recovery_benchmark(p);
    // any correlation is sampling noise around zero
    for (double v : r.pearson) CHECK(std::abs(v) < 0.12);
}

TEST_CASE("recovery improves with homophily strength") {
    std::vector<double> medians;
    for (double gamma : {0.0, 0.5, 2.0}) {
        std::vector<double> runs;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            auto p = base_params();
            p.n_followers = 900;
            p.n_elites = 50;
            p.gamma = gamma;
            p.seed = seed;
            runs.push_back(std::abs(synth::recovery_benchmark(p).mean_pearson));
        }
        std::sort(runs.begin(), runs.end());
        medians.push_back(runs[2]);
    }
    CHECK(medians[0] < medians[1]);
    CHECK(medians[1] < medians[2]);
}

TEST_CASE("recovery is stable under rigid rotation of the true space") {
    const auto base_centers = synth::spread_party_centers(6, 2, 3.0);
    std::vector<double> results;
    for (double theta : {0.0, 0.7, 2.1}) {
        auto p = base_params();
        p.n_followers = 2000;
        p.n_elites = 100;
        p.party_centers.clear();
        for (const auto& c : base_centers) {
            p.party_centers.push_back(
                {std::cos(theta) * c[0] - std::sin(theta) * c[1],
                 std::sin(theta) * c[0] + std::cos(theta) * c[1]});
        }
        results.push_back(synth::recovery_benchmark(p).mean_pearson);
    }
    for (double r : results) CHECK(std::abs(r - results[0]) < 0.01);
}

TEST_CASE("parameter validation") {
    auto p = base_params();
    p.party_count = 2;
    CHECK_THROWS_AS(synth::generate_network(p), std::invalid_argument);
    p = base_params();
    p.gamma = -1.0;
    CHECK_THROWS_AS(synth::generate_network(p), std::invalid_argument);
    p = base_params();
    p.party_centers = {{1.0}};
    CHECK_THROWS_AS(synth::generate_network(p), std::invalid_argument);
}

TEST_CASE("account follower metadata supports the popularity cut") {
    auto p = base_params();
    auto inst = synth::generate_network(p);
    REQUIRE(inst.network.follower_account_followers.size() == inst.network.n_followers());
    std::size_t above = 0;
    for (auto f : inst.network.follower_account_followers) {
        CHECK(f >= 0);
        if (f >= 25) ++above;
    }
    // lognormal around exp(3) ~ 20: both sides of the 25 cut are populated
    CHECK(above > inst.network.n_followers() / 10);
    CHECK(above < inst.network.n_followers() * 9 / 10);

    auto cut = model::filter_network(inst.network, 3, 25);
    CHECK(cut.n_followers() < inst.network.n_followers());
    CHECK(cut.n_followers() > 0);
}

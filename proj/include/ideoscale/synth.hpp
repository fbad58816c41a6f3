#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ideoscale/model.hpp"
#include "ideoscale/positions.hpp"

namespace ideoscale::synth {

struct MixtureComponent {
    double weight = 1.0;
    std::vector<double> center;
    double stddev = 1.0;
};

// Forward model: edge i->j drawn Bernoulli(logit^{-1}(alpha_i + beta_j
// - gamma * |phi_i - phi_j|^2)). Elites sit around party centers,
// followers around mixture components (party centers by default).
struct SyntheticModelParams {
    int n_followers = 2000;
    int n_elites = 100;
    int latent_dim = 2;
    double gamma = 2.0;

    double alpha_mean = 1.0, alpha_std = 0.5; // follower propensity
    double beta_mean = 0.0, beta_std = 0.5;   // elite popularity

    int party_count = 6;
    std::vector<std::vector<double>> party_centers; // party_count x latent_dim
    double within_party_std = 0.4;

    std::vector<MixtureComponent> follower_mixture; // empty = party centers
    double follower_std = 1.0;                      // used for the default mixture

    // lognormal-ish account-follower counts, exp(N(mu, sigma))
    double account_followers_log_mean = 3.0;
    double account_followers_log_std = 1.5;

    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const;
};

// Regular polygon / line layout helper for fixtures.
std::vector<std::vector<double>> spread_party_centers(int party_count, int latent_dim, double radius);

struct GroundTruth {
    std::size_t latent_dim = 0;
    std::vector<std::string> follower_ids; // f000001...
    std::vector<std::string> elite_ids;    // e0001...
    std::vector<double> follower_latent;   // n x d
    std::vector<double> elite_latent;      // m x d
    std::vector<int> elite_party;          // index into party names
    std::vector<std::string> party_names;  // p1..pP
    std::vector<double> alpha;             // follower propensities
    std::vector<double> beta;              // elite popularity

    // survey space: an affine image of the latent space, rescaled so the
    // party scores land inside [0,10]
    std::size_t survey_dims = 0;
    std::vector<double> survey_map;    // survey_dims x d
    std::vector<double> survey_offset; // survey_dims
    std::map<std::string, std::vector<double>> party_survey_scores;
    PositionTable follower_survey; // dimensions named s1..sD

    double edge_probability(std::size_t follower, std::size_t elite, double gamma) const;
};

struct SyntheticInstance {
    model::BipartiteNetwork network;
    GroundTruth truth;
};

SyntheticInstance generate_network(const SyntheticModelParams& params);

struct RecoveryReport {
    std::vector<std::string> survey_dimensions;
    std::vector<double> pearson;      // recovered vs true follower positions
    double mean_pearson = 0.0;
    double party_fidelity_pearson = 0.0;  // mean over dimensions
    double party_fidelity_mad = 0.0;
    std::size_t followers_retained = 0;
    std::size_t elites_retained = 0;
    double runtime_seconds = 0.0;
};

// Full pipeline on one synthetic instance: filter, decompose, calibrate
// against the true party scores, project followers and correlate with the
// ground-truth survey positions.
RecoveryReport recovery_benchmark(const SyntheticModelParams& params);

} // namespace ideoscale::synth

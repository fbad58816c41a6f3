#include "ideoscale/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ideoscale/ca.hpp"
#include "ideoscale/calibrate.hpp"
#include "ideoscale/parallel.hpp"
#include "ideoscale/rng.hpp"
#include "ideoscale/stats.hpp"

namespace ideoscale::synth {

void SyntheticModelParams::validate() const {
    if (n_followers < 1 || n_elites < 1) throw std::invalid_argument("synth: need entities on both sides");
    if (latent_dim < 1) throw std::invalid_argument("synth: latent_dim must be >= 1");
    if (gamma < 0) throw std::invalid_argument("synth: gamma must be >= 0");
    if (party_count < 3) throw std::invalid_argument("synth: party_count must be >= 3");
    if (!party_centers.empty()) {
        if (static_cast<int>(party_centers.size()) != party_count)
            throw std::invalid_argument("synth: party_centers size mismatch");
        for (const auto& c : party_centers)
            if (static_cast<int>(c.size()) != latent_dim)
                throw std::invalid_argument("synth: party center dimension mismatch");
    }
    for (const auto& mc : follower_mixture) {
        if (mc.weight <= 0) throw std::invalid_argument("synth: mixture weights must be positive");
        if (static_cast<int>(mc.center.size()) != latent_dim)
            throw std::invalid_argument("synth: mixture center dimension mismatch");
    }
}

std::vector<std::vector<double>> spread_party_centers(int party_count, int latent_dim, double radius) {
    std::vector<std::vector<double>> centers(static_cast<std::size_t>(party_count),
                                             std::vector<double>(static_cast<std::size_t>(latent_dim), 0.0));
    if (latent_dim == 1) {
        // evenly spaced on a segment
        for (int p = 0; p < party_count; ++p)
            centers[static_cast<std::size_t>(p)][0] =
                party_count == 1 ? 0.0
                                 : radius * (2.0 * p / static_cast<double>(party_count - 1) - 1.0);
    } else {
        // regular polygon in the first two coordinates
        for (int p = 0; p < party_count; ++p) {
            const double th = 2.0 * 3.14159265358979323846 * p / party_count;
            centers[static_cast<std::size_t>(p)][0] = radius * std::cos(th);
            centers[static_cast<std::size_t>(p)][1] = radius * std::sin(th);
        }
    }
    return centers;
}

double GroundTruth::edge_probability(std::size_t follower, std::size_t elite, double gamma) const {
    const std::size_t d = latent_dim;
    double dist2 = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
        const double diff = follower_latent[follower * d + t] - elite_latent[elite * d + t];
        dist2 += diff * diff;
    }
    return stats::logistic(alpha[follower] + beta[elite] - gamma * dist2);
}

SyntheticInstance generate_network(const SyntheticModelParams& params) {
    params.validate();
    const auto n = static_cast<std::size_t>(params.n_followers);
    const auto m = static_cast<std::size_t>(params.n_elites);
    const auto d = static_cast<std::size_t>(params.latent_dim);

    auto centers = params.party_centers;
    if (centers.empty()) centers = spread_party_centers(params.party_count, params.latent_dim, 3.0);

    GroundTruth truth;
    truth.latent_dim = d;
    truth.party_names.resize(static_cast<std::size_t>(params.party_count));
    for (int p = 0; p < params.party_count; ++p)
        truth.party_names[static_cast<std::size_t>(p)] = "p" + std::to_string(p + 1);

    // elites: balanced party assignment, jittered around the center
    rng::Rng elite_gen = rng::substream(params.seed, 0xe11);
    truth.elite_ids.resize(m);
    truth.elite_latent.resize(m * d);
    truth.elite_party.resize(m);
    truth.beta.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "e%05zu", j + 1);
        truth.elite_ids[j] = buf;
        const int p = static_cast<int>(j % static_cast<std::size_t>(params.party_count));
        truth.elite_party[j] = p;
        for (std::size_t t = 0; t < d; ++t)
            truth.elite_latent[j * d + t] =
                centers[static_cast<std::size_t>(p)][t] + elite_gen.normal(0.0, params.within_party_std);
        truth.beta[j] = elite_gen.normal(params.beta_mean, params.beta_std);
    }

    // followers: mixture draw (party centers with follower_std by default)
    std::vector<MixtureComponent> mixture = params.follower_mixture;
    if (mixture.empty()) {
        for (const auto& c : centers) mixture.push_back({1.0, c, params.follower_std});
    }
    double wsum = 0.0;
    for (const auto& mc : mixture) wsum += mc.weight;

    rng::Rng fol_gen = rng::substream(params.seed, 0xf0110);
    truth.follower_ids.resize(n);
    truth.follower_latent.resize(n * d);
    truth.alpha.resize(n);
    std::vector<std::int64_t> account_followers(n);
    for (std::size_t i = 0; i < n; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "f%07zu", i + 1);
        truth.follower_ids[i] = buf;
        double u = fol_gen.uniform01() * wsum;
        std::size_t comp = 0;
        while (comp + 1 < mixture.size() && u > mixture[comp].weight) {
            u -= mixture[comp].weight;
            ++comp;
        }
        for (std::size_t t = 0; t < d; ++t)
            truth.follower_latent[i * d + t] =
                mixture[comp].center[t] + fol_gen.normal(0.0, mixture[comp].stddev);
        truth.alpha[i] = fol_gen.normal(params.alpha_mean, params.alpha_std);
        account_followers[i] = static_cast<std::int64_t>(
            std::floor(std::exp(fol_gen.normal(params.account_followers_log_mean,
                                               params.account_followers_log_std))));
    }

    // edges, one substream per follower so threading cannot change draws
    std::vector<std::vector<std::int32_t>> adjacency(n);
    parallel_for(n, params.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            auto gen = rng::substream(params.seed, 0xed6e0000ULL + i);
            auto& row = adjacency[i];
            for (std::size_t j = 0; j < m; ++j) {
                double dist2 = 0.0;
                for (std::size_t t = 0; t < d; ++t) {
                    const double diff = truth.follower_latent[i * d + t] - truth.elite_latent[j * d + t];
                    dist2 += diff * diff;
                }
                const double p = stats::logistic(truth.alpha[i] + truth.beta[j] - params.gamma * dist2);
                if (gen.uniform01() < p) row.push_back(static_cast<std::int32_t>(j));
            }
        }
    });

    std::vector<std::pair<std::string, std::string>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (auto j : adjacency[i])
            edges.emplace_back(truth.follower_ids[i], truth.elite_ids[static_cast<std::size_t>(j)]);

    SyntheticInstance inst;
    // keep every entity present even if isolated: ingest assigns indices
    // in first-seen order from the edge stream, so isolated entities are
    // appended explicitly afterwards via the id lists
    inst.network = model::ingest_edges(edges);
    {
        // isolated followers/elites do not appear in the edge stream; add
        // them so indices align with the ground truth
        std::unordered_map<std::string, std::size_t> have_f, have_e;
        for (std::size_t i = 0; i < inst.network.follower_ids.size(); ++i)
            have_f.emplace(inst.network.follower_ids[i], i);
        for (std::size_t j = 0; j < inst.network.elite_ids.size(); ++j)
            have_e.emplace(inst.network.elite_ids[j], j);
        for (const auto& id : truth.follower_ids)
            if (!have_f.count(id)) {
                inst.network.follower_ids.push_back(id);
                inst.network.row_ptr.push_back(inst.network.row_ptr.back());
            }
        for (const auto& id : truth.elite_ids)
            if (!have_e.count(id)) {
                inst.network.elite_ids.push_back(id);
                inst.network.colt_ptr.push_back(inst.network.colt_ptr.back());
            }
    }
    {
        // account-follower metadata aligned with the network's follower order
        std::unordered_map<std::string, std::size_t> truth_row;
        for (std::size_t i = 0; i < truth.follower_ids.size(); ++i)
            truth_row.emplace(truth.follower_ids[i], i);
        inst.network.follower_account_followers.resize(inst.network.n_followers());
        for (std::size_t i = 0; i < inst.network.n_followers(); ++i)
            inst.network.follower_account_followers[i] =
                account_followers[truth_row.at(inst.network.follower_ids[i])];
    }

    // survey space: random full-rank affine image of the latent space,
    // rescaled per dimension so party scores span [1, 9]
    truth.survey_dims = d;
    rng::Rng map_gen = rng::substream(params.seed, 0x5a11);
    for (;;) {
        truth.survey_map.assign(d * d, 0.0);
        for (auto& v : truth.survey_map) v = map_gen.normal();
        // full-rank check via the determinant of the small map
        double det = 0.0;
        if (d == 1) {
            det = truth.survey_map[0];
        } else {
            // Gaussian elimination on a copy
            std::vector<double> a = truth.survey_map;
            det = 1.0;
            bool singular = false;
            for (std::size_t c = 0; c < d && !singular; ++c) {
                std::size_t piv = c;
                for (std::size_t r2 = c + 1; r2 < d; ++r2)
                    if (std::abs(a[r2 * d + c]) > std::abs(a[piv * d + c])) piv = r2;
                if (std::abs(a[piv * d + c]) < 1e-8) {
                    singular = true;
                    break;
                }
                if (piv != c)
                    for (std::size_t cc = 0; cc < d; ++cc) std::swap(a[piv * d + cc], a[c * d + cc]);
                det *= a[c * d + c];
                for (std::size_t r2 = c + 1; r2 < d; ++r2) {
                    const double f = a[r2 * d + c] / a[c * d + c];
                    for (std::size_t cc = c; cc < d; ++cc) a[r2 * d + cc] -= f * a[c * d + cc];
                }
            }
            if (singular) det = 0.0;
        }
        if (std::abs(det) > 1e-6) break;
    }
    truth.survey_offset.assign(d, 0.0);

    // party centroids in survey space before rescaling
    std::vector<std::vector<double>> party_raw(static_cast<std::size_t>(params.party_count),
                                               std::vector<double>(d, 0.0));
    for (int p = 0; p < params.party_count; ++p)
        for (std::size_t s = 0; s < d; ++s)
            for (std::size_t t = 0; t < d; ++t)
                party_raw[static_cast<std::size_t>(p)][s] +=
                    truth.survey_map[s * d + t] * centers[static_cast<std::size_t>(p)][t];

    // per-dimension linear rescale of map+offset so party scores span [1,9]
    for (std::size_t s = 0; s < d; ++s) {
        double lo = party_raw[0][s], hi = party_raw[0][s];
        for (const auto& pr : party_raw) {
            lo = std::min(lo, pr[s]);
            hi = std::max(hi, pr[s]);
        }
        const double span = hi - lo;
        const double scale = span > 1e-12 ? 8.0 / span : 1.0;
        for (std::size_t t = 0; t < d; ++t) truth.survey_map[s * d + t] *= scale;
        truth.survey_offset[s] = 1.0 - lo * scale;
    }

    for (int p = 0; p < params.party_count; ++p) {
        std::vector<double> score(d, 0.0);
        for (std::size_t s = 0; s < d; ++s) {
            double v = truth.survey_offset[s];
            for (std::size_t t = 0; t < d; ++t)
                v += truth.survey_map[s * d + t] * centers[static_cast<std::size_t>(p)][t];
            score[s] = v;
        }
        truth.party_survey_scores.emplace(truth.party_names[static_cast<std::size_t>(p)],
                                          std::move(score));
    }

    truth.follower_survey.ids = truth.follower_ids;
    for (std::size_t s = 0; s < d; ++s)
        truth.follower_survey.dimensions.push_back("s" + std::to_string(s + 1));
    truth.follower_survey.values.assign(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t s = 0; s < d; ++s) {
            double v = truth.survey_offset[s];
            for (std::size_t t = 0; t < d; ++t)
                v += truth.survey_map[s * d + t] * truth.follower_latent[i * d + t];
            truth.follower_survey.values[i * d + s] = v;
        }

    inst.truth = std::move(truth);
    return inst;
}

RecoveryReport recovery_benchmark(const SyntheticModelParams& params) {
    const auto t0 = std::chrono::steady_clock::now();
    auto inst = generate_network(params);

    model::FilterReport freport;
    auto net = model::filter_network(inst.network, 3, std::nullopt, &freport);
    if (net.n_followers() == 0 || net.n_elites() == 0)
        throw std::runtime_error("recovery_benchmark: instance degenerate after filtering");

    ca::CaConfig cfg;
    cfg.k_dims = params.party_count - 1;
    cfg.seed = params.seed;
    cfg.threads = params.threads;
    auto emb = ca::correspondence_analysis(net, cfg);

    std::map<std::string, std::string> elite_party;
    std::unordered_map<std::string, std::size_t> truth_elite;
    for (std::size_t j = 0; j < inst.truth.elite_ids.size(); ++j)
        truth_elite.emplace(inst.truth.elite_ids[j], j);
    for (const auto& id : net.elite_ids)
        elite_party.emplace(
            id, inst.truth.party_names[static_cast<std::size_t>(
                    inst.truth.elite_party[truth_elite.at(id)])]);

    const auto centroids = ca::party_centroids(emb, elite_party);

    RecoveryReport rep;
    rep.followers_retained = net.n_followers();
    rep.elites_retained = net.n_elites();

    std::vector<calibrate::AffineCalibration> calibs;
    for (std::size_t s = 0; s < inst.truth.survey_dims; ++s) {
        std::map<std::string, double> scores;
        for (const auto& [party, vec] : inst.truth.party_survey_scores) scores.emplace(party, vec[s]);
        auto cal = calibrate::fit_affine_map(centroids, scores, 1.0);
        cal.wave = "synth";
        cal.dimension = "s" + std::to_string(s + 1);
        rep.party_fidelity_pearson += cal.fidelity_pearson;
        rep.party_fidelity_mad += cal.fidelity_mean_abs_diff;
        calibs.push_back(std::move(cal));
    }
    rep.party_fidelity_pearson /= static_cast<double>(calibs.size());
    rep.party_fidelity_mad /= static_cast<double>(calibs.size());

    auto recovered = calibrate::apply_calibration_rows(emb.follower_ids, emb.follower_coords.data(),
                                                       emb.n_followers(), emb.k, calibs);

    const auto& truth_rows = inst.truth.follower_survey.id_rows();
    for (std::size_t s = 0; s < inst.truth.survey_dims; ++s) {
        std::vector<double> got, want;
        got.reserve(recovered.n_rows());
        want.reserve(recovered.n_rows());
        for (std::size_t i = 0; i < recovered.n_rows(); ++i) {
            got.push_back(recovered.at(i, s));
            want.push_back(inst.truth.follower_survey.at(truth_rows.at(recovered.ids[i]), s));
        }
        rep.survey_dimensions.push_back(inst.truth.follower_survey.dimensions[s]);
        rep.pearson.push_back(stats::pearson(got, want));
    }
    double sum = 0.0;
    for (double r : rep.pearson) sum += r;
    rep.mean_pearson = sum / static_cast<double>(rep.pearson.size());

    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace ideoscale::synth

#include "ideoscale/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ideoscale/csv.hpp"
#include "ideoscale/linalg.hpp"
#include "ideoscale/stats.hpp"

namespace ideoscale::calibrate {

double SurveyReference::score(const std::string& party, const std::string& dimension) const {
    auto pit = party_scores.find(party);
    if (pit == party_scores.end())
        throw std::runtime_error("survey " + wave + ": no scores for party '" + party + "'");
    auto dit = pit->second.find(dimension);
    if (dit == pit->second.end())
        throw std::runtime_error("survey " + wave + ": party '" + party + "' lacks dimension '" +
                                 dimension + "'");
    return dit->second;
}

double rescale_seven_point(double x) {
    if (!(x >= 1.0 && x <= 7.0))
        throw std::invalid_argument("rescale_seven_point: value outside [1,7]");
    return (x - 1.0) * 10.0 / 6.0;
}

AffineCalibration fit_affine_map(const std::map<std::string, std::vector<double>>& party_latent,
                                 const std::map<std::string, double>& party_scores, double alpha) {
    // matched parties, in sorted order for a deterministic fit
    std::vector<std::string> parties;
    for (const auto& [p, v] : party_latent)
        if (party_scores.count(p)) parties.push_back(p);

    const std::size_t np = parties.size();
    if (np < 3) throw std::invalid_argument("fit_affine_map: need at least 3 matched parties");
    const std::size_t dims = np - 1;
    for (const auto& p : parties)
        if (party_latent.at(p).size() < dims)
            throw std::invalid_argument("fit_affine_map: latent space has fewer than P-1 dimensions");

    // centered design on the first P-1 latent dimensions
    std::vector<double> xb(dims, 0.0);
    double yb = 0.0;
    for (const auto& p : parties) {
        const auto& v = party_latent.at(p);
        for (std::size_t d = 0; d < dims; ++d) xb[d] += v[d];
        yb += party_scores.at(p);
    }
    for (auto& v : xb) v /= static_cast<double>(np);
    yb /= static_cast<double>(np);

    linalg::Mat gram(dims, dims);
    std::vector<double> rhs(dims, 0.0);
    for (const auto& p : parties) {
        const auto& v = party_latent.at(p);
        const double yc = party_scores.at(p) - yb;
        for (std::size_t d = 0; d < dims; ++d) {
            const double xd = v[d] - xb[d];
            rhs[d] += xd * yc;
            for (std::size_t e = 0; e <= d; ++e) gram(d, e) += xd * (v[e] - xb[e]);
        }
    }
    for (std::size_t d = 0; d < dims; ++d) {
        for (std::size_t e = 0; e < d; ++e) gram(e, d) = gram(d, e);
        gram(d, d) += alpha;
    }

    AffineCalibration cal;
    cal.weights = linalg::cholesky_solve(gram, rhs);
    double wxb = 0.0;
    for (std::size_t d = 0; d < dims; ++d) wxb += cal.weights[d] * xb[d];
    cal.intercept = yb - wxb;
    cal.latent_dims_used = static_cast<int>(dims);
    cal.fit_parties = parties;

    // fidelity over the fitting parties
    std::vector<double> fitted(np), target(np);
    double mad = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        const auto& v = party_latent.at(parties[i]);
        double f = cal.intercept;
        for (std::size_t d = 0; d < dims; ++d) f += cal.weights[d] * v[d];
        fitted[i] = f;
        target[i] = party_scores.at(parties[i]);
        mad += std::abs(f - target[i]);
    }
    cal.fidelity_mean_abs_diff = mad / static_cast<double>(np);
    try {
        cal.fidelity_pearson = stats::pearson(fitted, target);
    } catch (const std::invalid_argument&) {
        // constant target or fit: correlation undefined
        cal.fidelity_pearson = std::numeric_limits<double>::quiet_NaN();
    }
    return cal;
}

const std::vector<DimensionSpec>& default_dimension_manifest() {
    static const std::vector<DimensionSpec> manifest = {
        {"lrgen", "2019"},
        {"corrupt_salience", "2019"},
        {"people_vs_elite", "2019"},
        {"immigrate_policy", "2019"},
        {"sociallifestyle", "2019"},
        {"nationalism", "2019"},
        {"antielite_salience", "2023"},
        {"eu_position", "2023"},
        {"lrecon", "2023"},
        {"refugees", "2023"},
        {"galtan", "2023"},
        {"environment", "2019"},
        {"lrecon", "2019"},
        {"antielite_salience", "2019"},
        {"eu_position", "2019"},
        {"galtan", "2019"},
    };
    return manifest;
}

CalibrationSet fit_all(const std::map<std::string, std::vector<double>>& party_latent,
                       const std::vector<SurveyReference>& waves,
                       const std::vector<DimensionSpec>& manifest, double alpha) {
    if (manifest.empty()) throw std::invalid_argument("fit_all: empty dimension manifest");
    CalibrationSet set;
    for (const auto& spec : manifest) {
        const SurveyReference* wave = nullptr;
        for (const auto& w : waves)
            if (w.wave == spec.wave) wave = &w;
        if (!wave) throw std::runtime_error("fit_all: no survey data for wave " + spec.wave);

        std::map<std::string, double> scores;
        for (const auto& [party, dims] : wave->party_scores) {
            auto it = dims.find(spec.dimension);
            if (it != dims.end()) scores.emplace(party, it->second);
        }
        if (scores.empty())
            throw std::runtime_error("fit_all: survey wave " + spec.wave + " lacks dimension '" +
                                     spec.dimension + "'");
        auto cal = fit_affine_map(party_latent, scores, alpha);
        cal.wave = spec.wave;
        cal.dimension = spec.dimension;
        set.calibrations.push_back(std::move(cal));
    }
    return set;
}

PositionTable apply_calibration_rows(const std::vector<std::string>& ids, const double* coords,
                                     std::size_t rows, std::size_t k,
                                     const std::vector<AffineCalibration>& calibs) {
    PositionTable table;
    table.ids = ids;
    for (const auto& cal : calibs) {
        if (static_cast<std::size_t>(cal.latent_dims_used) > k)
            throw std::invalid_argument("apply_calibration: embedding has only " + std::to_string(k) +
                                        " dimensions, calibration needs " +
                                        std::to_string(cal.latent_dims_used));
        table.dimensions.push_back(DimensionSpec{cal.dimension, cal.wave}.column());
    }
    table.values.resize(rows * calibs.size());
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = coords + i * k;
        for (std::size_t c = 0; c < calibs.size(); ++c) {
            const auto& cal = calibs[c];
            double pos = cal.intercept;
            for (int d = 0; d < cal.latent_dims_used; ++d)
                pos += cal.weights[static_cast<std::size_t>(d)] * row[d];
            table.values[i * calibs.size() + c] = pos;
        }
    }
    return table;
}

PositionTables apply_calibration(const ca::LatentEmbedding& embedding,
                                 const std::vector<AffineCalibration>& calibs) {
    PositionTables out;
    out.followers = apply_calibration_rows(embedding.follower_ids, embedding.follower_coords.data(),
                                           embedding.n_followers(), embedding.k, calibs);
    out.elites = apply_calibration_rows(embedding.elite_ids, embedding.elite_coords.data(),
                                        embedding.n_elites(), embedding.k, calibs);
    return out;
}

double outlier_fraction(const PositionTable& positions, const std::string& dimension) {
    const std::size_t d = positions.dim_index(dimension);
    if (positions.n_rows() == 0) return 0.0;
    std::size_t out = 0;
    for (std::size_t i = 0; i < positions.n_rows(); ++i) {
        const double v = positions.at(i, d);
        if (v < 0.0 || v > 10.0) ++out;
    }
    return 100.0 * static_cast<double>(out) / static_cast<double>(positions.n_rows());
}

std::vector<SurveyReference> load_survey_csv(const std::string& csv_text,
                                             const std::string& source_name) {
    const auto t = csv::read_string(csv_text, source_name);
    const auto cp = t.col("party");
    const auto cd = t.col("dimension");
    const auto cw = t.col("wave");
    const auto cs = t.col("score");
    const auto cm = t.col("native_scale_max");

    std::map<std::string, SurveyReference> by_wave;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string ctx = source_name + ":" + std::to_string(r + 2);
        auto& ref = by_wave[row[cw]];
        ref.wave = row[cw];
        const auto native = csv::parse_int(row[cm], ctx);
        double score = csv::parse_double(row[cs], ctx);
        if (native == 7)
            score = rescale_seven_point(score);
        else if (native != 10)
            throw std::runtime_error(ctx + ": native_scale_max must be 7 or 10");
        if (score < 0.0 || score > 10.0)
            throw std::runtime_error(ctx + ": score outside [0,10] after rescaling");
        if (!ref.party_scores[row[cp]].emplace(row[cd], score).second)
            throw std::runtime_error(ctx + ": duplicate score for party/dimension");
        bool seen = false;
        for (const auto& d : ref.dimensions) seen = seen || d.name == row[cd];
        if (!seen)
            ref.dimensions.push_back(
                {row[cd], "", static_cast<int>(native)});
    }

    std::vector<SurveyReference> waves;
    for (auto& [w, ref] : by_wave) {
        // every listed dimension must be scored for every listed party
        for (const auto& [party, dims] : ref.party_scores)
            for (const auto& d : ref.dimensions)
                if (!dims.count(d.name))
                    throw std::runtime_error(source_name + ": wave " + w + " party '" + party +
                                             "' lacks a score for '" + d.name + "'");
        waves.push_back(std::move(ref));
    }
    return waves;
}

} // namespace ideoscale::calibrate

#pragma once

#include <map>
#include <string>
#include <vector>

#include "ideoscale/ca.hpp"
#include "ideoscale/positions.hpp"

namespace ideoscale::calibrate {

struct SurveyDimension {
    std::string name;
    std::string description;
    int native_scale_max = 10; // 10 for 0..10 scales, 7 for 1..7 scales
};

// Expert-survey party scores for one wave, everything already rescaled
// into [0,10].
struct SurveyReference {
    std::string wave; // "2019" / "2023"
    std::vector<SurveyDimension> dimensions;
    std::map<std::string, std::map<std::string, double>> party_scores; // party -> dim -> score

    double score(const std::string& party, const std::string& dimension) const;
};

// (x-1)*10/6 for the 1..7 survey scales; throws outside [1,7].
double rescale_seven_point(double x);

// Per-dimension affine map from the first P-1 latent dimensions into
// survey units, plus how well it reproduces the fitting parties.
struct AffineCalibration {
    std::string wave;
    std::string dimension;
    std::vector<double> weights;
    double intercept = 0.0;
    int latent_dims_used = 0; // = matched party count - 1
    double fidelity_pearson = 0.0;
    double fidelity_mean_abs_diff = 0.0;
    std::vector<std::string> fit_parties; // sorted, the P matched parties
};

// Ridge fit (unpenalized intercept, unstandardized features): center the
// party latent block and scores, solve (Xc'Xc + alpha I) w = Xc'y.
AffineCalibration fit_affine_map(const std::map<std::string, std::vector<double>>& party_latent,
                                 const std::map<std::string, double>& party_scores,
                                 double alpha = 1.0);

// One dimension/wave pair to calibrate; 16 of them in the default
// manifest, column name = "<dimension>_<yy>".
struct DimensionSpec {
    std::string dimension;
    std::string wave;
    std::string column() const { return dimension + "_" + wave.substr(wave.size() - 2); }
};

const std::vector<DimensionSpec>& default_dimension_manifest();

struct CalibrationSet {
    std::vector<AffineCalibration> calibrations; // one per manifest entry
};

// Fits every manifest dimension against its wave's survey scores using
// the party centroids of the embedding.
CalibrationSet fit_all(const std::map<std::string, std::vector<double>>& party_latent,
                       const std::vector<SurveyReference>& waves,
                       const std::vector<DimensionSpec>& manifest, double alpha = 1.0);

struct PositionTables {
    PositionTable followers;
    PositionTable elites;
};

// Applies every calibration to both sides of the embedding, producing
// one column per manifest entry.
PositionTables apply_calibration(const ca::LatentEmbedding& embedding,
                                 const std::vector<AffineCalibration>& calibs);

// Projects a plain coordinate block (rows x k, row-major).
PositionTable apply_calibration_rows(const std::vector<std::string>& ids, const double* coords,
                                     std::size_t rows, std::size_t k,
                                     const std::vector<AffineCalibration>& calibs);

// Percentage (0..100) of entities outside the survey's [0,10] reference
// bounds on one dimension.
double outlier_fraction(const PositionTable& positions, const std::string& dimension);

// Loads `party,dimension,wave,score,native_scale_max` rows into per-wave
// references, applying the 7-point rescale where flagged.
std::vector<SurveyReference> load_survey_csv(const std::string& csv_text,
                                             const std::string& source_name);

} // namespace ideoscale::calibrate

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ideoscale/positions.hpp"
#include "ideoscale/stats.hpp"

namespace ideoscale::validate {

enum class LabelValue : std::uint8_t { unknown = 0, absent = 1, present = 2 };
enum class LabelSource { human, llm };

// Sparse per-user label matrix; human tables only ever carry
// present/unknown, llm tables all three states.
struct LabelTable {
    LabelSource source = LabelSource::llm;
    std::vector<std::string> label_names;
    std::vector<std::string> ids;
    std::vector<LabelValue> values; // ids x label_names

    std::size_t label_index(const std::string& name) const;
    LabelValue at(std::size_t row, std::size_t label) const {
        return values[row * label_names.size() + label];
    }
    LabelValue& at(std::size_t row, std::size_t label) {
        return values[row * label_names.size() + label];
    }
};

struct OppositePair {
    std::string a, b;
};

// The label pairs that contradict each other; users flagged with both
// members get unknown on both.
const std::vector<OppositePair>& default_opposite_pairs();

struct SanitizeReport {
    // per pair: number of rows where both labels were present
    std::vector<std::pair<std::string, std::size_t>> discarded;
    std::size_t rows_total = 0;
};

LabelTable sanitize_labels(LabelTable raw, const std::vector<OppositePair>& pairs,
                           SanitizeReport* report = nullptr);

struct BinRow {
    double lo = 0.0, hi = 0.0;
    std::int64_t n_total = 0;
    std::int64_t n_labeled = 0;
    double fraction = 0.0; // NaN when the bin is empty
    double ci_lo = 0.0, ci_hi = 0.0;
    bool empty = false;
};

// Unit bins [0,1) .. [9,10]; positions outside [0,10] are left out.
// fraction = labeled users among all positioned users in the bin, with a
// Clopper-Pearson interval at alpha = 0.05.
std::vector<BinRow> bin_concentration(const PositionTable& positions, const LabelTable& labels,
                                      const std::string& dimension, const std::string& label,
                                      double alpha = 0.05);

struct PlanRow {
    std::string dimension; // survey dimension name, e.g. "lrgen"
    std::string wave;      // "2019"/"2023"
    LabelSource annotator = LabelSource::llm;
    std::string label_a, label_b;
};

// The default battery: every dimension/wave/annotator/label-pair row the
// separation analysis covers.
const std::vector<PlanRow>& default_validation_plan();

struct SeparationRow {
    PlanRow plan;
    stats::LogisticFit fit;
    stats::BinaryMetrics metrics;
    bool skipped = false;
    std::string skip_reason;
};

// One balanced logistic fit per plan row on the named dimension column,
// result rows sorted by decreasing ROC AUC (skipped rows last).
std::vector<SeparationRow> separation_report(const std::vector<PlanRow>& plan,
                                             const PositionTable& positions,
                                             const LabelTable& human_labels,
                                             const LabelTable& llm_labels, int threads = 1);

struct CrossWaveRow {
    std::string dimension; // shared dimension name
    double followers_r = 0.0;
    double elites_r = 0.0;
    double party_r = 0.0;
};

// Pearson between the 2019 and 2023 columns of the four dimensions both
// waves share, for followers, elites and party centroids (elites need a
// party column for the centroid correlation).
std::vector<CrossWaveRow> cross_wave_report(const PositionTable& followers,
                                            const PositionTable& elites);

// Table 4/5-style inputs: pseudo_id plus one column per label; values
// 1.0/0.0/empty.
LabelTable load_labels_csv(const std::string& csv_text, const std::string& source_name,
                           LabelSource source);

std::vector<PlanRow> load_plan_csv(const std::string& csv_text, const std::string& source_name);

} // namespace ideoscale::validate

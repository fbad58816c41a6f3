#include "ideoscale/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ideoscale/csv.hpp"
#include "ideoscale/parallel.hpp"

namespace ideoscale::validate {

std::size_t LabelTable::label_index(const std::string& name) const {
    for (std::size_t i = 0; i < label_names.size(); ++i)
        if (label_names[i] == name) return i;
    throw std::runtime_error("labels: unknown label '" + name + "'");
}

const std::vector<OppositePair>& default_opposite_pairs() {
    static const std::vector<OppositePair> pairs = {
        {"left", "right"},
        {"populist", "elite"},
        {"eurosceptic", "pro_european"},
        {"liberal_immigration", "restrictive_immigration"},
        {"cosmopolitan", "nationalist"},
        {"pro_environment", "climate_denialist"},
        {"economic_focus", "pro_environment"},
        {"liberal", "conservative"},
    };
    return pairs;
}

LabelTable sanitize_labels(LabelTable raw, const std::vector<OppositePair>& pairs,
                           SanitizeReport* report) {
    if (report) {
        report->discarded.clear();
        report->rows_total = raw.ids.size();
    }
    for (const auto& pair : pairs) {
        bool have_a = false, have_b = false;
        for (const auto& n : raw.label_names) {
            have_a = have_a || n == pair.a;
            have_b = have_b || n == pair.b;
        }
        if (!have_a || !have_b) {
            if (report) report->discarded.emplace_back(pair.a + "/" + pair.b, 0);
            continue;
        }
        const std::size_t ia = raw.label_index(pair.a);
        const std::size_t ib = raw.label_index(pair.b);
        std::size_t n_discard = 0;
        for (std::size_t r = 0; r < raw.ids.size(); ++r) {
            if (raw.at(r, ia) == LabelValue::present && raw.at(r, ib) == LabelValue::present) {
                raw.at(r, ia) = LabelValue::unknown;
                raw.at(r, ib) = LabelValue::unknown;
                ++n_discard;
            }
        }
        if (report) report->discarded.emplace_back(pair.a + "/" + pair.b, n_discard);
    }
    return raw;
}

std::vector<BinRow> bin_concentration(const PositionTable& positions, const LabelTable& labels,
                                      const std::string& dimension, const std::string& label,
                                      double alpha) {
    const std::size_t dim = positions.dim_index(dimension);
    const std::size_t li = labels.label_index(label);

    std::unordered_map<std::string, std::size_t> label_rows;
    label_rows.reserve(labels.ids.size());
    for (std::size_t i = 0; i < labels.ids.size(); ++i) label_rows.emplace(labels.ids[i], i);

    std::vector<BinRow> bins(10);
    for (int b = 0; b < 10; ++b) {
        bins[static_cast<std::size_t>(b)].lo = b;
        bins[static_cast<std::size_t>(b)].hi = b + 1;
    }
    for (std::size_t i = 0; i < positions.n_rows(); ++i) {
        const double v = positions.at(i, dim);
        if (!(v >= 0.0 && v <= 10.0)) continue; // outliers stay out of the plot
        const int b = std::min(9, static_cast<int>(std::floor(v)));
        auto& bin = bins[static_cast<std::size_t>(b)];
        bin.n_total++;
        auto it = label_rows.find(positions.ids[i]);
        if (it != label_rows.end() && labels.at(it->second, li) == LabelValue::present)
            bin.n_labeled++;
    }
    for (auto& bin : bins) {
        if (bin.n_total == 0) {
            bin.empty = true;
            bin.fraction = std::numeric_limits<double>::quiet_NaN();
            bin.ci_lo = 0.0;
            bin.ci_hi = 1.0;
            continue;
        }
        bin.fraction = static_cast<double>(bin.n_labeled) / static_cast<double>(bin.n_total);
        const auto ci = stats::clopper_pearson(bin.n_labeled, bin.n_total, alpha);
        bin.ci_lo = ci.lo;
        bin.ci_hi = ci.hi;
    }
    return bins;
}

const std::vector<PlanRow>& default_validation_plan() {
    using LS = LabelSource;
    static const std::vector<PlanRow> plan = {
        {"lrgen", "2019", LS::human, "left", "right"},
        {"lrecon", "2019", LS::human, "left", "right"},
        {"lrecon", "2023", LS::human, "left", "right"},
        {"immigrate_policy", "2019", LS::human, "liberal_immigration", "restrictive_immigration"},
        {"eu_position", "2023", LS::human, "eurosceptic", "pro_european"},
        {"eu_position", "2019", LS::human, "eurosceptic", "pro_european"},
        {"refugees", "2023", LS::human, "liberal_immigration", "restrictive_immigration"},
        {"galtan", "2023", LS::llm, "conservative", "liberal"},
        {"galtan", "2019", LS::llm, "conservative", "liberal"},
        {"sociallifestyle", "2019", LS::llm, "conservative", "liberal"},
        {"lrgen", "2019", LS::llm, "left", "right"},
        {"lrecon", "2019", LS::llm, "left", "right"},
        {"eu_position", "2023", LS::llm, "eurosceptic", "pro_european"},
        {"immigrate_policy", "2019", LS::llm, "liberal_immigration", "restrictive_immigration"},
        {"eu_position", "2019", LS::llm, "eurosceptic", "pro_european"},
        {"nationalism", "2019", LS::llm, "cosmopolitan", "nationalist"},
        {"antielite_salience", "2023", LS::llm, "elite", "populist"},
        {"refugees", "2023", LS::llm, "liberal_immigration", "restrictive_immigration"},
        {"antielite_salience", "2023", LS::human, "elite", "populist"},
        {"lrecon", "2023", LS::llm, "left", "right"},
        {"antielite_salience", "2019", LS::llm, "elite", "populist"},
        {"antielite_salience", "2019", LS::human, "elite", "populist"},
        {"corrupt_salience", "2019", LS::llm, "elite", "populist"},
        {"people_vs_elite", "2019", LS::llm, "elite", "populist"},
        {"corrupt_salience", "2019", LS::human, "elite", "populist"},
        {"people_vs_elite", "2019", LS::human, "elite", "populist"},
        {"environment", "2019", LS::llm, "climate_denialist", "pro_environment"},
        {"environment", "2019", LS::llm, "economic_focus", "pro_environment"},
    };
    return plan;
}

std::vector<SeparationRow> separation_report(const std::vector<PlanRow>& plan,
                                             const PositionTable& positions,
                                             const LabelTable& human_labels,
                                             const LabelTable& llm_labels, int threads) {
    for (const auto& pr : plan)
        if (pr.label_a == pr.label_b)
            throw std::invalid_argument("separation_report: label_a equals label_b");

    positions.id_rows(); // build the lookup before the parallel section
    std::vector<SeparationRow> rows(plan.size());

    // plan rows are independent fits
    parallel_for(plan.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t idx = lo; idx < hi; ++idx) {
            const PlanRow& pr = plan[idx];
            SeparationRow& out = rows[idx];
            out.plan = pr;
            const LabelTable& labels =
                pr.annotator == LabelSource::human ? human_labels : llm_labels;
            const std::string column = pr.dimension + "_" + pr.wave.substr(pr.wave.size() - 2);

            try {
                const std::size_t dim = positions.dim_index(column);
                const std::size_t ia = labels.label_index(pr.label_a);
                const std::size_t ib = labels.label_index(pr.label_b);
                const auto& pos_rows = positions.id_rows();

                std::vector<double> xs;
                std::vector<std::uint8_t> ys; // 1 = label A
                for (std::size_t r = 0; r < labels.ids.size(); ++r) {
                    const bool a = labels.at(r, ia) == LabelValue::present;
                    const bool b = labels.at(r, ib) == LabelValue::present;
                    if (a == b) continue; // unlabeled or contradictory-after-sanitize
                    auto it = pos_rows.find(labels.ids[r]);
                    if (it == pos_rows.end()) continue;
                    const double v = positions.at(it->second, dim);
                    if (!std::isfinite(v)) continue;
                    xs.push_back(v);
                    ys.push_back(a ? 1 : 0);
                }
                std::size_t na = 0;
                for (auto y : ys) na += y;
                if (ys.empty() || na == 0 || na == ys.size()) {
                    out.skipped = true;
                    out.skip_reason = "empty class for " + pr.label_a + "/" + pr.label_b;
                } else {
                    out.fit = stats::balanced_logistic_fit(xs, ys);
                    out.metrics = stats::classification_metrics(out.fit, xs, ys);
                }
            } catch (const std::exception& e) {
                out.skipped = true;
                out.skip_reason = e.what();
            }
        }
    });

    std::stable_sort(rows.begin(), rows.end(), [](const SeparationRow& a, const SeparationRow& b) {
        if (a.skipped != b.skipped) return !a.skipped;
        return a.metrics.roc_auc > b.metrics.roc_auc;
    });
    return rows;
}

std::vector<CrossWaveRow> cross_wave_report(const PositionTable& followers,
                                            const PositionTable& elites) {
    static const std::vector<std::string> shared = {"lrecon", "eu_position", "galtan",
                                                    "antielite_salience"};
    std::vector<CrossWaveRow> out;
    for (const auto& dim : shared) {
        const std::string c19 = dim + "_19", c23 = dim + "_23";
        if (!followers.has_dim(c19) || !followers.has_dim(c23) || !elites.has_dim(c19) ||
            !elites.has_dim(c23))
            throw std::runtime_error("cross_wave_report: missing column for dimension '" + dim + "'");
        CrossWaveRow row;
        row.dimension = dim;

        auto corr = [](const PositionTable& t, const std::string& a, const std::string& b) {
            const std::size_t da = t.dim_index(a), db = t.dim_index(b);
            std::vector<double> x, y;
            x.reserve(t.n_rows());
            y.reserve(t.n_rows());
            for (std::size_t i = 0; i < t.n_rows(); ++i) {
                const double va = t.at(i, da), vb = t.at(i, db);
                if (std::isfinite(va) && std::isfinite(vb)) {
                    x.push_back(va);
                    y.push_back(vb);
                }
            }
            return stats::pearson(x, y);
        };
        row.followers_r = corr(followers, c19, c23);
        row.elites_r = corr(elites, c19, c23);

        // party centroids from the elite table, when parties are present
        if (!elites.parties.empty()) {
            std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_party;
            const std::size_t da = elites.dim_index(c19), db = elites.dim_index(c23);
            for (std::size_t i = 0; i < elites.n_rows(); ++i) {
                auto& acc = per_party[elites.parties[i]];
                acc.first.push_back(elites.at(i, da));
                acc.second.push_back(elites.at(i, db));
            }
            std::vector<double> cx, cy;
            for (const auto& [party, acc] : per_party) {
                double sa = 0, sb = 0;
                for (double v : acc.first) sa += v;
                for (double v : acc.second) sb += v;
                cx.push_back(sa / static_cast<double>(acc.first.size()));
                cy.push_back(sb / static_cast<double>(acc.second.size()));
            }
            row.party_r = cx.size() >= 2 ? stats::pearson(cx, cy)
                                         : std::numeric_limits<double>::quiet_NaN();
        } else {
            row.party_r = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(std::move(row));
    }
    return out;
}

LabelTable load_labels_csv(const std::string& csv_text, const std::string& source_name,
                           LabelSource source) {
    const auto t = csv::read_string(csv_text, source_name);
    const auto ci = t.col("pseudo_id");
    LabelTable table;
    table.source = source;
    for (std::size_t c = 0; c < t.header.size(); ++c)
        if (c != ci) table.label_names.push_back(t.header[c]);
    table.ids.reserve(t.rows.size());
    table.values.reserve(t.rows.size() * table.label_names.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        table.ids.push_back(row[ci]);
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            if (c == ci) continue;
            const std::string& f = row[c];
            LabelValue v;
            if (f.empty() || f == "nan" || f == "NaN") {
                v = LabelValue::unknown;
            } else {
                const double num = csv::parse_double(f, source_name + ":" + std::to_string(r + 2));
                if (num == 1.0)
                    v = LabelValue::present;
                else if (num == 0.0)
                    v = LabelValue::absent;
                else
                    throw std::runtime_error(source_name + ":" + std::to_string(r + 2) +
                                             ": label values must be 0, 1 or empty");
            }
            if (source == LabelSource::human && v == LabelValue::absent)
                throw std::runtime_error(source_name + ":" + std::to_string(r + 2) +
                                         ": human tables carry only present/unknown");
            table.values.push_back(v);
        }
    }
    return table;
}

namespace {

const std::vector<std::string>& known_dimensions() {
    static const std::vector<std::string> dims = {
        "lrgen",     "corrupt_salience", "people_vs_elite",    "immigrate_policy",
        "sociallifestyle", "nationalism", "antielite_salience", "eu_position",
        "lrecon",    "refugees",         "galtan",             "environment",
    };
    return dims;
}

} // namespace

std::vector<PlanRow> load_plan_csv(const std::string& csv_text, const std::string& source_name) {
    const auto t = csv::read_string(csv_text, source_name);
    const auto cd = t.col("dimension");
    const auto cw = t.col("wave");
    const auto cn = t.col("annotator");
    const auto ca = t.col("label_a");
    const auto cb = t.col("label_b");
    std::vector<PlanRow> plan;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        PlanRow pr;
        pr.dimension = row[cd];
        pr.wave = row[cw];
        if (row[cn] == "human")
            pr.annotator = LabelSource::human;
        else if (row[cn] == "llm" || row[cn] == "LLM")
            pr.annotator = LabelSource::llm;
        else
            throw std::runtime_error(source_name + ":" + std::to_string(r + 2) +
                                     ": annotator must be 'human' or 'llm'");
        pr.label_a = row[ca];
        pr.label_b = row[cb];
        if (pr.label_a == pr.label_b)
            throw std::runtime_error(source_name + ":" + std::to_string(r + 2) +
                                     ": label_a equals label_b");
        bool known = false;
        for (const auto& d : known_dimensions()) known = known || d == pr.dimension;
        if (!known)
            throw std::runtime_error(source_name + ":" + std::to_string(r + 2) +
                                     ": unknown dimension '" + pr.dimension + "'");
        plan.push_back(std::move(pr));
    }
    return plan;
}

} // namespace ideoscale::validate

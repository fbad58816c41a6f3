#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "ideoscale/rng.hpp"
#include "ideoscale/validate.hpp"

using namespace ideoscale;
using validate::LabelSource;
using validate::LabelValue;

namespace {

validate::LabelTable make_labels(LabelSource src, std::vector<std::string> names,
                                 std::vector<std::string> ids,
                                 std::vector<std::vector<int>> rows) {
    validate::LabelTable t;
    t.source = src;
    t.label_names = std::move(names);
    t.ids = std::move(ids);
    for (const auto& row : rows)
        for (int v : row)
            t.values.push_back(v < 0 ? LabelValue::unknown
                                     : (v == 1 ? LabelValue::present : LabelValue::absent));
    return t;
}

} // namespace

TEST_CASE("sanitize resolves contradictory pairs to unknown") {
    auto t = make_labels(LabelSource::llm, {"left", "right", "populist"},
                         {"a", "b", "c", "d"},
                         {{1, 1, 0}, {1, 0, 1}, {0, 1, -1}, {1, 1, 1}});
    validate::SanitizeReport rep;
    auto clean = validate::sanitize_labels(t, {{"left", "right"}}, &rep);
    REQUIRE(rep.discarded.size() == 1);
    CHECK(rep.discarded[0].first == "left/right");
    CHECK(rep.discarded[0].second == 2); // rows a and d
    CHECK(rep.rows_total == 4);

    CHECK(clean.at(0, 0) == LabelValue::unknown);
    CHECK(clean.at(0, 1) == LabelValue::unknown);
    CHECK(clean.at(0, 2) == LabelValue::absent); // untouched
    CHECK(clean.at(1, 0) == LabelValue::present); // left=1,right=0 unchanged
    CHECK(clean.at(1, 1) == LabelValue::absent);
    CHECK(clean.at(3, 0) == LabelValue::unknown);
    CHECK(clean.at(3, 2) == LabelValue::present); // other labels survive

    // pairs referencing absent labels are counted as zero-effect
    validate::SanitizeReport rep2;
    auto clean2 = validate::sanitize_labels(t, {{"eurosceptic", "pro_european"}}, &rep2);
    CHECK(rep2.discarded[0].second == 0);
    CHECK(clean2.values == t.values);
}

TEST_CASE("ten-row sanitize fixture matches manual resolution") {
    std::vector<std::vector<int>> rows = {
        {1, 1}, {1, 0}, {0, 1}, {-1, 1}, {1, -1},
        {0, 0}, {1, 1}, {-1, -1}, {0, 1}, {1, 1},
    };
    auto t = make_labels(LabelSource::llm, {"a", "b"},
                         {"r0", "r1", "r2", "r3", "r4", "r5", "r6", "r7", "r8", "r9"}, rows);
    validate::SanitizeReport rep;
    auto clean = validate::sanitize_labels(t, {{"a", "b"}}, &rep);
    CHECK(rep.discarded[0].second == 3); // rows 0, 6, 9
    for (std::size_t r : {0u, 6u, 9u}) {
        CHECK(clean.at(r, 0) == LabelValue::unknown);
        CHECK(clean.at(r, 1) == LabelValue::unknown);
    }
    CHECK(clean.at(1, 0) == LabelValue::present);
    CHECK(clean.at(3, 1) == LabelValue::present);
}

TEST_CASE("bin concentration") {
    PositionTable pos;
    pos.dimensions = {"lrgen_19"};
    // 40 users spread over bins, some outside [0,10]
    for (int i = 0; i < 40; ++i) {
        pos.ids.push_back("u" + std::to_string(i));
        pos.values.push_back(i < 4 ? 0.5 : (i < 8 ? 9.5 : (i == 8 ? -3.0 : (i == 9 ? 12.0 : 5.5))));
    }
    // label held by everyone in bin [0,1) and nobody else
    validate::LabelTable labels;
    labels.source = LabelSource::llm;
    labels.label_names = {"left"};
    for (int i = 0; i < 40; ++i) {
        labels.ids.push_back("u" + std::to_string(i));
        labels.values.push_back(i < 4 ? LabelValue::present : LabelValue::absent);
    }

    auto bins = validate::bin_concentration(pos, labels, "lrgen_19", "left");
    REQUIRE(bins.size() == 10);
    CHECK(bins[0].n_total == 4);
    CHECK(bins[0].n_labeled == 4);
    CHECK(bins[0].fraction == 1.0);
    CHECK(bins[0].ci_hi == 1.0);
    CHECK(bins[9].n_total == 4);
    CHECK(bins[9].fraction == 0.0);
    CHECK(bins[9].ci_lo == 0.0);
    CHECK(bins[5].n_total == 30);
    CHECK(bins[5].fraction == 0.0);
    // out-of-range users appear nowhere
    std::int64_t total = 0;
    for (const auto& b : bins) total += b.n_total;
    CHECK(total == 38);
    // untouched bins flagged empty
    CHECK(bins[2].empty);
    CHECK(std::isnan(bins[2].fraction));

    // fractions sit inside their intervals by construction
    for (const auto& b : bins) {
        if (b.empty) continue;
        CHECK(b.fraction >= b.ci_lo - 1e-12);
        CHECK(b.fraction <= b.ci_hi + 1e-12);
    }
}

TEST_CASE("monotone synthetic label concentrates monotonically") {
    rng::Rng gen(12);
    PositionTable pos;
    pos.dimensions = {"d_19"};
    validate::LabelTable labels;
    labels.source = LabelSource::llm;
    labels.label_names = {"lab"};
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const double x = 10.0 * gen.uniform01();
        pos.ids.push_back("u" + std::to_string(i));
        pos.values.push_back(x);
        labels.ids.push_back("u" + std::to_string(i));
        labels.values.push_back(gen.uniform01() < x / 10.0 ? LabelValue::present
                                                           : LabelValue::absent);
    }
    auto bins = validate::bin_concentration(pos, labels, "d_19", "lab");
    // neighbouring bins may wobble, but within-CI ordering must trend up
    for (std::size_t b = 1; b < 10; ++b) CHECK(bins[b].ci_hi > bins[b - 1].ci_lo);
    CHECK(bins[9].fraction > bins[0].fraction + 0.5);
}

TEST_CASE("separation report orders rows and handles both annotators") {
    rng::Rng gen(77);
    PositionTable pos;
    pos.dimensions = {"lrgen_19", "eu_position_23"};
    validate::LabelTable human, llm;
    human.source = LabelSource::human;
    human.label_names = {"left", "right"};
    llm.source = LabelSource::llm;
    llm.label_names = {"eurosceptic", "pro_european"};

    for (int i = 0; i < 400; ++i) {
        const bool is_left = i % 2 == 0;
        const double lr = (is_left ? 3.0 : 7.0) + 0.8 * gen.normal();  // clean separation
        const double eu = (is_left ? 4.2 : 5.8) + 2.2 * gen.normal();  // noisy separation
        pos.ids.push_back("u" + std::to_string(i));
        pos.values.push_back(lr);
        pos.values.push_back(eu);
        human.ids.push_back("u" + std::to_string(i));
        human.values.push_back(is_left ? LabelValue::present : LabelValue::unknown);
        human.values.push_back(is_left ? LabelValue::unknown : LabelValue::present);
        llm.ids.push_back("u" + std::to_string(i));
        llm.values.push_back(is_left ? LabelValue::present : LabelValue::absent);
        llm.values.push_back(is_left ? LabelValue::absent : LabelValue::present);
    }

    std::vector<validate::PlanRow> plan = {
        {"eu_position", "2023", LabelSource::llm, "eurosceptic", "pro_european"},
        {"lrgen", "2019", LabelSource::human, "left", "right"},
        {"galtan", "2023", LabelSource::llm, "conservative", "liberal"}, // missing -> skipped
    };
    auto rows = validate::separation_report(plan, pos, human, llm);
    REQUIRE(rows.size() == 3);
    // sorted by decreasing auc, skipped rows last
    CHECK(rows[0].plan.dimension == "lrgen");
    CHECK(rows[1].plan.dimension == "eu_position");
    CHECK(rows[2].skipped);
    CHECK(rows[0].metrics.roc_auc > rows[1].metrics.roc_auc);
    CHECK(rows[0].metrics.roc_auc > 0.95);
    CHECK(rows[0].metrics.n_a == 200);
    CHECK(rows[0].metrics.n_b == 200);
    CHECK(rows[0].metrics.f1_avg ==
          doctest::Approx(0.5 * (rows[0].metrics.f1_a_as_success + rows[0].metrics.f1_b_as_success)));

    // swapping label_a/label_b swaps the two f1 orientations, f1_avg invariant
    std::vector<validate::PlanRow> swapped = {
        {"lrgen", "2019", LabelSource::human, "right", "left"}};
    auto rows2 = validate::separation_report(swapped, pos, human, llm);
    CHECK(rows2[0].metrics.f1_a_as_success == doctest::Approx(rows[0].metrics.f1_b_as_success));
    CHECK(rows2[0].metrics.f1_b_as_success == doctest::Approx(rows[0].metrics.f1_a_as_success));
    CHECK(rows2[0].metrics.f1_avg == doctest::Approx(rows[0].metrics.f1_avg));
    CHECK(rows2[0].metrics.roc_auc == doctest::Approx(rows[0].metrics.roc_auc));
}

TEST_CASE("perfectly separated classes score a clean sweep") {
    PositionTable pos;
    pos.dimensions = {"lrgen_19"};
    validate::LabelTable llm;
    llm.source = LabelSource::llm;
    llm.label_names = {"left", "right"};
    for (int i = 0; i < 40; ++i) {
        pos.ids.push_back("u" + std::to_string(i));
        pos.values.push_back(i < 20 ? 1.0 + 0.05 * i : 8.0 + 0.05 * i);
        llm.ids.push_back("u" + std::to_string(i));
        llm.values.push_back(i < 20 ? LabelValue::present : LabelValue::absent);
        llm.values.push_back(i < 20 ? LabelValue::absent : LabelValue::present);
    }
    std::vector<validate::PlanRow> plan = {{"lrgen", "2019", LabelSource::llm, "left", "right"}};
    auto rows = validate::separation_report(plan, pos, {}, llm);
    REQUIRE(rows.size() == 1);
    CHECK(!rows[0].skipped);
    CHECK(rows[0].metrics.roc_auc == 1.0);
    CHECK(rows[0].metrics.f1_avg == 1.0);
    CHECK(rows[0].metrics.precision == 1.0);
    CHECK(rows[0].metrics.recall == 1.0);
    CHECK(!rows[0].fit.converged); // complete separation clamps the slope
}

TEST_CASE("affine rescale of a column moves the cutoff, not the auc") {
    rng::Rng gen(3);
    PositionTable pos;
    pos.dimensions = {"d_19"};
    validate::LabelTable llm;
    llm.source = LabelSource::llm;
    llm.label_names = {"a", "b"};
    for (int i = 0; i < 300; ++i) {
        const bool cls = i % 3 == 0;
        pos.ids.push_back("u" + std::to_string(i));
        pos.values.push_back((cls ? 6.2 : 4.0) + gen.normal());
        llm.ids.push_back("u" + std::to_string(i));
        llm.values.push_back(cls ? LabelValue::present : LabelValue::absent);
        llm.values.push_back(cls ? LabelValue::absent : LabelValue::present);
    }
    std::vector<validate::PlanRow> plan = {{"d", "2019", LabelSource::llm, "a", "b"}};
    auto r1 = validate::separation_report(plan, pos, {}, llm);

    PositionTable scaled = pos;
    for (auto& v : scaled.values) v = 2.0 * v + 3.0;
    auto r2 = validate::separation_report(plan, scaled, {}, llm);
    CHECK(r1[0].metrics.roc_auc == doctest::Approx(r2[0].metrics.roc_auc).epsilon(1e-12));
    CHECK(r2[0].fit.cutoff == doctest::Approx(2.0 * r1[0].fit.cutoff + 3.0).epsilon(1e-4));
}

TEST_CASE("cross wave report") {
    PositionTable followers, elites;
    const std::vector<std::string> dims = {"lrecon_19", "lrecon_23", "eu_position_19",
                                           "eu_position_23", "galtan_19", "galtan_23",
                                           "antielite_salience_19", "antielite_salience_23"};
    followers.dimensions = dims;
    elites.dimensions = dims;
    rng::Rng gen(8);
    for (int i = 0; i < 50; ++i) {
        followers.ids.push_back("u" + std::to_string(i));
        const double base = gen.normal();
        for (std::size_t d = 0; d < dims.size(); d += 2) {
            followers.values.push_back(base + 0.01 * gen.normal());
            followers.values.push_back(base + 0.01 * gen.normal()); // nearly identical waves
        }
    }
    for (int i = 0; i < 12; ++i) {
        elites.ids.push_back("e" + std::to_string(i));
        elites.names.push_back("name");
        elites.parties.push_back("p" + std::to_string(i % 4));
        const double base = gen.normal();
        for (std::size_t d = 0; d < dims.size(); d += 2) {
            elites.values.push_back(base + 0.01 * gen.normal());
            elites.values.push_back(base + 0.01 * gen.normal());
        }
    }
    auto rows = validate::cross_wave_report(followers, elites);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
        CHECK(r.followers_r > 0.99);
        CHECK(r.elites_r > 0.99);
        CHECK(r.party_r > 0.9);
    }

    // identical columns give exactly 1
    PositionTable same = followers;
    for (int i = 0; i < 50; ++i)
        for (std::size_t d = 0; d < dims.size(); d += 2)
            same.values[static_cast<std::size_t>(i) * dims.size() + d + 1] =
                same.values[static_cast<std::size_t>(i) * dims.size() + d];
    auto rows2 = validate::cross_wave_report(same, elites);
    CHECK(rows2[0].followers_r == doctest::Approx(1.0));

    // decorrelated columns hover near zero
    PositionTable rnd = followers;
    for (auto& v : rnd.values) v = gen.normal();
    auto rows3 = validate::cross_wave_report(rnd, elites);
    for (const auto& r : rows3) CHECK(std::abs(r.followers_r) < 0.45);

    PositionTable missing;
    missing.dimensions = {"lrecon_19"};
    CHECK_THROWS_AS(validate::cross_wave_report(missing, elites), std::runtime_error);
}

TEST_CASE("label csv loading") {
    auto llm = validate::load_labels_csv(
        "pseudo_id,left,right\nu1,1.0,0.0\nu2,,1.0\nu3,nan,\n", "llm.csv", LabelSource::llm);
    CHECK(llm.label_names == std::vector<std::string>{"left", "right"});
    CHECK(llm.at(0, 0) == LabelValue::present);
    CHECK(llm.at(0, 1) == LabelValue::absent);
    CHECK(llm.at(1, 0) == LabelValue::unknown);
    CHECK(llm.at(2, 0) == LabelValue::unknown);
    CHECK(llm.at(2, 1) == LabelValue::unknown);

    // human tables must not carry explicit zeros
    CHECK_THROWS_AS(validate::load_labels_csv("pseudo_id,left\nu1,0.0\n", "h.csv",
                                              LabelSource::human),
                    std::runtime_error);
    auto human =
        validate::load_labels_csv("pseudo_id,left\nu1,1.0\nu2,\n", "h.csv", LabelSource::human);
    CHECK(human.at(0, 0) == LabelValue::present);
    CHECK(human.at(1, 0) == LabelValue::unknown);

    CHECK_THROWS_AS(validate::load_labels_csv("pseudo_id,left\nu1,0.5\n", "l.csv",
                                              LabelSource::llm),
                    std::runtime_error);
}

TEST_CASE("default plan and opposite pairs match the built-in battery") {
    const auto& plan = validate::default_validation_plan();
    CHECK(plan.size() == 28);
    int human_rows = 0;
    for (const auto& r : plan) {
        CHECK(r.label_a != r.label_b);
        if (r.annotator == LabelSource::human) ++human_rows;
    }
    CHECK(human_rows == 11);
    CHECK(validate::default_opposite_pairs().size() == 8);

    auto parsed = validate::load_plan_csv(
        "dimension,wave,annotator,label_a,label_b\nlrgen,2019,human,left,right\n", "p.csv");
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].annotator == LabelSource::human);
    CHECK_THROWS_AS(
        validate::load_plan_csv("dimension,wave,annotator,label_a,label_b\nx,2019,bot,a,b\n",
                                "p.csv"),
        std::runtime_error);
}

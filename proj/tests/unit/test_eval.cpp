#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "orange/collage.hpp"
#include "orange/error.hpp"
#include "orange/eval.hpp"
#include "orange/rng.hpp"
#include "orange/synth.hpp"
#include "../support/oracles.hpp"
#include "../support/reference_scores.hpp"

using namespace orange;

namespace {

void check_close(const Accuracies& a, std::array<double, 3> per_class, double average, double overall, double tol) {
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(a.per_class[c] - per_class[c]) <= tol);
    CHECK(std::abs(a.average - average) <= tol);
    CHECK(std::abs(a.overall - overall) <= tol);
}

}  // namespace

TEST_CASE("metrics from reconstructed diagonals") {
    const auto s = reference::kTestSupport;
    check_close(metrics_from_confusion(ConfusionMatrix::from_diagonal({19, 77, 3}, s)), {57.58, 87.50, 21.43}, 55.50,
                73.33, 0.005);
    check_close(metrics_from_confusion(ConfusionMatrix::from_diagonal({13, 78, 1}, s)), {39.39, 88.64, 7.14}, 45.06,
                68.15, 0.005);
    check_close(metrics_from_confusion(ConfusionMatrix::from_diagonal({24, 71, 3}, s)), {72.73, 80.68, 21.43}, 58.28,
                72.59, 0.005);
}

TEST_CASE("degenerate predictors") {
    const auto s = reference::kTestSupport;
    check_close(metrics_from_confusion(ConfusionMatrix::from_diagonal(s, s)), {100, 100, 100}, 100, 100, 1e-12);

    ConfusionMatrix all_bad;
    for (std::size_t c = 0; c < 3; ++c) all_bad.counts[c][1] = s[c];
    check_close(metrics_from_confusion(all_bad), {0, 100, 0}, 33.33, 65.19, 0.005);

    check_close(metrics_from_confusion(ConfusionMatrix::from_diagonal({1, 1, 1}, {1, 1, 1})), {100, 100, 100}, 100, 100,
                0);
}

TEST_CASE("zero-support rows are an error") {
    ConfusionMatrix m;
    m.counts[0][0] = 3;
    m.counts[1][1] = 2;
    try {
        metrics_from_confusion(m);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroSupportRow);
    }
}

TEST_CASE("every published row is reproduced within 0.05") {
    for (const auto& row : reference::kScoreRows) {
        CAPTURE(row.table);
        CAPTURE(row.model);
        std::array<std::uint64_t, 3> correct{};
        for (std::size_t c = 0; c < 3; ++c) {
            correct[c] = static_cast<std::uint64_t>(
                std::llround(row.per_class[c] * static_cast<double>(reference::kTestSupport[c]) / 100.0));
        }
        const auto a = metrics_from_confusion(ConfusionMatrix::from_diagonal(correct, reference::kTestSupport));
        check_close(a, row.per_class, row.average, row.overall, 0.05);
    }
}

TEST_CASE("metrics agree with exact arithmetic on random matrices") {
    Rng rng(21);
    for (int trial = 0; trial < 1000; ++trial) {
        ConfusionMatrix m;
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) m.counts[i][j] = rng.below(60);
            m.counts[i][i] += 1;
        }
        const auto got = metrics_from_confusion(m);
        const auto want = oracle::metrics(m.counts);
        for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(got.per_class[c] - static_cast<double>(want.per_class[c])) < 1e-12);
        CHECK(std::abs(got.overall - static_cast<double>(want.overall)) < 1e-12);
        double weighted = 0;
        for (std::size_t c = 0; c < 3; ++c) weighted += static_cast<double>(m.row_sum(c)) * got.per_class[c];
        CHECK(std::abs(got.overall - weighted / static_cast<double>(m.total())) <= 1e-9);
        CHECK(got.average == (got.per_class[0] + got.per_class[1] + got.per_class[2]) / 3.0);
    }
}

TEST_CASE("confusion matrix bookkeeping") {
    ConfusionMatrix m;
    m.add(GradeLabel::Good, GradeLabel::Bad);
    m.add(GradeLabel::Good, GradeLabel::Good);
    m.add(GradeLabel::Undefined, GradeLabel::Undefined);
    CHECK(m.counts[0][1] == 1);
    CHECK(m.row_sum(0) == 2);
    CHECK(m.trace() == 2);
    CHECK(m.total() == 3);
    CHECK_THROWS_AS(ConfusionMatrix::from_diagonal({4, 0, 0}, {3, 1, 1}), Error);
}

TEST_CASE("rendered tables") {
    const auto s = reference::kTestSupport;
    const auto r1 = make_report(ConfusionMatrix::from_diagonal({19, 77, 3}, s), ArchitectureKind::ResNet18, {}, true);
    const auto r2 = make_report(ConfusionMatrix::from_diagonal({24, 71, 3}, s), ArchitectureKind::SqueezeNet, {}, true);

    const auto header_only = render_table({});
    CHECK(header_only.find("Bueno") != std::string::npos);
    CHECK(header_only.find("Malo") != std::string::npos);
    CHECK(header_only.find("Indefinido") != std::string::npos);
    CHECK(header_only.find("Avg.") != std::string::npos);
    CHECK(header_only.find("Overall") != std::string::npos);
    CHECK(std::count(header_only.begin(), header_only.end(), '\n') == 1);

    const auto one = render_table({r1});
    CHECK(std::count(one.begin(), one.end(), '\n') == 2);
    CHECK(one.find("ResNet-18") != std::string::npos);
    CHECK(one.find("57.58") != std::string::npos);
    CHECK(one.find("73.33") != std::string::npos);

    const auto two = render_table({r1, r2}, "Multiview classification scores (%)");
    CHECK(two.rfind("Multiview classification scores (%)\n", 0) == 0);
    CHECK(std::count(two.begin(), two.end(), '\n') == 4);
    CHECK(two.find("72.73") != std::string::npos);
    CHECK(two.find("58.28") != std::string::npos);
}

TEST_CASE("structured report") {
    const auto r = make_report(ConfusionMatrix::from_diagonal({19, 77, 3}, reference::kTestSupport),
                               ArchitectureKind::ResNet18, EvalMode{0}, false);
    const auto j = report_to_json(r);
    CHECK(j["model"] == "resnet18");
    CHECK(j["mode"] == "single_view(0)");
    CHECK(j["pretrained"] == false);
    CHECK(j["confusion"][0][0] == 19);
    CHECK(j["confusion"][0][1] == 14);
    CHECK(j["confusion"][2][0] == 11);
    CHECK(j["per_class"]["good"].get<double>() == doctest::Approx(100.0 * 19 / 33));
    CHECK(j["overall"].get<double>() == doctest::Approx(100.0 * 99 / 135));
    CHECK(j["class_order"] == nlohmann::json({"good", "bad", "undefined"}));
}

TEST_CASE("evaluate requires every class in the test set") {
    SynthConfig cfg;
    cfg.num_samples = 4;
    cfg.views_per_sample = 2;
    cfg.view_size = 32;
    cfg.blemish_radius = {1.0, 2.0};
    cfg.class_mix = {0.5, 0.5, 0.0};
    const auto d = generate(cfg);
    const auto m = build_model(ArchitectureKind::SqueezeNet, 3, false, std::nullopt, 1);
    CollageLayout layout;
    layout.tile_size = 32;
    layout.final_width = 64;
    layout.final_height = 32;
    try {
        evaluate(m, d, layout, {});
        FAIL("evaluated");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyClassInTestSet);
    }
}

TEST_CASE("evaluate counts every sample once and is order independent") {
    SynthConfig cfg;
    cfg.num_samples = 9;
    cfg.views_per_sample = 2;
    cfg.view_size = 32;
    cfg.blemish_radius = {1.0, 2.0};
    cfg.class_mix = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    const auto d = generate(cfg);
    const auto m = build_model(ArchitectureKind::SqueezeNet, 3, false, std::nullopt, 1);
    CollageLayout layout;
    layout.tile_size = 32;
    layout.final_width = 64;
    layout.final_height = 32;
    const auto r = evaluate(m, d, layout, {});
    CHECK(r.confusion.total() == 9);
    for (std::size_t c = 0; c < 3; ++c) CHECK(r.confusion.row_sum(c) == 3);

    std::vector<OrangeSample> reversed(d.begin(), d.end());
    std::reverse(reversed.begin(), reversed.end());
    CHECK(evaluate(m, Dataset(reversed), layout, {}).confusion == r.confusion);

    // Predictions agree with predict() on the composed collages.
    ConfusionMatrix manual;
    for (const auto& s : d) manual.add(s.label, predict(m, compose_collage(s, layout)).label);
    CHECK(manual == r.confusion);

    const auto single = evaluate(m, d, layout, EvalMode{1});
    ConfusionMatrix manual_single;
    for (const auto& s : d) manual_single.add(s.label, predict(m, compose_collage(select_single_view(s, 1), layout)).label);
    CHECK(single.confusion == manual_single);
}

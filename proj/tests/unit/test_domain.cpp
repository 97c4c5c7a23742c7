#include <doctest.h>

#include "orange/domain.hpp"
#include "orange/error.hpp"
#include "orange/rng.hpp"

using namespace orange;

namespace {

OrangeSample sample(std::string id, GradeLabel label) {
    return OrangeSample{std::move(id), {RgbImage(2, 2)}, label};
}

}  // namespace

TEST_CASE("parse_grade accepts English and Spanish names in any case") {
    CHECK(parse_grade("malo") == GradeLabel::Bad);
    CHECK(parse_grade("GOOD") == GradeLabel::Good);
    CHECK(parse_grade("  Indefinido\t") == GradeLabel::Undefined);
    CHECK(parse_grade("BuEnO") == GradeLabel::Good);
    CHECK(parse_grade("bad") == GradeLabel::Bad);
    CHECK(parse_grade("UNDEFINED") == GradeLabel::Undefined);
}

TEST_CASE("parse_grade rejects anything else") {
    for (const char* text : {"ripe", "", "   ", "goodish", "mal", "b ad"}) {
        CAPTURE(text);
        try {
            parse_grade(text);
            FAIL("accepted");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnknownLabel);
        }
    }
}

TEST_CASE("render and parse are inverse on canonical names") {
    for (auto g : kAllGrades) {
        CHECK(parse_grade(render(g)) == g);
        CHECK(parse_grade(spanish_name(g)) == g);
        CHECK(render(parse_grade(render(g))) == render(g));
    }
    CHECK(render(GradeLabel::Good) == "good");
    CHECK(render(GradeLabel::Bad) == "bad");
    CHECK(render(GradeLabel::Undefined) == "undefined");
}

TEST_CASE("class indices follow the report column order") {
    CHECK(index_of(GradeLabel::Good) == 0);
    CHECK(index_of(GradeLabel::Bad) == 1);
    CHECK(index_of(GradeLabel::Undefined) == 2);
    for (std::size_t i = 0; i < kNumGrades; ++i) CHECK(index_of(grade_from_index(i)) == i);
    CHECK_THROWS_AS(grade_from_index(3), Error);
}

TEST_CASE("class_counts") {
    CHECK(class_counts(Dataset{}) == ClassCounts{0, 0, 0});

    Dataset d;
    d.add(sample("a", GradeLabel::Good));
    d.add(sample("b", GradeLabel::Good));
    d.add(sample("c", GradeLabel::Bad));
    CHECK(class_counts(d) == ClassCounts{2, 1, 0});
}

TEST_CASE("class_counts totals equal dataset size on random datasets") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        Dataset d;
        const auto n = rng.below(40);
        ClassCounts expected{};
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = rng.below(3);
            ++expected[c];
            d.add(sample("id" + std::to_string(i), grade_from_index(c)));
        }
        const auto counts = class_counts(d);
        CHECK(counts == expected);
        CHECK(counts[0] + counts[1] + counts[2] == d.size());
    }
}

TEST_CASE("Dataset rejects duplicate ids") {
    Dataset d;
    d.add(sample("o001", GradeLabel::Good));
    try {
        d.add(sample("o001", GradeLabel::Bad));
        FAIL("accepted duplicate");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DuplicateSampleId);
    }
    CHECK(d.size() == 1);
    CHECK_THROWS_AS(Dataset({sample("x", GradeLabel::Good), sample("x", GradeLabel::Good)}), Error);
}

TEST_CASE("validate_sample requires views") {
    CHECK_THROWS_AS(validate_sample(OrangeSample{"x", {}, GradeLabel::Good}), Error);
    CHECK_THROWS_AS(validate_sample(OrangeSample{"x", {RgbImage()}, GradeLabel::Good}), Error);
    CHECK_NOTHROW(validate_sample(sample("x", GradeLabel::Good)));
}

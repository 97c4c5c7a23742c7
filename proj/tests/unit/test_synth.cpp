#include <doctest.h>

#include <set>

#include "orange/error.hpp"
#include "orange/synth.hpp"
#include "../support/oracles.hpp"

using namespace orange;

namespace {

// Dark connected regions inside the orange disc of a view.
int blemish_regions(const RgbImage& view) {
    const double c = view.width() / 2.0, r = 0.4 * view.width();
    RgbImage masked = view;
    for (int y = 0; y < view.height(); ++y) {
        for (int x = 0; x < view.width(); ++x) {
            const double dx = x + 0.5 - c, dy = y + 0.5 - c;
            if (dx * dx + dy * dy >= r * r) masked.set(x, y, {255, 255, 255});
        }
    }
    return oracle::count_components(masked, [](const Rgb& p) { return oracle::luma(p) < kBlemishLuminance; });
}

SynthConfig base(std::size_t n, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.num_samples = n;
    cfg.view_size = 96;
    cfg.blemish_radius = {3.0, 10.0};
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("apportionment follows the class mix") {
    CHECK(apportion(452, SynthConfig{}.class_mix) == ClassCounts{111, 294, 47});
    CHECK(apportion(300, SynthConfig{}.class_mix) == ClassCounts{74, 195, 31});
    CHECK(apportion(12, {1.0 / 3, 1.0 / 3, 1.0 / 3}) == ClassCounts{4, 4, 4});
    CHECK(apportion(2, {1.0 / 3, 1.0 / 3, 1.0 / 3}) == ClassCounts{1, 1, 0});
    for (std::size_t n = 1; n < 200; ++n) {
        const auto c = apportion(n, SynthConfig{}.class_mix);
        CHECK(c[0] + c[1] + c[2] == n);
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(std::abs(static_cast<double>(c[k]) - SynthConfig{}.class_mix[k] * static_cast<double>(n)) < 1.0);
        }
    }
}

TEST_CASE("generated datasets have the configured shape") {
    const auto d = generate(base(30, 1));
    CHECK(d.size() == 30);
    CHECK(class_counts(d) == apportion(30, SynthConfig{}.class_mix));
    std::set<std::string> ids;
    for (const auto& s : d) {
        ids.insert(s.id);
        REQUIRE(s.views.size() == 8);
        for (const auto& v : s.views) {
            CHECK(v.width() == 96);
            CHECK(v.height() == 96);
        }
    }
    CHECK(ids.size() == 30);
}

TEST_CASE("same seed, same bytes; different seed, different data") {
    CHECK(generate(base(6, 3)) == generate(base(6, 3)));
    CHECK(!(generate(base(6, 3)) == generate(base(6, 4))));
}

TEST_CASE("good oranges have clean skin") {
    const auto d = generate(base(40, 5));
    for (const auto& s : d) {
        if (s.label != GradeLabel::Good) continue;
        for (const auto& v : s.views) CHECK(blemish_regions(v) == 0);
    }
}

TEST_CASE("each blemish shows on exactly one view at full concentration") {
    const auto out = generate_detailed(base(60, 6));
    int checked = 0;
    for (std::size_t i = 0; i < out.dataset.size(); ++i) {
        const auto& s = out.dataset[i];
        int total = 0;
        int with_blemish = 0;
        for (std::size_t v = 0; v < s.views.size(); ++v) {
            const int regions = blemish_regions(s.views[v]);
            CHECK(regions == out.blemishes_per_view[i][v]);
            CHECK(regions <= 1);
            total += regions;
            with_blemish += regions > 0;
        }
        const auto range = SynthConfig{}.blemish_count[index_of(s.label)];
        CHECK(total >= range.lo);
        CHECK(total <= range.hi);
        CHECK(with_blemish == total);
        if (s.label == GradeLabel::Bad) {
            // No view has all the evidence, and some view has none.
            CHECK(with_blemish >= 2);
            CHECK(with_blemish < static_cast<int>(s.views.size()));
        }
        ++checked;
    }
    CHECK(checked == 60);
}

TEST_CASE("zero concentration stamps every blemish on every view") {
    auto cfg = base(20, 7);
    cfg.single_view_concentration = 0.0;
    const auto out = generate_detailed(cfg);
    for (std::size_t i = 0; i < out.dataset.size(); ++i) {
        const auto& per_view = out.blemishes_per_view[i];
        for (int n : per_view) CHECK(n == per_view[0]);
    }
}

TEST_CASE("undefined blemishes are smaller than bad ones") {
    const auto d = generate(base(120, 8));
    auto dark_area = [](const OrangeSample& s) {
        std::size_t dark = 0, regions = 0;
        for (const auto& v : s.views) {
            const int r = blemish_regions(v);
            regions += static_cast<std::size_t>(r);
            for (int y = 0; y < v.height(); ++y) {
                for (int x = 0; x < v.width(); ++x) {
                    const double dx = x + 0.5 - 48, dy = y + 0.5 - 48;
                    if (dx * dx + dy * dy < 38.4 * 38.4 && oracle::luma(v.at(x, y)) < kBlemishLuminance) ++dark;
                }
            }
        }
        return std::pair{dark, regions};
    };
    double undefined_area = 0, bad_area = 0;
    std::size_t undefined_regions = 0, bad_regions = 0;
    for (const auto& s : d) {
        const auto [area, regions] = dark_area(s);
        if (s.label == GradeLabel::Undefined) {
            undefined_area += static_cast<double>(area);
            undefined_regions += regions;
        } else if (s.label == GradeLabel::Bad) {
            bad_area += static_cast<double>(area);
            bad_regions += regions;
        }
    }
    REQUIRE(undefined_regions > 0);
    REQUIRE(bad_regions > 0);
    CHECK(undefined_area / static_cast<double>(undefined_regions) < bad_area / static_cast<double>(bad_regions));
}

TEST_CASE("config validation") {
    auto cfg = base(0, 1);
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = base(3, 1);
    cfg.class_mix = {0.5, 0.4, 0.2};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = base(3, 1);
    cfg.single_view_concentration = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = base(3, 1);
    cfg.blemish_count[1] = {4, 2};
    CHECK_THROWS_AS(cfg.validate(), Error);
}

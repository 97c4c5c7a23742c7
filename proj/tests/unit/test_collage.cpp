#include <doctest.h>

#include <algorithm>

#include "orange/collage.hpp"
#include "orange/error.hpp"
#include "orange/rng.hpp"

using namespace orange;

namespace {

const std::array<Rgb, 8> kPalette = {Rgb{255, 0, 0}, Rgb{0, 255, 0}, Rgb{0, 0, 255}, Rgb{255, 255, 0},
                                     Rgb{0, 255, 255}, Rgb{255, 0, 255}, Rgb{128, 64, 32}, Rgb{10, 200, 90}};

OrangeSample solid_sample(std::size_t n, int size = 300) {
    OrangeSample s{"s", {}, GradeLabel::Good};
    for (std::size_t i = 0; i < n; ++i) s.views.emplace_back(size, size, kPalette[i % kPalette.size()]);
    return s;
}

CollageLayout exact_layout(int rows, int tile, int cols) {
    CollageLayout l;
    l.rows = rows;
    l.tile_size = tile;
    l.final_width = tile * cols;
    l.final_height = tile * rows;
    l.interpolation = Interpolation::Nearest;
    return l;
}

}  // namespace

TEST_CASE("default layout yields 2500x300 for eight views") {
    const auto c = compose_collage(solid_sample(8), CollageLayout{});
    CHECK(c.pixels.width() == 2500);
    CHECK(c.pixels.height() == 300);
    CHECK(c.view_count == 8);
    CHECK(c.source_id == "s");
}

TEST_CASE("a single uniform view fills the whole collage") {
    OrangeSample s{"g", {RgbImage(300, 300, Rgb{128, 128, 128})}, GradeLabel::Bad};
    const auto c = compose_collage(s, CollageLayout{});
    CHECK(c.pixels == RgbImage(2500, 300, Rgb{128, 128, 128}));
}

TEST_CASE("tiles appear in view order") {
    const auto sample = solid_sample(3, 40);
    const auto c = compose_collage(sample, exact_layout(1, 20, 3));
    REQUIRE(c.pixels.width() == 60);
    for (int k = 0; k < 3; ++k) CHECK(c.pixels.at(20 * k + 10, 10) == kPalette[static_cast<std::size_t>(k)]);
}

TEST_CASE("multi-row grids fill left to right, top to bottom, padding the rest") {
    const auto sample = solid_sample(5, 16);
    auto layout = exact_layout(2, 10, 3);
    layout.pad_color = {7, 7, 7};
    const auto c = compose_collage(sample, layout);
    REQUIRE(c.pixels.width() == 30);
    REQUIRE(c.pixels.height() == 20);
    for (int k = 0; k < 5; ++k) {
        CHECK(c.pixels.at(10 * (k % 3) + 5, 10 * (k / 3) + 5) == kPalette[static_cast<std::size_t>(k)]);
    }
    CHECK(c.pixels.at(25, 15) == Rgb{7, 7, 7});
}

TEST_CASE("permuting views permutes tiles") {
    Rng rng(4);
    auto sample = solid_sample(6, 12);
    const auto layout = exact_layout(1, 12, 6);
    std::vector<std::size_t> perm = {0, 1, 2, 3, 4, 5};
    shuffle(std::span<std::size_t>(perm), rng);
    OrangeSample permuted = sample;
    for (std::size_t i = 0; i < 6; ++i) permuted.views[i] = sample.views[perm[i]];
    const auto a = compose_collage(sample, layout);
    const auto b = compose_collage(permuted, layout);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(b.pixels.at(static_cast<int>(12 * i + 6), 6) == a.pixels.at(static_cast<int>(12 * perm[i] + 6), 6));
    }
}

TEST_CASE("output size is fixed for any view count and view size") {
    Rng rng(8);
    for (int n = 1; n <= 20; ++n) {
        OrangeSample s{"x", {}, GradeLabel::Good};
        for (int i = 0; i < n; ++i) {
            s.views.emplace_back(8 + static_cast<int>(rng.below(40)), 8 + static_cast<int>(rng.below(40)));
        }
        CollageLayout layout;
        layout.tile_size = 16;
        layout.final_width = 250;
        layout.final_height = 30;
        layout.rows = 1 + static_cast<int>(rng.below(3));
        for (bool pad : {false, true}) {
            layout.pad_to_final = pad;
            const auto c = compose_collage(s, layout);
            CHECK(c.pixels.width() == 250);
            CHECK(c.pixels.height() == 30);
            CHECK(c.view_count == n);
        }
    }
}

TEST_CASE("pad_to_final pastes the mosaic unscaled at the top-left") {
    const auto sample = solid_sample(2, 10);
    CollageLayout layout = exact_layout(1, 10, 5);
    layout.pad_to_final = true;
    layout.pad_color = {1, 2, 3};
    const auto c = compose_collage(sample, layout);
    CHECK(c.pixels.at(5, 5) == kPalette[0]);
    CHECK(c.pixels.at(15, 5) == kPalette[1]);
    CHECK(c.pixels.at(25, 5) == Rgb{1, 2, 3});
    CHECK(c.pixels.at(49, 9) == Rgb{1, 2, 3});
}

TEST_CASE("compose_collage is deterministic") {
    Rng rng(3);
    OrangeSample s{"x", {}, GradeLabel::Good};
    for (int i = 0; i < 4; ++i) {
        RgbImage v(33, 31);
        for (auto& b : v.bytes()) b = static_cast<std::uint8_t>(rng.below(256));
        s.views.push_back(v);
    }
    CollageLayout layout;
    layout.tile_size = 50;
    layout.final_width = 333;
    layout.final_height = 41;
    CHECK(compose_collage(s, layout).pixels == compose_collage(s, layout).pixels);
}

TEST_CASE("select_single_view") {
    const auto six = solid_sample(6, 4);
    const auto first = select_single_view(six, 0);
    CHECK(first.id == six.id);
    CHECK(first.label == six.label);
    REQUIRE(first.views.size() == 1);
    CHECK(first.views[0] == six.views[0]);
    CHECK(select_single_view(six, 5).views[0] == six.views[5]);

    const auto one = solid_sample(1, 4);
    CHECK(select_single_view(one, 0) == one);

    try {
        select_single_view(six, 6);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ViewIndexOutOfRange);
    }
}

TEST_CASE("single-view collage equals a hand-built one-view collage") {
    auto sample = solid_sample(5, 30);
    const OrangeSample by_hand{sample.id, {sample.views[3]}, sample.label};
    CollageLayout layout;
    layout.tile_size = 20;
    layout.final_width = 160;
    layout.final_height = 20;
    CHECK(compose_collage(select_single_view(sample, 3), layout).pixels == compose_collage(by_hand, layout).pixels);
}

TEST_CASE("layout validation") {
    CollageLayout l;
    CHECK_NOTHROW(l.validate());
    l.rows = 0;
    CHECK_THROWS_AS(l.validate(), Error);
    l = {};
    l.final_width = 0;
    CHECK_THROWS_AS(l.validate(), Error);
    l = {};
    l.tile_size = 0;
    CHECK_THROWS_AS(l.validate(), Error);
    CHECK_THROWS_AS(compose_collage(OrangeSample{"e", {}, GradeLabel::Good}, CollageLayout{}), Error);
}

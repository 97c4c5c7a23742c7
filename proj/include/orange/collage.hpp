#pragma once

#include <cstddef>

#include "orange/domain.hpp"
#include "orange/image.hpp"

namespace orange {

// How a sample's views are tiled into the network input.
//
// Views are resized to tile_size x tile_size squares and laid out left to
// right, top to bottom in a rows x ceil(n / rows) grid; empty cells are
// pad_color. The mosaic is then stretched to final_width x final_height
// (the default), or with pad_to_final set, pasted unscaled at the top-left
// of a pad_color canvas of the final size (shrunk to fit, aspect preserved,
// if it is larger than the canvas).
struct CollageLayout {
    int rows = 1;
    int tile_size = 300;
    int final_width = 2500;
    int final_height = 300;
    Rgb pad_color = {0, 0, 0};
    Interpolation interpolation = Interpolation::Bilinear;
    bool pad_to_final = false;

    void validate() const;

    friend bool operator==(const CollageLayout&, const CollageLayout&) = default;
};

Collage compose_collage(const OrangeSample& sample, const CollageLayout& layout);

// Copy of `sample` keeping only views[index]. Throws ViewIndexOutOfRange.
OrangeSample select_single_view(const OrangeSample& sample, std::size_t index);

}  // namespace orange

#include "orange/collage.hpp"

#include <algorithm>
#include <cmath>

#include "orange/error.hpp"

namespace orange {

void CollageLayout::validate() const {
    if (rows < 1 || tile_size < 1 || final_width < 1 || final_height < 1) {
        throw Error(ErrorCode::InvalidArgument, "collage layout dimensions must be positive");
    }
}

Collage compose_collage(const OrangeSample& sample, const CollageLayout& layout) {
    layout.validate();
    validate_sample(sample);

    const int n = static_cast<int>(sample.views.size());
    const int cols = (n + layout.rows - 1) / layout.rows;
    const int tile = layout.tile_size;
    RgbImage mosaic(cols * tile, layout.rows * tile, layout.pad_color);
    for (int i = 0; i < n; ++i) {
        const auto& view = sample.views[static_cast<std::size_t>(i)];
        mosaic.paste(resize(view, tile, tile, layout.interpolation), (i % cols) * tile, (i / cols) * tile);
    }

    Collage out;
    out.source_id = sample.id;
    out.view_count = n;
    if (!layout.pad_to_final) {
        out.pixels = resize(mosaic, layout.final_width, layout.final_height, layout.interpolation);
        return out;
    }

    out.pixels = RgbImage(layout.final_width, layout.final_height, layout.pad_color);
    if (mosaic.width() > layout.final_width || mosaic.height() > layout.final_height) {
        const double scale = std::min(static_cast<double>(layout.final_width) / mosaic.width(),
                                      static_cast<double>(layout.final_height) / mosaic.height());
        const int w = std::clamp(static_cast<int>(std::floor(mosaic.width() * scale)), 1, layout.final_width);
        const int h = std::clamp(static_cast<int>(std::floor(mosaic.height() * scale)), 1, layout.final_height);
        mosaic = resize(mosaic, w, h, layout.interpolation);
    }
    out.pixels.paste(mosaic, 0, 0);
    return out;
}

OrangeSample select_single_view(const OrangeSample& sample, std::size_t index) {
    if (index >= sample.views.size()) {
        throw Error(ErrorCode::ViewIndexOutOfRange,
                    "index " + std::to_string(index) + ", available " + std::to_string(sample.views.size()));
    }
    return OrangeSample{sample.id, {sample.views[index]}, sample.label};
}

}  // namespace orange

#pragma once

#include <string>

#include "ternavit/model.hpp"

namespace ternavit {

// 8-bit PNG decoded to [0,1] floats with the requested channel count
// (1 = grayscale, 3 = RGB); libpng handles the conversions.
Image load_image_png(const std::string& path, std::size_t channels);

// 3-d FTEN tensor interpreted as (height, width, channels).
Image load_image_ften(const std::string& path);

// Dispatch on the file's magic bytes.
Image load_image(const std::string& path, std::size_t channels);

}  // namespace ternavit

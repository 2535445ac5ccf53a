#pragma once

#include <string>

#include "vsim/image.hpp"

namespace vsim {

// Reads an 8- or 16-bit grayscale or RGB raster (PNG or baseline
// uncompressed TIFF; format sniffed from magic bytes). Output intensities
// are normalized to [0,1]; RGB collapses to the unweighted channel mean.
Image2D read_image(const std::string& path);

// Writes a 16-bit grayscale PNG. Values are clamped to [0,1] and scaled
// to the full 16-bit range. Writes atomically (temp file + rename).
void write_image_png16(const std::string& path, const Image2D& img);

}  // namespace vsim

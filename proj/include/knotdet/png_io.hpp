#pragma once

#include <string>

#include "knotdet/image.hpp"

namespace knotdet {

/// Reads any libpng-supported PNG as 8-bit RGB (palette/gray/alpha expanded).
/// Throws IoError with the path on failure.
RgbImage read_png_rgb(const std::string& path);

/// Writes an 8-bit RGB PNG atomically (temp file + rename).
void write_png_rgb(const std::string& path, const RgbImage& img);

/// Writes an 8-bit grayscale PNG atomically.
void write_png_gray(const std::string& path, const GrayImage& img);

/// Atomic text-file write used for JSON outputs (temp file + rename).
void write_text_file(const std::string& path, const std::string& content);

}  // namespace knotdet

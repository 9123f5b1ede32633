#pragma once

#include <stdexcept>
#include <string>

#include "sdeconv/image.hpp"

namespace sdeconv {

// File-level failure (missing file, bad magic, short read, ...). The message
// always contains the offending path.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Loads a .pgm/.ppm/.pnm (binary P5/P6, maxval 255 or 65535) or .png
// (8/16-bit gray or RGB) file. Values are scaled to [0,1].
Image load_image(const std::string& path);

// Writes the image with the format chosen from the extension. Values are
// clamped to [0,1] and rounded to the nearest level of the requested depth
// (8 or 16 bits).
void save_image(const Image& img, const std::string& path, int bit_depth = 16);

// Reads a kernel from a plain-text matrix (rows separated by newlines or
// ';', entries by spaces or commas) or from a grayscale image file. Weights
// are normalized to sum to one. Throws std::invalid_argument naming the
// violated constraint (negative weight, zero sum, even dimensions).
Kernel load_kernel(const std::string& path);

// Writes a kernel as a plain-text matrix, one row per line.
void save_kernel(const Kernel& k, const std::string& path);

} // namespace sdeconv

#pragma once

#include <filesystem>
#include <optional>

#include "cvf/mask.hpp"

namespace cvf {

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

// 1-bit grayscale PNG; foreground (remove) pixels are white.
void write_mask_png(const std::filesystem::path& path, const Mask& mask);

// Any PNG; pixels with nonzero gray level are set.
Mask read_png_mask(const std::filesystem::path& path);

// Width and height from a PNG, JPEG or PNM header; nullopt if unreadable.
std::optional<ImageSize> probe_image_size(const std::filesystem::path& path);

}  // namespace cvf

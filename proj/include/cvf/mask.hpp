#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cvf {

/// Binary segmentation mask stored row-major, one byte per pixel (0 or 1).
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool get(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool value = true) { bits_[index(x, y)] = value ? 1 : 0; }

  std::size_t count() const noexcept;
  bool none() const noexcept { return count() == 0; }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::span<std::uint8_t> bits() noexcept { return bits_; }

  bool same_shape(const Mask& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Flat COCO polygon: x0, y0, x1, y1, ...
using Polygon = std::vector<double>;

// Even-odd scanline fill sampled at pixel centers (x + 0.5, y + 0.5). Several
// polygons are unioned; anything outside the image is clipped. Throws
// Error(validation) for a polygon with fewer than three vertices.
Mask rasterize_polygons(std::span<const Polygon> polygons, int width, int height);

// Column-major alternating run lengths, first run counts zeros (COCO order).
std::vector<std::uint32_t> encode_rle(const Mask& mask);
// Throws Error(validation) when the runs do not sum to width * height.
Mask decode_rle(std::span<const std::uint32_t> counts, int width, int height);

// COCO's compressed run-length string (6 bits per char, delta coded).
std::string rle_counts_to_string(std::span<const std::uint32_t> counts);
std::vector<std::uint32_t> rle_counts_from_string(std::string_view text);

// Square structuring element of side 2 * radius + 1, clipped to the image.
Mask dilate(const Mask& mask, int radius);

double area_fraction(const Mask& mask);

/// Exact overlap ratio |target & qa| / |qa|.
struct OverlapScore {
  std::size_t intersection = 0;
  std::size_t qa_pixels = 0;

  double value() const {
    return qa_pixels == 0 ? 0.0
                          : static_cast<double>(intersection) / static_cast<double>(qa_pixels);
  }
  bool is_zero() const { return intersection == 0; }

  // Compares exact rationals.
  friend bool operator<(const OverlapScore& a, const OverlapScore& b) {
    return static_cast<unsigned __int128>(a.intersection) * b.qa_pixels <
           static_cast<unsigned __int128>(b.intersection) * a.qa_pixels;
  }
};

std::size_t intersection_count(const Mask& a, const Mask& b);

// Inputs are used as given; callers dilate beforehand. Throws Error(validation)
// on a shape mismatch and Error(empty) when qa has no pixels.
OverlapScore overlap_score(const Mask& target, const Mask& qa);

// Empty input yields an empty mask of the given shape.
Mask union_masks(std::span<const Mask> masks, int width, int height);

}  // namespace cvf

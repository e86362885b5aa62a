#include "cvf/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cvf/error.hpp"

namespace cvf {

Mask::Mask(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw Error(ErrorKind::validation, "mask dimensions must be non-negative");
  }
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Mask rasterize_polygons(std::span<const Polygon> polygons, int width, int height) {
  Mask mask(width, height);
  std::vector<double> crossings;
  for (std::size_t p = 0; p < polygons.size(); ++p) {
    const Polygon& poly = polygons[p];
    if (poly.size() < 6 || poly.size() % 2 != 0) {
      throw Error(ErrorKind::validation,
                  "polygon " + std::to_string(p) + " has " + std::to_string(poly.size()) +
                      " coordinates; need at least 3 vertices");
    }
    const std::size_t n = poly.size() / 2;
    for (int y = 0; y < height; ++y) {
      const double yc = y + 0.5;
      crossings.clear();
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double xi = poly[2 * i], yi = poly[2 * i + 1];
        const double xj = poly[2 * j], yj = poly[2 * j + 1];
        if ((yi > yc) != (yj > yc)) {
          crossings.push_back(xi + (yc - yi) * (xj - xi) / (yj - yi));
        }
      }
      std::sort(crossings.begin(), crossings.end());
      for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
        // Pixel centers in [a, b).
        const double a = std::ceil(crossings[k] - 0.5);
        const double b = std::ceil(crossings[k + 1] - 0.5);
        const int x0 = static_cast<int>(std::max(a, 0.0));
        const int x1 = static_cast<int>(std::min(b, static_cast<double>(width)));
        for (int x = x0; x < x1; ++x) mask.set(x, y);
      }
    }
  }
  return mask;
}

std::vector<std::uint32_t> encode_rle(const Mask& mask) {
  std::vector<std::uint32_t> counts;
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = 0; y < mask.height(); ++y) {
      const std::uint8_t v = mask.get(x, y) ? 1 : 0;
      if (v != current) {
        counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return counts;
}

Mask decode_rle(std::span<const std::uint32_t> counts, int width, int height) {
  const std::uint64_t expected = static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  const std::uint64_t actual = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (actual != expected) {
    throw Error(ErrorKind::validation, "run-length counts sum to " + std::to_string(actual) +
                                           ", expected " + std::to_string(expected));
  }
  Mask mask(width, height);
  std::uint64_t pos = 0;
  bool value = false;
  for (std::uint32_t run : counts) {
    if (value) {
      for (std::uint64_t k = pos; k < pos + run; ++k) {
        mask.set(static_cast<int>(k / height), static_cast<int>(k % height));
      }
    }
    pos += run;
    value = !value;
  }
  return mask;
}

std::string rle_counts_to_string(std::span<const std::uint32_t> counts) {
  std::string out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::int64_t x = counts[i];
    if (i > 2) x -= static_cast<std::int64_t>(counts[i - 2]);
    bool more = true;
    while (more) {
      char c = static_cast<char>(x & 0x1f);
      x >>= 5;
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      out.push_back(static_cast<char>(c + 48));
    }
  }
  return out;
}

std::vector<std::uint32_t> rle_counts_from_string(std::string_view text) {
  std::vector<std::uint32_t> counts;
  std::size_t p = 0;
  while (p < text.size()) {
    std::int64_t x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= text.size()) {
        throw Error(ErrorKind::parse, "truncated run-length string");
      }
      const int c = static_cast<unsigned char>(text[p]) - 48;
      if (c < 0 || c > 63) {
        throw Error(ErrorKind::parse, "invalid character in run-length string at offset " +
                                          std::to_string(p));
      }
      x |= static_cast<std::int64_t>(c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= -(std::int64_t{1} << (5 * k));
    }
    if (counts.size() > 2) x += counts[counts.size() - 2];
    if (x < 0 || x > UINT32_MAX) {
      throw Error(ErrorKind::parse, "run-length string decodes to an out-of-range count");
    }
    counts.push_back(static_cast<std::uint32_t>(x));
  }
  return counts;
}

namespace {

// 1-D max filter of half-width `radius` along rows (stride 1) or columns.
void dilate_lines(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, int lines,
                  int length, std::size_t line_stride, std::size_t step, int radius) {
  for (int l = 0; l < lines; ++l) {
    const std::size_t base = static_cast<std::size_t>(l) * line_stride;
    // Count of set pixels inside the window [i - radius, i + radius].
    int window = 0;
    for (int i = 0; i < std::min(radius, length); ++i) window += in[base + i * step];
    for (int i = 0; i < length; ++i) {
      const int enter = i + radius;
      const int leave = i - radius - 1;
      if (enter < length) window += in[base + enter * step];
      if (leave >= 0) window -= in[base + leave * step];
      out[base + i * step] = window > 0 ? 1 : 0;
    }
  }
}

}  // namespace

Mask dilate(const Mask& mask, int radius) {
  if (radius < 0) throw Error(ErrorKind::validation, "dilation radius must be >= 0");
  if (radius == 0 || mask.size() == 0) return mask;
  const int w = mask.width();
  const int h = mask.height();
  Mask rows(w, h);
  dilate_lines(mask.bits(), rows.bits(), h, w, static_cast<std::size_t>(w), 1, radius);
  Mask out(w, h);
  dilate_lines(rows.bits(), out.bits(), w, h, 1, static_cast<std::size_t>(w), radius);
  return out;
}

double area_fraction(const Mask& mask) {
  if (mask.size() == 0) return 0.0;
  return static_cast<double>(mask.count()) / static_cast<double>(mask.size());
}

std::size_t intersection_count(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorKind::validation, "mask shape mismatch: " + std::to_string(a.width()) + "x" +
                                           std::to_string(a.height()) + " vs " +
                                           std::to_string(b.width()) + "x" +
                                           std::to_string(b.height()));
  }
  const auto ab = a.bits();
  const auto bb = b.bits();
  std::size_t n = 0;
  for (std::size_t i = 0; i < ab.size(); ++i) n += ab[i] & bb[i];
  return n;
}

OverlapScore overlap_score(const Mask& target, const Mask& qa) {
  const std::size_t inter = intersection_count(target, qa);
  const std::size_t qa_pixels = qa.count();
  if (qa_pixels == 0) throw Error(ErrorKind::empty, "overlap score undefined for an empty QA mask");
  return {inter, qa_pixels};
}

Mask union_masks(std::span<const Mask> masks, int width, int height) {
  Mask out(width, height);
  auto ob = out.bits();
  for (const Mask& m : masks) {
    if (m.width() != width || m.height() != height) {
      throw Error(ErrorKind::validation, "mask shape mismatch in union");
    }
    const auto mb = m.bits();
    for (std::size_t i = 0; i < ob.size(); ++i) ob[i] |= mb[i];
  }
  return out;
}

}  // namespace cvf

#include "cvf/image_io.hpp"

#include <png.h>

#include <array>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "cvf/error.hpp"

namespace cvf {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint32_t be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

std::optional<ImageSize> probe_jpeg(std::ifstream& in) {
  // Walk marker segments until a start-of-frame.
  in.seekg(2);
  for (;;) {
    int c = in.get();
    if (c != 0xFF) return std::nullopt;
    int marker;
    do {
      marker = in.get();
    } while (marker == 0xFF);
    if (marker == EOF) return std::nullopt;
    if (marker == 0xD8 || (marker >= 0xD0 && marker <= 0xD7) || marker == 0x01) continue;
    unsigned char len_bytes[2];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 2)) return std::nullopt;
    const int len = (len_bytes[0] << 8) | len_bytes[1];
    const bool sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 &&
                     marker != 0xCC;
    if (sof) {
      unsigned char body[5];
      if (!in.read(reinterpret_cast<char*>(body), 5)) return std::nullopt;
      return ImageSize{(body[3] << 8) | body[4], (body[1] << 8) | body[2]};
    }
    in.seekg(len - 2, std::ios::cur);
    if (!in) return std::nullopt;
  }
}

std::optional<ImageSize> probe_pnm(std::ifstream& in) {
  in.seekg(2);
  int values[2];
  for (int& v : values) {
    for (;;) {
      int c = in.peek();
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    if (!(in >> v)) return std::nullopt;
  }
  return ImageSize{values[0], values[1]};
}

}  // namespace

namespace {

// Only trivially destructible locals live across setjmp here.
bool encode_mask_png(std::FILE* fp, const Mask& mask, png_byte* row, std::size_t row_bytes) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(mask.width()),
               static_cast<png_uint_32>(mask.height()), 1, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < mask.height(); ++y) {
    std::memset(row, 0, row_bytes);
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.get(x, y)) row[static_cast<std::size_t>(x) / 8] |= static_cast<png_byte>(0x80 >> (x % 8));
    }
    png_write_row(png, row);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

void write_mask_png(const std::filesystem::path& path, const Mask& mask) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error(ErrorKind::io, "cannot write " + path.string());
  std::vector<png_byte> row((static_cast<std::size_t>(mask.width()) + 7) / 8);
  if (!encode_mask_png(fp.get(), mask, row.data(), row.size())) {
    throw Error(ErrorKind::io, "libpng failed writing " + path.string());
  }
  if (std::fflush(fp.get()) != 0) throw Error(ErrorKind::io, "short write to " + path.string());
}

Mask read_png_mask(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorKind::io, "cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorKind::io, "cannot decode PNG " + path.string() + ": " + image.message);
  }
  Mask mask(static_cast<int>(image.width), static_cast<int>(image.height));
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (pixels[static_cast<std::size_t>(y) * image.width + static_cast<std::size_t>(x)] != 0) {
        mask.set(x, y);
      }
    }
  }
  return mask;
}

std::optional<ImageSize> probe_image_size(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::array<unsigned char, 24> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  const auto got = in.gcount();
  in.clear();
  static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (got >= 24 && std::memcmp(head.data(), kPngSig, 8) == 0) {
    return ImageSize{static_cast<int>(be32(&head[16])), static_cast<int>(be32(&head[20]))};
  }
  if (got >= 4 && head[0] == 0xFF && head[1] == 0xD8) return probe_jpeg(in);
  if (got >= 3 && head[0] == 'P' && head[1] >= '1' && head[1] <= '6') return probe_pnm(in);
  return std::nullopt;
}

}  // namespace cvf

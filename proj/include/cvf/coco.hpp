#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "cvf/io.hpp"
#include "cvf/mask.hpp"

namespace cvf {

using CategoryId = std::int64_t;
using ImageId = std::int64_t;
using InstanceId = std::int64_t;

struct Category {
  CategoryId id = 0;
  std::string name;  // lowercase

  friend bool operator==(const Category&, const Category&) = default;
};

/// Category id <-> canonical name lookup. Ids and lowercased names are unique.
class CategoryTable {
 public:
  CategoryTable() = default;
  explicit CategoryTable(std::vector<Category> entries);

  const std::vector<Category>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  const Category* find(CategoryId id) const;
  const Category* find_by_name(std::string_view name) const;
  bool contains(CategoryId id) const { return find(id) != nullptr; }
  std::string name_of(CategoryId id) const;

  friend bool operator==(const CategoryTable& a, const CategoryTable& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<Category> entries_;  // ascending id
};

struct ImageRecord {
  ImageId image_id = 0;
  int width = 0;
  int height = 0;
  std::string file_name;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct PolygonSegmentation {
  std::vector<Polygon> polygons;
  friend bool operator==(const PolygonSegmentation&, const PolygonSegmentation&) = default;
};

// Compressed string counts are expanded at load time.
struct RleSegmentation {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;
  friend bool operator==(const RleSegmentation&, const RleSegmentation&) = default;
};

using Segmentation = std::variant<PolygonSegmentation, RleSegmentation>;

struct BoundingBox {
  double x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct InstanceAnnotation {
  InstanceId instance_id = 0;
  ImageId image_id = 0;
  CategoryId category_id = 0;
  Segmentation segmentation;
  double declared_area = 0;  // kept for round-trips only; never used for decisions
  BoundingBox bbox;

  friend bool operator==(const InstanceAnnotation&, const InstanceAnnotation&) = default;
};

struct LoadSummary {
  std::size_t categories = 0;
  std::size_t images = 0;
  std::size_t instances = 0;
  std::size_t polygon_instances = 0;
  std::size_t rle_instances = 0;

  friend bool operator==(const LoadSummary&, const LoadSummary&) = default;
};

struct CocoCorpus {
  CategoryTable categories;
  std::vector<ImageRecord> images;           // ascending image_id
  std::vector<InstanceAnnotation> instances;  // ascending instance_id
  LoadSummary summary;

  const ImageRecord* find_image(ImageId id) const;

  friend bool operator==(const CocoCorpus&, const CocoCorpus&) = default;
};

// Throws Error(parse) for malformed input (byte offset or field path in the
// message) and Error(integrity) listing every dangling or invalid instance.
CocoCorpus load_annotations(const std::filesystem::path& path);
CocoCorpus parse_annotations(const json& doc);

json to_json(const CocoCorpus& corpus);

// Rasterizes against the owning image's dimensions.
Mask rasterize(const InstanceAnnotation& instance, const ImageRecord& image);

struct ImageObjects {
  std::set<CategoryId> categories;                             // O_I
  std::map<CategoryId, std::vector<InstanceId>> instances;     // ascending ids
};

class ImageObjectIndex {
 public:
  const ImageObjects& at(ImageId image) const;
  bool contains(ImageId image) const { return by_image_.count(image) != 0; }
  const std::map<ImageId, ImageObjects>& images() const noexcept { return by_image_; }

 private:
  friend ImageObjectIndex build_object_index(std::span<const ImageRecord>,
                                             std::span<const InstanceAnnotation>);
  std::map<ImageId, ImageObjects> by_image_;
};

ImageObjectIndex build_object_index(std::span<const ImageRecord> images,
                                    std::span<const InstanceAnnotation> instances);

using InstanceMasks = std::unordered_map<InstanceId, Mask>;

// Masks of every instance on one image.
InstanceMasks rasterize_image_instances(const CocoCorpus& corpus, const ImageObjectIndex& index,
                                        ImageId image);

}  // namespace cvf

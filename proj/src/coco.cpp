#include "cvf/coco.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "cvf/error.hpp"
#include "cvf/text.hpp"

namespace cvf {

CategoryTable::CategoryTable(std::vector<Category> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorKind::integrity, "category table is empty");
  std::sort(entries_.begin(), entries_.end(),
            [](const Category& a, const Category& b) { return a.id < b.id; });
  std::unordered_set<std::string> names;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    entries_[i].name = normalize_answer(entries_[i].name);
    if (i > 0 && entries_[i].id == entries_[i - 1].id) {
      throw Error(ErrorKind::integrity, "duplicate category id " + std::to_string(entries_[i].id));
    }
    if (!names.insert(entries_[i].name).second) {
      throw Error(ErrorKind::integrity, "duplicate category name '" + entries_[i].name + "'");
    }
  }
}

const Category* CategoryTable::find(CategoryId id) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const Category& c, CategoryId v) { return c.id < v; });
  return it != entries_.end() && it->id == id ? &*it : nullptr;
}

const Category* CategoryTable::find_by_name(std::string_view name) const {
  const std::string key = normalize_answer(name);
  for (const auto& c : entries_) {
    if (c.name == key) return &c;
  }
  return nullptr;
}

std::string CategoryTable::name_of(CategoryId id) const {
  const Category* c = find(id);
  return c ? c->name : std::to_string(id);
}

const ImageRecord* CocoCorpus::find_image(ImageId id) const {
  auto it = std::lower_bound(images.begin(), images.end(), id,
                             [](const ImageRecord& r, ImageId v) { return r.image_id < v; });
  return it != images.end() && it->image_id == id ? &*it : nullptr;
}

namespace {

std::string at(std::string_view array, std::size_t i) {
  return std::string(array) + "[" + std::to_string(i) + "]";
}

double get_number(const json& obj, const char* key, const std::string& where, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw Error(ErrorKind::parse, where + "." + key + ": expected number");
  return it->get<double>();
}

Segmentation parse_segmentation(const json& seg, const std::string& where) {
  if (seg.is_array()) {
    PolygonSegmentation poly;
    for (std::size_t i = 0; i < seg.size(); ++i) {
      if (!seg[i].is_array()) {
        throw Error(ErrorKind::parse, where + ".segmentation[" + std::to_string(i) +
                                          "]: expected coordinate array");
      }
      Polygon p;
      for (const auto& v : seg[i]) {
        if (!v.is_number()) {
          throw Error(ErrorKind::parse,
                      where + ".segmentation[" + std::to_string(i) + "]: expected numbers");
        }
        p.push_back(v.get<double>());
      }
      poly.polygons.push_back(std::move(p));
    }
    return poly;
  }
  if (seg.is_object()) {
    const json& size = get_array(seg, "size", where + ".segmentation");
    if (size.size() != 2 || !size[0].is_number_integer() || !size[1].is_number_integer()) {
      throw Error(ErrorKind::parse, where + ".segmentation.size: expected [height, width]");
    }
    RleSegmentation rle;
    rle.height = size[0].get<int>();
    rle.width = size[1].get<int>();
    auto counts = seg.find("counts");
    if (counts == seg.end()) {
      throw Error(ErrorKind::parse, where + ".segmentation.counts: missing");
    }
    if (counts->is_string()) {
      rle.counts = rle_counts_from_string(counts->get<std::string>());
    } else if (counts->is_array()) {
      for (const auto& c : *counts) {
        if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<std::int64_t>() >= 0)) {
          throw Error(ErrorKind::parse,
                      where + ".segmentation.counts: expected non-negative integers");
        }
        rle.counts.push_back(c.get<std::uint32_t>());
      }
    } else {
      throw Error(ErrorKind::parse, where + ".segmentation.counts: expected string or array");
    }
    return rle;
  }
  throw Error(ErrorKind::parse, where + ".segmentation: expected polygon list or run-length object");
}

std::string join_ids(const std::vector<std::int64_t>& ids) {
  std::string out;
  for (auto id : ids) {
    if (!out.empty()) out += ",";
    out += std::to_string(id);
  }
  return out;
}

}  // namespace

Mask rasterize(const InstanceAnnotation& instance, const ImageRecord& image) {
  return std::visit(
      [&](const auto& seg) -> Mask {
        using T = std::decay_t<decltype(seg)>;
        if constexpr (std::is_same_v<T, PolygonSegmentation>) {
          return rasterize_polygons(seg.polygons, image.width, image.height);
        } else {
          if (seg.width != image.width || seg.height != image.height) {
            throw Error(ErrorKind::integrity,
                        "run-length size " + std::to_string(seg.height) + "x" +
                            std::to_string(seg.width) + " does not match image " +
                            std::to_string(image.image_id));
          }
          return decode_rle(seg.counts, seg.width, seg.height);
        }
      },
      instance.segmentation);
}

CocoCorpus parse_annotations(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::parse, "annotation file: expected a JSON object");
  CocoCorpus corpus;

  std::vector<Category> cats;
  const json& jcats = get_array(doc, "categories", "root");
  for (std::size_t i = 0; i < jcats.size(); ++i) {
    const std::string where = at("categories", i);
    cats.push_back({get_int(jcats[i], "id", where), get_string(jcats[i], "name", where)});
  }
  corpus.categories = CategoryTable(std::move(cats));

  const json& jimages = get_array(doc, "images", "root");
  for (std::size_t i = 0; i < jimages.size(); ++i) {
    const std::string where = at("images", i);
    ImageRecord rec;
    rec.image_id = get_int(jimages[i], "id", where);
    rec.width = static_cast<int>(get_int(jimages[i], "width", where));
    rec.height = static_cast<int>(get_int(jimages[i], "height", where));
    rec.file_name = get_string(jimages[i], "file_name", where);
    if (rec.width <= 0 || rec.height <= 0) {
      throw Error(ErrorKind::integrity, where + ": image " + std::to_string(rec.image_id) +
                                            " has non-positive dimensions");
    }
    corpus.images.push_back(std::move(rec));
  }
  std::sort(corpus.images.begin(), corpus.images.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.image_id < b.image_id; });
  for (std::size_t i = 1; i < corpus.images.size(); ++i) {
    if (corpus.images[i].image_id == corpus.images[i - 1].image_id) {
      throw Error(ErrorKind::integrity,
                  "duplicate image id " + std::to_string(corpus.images[i].image_id));
    }
  }

  const json& janns = get_array(doc, "annotations", "root");
  for (std::size_t i = 0; i < janns.size(); ++i) {
    const std::string where = at("annotations", i);
    const json& a = janns[i];
    InstanceAnnotation inst;
    inst.instance_id = get_int(a, "id", where);
    inst.image_id = get_int(a, "image_id", where);
    inst.category_id = get_int(a, "category_id", where);
    auto seg = a.find("segmentation");
    if (seg == a.end()) throw Error(ErrorKind::parse, where + ".segmentation: missing");
    inst.segmentation = parse_segmentation(*seg, where);
    inst.declared_area = get_number(a, "area", where, 0.0);
    if (auto bb = a.find("bbox"); bb != a.end()) {
      if (!bb->is_array() || bb->size() != 4) {
        throw Error(ErrorKind::parse, where + ".bbox: expected [x, y, w, h]");
      }
      inst.bbox = {(*bb)[0].get<double>(), (*bb)[1].get<double>(), (*bb)[2].get<double>(),
                   (*bb)[3].get<double>()};
    }
    if (std::holds_alternative<PolygonSegmentation>(inst.segmentation)) {
      ++corpus.summary.polygon_instances;
    } else {
      ++corpus.summary.rle_instances;
    }
    corpus.instances.push_back(std::move(inst));
  }
  std::sort(corpus.instances.begin(), corpus.instances.end(),
            [](const InstanceAnnotation& a, const InstanceAnnotation& b) {
              return a.instance_id < b.instance_id;
            });

  std::vector<std::int64_t> duplicate, bad_category, bad_image, bad_geometry;
  for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
    const auto& inst = corpus.instances[i];
    if (i > 0 && inst.instance_id == corpus.instances[i - 1].instance_id) {
      duplicate.push_back(inst.instance_id);
    }
    if (!corpus.categories.contains(inst.category_id)) bad_category.push_back(inst.instance_id);
    const ImageRecord* img = corpus.find_image(inst.image_id);
    if (img == nullptr) {
      bad_image.push_back(inst.instance_id);
      continue;
    }
    try {
      if (rasterize(inst, *img).none()) bad_geometry.push_back(inst.instance_id);
    } catch (const Error&) {
      bad_geometry.push_back(inst.instance_id);
    }
  }
  std::string problems;
  auto note = [&](const std::vector<std::int64_t>& ids, const char* what) {
    if (ids.empty()) return;
    if (!problems.empty()) problems += "; ";
    problems += std::string(what) + ": " + join_ids(ids);
  };
  note(duplicate, "duplicate instance ids");
  note(bad_category, "instances with unknown category");
  note(bad_image, "instances with unknown image");
  note(bad_geometry, "instances whose segmentation is empty or invalid");
  if (!problems.empty()) throw Error(ErrorKind::integrity, problems);

  corpus.summary.categories = corpus.categories.size();
  corpus.summary.images = corpus.images.size();
  corpus.summary.instances = corpus.instances.size();
  return corpus;
}

CocoCorpus load_annotations(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  try {
    return parse_annotations(doc);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

json to_json(const CocoCorpus& corpus) {
  json doc;
  doc["categories"] = json::array();
  for (const auto& c : corpus.categories.entries()) {
    doc["categories"].push_back({{"id", c.id}, {"name", c.name}});
  }
  doc["images"] = json::array();
  for (const auto& img : corpus.images) {
    doc["images"].push_back({{"id", img.image_id},
                             {"width", img.width},
                             {"height", img.height},
                             {"file_name", img.file_name}});
  }
  doc["annotations"] = json::array();
  for (const auto& inst : corpus.instances) {
    json a = {{"id", inst.instance_id},
              {"image_id", inst.image_id},
              {"category_id", inst.category_id},
              {"area", inst.declared_area},
              {"bbox", {inst.bbox.x, inst.bbox.y, inst.bbox.w, inst.bbox.h}}};
    if (const auto* poly = std::get_if<PolygonSegmentation>(&inst.segmentation)) {
      a["segmentation"] = poly->polygons;
    } else {
      const auto& rle = std::get<RleSegmentation>(inst.segmentation);
      a["segmentation"] = {{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
    }
    doc["annotations"].push_back(std::move(a));
  }
  return doc;
}

const ImageObjects& ImageObjectIndex::at(ImageId image) const {
  auto it = by_image_.find(image);
  if (it == by_image_.end()) {
    throw Error(ErrorKind::not_found, "image " + std::to_string(image) + " is not indexed");
  }
  return it->second;
}

ImageObjectIndex build_object_index(std::span<const ImageRecord> images,
                                    std::span<const InstanceAnnotation> instances) {
  ImageObjectIndex index;
  for (const auto& img : images) index.by_image_[img.image_id];
  for (const auto& inst : instances) {
    auto it = index.by_image_.find(inst.image_id);
    if (it == index.by_image_.end()) {
      throw Error(ErrorKind::integrity, "instance " + std::to_string(inst.instance_id) +
                                            " references unknown image " +
                                            std::to_string(inst.image_id));
    }
    it->second.categories.insert(inst.category_id);
    it->second.instances[inst.category_id].push_back(inst.instance_id);
  }
  for (auto& [id, objs] : index.by_image_) {
    for (auto& [cat, ids] : objs.instances) std::sort(ids.begin(), ids.end());
  }
  return index;
}

InstanceMasks rasterize_image_instances(const CocoCorpus& corpus, const ImageObjectIndex& index,
                                        ImageId image) {
  const ImageRecord* rec = corpus.find_image(image);
  if (rec == nullptr) {
    throw Error(ErrorKind::not_found, "image " + std::to_string(image) + " is not in the corpus");
  }
  InstanceMasks masks;
  for (const auto& [cat, ids] : index.at(image).instances) {
    for (InstanceId id : ids) {
      auto it = std::lower_bound(
          corpus.instances.begin(), corpus.instances.end(), id,
          [](const InstanceAnnotation& a, InstanceId v) { return a.instance_id < v; });
      masks.emplace(id, rasterize(*it, *rec));
    }
  }
  return masks;
}

}  // namespace cvf

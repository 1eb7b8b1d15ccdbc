#include "edccf/dataset_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace edccf {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw ParseError("cannot read file: " + path);
  return ss.str();
}

// The DOM parser silently keeps the last value for a repeated key, so
// duplicate image ids are detected in a SAX pre-pass.
class TopLevelKeyScanner : public nlohmann::json_sax<json> {
 public:
  std::vector<std::string> keys;
  std::vector<std::string> duplicates;
  std::string error;

  bool null() override { return true; }
  bool boolean(bool) override { return true; }
  bool number_integer(number_integer_t) override { return true; }
  bool number_unsigned(number_unsigned_t) override { return true; }
  bool number_float(number_float_t, const string_t&) override { return true; }
  bool string(string_t&) override { return true; }
  bool binary(binary_t&) override { return true; }
  bool start_object(std::size_t) override {
    ++depth_;
    return true;
  }
  bool key(string_t& k) override {
    if (depth_ == 1) {
      if (!seen_.insert(k).second) duplicates.push_back(k);
      keys.push_back(k);
    }
    return true;
  }
  bool end_object() override {
    --depth_;
    return true;
  }
  bool start_array(std::size_t) override { return true; }
  bool end_array() override { return true; }
  bool parse_error(std::size_t position, const std::string&,
                   const nlohmann::detail::exception& ex) override {
    error = std::string(ex.what()) + " (byte " + std::to_string(position) + ")";
    return false;
  }

 private:
  int depth_ = 0;
  std::set<std::string> seen_;
};

Box parse_box(const json& arr, BoxFormat format, std::string* why) {
  if (!arr.is_array() || arr.size() != 4) {
    *why = "bbox must be an array of 4 numbers";
    return {};
  }
  double v[4];
  for (int i = 0; i < 4; ++i) {
    if (!arr[i].is_number()) {
      *why = "bbox must be an array of 4 numbers";
      return {};
    }
    v[i] = arr[i].get<double>();
  }
  Box b;
  if (format == BoxFormat::XYWH) {
    b = Box{v[0], v[1], v[2], v[3]};
  } else {
    b = Box{v[0], v[1], v[2] - v[0], v[3] - v[1]};
  }
  if (!b.valid()) {
    *why = "bbox must be finite with x,y >= 0 and positive extent";
    return {};
  }
  return b;
}

// Shared per-entry schema check; vocab is optional so check_integrity can
// stay vocabulary-free.
bool validate_entry(const json& e, bool require_score, const ClassVocabulary* vocab,
                    BoxFormat format, std::string* why, std::string* category,
                    Box* box, double* score) {
  if (!e.is_object()) {
    *why = "detection entry must be an object";
    return false;
  }
  if (!e.contains("category") || !e["category"].is_string() ||
      e["category"].get<std::string>().empty()) {
    *why = "missing or non-string category";
    return false;
  }
  *category = e["category"].get<std::string>();
  if (vocab && !vocab->contains(*category)) {
    *why = "category not in vocabulary: " + *category;
    return false;
  }
  if (!e.contains("bbox")) {
    *why = "missing bbox";
    return false;
  }
  *box = parse_box(e["bbox"], format, why);
  if (!why->empty()) return false;
  if (require_score) {
    if (!e.contains("score") || !e["score"].is_number()) {
      *why = "missing or non-numeric score";
      return false;
    }
    *score = e["score"].get<double>();
    if (!std::isfinite(*score) || *score < 0 || *score > 1) {
      *why = "score must be in [0, 1]";
      return false;
    }
  } else if (e.contains("score")) {
    *why = "ground truth must not carry scores";
    return false;
  }
  return true;
}

void check_manifest_cover(const std::set<std::string>& file_ids,
                          const std::vector<std::string>& manifest,
                          const std::string& path) {
  std::set<std::string> wanted(manifest.begin(), manifest.end());
  for (const auto& id : wanted)
    if (!file_ids.count(id))
      throw ManifestMismatch(path + ": manifest image missing from file: " + id);
  for (const auto& id : file_ids)
    if (!wanted.count(id))
      throw ManifestMismatch(path + ": file image not in manifest: " + id);
}

json parse_with_duplicate_check(const std::string& path, const std::string& text) {
  TopLevelKeyScanner scan;
  if (!json::sax_parse(text, &scan))
    throw ParseError(path + ": " + scan.error);
  if (!scan.duplicates.empty())
    throw SchemaError(path + ": duplicate image id: " + scan.duplicates.front());
  json doc = json::parse(text);
  if (!doc.is_object())
    throw SchemaError(path + ": top-level value must be an object keyed by image id");
  return doc;
}

json box_to_json(const Box& b) { return json::array({b.x, b.y, b.w, b.h}); }

}  // namespace

std::vector<std::string> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest: " + path);
  std::vector<std::string> ids;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (!seen.insert(line).second)
      throw SchemaError(path + ": duplicate manifest id: " + line);
    ids.push_back(line);
  }
  return ids;
}

BranchPredictions load_predictions(const std::string& path,
                                   const ClassVocabulary& vocab,
                                   const std::vector<std::string>& manifest,
                                   BoxFormat format) {
  const json doc = parse_with_duplicate_check(path, read_file(path));
  BranchPredictions out;
  out.branch_id = std::filesystem::path(path).stem().string();
  std::set<std::string> file_ids;
  for (const auto& [id, arr] : doc.items()) {
    file_ids.insert(id);
    if (!arr.is_array())
      throw SchemaError(path + ": " + id + ": image entry must be an array");
    std::vector<Detection> dets;
    dets.reserve(arr.size());
    for (const auto& e : arr) {
      std::string why, category;
      Box box;
      double score = 0;
      if (!validate_entry(e, /*require_score=*/true, &vocab, format, &why,
                          &category, &box, &score))
        throw SchemaError(path + ": " + id + ": " + why);
      dets.push_back(Detection{category, box, score});
    }
    out.per_image.emplace(id, std::move(dets));
  }
  check_manifest_cover(file_ids, manifest, path);
  return out;
}

GroundTruthSet load_ground_truth(const std::string& path,
                                 const ClassVocabulary& vocab,
                                 const std::vector<std::string>& manifest,
                                 BoxFormat format) {
  const json doc = parse_with_duplicate_check(path, read_file(path));
  GroundTruthSet out;
  std::set<std::string> file_ids;
  for (const auto& [id, arr] : doc.items()) {
    file_ids.insert(id);
    if (!arr.is_array())
      throw SchemaError(path + ": " + id + ": image entry must be an array");
    std::vector<GtInstance> boxes;
    boxes.reserve(arr.size());
    for (const auto& e : arr) {
      std::string why, category;
      Box box;
      double score = 0;
      if (!validate_entry(e, /*require_score=*/false, &vocab, format, &why,
                          &category, &box, &score))
        throw SchemaError(path + ": " + id + ": " + why);
      boxes.push_back(GtInstance{category, box});
    }
    out.per_image.emplace(id, std::move(boxes));
  }
  check_manifest_cover(file_ids, manifest, path);
  return out;
}

void save_predictions(const std::string& path, const BranchPredictions& preds) {
  json doc = json::object();
  for (const auto& [id, dets] : preds.per_image) {
    json arr = json::array();
    for (const auto& d : dets)
      arr.push_back({{"category", d.class_code},
                     {"bbox", box_to_json(d.box)},
                     {"score", d.score}});
    doc[id] = std::move(arr);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << doc.dump(1) << '\n';
}

void save_ground_truth(const std::string& path, const GroundTruthSet& gt) {
  json doc = json::object();
  for (const auto& [id, boxes] : gt.per_image) {
    json arr = json::array();
    for (const auto& g : boxes)
      arr.push_back({{"category", g.class_code}, {"bbox", box_to_json(g.box)}});
    doc[id] = std::move(arr);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << doc.dump(1) << '\n';
}

void save_manifest(const std::string& path, const std::vector<std::string>& ids) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  for (const auto& id : ids) out << id << '\n';
}

IntegrityReport check_integrity(const std::string& path,
                                const std::vector<std::string>& manifest) {
  IntegrityReport rep;
  const std::string text = read_file(path);  // ParseError only for unreadable files

  TopLevelKeyScanner scan;
  if (!json::sax_parse(text, &scan)) {
    rep.schema_violations.emplace_back("", "not parseable as JSON: " + scan.error);
    rep.missing_images.assign(manifest.begin(), manifest.end());
    std::sort(rep.missing_images.begin(), rep.missing_images.end());
    return rep;
  }
  rep.duplicate_image_ids = scan.duplicates;

  const json doc = json::parse(text);
  if (!doc.is_object()) {
    rep.schema_violations.emplace_back("", "top-level value must be an object keyed by image id");
    rep.missing_images.assign(manifest.begin(), manifest.end());
    std::sort(rep.missing_images.begin(), rep.missing_images.end());
    return rep;
  }

  std::set<std::string> file_ids;
  for (const auto& [id, arr] : doc.items()) {
    file_ids.insert(id);
    if (!arr.is_array()) {
      rep.schema_violations.emplace_back(id, "image entry must be an array");
      continue;
    }
    for (const auto& e : arr) {
      std::string why, category;
      Box box;
      double score = 0;
      if (!validate_entry(e, /*require_score=*/true, nullptr, BoxFormat::XYWH,
                          &why, &category, &box, &score)) {
        rep.schema_violations.emplace_back(id, why);
        break;
      }
    }
  }

  std::set<std::string> wanted(manifest.begin(), manifest.end());
  for (const auto& id : wanted)
    if (!file_ids.count(id)) rep.missing_images.push_back(id);
  for (const auto& id : file_ids)
    if (!wanted.count(id)) rep.extra_images.push_back(id);
  std::sort(rep.missing_images.begin(), rep.missing_images.end());
  std::sort(rep.extra_images.begin(), rep.extra_images.end());
  return rep;
}

std::vector<std::pair<std::string, std::string>> overlap_audit(
    const std::vector<std::string>& train_ids,
    const std::vector<std::string>& val_ids,
    const std::map<std::string, std::string>& content_hashes) {
  std::map<std::string, std::vector<std::string>> val_by_hash;
  for (const auto& v : val_ids) {
    auto it = content_hashes.find(v);
    if (it != content_hashes.end()) val_by_hash[it->second].push_back(v);
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& t : train_ids) {
    auto it = content_hashes.find(t);
    if (it == content_hashes.end()) continue;
    auto hit = val_by_hash.find(it->second);
    if (hit == val_by_hash.end()) continue;
    for (const auto& v : hit->second) pairs.emplace_back(t, v);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

}  // namespace edccf

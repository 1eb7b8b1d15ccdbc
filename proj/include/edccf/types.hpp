#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace edccf {

inline constexpr const char* kVersion = "0.1.0";

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct ManifestMismatch : Error { using Error::Error; };
struct InvalidThresholds : Error { using Error::Error; };
struct InvalidArgument : Error { using Error::Error; };
struct MissingClass : Error { using Error::Error; };
struct MissingRepairBranch : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct InvalidDistribution : Error { using Error::Error; };

// Axis-aligned box, top-left anchored, width/height extents.
struct Box {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double x2() const { return x + w; }
  double y2() const { return y + h; }
  double area() const { return w * h; }

  bool valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
           std::isfinite(h) && x >= 0 && y >= 0 && w > 0 && h > 0;
  }

  bool operator==(const Box&) const = default;
};

struct Detection {
  std::string class_code;
  Box box;
  double score = 0;

  bool operator==(const Detection&) const = default;
};

struct GtInstance {
  std::string class_code;
  Box box;

  bool operator==(const GtInstance&) const = default;
};

// Closed category set. Codes are case-sensitive and unique; roles start
// Stable and are reassigned by the diagnosis stage.
class ClassVocabulary {
 public:
  enum class Role { Stable, Hard };

  explicit ClassVocabulary(std::vector<std::string> codes) : codes_(std::move(codes)) {
    if (codes_.empty()) throw SchemaError("class vocabulary must be non-empty");
    for (std::size_t i = 0; i < codes_.size(); ++i) {
      if (codes_[i].empty()) throw SchemaError("class codes must be non-empty strings");
      if (!index_.emplace(codes_[i], i).second)
        throw SchemaError("duplicate class code: " + codes_[i]);
    }
  }

  // The eight road-distress categories used by the bundled profiles.
  static const ClassVocabulary& road_distress() {
    static const ClassVocabulary v(
        {"zxlf", "hxlf", "lmlj", "jl", "kc", "cz", "ssf", "hbgdf"});
    return v;
  }

  const std::vector<std::string>& codes() const { return codes_; }
  std::size_t size() const { return codes_.size(); }
  bool contains(const std::string& code) const { return index_.count(code) != 0; }

  Role role(const std::string& code) const {
    require(code);
    auto it = roles_.find(code);
    return it == roles_.end() ? Role::Stable : it->second;
  }

  void set_role(const std::string& code, Role r) {
    require(code);
    roles_[code] = r;
  }

 private:
  void require(const std::string& code) const {
    if (!contains(code)) throw MissingClass("unknown class code: " + code);
  }

  std::vector<std::string> codes_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, Role> roles_;
};

// One detector branch's output over an image set. std::map keeps image
// iteration order deterministic everywhere downstream.
struct BranchPredictions {
  std::string branch_id;
  std::map<std::string, std::vector<Detection>> per_image;
};

struct GroundTruthSet {
  std::map<std::string, std::vector<GtInstance>> per_image;
};

inline std::vector<std::string> image_ids(const GroundTruthSet& gt) {
  std::vector<std::string> ids;
  ids.reserve(gt.per_image.size());
  for (const auto& [id, boxes] : gt.per_image) ids.push_back(id);
  return ids;
}

inline BranchPredictions restrict_to(const BranchPredictions& preds,
                                     const std::vector<std::string>& ids) {
  BranchPredictions out;
  out.branch_id = preds.branch_id;
  for (const auto& id : ids) {
    auto it = preds.per_image.find(id);
    if (it == preds.per_image.end())
      throw ManifestMismatch("image missing from predictions: " + id);
    out.per_image.emplace(id, it->second);
  }
  return out;
}

inline GroundTruthSet restrict_to(const GroundTruthSet& gt,
                                  const std::vector<std::string>& ids) {
  GroundTruthSet out;
  for (const auto& id : ids) {
    auto it = gt.per_image.find(id);
    if (it == gt.per_image.end())
      throw ManifestMismatch("image missing from ground truth: " + id);
    out.per_image.emplace(id, it->second);
  }
  return out;
}

}  // namespace edccf

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "edccf/types.hpp"

namespace edccf {

// On-disk bbox encoding. Everything internal is XYWH; XYXY inputs are
// converted at the load boundary.
enum class BoxFormat { XYWH, XYXY };

struct IntegrityReport {
  std::vector<std::string> missing_images;    // in manifest, absent from file
  std::vector<std::string> extra_images;      // in file, absent from manifest
  std::vector<std::string> duplicate_image_ids;
  // (image-id, reason); image-id is empty for file-level problems.
  std::vector<std::pair<std::string, std::string>> schema_violations;

  bool clean() const {
    return missing_images.empty() && extra_images.empty() &&
           duplicate_image_ids.empty() && schema_violations.empty();
  }
};

// One image id per line; blank lines ignored. Throws ParseError on
// unreadable files and SchemaError on duplicate ids.
std::vector<std::string> load_manifest(const std::string& path);

// Prediction files map image-id -> [{"category", "bbox", "score"}, ...].
// The file's key set must equal the manifest exactly (an image with no
// detections carries an explicit empty array).
BranchPredictions load_predictions(const std::string& path,
                                   const ClassVocabulary& vocab,
                                   const std::vector<std::string>& manifest,
                                   BoxFormat format = BoxFormat::XYWH);

// Same schema minus "score".
GroundTruthSet load_ground_truth(const std::string& path,
                                 const ClassVocabulary& vocab,
                                 const std::vector<std::string>& manifest,
                                 BoxFormat format = BoxFormat::XYWH);

void save_predictions(const std::string& path, const BranchPredictions& preds);
void save_ground_truth(const std::string& path, const GroundTruthSet& gt);
void save_manifest(const std::string& path, const std::vector<std::string>& ids);

// Non-throwing schema/manifest audit of a prediction file. ParseError is
// raised only when the file cannot be read; malformed JSON and every other
// content problem land in the report.
IntegrityReport check_integrity(const std::string& path,
                                const std::vector<std::string>& manifest);

// Exact-duplicate scan between two splits by content hash. Ids absent from
// the hash map are skipped. Returns (train-id, val-id) pairs, sorted.
std::vector<std::pair<std::string, std::string>> overlap_audit(
    const std::vector<std::string>& train_ids,
    const std::vector<std::string>& val_ids,
    const std::map<std::string, std::string>& content_hashes);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

}  // namespace edccf

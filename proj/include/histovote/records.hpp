#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "histovote/aggregate.hpp"
#include "histovote/classify.hpp"
#include "histovote/evaluate.hpp"
#include "histovote/tiler.hpp"

namespace histovote {

/// Everything recorded about one manifest entry.
struct ImageRecord {
  std::string image_id;
  bool ok = false;
  std::string error;
  std::optional<ClassLabel> truth;
  SelectionReport selection;
  std::vector<PatchPrediction> predictions;
  std::optional<ImageDecision> decision;
};

nlohmann::json selection_to_json(const std::string& image_id, const SelectionReport& report);
nlohmann::json decision_to_json(const ImageDecision& decision);
nlohmann::json image_record_to_json(const ImageRecord& record);
/// Inverse of image_record_to_json for the fields it writes; candidates are not persisted.
ImageRecord image_record_from_json(const nlohmann::json& j);
nlohmann::json eval_report_to_json(const EvalReport& report);

/// One compact JSON document per line.
std::string to_json_lines(const std::vector<nlohmann::json>& docs);
std::vector<nlohmann::json> parse_json_lines(const std::string& text);

}  // namespace histovote

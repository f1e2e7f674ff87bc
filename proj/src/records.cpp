#include "histovote/records.hpp"

#include <cmath>
#include <sstream>

#include "histovote/errors.hpp"

namespace histovote {

using nlohmann::json;

namespace {

json patch_json(const PatchSpec& p) {
  return {{"x", p.origin.x}, {"y", p.origin.y}, {"size", p.origin.w}, {"row", p.grid.row}, {"col", p.grid.col},
          {"density", p.blue_density}};
}

PatchSpec patch_from(const json& j) {
  PatchSpec p;
  const int size = j.at("size").get<int>();
  p.origin = {j.at("x").get<int>(), j.at("y").get<int>(), size, size};
  p.grid = {j.at("row").get<int>(), j.at("col").get<int>()};
  p.blue_density = j.at("density").get<double>();
  return p;
}

ClassLabel label_from(const json& j) {
  const auto l = parse_label(j.get<std::string>());
  if (!l) throw ConsistencyError("unknown label '" + j.get<std::string>() + "' in record");
  return *l;
}

json ratio_json(const Ratio& r) {
  json j{{"correct", r.num}, {"total", r.den}};
  j["value"] = r.den == 0 ? json(nullptr) : json(r.value());
  return j;
}

template <int N>
json matrix_json(const Confusion<N>& cm) {
  json rows = json::array();
  for (int p = 0; p < N; ++p) {
    json row = json::array();
    for (int a = 0; a < N; ++a) row.push_back(cm(p, a));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

json selection_to_json(const std::string& image_id, const SelectionReport& r) {
  json selected = json::array();
  for (const auto& p : r.selected) selected.push_back(patch_json(p));
  return {{"image", image_id},
          {"width", r.image_width},
          {"height", r.image_height},
          {"tier", tier_name(r.tier)},
          {"image_blue_metric", r.image_blue_metric},
          {"candidates_total", r.candidates_total},
          {"candidates_qualified", r.candidates_qualified},
          {"fallback", r.fallback},
          {"selected", selected}};
}

json decision_to_json(const ImageDecision& d) {
  json votes;
  for (ClassLabel l : kAllLabels) votes[std::string(label_name(l))] = d.votes(l);
  return {{"decision", label_name(d.label)}, {"votes", votes}, {"n_patches", d.n_patches}, {"tie_broken", d.tie_broken}};
}

json image_record_to_json(const ImageRecord& rec) {
  json j;
  j["image"] = rec.image_id;
  j["status"] = rec.ok ? "ok" : "error";
  j["truth"] = rec.truth ? json(label_name(*rec.truth)) : json(nullptr);
  if (!rec.ok) {
    j["error"] = rec.error;
    return j;
  }
  const SelectionReport& s = rec.selection;
  j["width"] = s.image_width;
  j["height"] = s.image_height;
  j["tier"] = tier_name(s.tier);
  j["image_blue_metric"] = s.image_blue_metric;
  j["candidates_total"] = s.candidates_total;
  j["candidates_qualified"] = s.candidates_qualified;
  j["fallback"] = s.fallback;
  if (rec.decision) j.update(decision_to_json(*rec.decision));
  json patches = json::array();
  for (const auto& p : rec.predictions) {
    json pj = patch_json(p.patch);
    pj["label"] = label_name(p.label);
    pj["probs"] = json::array();
    for (ClassLabel l : kAllLabels) pj["probs"].push_back(p.probs[l]);
    patches.push_back(pj);
  }
  j["patches"] = patches;
  return j;
}

ImageRecord image_record_from_json(const json& j) {
  ImageRecord rec;
  try {
    rec.image_id = j.at("image").get<std::string>();
    rec.ok = j.at("status").get<std::string>() == "ok";
    if (j.contains("truth") && !j.at("truth").is_null()) rec.truth = label_from(j.at("truth"));
    if (!rec.ok) {
      rec.error = j.value("error", "");
      return rec;
    }
    SelectionReport& s = rec.selection;
    s.image_width = j.at("width").get<int>();
    s.image_height = j.at("height").get<int>();
    const auto tier = parse_tier(j.at("tier").get<std::string>());
    if (!tier) throw ConsistencyError("unknown tier in record");
    s.tier = *tier;
    s.image_blue_metric = j.at("image_blue_metric").get<double>();
    s.candidates_total = j.at("candidates_total").get<std::size_t>();
    s.candidates_qualified = j.at("candidates_qualified").get<std::size_t>();
    s.fallback = j.at("fallback").get<bool>();
    for (const auto& pj : j.at("patches")) {
      const PatchSpec patch = patch_from(pj);
      Eigen::Vector4d p;
      for (int i = 0; i < 4; ++i) p(i) = pj.at("probs").at(static_cast<std::size_t>(i)).get<double>();
      rec.predictions.push_back({patch, ClassProbabilities(p), label_from(pj.at("label"))});
      s.selected.push_back(patch);
    }
    if (j.contains("decision")) {
      ImageDecision d;
      d.label = label_from(j.at("decision"));
      for (ClassLabel l : kAllLabels) d.vote_counts[index_of(l)] = j.at("votes").at(std::string(label_name(l))).get<int>();
      d.n_patches = j.at("n_patches").get<int>();
      d.tie_broken = j.at("tie_broken").get<bool>();
      rec.decision = d;
    }
  } catch (const json::exception& e) {
    throw ConsistencyError(std::string("malformed result record: ") + e.what());
  }
  return rec;
}

json eval_report_to_json(const EvalReport& r) {
  json per_class;
  for (ClassLabel l : kAllLabels) per_class[std::string(label_name(l))] = ratio_json(r.per_class_accuracy[index_of(l)]);
  return {{"patch_accuracy", ratio_json(r.patch_accuracy)},
          {"image_accuracy_4class", ratio_json(r.image_accuracy_4class)},
          {"image_accuracy_2class", ratio_json(r.image_accuracy_2class)},
          {"per_class_accuracy", per_class},
          {"class_order", {"Normal", "Benign", "InSitu", "Invasive"}},
          {"cm4", matrix_json(r.cm4)},
          {"cm2", matrix_json(r.cm2)}};
}

std::string to_json_lines(const std::vector<json>& docs) {
  std::string out;
  for (const auto& d : docs) {
    out += d.dump();
    out += '\n';
  }
  return out;
}

std::vector<json> parse_json_lines(const std::string& text) {
  std::vector<json> docs;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      docs.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ConsistencyError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace histovote

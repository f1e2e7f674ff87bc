#include "histovote/config.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "histovote/errors.hpp"

namespace histovote {

namespace {

using nlohmann::json;

json rgb_json(Rgb c) { return json::array({c.r, c.g, c.b}); }

Rgb rgb_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("colours are [r, g, b] arrays");
  return {j[0].get<std::uint8_t>(), j[1].get<std::uint8_t>(), j[2].get<std::uint8_t>()};
}

}  // namespace

void RunConfig::validate() const {
  mask.validate();
  grid.validate();
  overlay.validate();
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (backend.empty()) throw ConfigError("backend must not be empty");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig parse_run_config(const std::string& json_text) {
  RunConfig c;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    c.mask.ratio_threshold = j.value("ratio_threshold", c.mask.ratio_threshold);
    c.mask.patch_blue_min = j.value("patch_blue_min", c.mask.patch_blue_min);
    c.mask.image_tier_bounds = j.value("image_tier_bounds", c.mask.image_tier_bounds);
    c.mask.tier_counts = j.value("tier_counts", c.mask.tier_counts);
    c.grid.patch_size = j.value("patch_size", c.grid.patch_size);
    c.grid.stride = j.value("stride", c.grid.stride);
    c.backend = j.value("backend", c.backend);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir.string());
    c.workers = j.value("workers", c.workers);
    c.write_overlays = j.value("write_overlays", c.write_overlays);
    if (j.contains("overlay")) {
      const json& o = j.at("overlay");
      if (o.contains("accepted_color")) c.overlay.accepted_color = rgb_from(o.at("accepted_color"));
      if (o.contains("rejected_color")) c.overlay.rejected_color = rgb_from(o.at("rejected_color"));
      if (o.contains("class_colors")) {
        const json& cc = o.at("class_colors");
        if (!cc.is_array() || cc.size() != kNumClasses) throw ConfigError("class_colors needs 4 colours");
        for (std::size_t i = 0; i < kNumClasses; ++i) c.overlay.class_colors[i] = rgb_from(cc[i]);
      }
      c.overlay.line_thickness = o.value("line_thickness", c.overlay.line_thickness);
      c.overlay.downscale = o.value("downscale", c.overlay.downscale);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return parse_run_config(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_run_config(const RunConfig& c) {
  json o;
  o["accepted_color"] = rgb_json(c.overlay.accepted_color);
  o["rejected_color"] = rgb_json(c.overlay.rejected_color);
  o["class_colors"] = json::array();
  for (const Rgb& col : c.overlay.class_colors) o["class_colors"].push_back(rgb_json(col));
  o["line_thickness"] = c.overlay.line_thickness;
  o["downscale"] = c.overlay.downscale;

  json j;
  j["ratio_threshold"] = c.mask.ratio_threshold;
  j["patch_blue_min"] = c.mask.patch_blue_min;
  j["image_tier_bounds"] = c.mask.image_tier_bounds;
  j["tier_counts"] = c.mask.tier_counts;
  j["patch_size"] = c.grid.patch_size;
  j["stride"] = c.grid.stride;
  j["backend"] = c.backend;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  j["workers"] = c.workers;
  j["write_overlays"] = c.write_overlays;
  j["overlay"] = o;
  return j.dump(2) + "\n";
}

RunConfig resolve_run_config(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return load_run_config(*explicit_path);
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return load_run_config(env);
  return RunConfig{};
}

}  // namespace histovote

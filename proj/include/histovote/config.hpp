#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "histovote/bluemask.hpp"
#include "histovote/overlay.hpp"
#include "histovote/tiler.hpp"

namespace histovote {

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnvVar = "HISTOVOTE_CONFIG";

/// Every tunable of a run. Serialized as one JSON object; missing keys keep their defaults.
struct RunConfig {
  MaskConfig mask;
  GridGeometry grid;
  std::string backend = "stub";
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  int workers = 1;
  bool write_overlays = true;
  OverlayStyle overlay;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& config);

/// Explicit path, else $HISTOVOTE_CONFIG, else defaults.
RunConfig resolve_run_config(const std::optional<std::filesystem::path>& explicit_path);

}  // namespace histovote

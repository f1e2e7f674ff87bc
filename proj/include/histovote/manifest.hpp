#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "histovote/image_io.hpp"
#include "histovote/labels.hpp"

namespace histovote {

enum class Split { Train, Validation };

std::string_view split_name(Split split);

struct ManifestEntry {
  /// Path as written in the manifest; doubles as the image id.
  std::string id;
  /// Resolved against the manifest's directory.
  std::filesystem::path path;
  std::optional<ClassLabel> label;
  Split split = Split::Train;
  ImageFormat format = ImageFormat::Auto;
};

/// Text manifest, one entry per line:
///
///     path,label,split[,format]
///
/// `label` is a class name or "unknown", `split` is train or validation, `format` defaults to auto.
/// Blank lines and lines starting with '#' are ignored; a leading "path,label,split" header is skipped.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  static DatasetManifest parse(std::string_view text, const std::filesystem::path& base_dir = {});
  static DatasetManifest load(const std::filesystem::path& path);

  bool all_labelled() const;
  std::map<std::string, ClassLabel> ground_truth() const;
  std::string serialize() const;
};

}  // namespace histovote

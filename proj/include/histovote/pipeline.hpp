#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "histovote/classify.hpp"
#include "histovote/config.hpp"
#include "histovote/evaluate.hpp"
#include "histovote/manifest.hpp"
#include "histovote/records.hpp"

namespace histovote {

/// Runs fn(0..count-1) on up to `workers` threads. The first exception is rethrown after joining.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

/// Mask, select, classify and vote for one image. Errors are captured in the record, not thrown.
ImageRecord process_image(const ManifestEntry& entry, const RunConfig& config, const ClassifierBackend& backend);

/// Classifies the recorded patch origins again and votes; used to replay a result record.
ImageDecision replay_decision(const RgbRaster& raster, const ImageRecord& record, const ClassifierBackend& backend);

struct RunOutcome {
  std::vector<ImageRecord> records;
  std::optional<EvalReport> report;
  std::size_t failures = 0;

  bool all_ok() const { return failures == 0; }
};

/// Selection only; writes selections.jsonl into the output directory.
RunOutcome run_extract(const DatasetManifest& manifest, const RunConfig& config);

/// Full per-image inference; writes results.jsonl and summary.txt.
RunOutcome run_infer(const DatasetManifest& manifest, const RunConfig& config, const ClassifierBackend& backend);

/// run_infer plus overlays and, when every entry is labelled, eval.json and eval.txt.
RunOutcome run_pipeline(const DatasetManifest& manifest, const RunConfig& config, const ClassifierBackend& backend);

/// Scores an existing results.jsonl against the manifest; writes eval.json and eval.txt.
EvalReport run_evaluate(const DatasetManifest& manifest, const std::filesystem::path& results_path,
                        const std::filesystem::path& output_dir);

std::vector<ImageOutcome> outcomes_from_records(const std::vector<ImageRecord>& records);

struct ExportOutcome {
  std::size_t files_written = 0;
  std::size_t patches = 0;
  std::size_t failures = 0;
};

/// Writes every selected patch and its eight augmentations to
/// <output_dir>/training/<Class>/<image>_<x>_<y>_<variant>.png plus generation.csv.
/// Throws ManifestError when any entry is unlabelled.
ExportOutcome run_export_training(const DatasetManifest& manifest, const RunConfig& config);

/// Seed of one patch's augmentations, mixed from the run seed, image id and patch origin.
std::uint64_t patch_seed(std::uint64_t run_seed, const std::string& image_id, int x, int y);

/// File-system-safe form of an image id.
std::string sanitize_id(const std::string& image_id);

}  // namespace histovote

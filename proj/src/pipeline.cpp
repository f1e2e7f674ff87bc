#include "histovote/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <mutex>
#include <sstream>
#include <thread>

#include "histovote/aggregate.hpp"
#include "histovote/augment.hpp"
#include "histovote/bluemask.hpp"
#include "histovote/errors.hpp"
#include "histovote/image_io.hpp"
#include "histovote/overlay.hpp"

namespace histovote {

namespace fs = std::filesystem;
using nlohmann::json;

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const auto n_threads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Processed {
  ImageRecord record;
  std::optional<RgbRaster> overlay;
};

Processed process_entry(const ManifestEntry& entry, const RunConfig& config, const ClassifierBackend* backend,
                        bool want_overlay) {
  Processed out;
  ImageRecord& rec = out.record;
  rec.image_id = entry.id;
  rec.truth = entry.label;
  try {
    const RgbRaster raster = read_image(entry.path, entry.format);
    const BlueMask mask = compute_blue_mask(raster, config.mask);
    rec.selection = select_patches(raster, mask, config.mask, config.grid);
    if (backend) {
      std::vector<ClassLabel> labels;
      for (const auto& spec : rec.selection.selected) {
        const ClassProbabilities probs = classify_patch(*backend, crop(raster, spec.origin));
        const ClassLabel label = argmax_label(probs);
        rec.predictions.push_back({spec, probs, label});
        labels.push_back(label);
      }
      rec.decision = majority_vote(labels);
      if (want_overlay) out.overlay = render_overlay(raster, rec.selection, labels, config.overlay);
    }
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
    rec.selection = {};
    rec.predictions.clear();
    rec.decision.reset();
    out.overlay.reset();
  }
  return out;
}

std::string summary_table(const std::vector<ImageRecord>& records) {
  std::ostringstream os;
  os << std::left << std::setw(40) << "image" << std::setw(10) << "tier" << std::setw(6) << "n" << std::setw(24)
     << "votes N/B/IS/INV" << std::setw(10) << "decision" << "truth\n";
  for (const auto& r : records) {
    os << std::left << std::setw(40) << r.image_id;
    if (!r.ok || !r.decision) {
      os << "ERROR: " << r.error << "\n";
      continue;
    }
    const auto& d = *r.decision;
    std::ostringstream votes;
    votes << d.votes(ClassLabel::Normal) << "/" << d.votes(ClassLabel::Benign) << "/" << d.votes(ClassLabel::InSitu)
          << "/" << d.votes(ClassLabel::Invasive);
    os << std::setw(10) << tier_name(r.selection.tier) << std::setw(6) << d.n_patches << std::setw(24) << votes.str()
       << std::setw(10) << (std::string(label_name(d.label)) + (d.tie_broken ? "*" : ""))
       << (r.truth ? label_name(*r.truth) : "unknown") << "\n";
  }
  os << "(* = tie resolved by precedence)\n";
  return os.str();
}

std::size_t count_failures(const std::vector<ImageRecord>& records) {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.ok; }));
}

void write_eval(const EvalReport& report, const fs::path& dir) {
  write_text(dir / "eval.json", eval_report_to_json(report).dump(2) + "\n");
  write_text(dir / "eval.txt", render_report(report));
}

RunOutcome infer_impl(const DatasetManifest& manifest, const RunConfig& config, const ClassifierBackend& backend,
                      bool overlays) {
  config.validate();
  RunOutcome outcome;
  outcome.records.resize(manifest.entries.size());
  const fs::path& dir = config.output_dir;
  fs::create_directories(dir);
  parallel_for(manifest.entries.size(), config.workers, [&](std::size_t i) {
    Processed p = process_entry(manifest.entries[i], config, &backend, overlays);
    if (p.overlay) write_png(dir / "overlays" / (sanitize_id(manifest.entries[i].id) + ".png"), *p.overlay);
    outcome.records[i] = std::move(p.record);
  });
  std::vector<json> docs;
  for (const auto& r : outcome.records) docs.push_back(image_record_to_json(r));
  write_text(dir / "results.jsonl", to_json_lines(docs));
  write_text(dir / "summary.txt", summary_table(outcome.records));
  outcome.failures = count_failures(outcome.records);
  return outcome;
}

}  // namespace

ImageRecord process_image(const ManifestEntry& entry, const RunConfig& config, const ClassifierBackend& backend) {
  return process_entry(entry, config, &backend, false).record;
}

ImageDecision replay_decision(const RgbRaster& raster, const ImageRecord& record, const ClassifierBackend& backend) {
  std::vector<ClassLabel> labels;
  for (const auto& p : record.predictions) labels.push_back(argmax_label(classify_patch(backend, crop(raster, p.patch.origin))));
  return majority_vote(labels);
}

std::vector<ImageOutcome> outcomes_from_records(const std::vector<ImageRecord>& records) {
  std::vector<ImageOutcome> out;
  for (const auto& r : records) {
    if (!r.ok || !r.decision) continue;
    ImageOutcome o{r.image_id, r.decision->label, {}};
    for (const auto& p : r.predictions) o.patch_labels.push_back(p.label);
    out.push_back(std::move(o));
  }
  return out;
}

RunOutcome run_extract(const DatasetManifest& manifest, const RunConfig& config) {
  config.validate();
  RunOutcome outcome;
  outcome.records.resize(manifest.entries.size());
  parallel_for(manifest.entries.size(), config.workers, [&](std::size_t i) {
    outcome.records[i] = process_entry(manifest.entries[i], config, nullptr, false).record;
  });
  std::vector<json> docs;
  for (const auto& r : outcome.records) {
    if (r.ok) {
      docs.push_back(selection_to_json(r.image_id, r.selection));
    } else {
      docs.push_back({{"image", r.image_id}, {"status", "error"}, {"error", r.error}});
    }
  }
  fs::create_directories(config.output_dir);
  write_text(config.output_dir / "selections.jsonl", to_json_lines(docs));
  outcome.failures = count_failures(outcome.records);
  return outcome;
}

RunOutcome run_infer(const DatasetManifest& manifest, const RunConfig& config, const ClassifierBackend& backend) {
  return infer_impl(manifest, config, backend, false);
}

RunOutcome run_pipeline(const DatasetManifest& manifest, const RunConfig& config, const ClassifierBackend& backend) {
  RunOutcome outcome = infer_impl(manifest, config, backend, config.write_overlays);
  if (manifest.all_labelled()) {
    const auto outcomes = outcomes_from_records(outcome.records);
    outcome.report = evaluate_run(outcomes, manifest.ground_truth());
    write_eval(*outcome.report, config.output_dir);
  }
  return outcome;
}

EvalReport run_evaluate(const DatasetManifest& manifest, const fs::path& results_path, const fs::path& output_dir) {
  std::vector<ImageRecord> records;
  for (const auto& doc : parse_json_lines(read_text(results_path))) records.push_back(image_record_from_json(doc));
  const EvalReport report = evaluate_run(outcomes_from_records(records), manifest.ground_truth());
  fs::create_directories(output_dir);
  write_eval(report, output_dir);
  return report;
}

std::uint64_t patch_seed(std::uint64_t run_seed, const std::string& image_id, int x, int y) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : image_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  const auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t s = mix(run_seed ^ mix(h));
  s = mix(s ^ static_cast<std::uint32_t>(x));
  return mix(s ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(y)) << 32));
}

std::string sanitize_id(const std::string& image_id) {
  fs::path p(image_id);
  std::string base = (p.parent_path() / p.stem()).generic_string();
  for (char& c : base) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_';
    if (!keep) c = '_';
  }
  return base;
}

ExportOutcome run_export_training(const DatasetManifest& manifest, const RunConfig& config) {
  config.validate();
  for (const auto& e : manifest.entries) {
    if (!e.label) throw ManifestError("training export needs a class label for every entry; '" + e.id + "' has none");
  }
  const fs::path root = config.output_dir / "training";
  fs::create_directories(root);

  struct ImageExport {
    std::vector<std::string> rows;
    std::size_t files = 0;
    std::size_t patches = 0;
    bool ok = true;
    std::string error;
  };
  std::vector<ImageExport> per_image(manifest.entries.size());
  parallel_for(manifest.entries.size(), config.workers, [&](std::size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    ImageExport& out = per_image[i];
    try {
      const RgbRaster raster = read_image(e.path, e.format);
      const BlueMask mask = compute_blue_mask(raster, config.mask);
      const SelectionReport sel = select_patches(raster, mask, config.mask, config.grid);
      const std::string cls(label_name(*e.label));
      for (const auto& spec : sel.selected) {
        const std::uint64_t seed = patch_seed(config.seed, e.id, spec.origin.x, spec.origin.y);
        for (const auto& v : standard_augmentations(crop(raster, spec.origin), seed)) {
          std::ostringstream name;
          name << sanitize_id(e.id) << "_" << spec.origin.x << "_" << spec.origin.y << "_" << v.name << ".png";
          const fs::path rel = fs::path(cls) / name.str();
          write_png(root / rel, v.patch);
          std::ostringstream row;
          row << rel.generic_string() << "," << e.id << "," << spec.origin.x << "," << spec.origin.y << "," << v.name
              << "," << seed << "," << cls;
          out.rows.push_back(row.str());
          ++out.files;
        }
        ++out.patches;
      }
    } catch (const std::exception& ex) {
      out.ok = false;
      out.error = ex.what();
    }
  });

  ExportOutcome result;
  std::string csv = "file,source,x,y,variant,seed,label\n";
  std::string errors;
  for (std::size_t i = 0; i < per_image.size(); ++i) {
    const auto& img = per_image[i];
    for (const auto& row : img.rows) csv += row + "\n";
    result.files_written += img.files;
    result.patches += img.patches;
    if (!img.ok) {
      ++result.failures;
      errors += manifest.entries[i].id + ": " + img.error + "\n";
    }
  }
  write_text(root / "generation.csv", csv);
  if (!errors.empty()) write_text(root / "errors.txt", errors);
  return result;
}

}  // namespace histovote

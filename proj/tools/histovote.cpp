// Command-line front end: mask, extract, export-training, infer, evaluate, pipeline.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "histovote/bluemask.hpp"
#include "histovote/classify.hpp"
#include "histovote/config.hpp"
#include "histovote/errors.hpp"
#include "histovote/evaluate.hpp"
#include "histovote/image_io.hpp"
#include "histovote/manifest.hpp"
#include "histovote/overlay.hpp"
#include "histovote/pipeline.hpp"
#include "histovote/tiler.hpp"

namespace fs = std::filesystem;
using namespace histovote;

namespace {

constexpr int kExitImageFailures = 1;
constexpr int kExitFatal = 2;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  std::string backend;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

RunConfig effective_config(const GlobalOptions& g) {
  RunConfig c = resolve_run_config(g.config_path.empty() ? std::nullopt : std::optional<fs::path>(g.config_path));
  if (!g.out_dir.empty()) c.output_dir = g.out_dir;
  if (!g.backend.empty()) c.backend = g.backend;
  if (g.seed) c.seed = *g.seed;
  if (g.workers) c.workers = *g.workers;
  c.validate();
  return c;
}

int report_failures(const RunOutcome& outcome) {
  for (const auto& r : outcome.records) {
    if (!r.ok) std::cerr << "error: " << r.image_id << ": " << r.error << "\n";
  }
  return outcome.all_ok() ? 0 : kExitImageFailures;
}

int cmd_mask(const RunConfig& config, const std::string& image_path, const std::string& format) {
  const RgbRaster raster = read_image(image_path, parse_format(format));
  const BlueMask mask = compute_blue_mask(raster, config.mask);
  const SelectionReport report = select_patches(raster, mask, config.mask, config.grid);
  const std::string stem = fs::path(image_path).stem().string();
  const fs::path dir = config.output_dir;
  write_png(dir / (stem + "_mask.png"), mask);
  write_png(dir / (stem + "_mask_overlay.png"), render_mask_overlay(mask, report, config.overlay));
  write_png(dir / (stem + "_overlay.png"), render_overlay(raster, report, {}, config.overlay));
  std::cout << image_path << ": blue metric " << report.image_blue_metric << ", tier " << tier_name(report.tier) << ", "
            << report.selected.size() << " of " << report.candidates_total << " patches selected"
            << (report.fallback ? " (fallback)" : "") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nuclei-density patch selection and majority-vote classification of H&E images"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("-c,--config", g.config_path, std::string("JSON config file (default: $") + kConfigEnvVar + ")");
  app.add_option("-o,--out", g.out_dir, "Output directory");
  app.add_option("-b,--backend", g.backend, "stub | stub:constant:p0,p1,p2,p3 | model:<file.onnx>");
  app.add_option("--seed", g.seed, "Seed for the stub backend and augmentation");
  app.add_option("-j,--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);

  std::string manifest_path;
  std::string image_path;
  std::string image_format = "auto";
  std::string results_path;
  bool no_overlays = false;

  auto* mask = app.add_subcommand("mask", "Write the bluish mask and patch overlays for one image");
  mask->add_option("image", image_path, "Input image")->required();
  mask->add_option("--format", image_format, "auto | png | jpeg | tiff | ppm");

  auto* extract = app.add_subcommand("extract", "Select patches for every manifest entry (selections.jsonl)");
  auto* export_training = app.add_subcommand("export-training", "Write selected patches and augmentations by class");
  auto* infer = app.add_subcommand("infer", "Classify selected patches and vote (results.jsonl)");
  auto* evaluate = app.add_subcommand("evaluate", "Score results.jsonl against manifest labels");
  auto* pipeline = app.add_subcommand("pipeline", "infer + overlays + evaluation when labels are present");
  auto* config_cmd = app.add_subcommand("config", "Print the effective configuration as JSON");
  for (auto* sub : {extract, export_training, infer, evaluate, pipeline}) {
    sub->add_option("-m,--manifest", manifest_path, "Manifest: path,label,split[,format] per line")->required();
  }
  evaluate->add_option("-r,--results", results_path, "results.jsonl (default: <out>/results.jsonl)");
  pipeline->add_flag("--no-overlays", no_overlays, "Skip overlay images");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config = effective_config(g);
    if (config_cmd->parsed()) {
      std::cout << dump_run_config(config);
      return 0;
    }
    if (mask->parsed()) return cmd_mask(config, image_path, image_format);

    const DatasetManifest manifest = DatasetManifest::load(manifest_path);
    if (extract->parsed()) return report_failures(run_extract(manifest, config));
    if (export_training->parsed()) {
      const ExportOutcome out = run_export_training(manifest, config);
      std::cout << out.files_written << " files from " << out.patches << " patches written to "
                << (config.output_dir / "training").string() << "\n";
      if (out.failures) std::cerr << out.failures << " image(s) failed; see training/errors.txt\n";
      return out.failures == 0 ? 0 : kExitImageFailures;
    }
    if (evaluate->parsed()) {
      const fs::path results = results_path.empty() ? config.output_dir / "results.jsonl" : fs::path(results_path);
      std::cout << render_report(run_evaluate(manifest, results, config.output_dir));
      return 0;
    }
    const auto backend = make_backend(config.backend, config.seed, config.grid.patch_size);
    if (infer->parsed()) return report_failures(run_infer(manifest, config, *backend));
    if (pipeline->parsed()) {
      if (no_overlays) config.write_overlays = false;
      const RunOutcome outcome = run_pipeline(manifest, config, *backend);
      if (outcome.report) std::cout << render_report(*outcome.report);
      return report_failures(outcome);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return 0;
}

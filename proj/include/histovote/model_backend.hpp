#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>

#include "histovote/classify.hpp"
#include "histovote/nn_graph.hpp"

namespace histovote {

/// Preprocessing and output contract exported next to the model file.
struct ModelMetadata {
  enum class Layout { NCHW, NHWC };
  enum class ChannelOrder { RGB, BGR };

  std::string input_name;   // empty: first graph input
  std::string output_name;  // empty: first graph output
  Layout layout = Layout::NCHW;
  ChannelOrder channel_order = ChannelOrder::RGB;
  int input_size = kDefaultPatchSize;
  /// Network input = pixel * scale[c] + offset[c], with c indexing R, G, B.
  std::array<double, 3> scale{1.0 / 255.0, 1.0 / 255.0, 1.0 / 255.0};
  std::array<double, 3> offset{0.0, 0.0, 0.0};
  /// Label of each output index.
  std::array<ClassLabel, kNumClasses> class_order = kAllLabels;
  /// When true the output is passed through softmax first.
  bool output_is_logits = false;
};

/// `model.onnx` -> `model.meta.json`.
std::filesystem::path metadata_path_for(const std::filesystem::path& model_path);
ModelMetadata parse_model_metadata(const std::string& json_text);
ModelMetadata load_model_metadata(const std::filesystem::path& path);

/// Scales and lays out a patch exactly as described by `meta`; the result has batch size 1.
nn::Tensor make_input_tensor(const RgbRaster& patch, const ModelMetadata& meta);

class OnnxModelBackend final : public ClassifierBackend {
 public:
  OnnxModelBackend(nn::Graph graph, ModelMetadata meta);

  /// Loads `model_path` and its sidecar. Throws BackendLoadError when either is missing or corrupt.
  static std::unique_ptr<OnnxModelBackend> load(const std::filesystem::path& model_path);

  ClassProbabilities classify(const RgbRaster& patch) const override;
  int input_size() const override { return meta_.input_size; }
  std::string describe() const override;

  const ModelMetadata& metadata() const { return meta_; }

 private:
  nn::Graph graph_;
  ModelMetadata meta_;
  std::string input_name_;
  std::string output_name_;
};

}  // namespace histovote

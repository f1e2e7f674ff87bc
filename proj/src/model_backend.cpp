#include "histovote/model_backend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "histovote/errors.hpp"

namespace histovote {

namespace {

using nlohmann::json;

std::array<double, 3> read_triple(const json& j, const char* key, std::array<double, 3> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_number()) return {v.get<double>(), v.get<double>(), v.get<double>()};
  if (!v.is_array() || v.size() != 3) throw BackendLoadError(std::string("metadata '") + key + "' must be 3 numbers");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

}  // namespace

std::filesystem::path metadata_path_for(const std::filesystem::path& model_path) {
  std::filesystem::path p = model_path;
  p.replace_extension(".meta.json");
  return p;
}

ModelMetadata parse_model_metadata(const std::string& json_text) {
  ModelMetadata meta;
  try {
    const json j = json::parse(json_text);
    meta.input_name = j.value("input_name", "");
    meta.output_name = j.value("output_name", "");

    const std::string layout = j.value("layout", "NCHW");
    if (layout == "NCHW") meta.layout = ModelMetadata::Layout::NCHW;
    else if (layout == "NHWC") meta.layout = ModelMetadata::Layout::NHWC;
    else throw BackendLoadError("unknown layout '" + layout + "'");

    const std::string order = j.value("channel_order", "RGB");
    if (order == "RGB") meta.channel_order = ModelMetadata::ChannelOrder::RGB;
    else if (order == "BGR") meta.channel_order = ModelMetadata::ChannelOrder::BGR;
    else throw BackendLoadError("unknown channel_order '" + order + "'");

    meta.input_size = j.value("input_size", kDefaultPatchSize);
    if (meta.input_size < 1) throw BackendLoadError("input_size must be positive");
    meta.scale = read_triple(j, "scale", meta.scale);
    meta.offset = read_triple(j, "offset", meta.offset);

    if (j.contains("class_order")) {
      const json& co = j.at("class_order");
      if (!co.is_array() || co.size() != kNumClasses) throw BackendLoadError("class_order must list 4 classes");
      std::array<bool, kNumClasses> seen{};
      for (std::size_t i = 0; i < kNumClasses; ++i) {
        const auto label = parse_label(co[i].get<std::string>());
        if (!label) throw BackendLoadError("unknown class '" + co[i].get<std::string>() + "' in class_order");
        if (seen[index_of(*label)]) throw BackendLoadError("class_order repeats " + std::string(label_name(*label)));
        seen[index_of(*label)] = true;
        meta.class_order[i] = *label;
      }
    }

    const std::string output = j.value("output", "probabilities");
    if (output == "probabilities") meta.output_is_logits = false;
    else if (output == "logits") meta.output_is_logits = true;
    else throw BackendLoadError("unknown output kind '" + output + "'");
  } catch (const json::exception& e) {
    throw BackendLoadError(std::string("malformed model metadata: ") + e.what());
  }
  return meta;
}

ModelMetadata load_model_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BackendLoadError("missing model metadata '" + path.string() + "'");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return parse_model_metadata(text);
  } catch (const BackendLoadError& e) {
    throw BackendLoadError(path.string() + ": " + e.what());
  }
}

nn::Tensor make_input_tensor(const RgbRaster& patch, const ModelMetadata& meta) {
  const int h = patch.height();
  const int w = patch.width();
  const bool bgr = meta.channel_order == ModelMetadata::ChannelOrder::BGR;
  std::vector<float> values(static_cast<std::size_t>(3) * h * w);
  for (int slot = 0; slot < 3; ++slot) {
    const int c = bgr ? 2 - slot : slot;
    const Plane& plane = patch.channel(c);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto v = static_cast<float>(plane(y, x) * meta.scale[c] + meta.offset[c]);
        const std::size_t at = meta.layout == ModelMetadata::Layout::NCHW
                                   ? (static_cast<std::size_t>(slot) * h + y) * w + x
                                   : (static_cast<std::size_t>(y) * w + x) * 3 + slot;
        values[at] = v;
      }
    }
  }
  if (meta.layout == ModelMetadata::Layout::NCHW) return nn::Tensor::floats({1, 3, h, w}, std::move(values));
  return nn::Tensor::floats({1, h, w, 3}, std::move(values));
}

OnnxModelBackend::OnnxModelBackend(nn::Graph graph, ModelMetadata meta)
    : graph_(std::move(graph)), meta_(std::move(meta)) {
  input_name_ = meta_.input_name.empty() ? graph_.inputs().front() : meta_.input_name;
  output_name_ = meta_.output_name.empty() ? graph_.outputs().front() : meta_.output_name;
  if (std::find(graph_.inputs().begin(), graph_.inputs().end(), input_name_) == graph_.inputs().end()) {
    throw BackendLoadError("model has no input named '" + input_name_ + "'");
  }
  if (std::find(graph_.outputs().begin(), graph_.outputs().end(), output_name_) == graph_.outputs().end()) {
    throw BackendLoadError("model has no output named '" + output_name_ + "'");
  }
  if (graph_.inputs().size() != 1) throw BackendLoadError("model must take exactly one input");
  const auto shape = graph_.input_shape(input_name_);
  if (shape.size() == 4) {
    const bool nchw = meta_.layout == ModelMetadata::Layout::NCHW;
    const std::int64_t ch = nchw ? shape[1] : shape[3];
    const std::int64_t hh = nchw ? shape[2] : shape[1];
    const std::int64_t ww = nchw ? shape[3] : shape[2];
    if ((ch > 0 && ch != 3) || (hh > 0 && hh != meta_.input_size) || (ww > 0 && ww != meta_.input_size)) {
      std::ostringstream os;
      os << "model input shape [" << shape[0] << "," << shape[1] << "," << shape[2] << "," << shape[3]
         << "] disagrees with metadata (3 channels, " << meta_.input_size << "px)";
      throw BackendLoadError(os.str());
    }
  }
}

std::unique_ptr<OnnxModelBackend> OnnxModelBackend::load(const std::filesystem::path& model_path) {
  if (!std::filesystem::exists(model_path)) throw BackendLoadError("model file '" + model_path.string() + "' not found");
  ModelMetadata meta = load_model_metadata(metadata_path_for(model_path));
  return std::make_unique<OnnxModelBackend>(nn::Graph::load_file(model_path), std::move(meta));
}

ClassProbabilities OnnxModelBackend::classify(const RgbRaster& patch) const {
  std::vector<std::pair<std::string, nn::Tensor>> feeds;
  feeds.emplace_back(input_name_, make_input_tensor(patch, meta_));
  const auto outputs = graph_.run(feeds);
  const auto at = std::find(graph_.outputs().begin(), graph_.outputs().end(), output_name_) - graph_.outputs().begin();
  const nn::Tensor& out = outputs.at(static_cast<std::size_t>(at));
  if (out.is_integer || out.numel() != static_cast<std::int64_t>(kNumClasses)) {
    throw ModelContractError("model output has " + std::to_string(out.numel()) + " values, expected 4");
  }
  Eigen::Vector4d raw;
  for (std::size_t i = 0; i < kNumClasses; ++i) raw(static_cast<Eigen::Index>(i)) = out.values[i];
  if (meta_.output_is_logits) {
    raw = (raw.array() - raw.maxCoeff()).exp();
    raw /= raw.sum();
  }
  Eigen::Vector4d by_label;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    by_label(static_cast<Eigen::Index>(index_of(meta_.class_order[i]))) = raw(static_cast<Eigen::Index>(i));
  }
  return ClassProbabilities(by_label);
}

std::string OnnxModelBackend::describe() const {
  return "onnx(" + std::to_string(graph_.nodes().size()) + " nodes, input " + input_name_ + ")";
}

}  // namespace histovote

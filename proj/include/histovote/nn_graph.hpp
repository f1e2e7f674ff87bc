#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace histovote::nn {

/// Dense tensor in row-major order. Float tensors carry activations and weights; int64 tensors
/// only appear in shape arithmetic.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> values;
  std::vector<std::int64_t> ints;
  bool is_integer = false;

  static Tensor floats(std::vector<std::int64_t> shape, std::vector<float> values);
  static Tensor integers(std::vector<std::int64_t> shape, std::vector<std::int64_t> ints);

  std::int64_t numel() const;
  std::int64_t dim(int axis) const { return shape.at(static_cast<std::size_t>(axis)); }
  int rank() const { return static_cast<int>(shape.size()); }
};

struct Attribute {
  enum class Kind { Float, Int, String, Floats, Ints, Tensor };
  Kind kind = Kind::Int;
  float f = 0.0f;
  std::int64_t i = 0;
  std::string s;
  std::vector<float> floats;
  std::vector<std::int64_t> ints;
  nn::Tensor tensor;
};

struct Node {
  std::string name;
  std::string op_type;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::map<std::string, Attribute> attributes;
};

/// Operators the interpreter executes.
std::span<const std::string_view> supported_ops();

/// Inference-only interpreter for a subset of the ONNX operator set (default domain), enough for
/// Inception-style CNNs exported from common frameworks. run() is const and allocates its own
/// activations, so one Graph may serve concurrent callers.
class Graph {
 public:
  /// Throws BackendLoadError on unreadable/corrupt files or unsupported operators.
  static Graph load_file(const std::filesystem::path& path);
  static Graph load_bytes(std::span<const std::uint8_t> bytes);

  const std::vector<std::string>& inputs() const { return inputs_; }
  const std::vector<std::string>& outputs() const { return outputs_; }
  /// Declared input shape; dynamic dimensions are -1. Empty when undeclared.
  std::vector<std::int64_t> input_shape(const std::string& name) const;
  const std::vector<Node>& nodes() const { return nodes_; }

  std::vector<Tensor> run(const std::vector<std::pair<std::string, Tensor>>& feeds) const;

 private:
  std::vector<Node> nodes_;
  std::unordered_map<std::string, Tensor> initializers_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::map<std::string, std::vector<std::int64_t>> input_shapes_;
  int opset_ = 13;
  /// For every node, the values whose last consumer it is.
  std::vector<std::vector<std::string>> release_after_;
};

}  // namespace histovote::nn

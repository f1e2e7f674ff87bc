#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "histovote/labels.hpp"
#include "histovote/raster.hpp"
#include "histovote/tiler.hpp"

namespace histovote {

/// Softmax distribution over the four classes, indexed by ClassLabel.
class ClassProbabilities {
 public:
  using Vector = Eigen::Vector4d;
  static constexpr double kSumTolerance = 1e-6;

  /// Accepts non-negative finite entries summing to 1 within kSumTolerance and renormalizes them;
  /// anything else is a ModelContractError.
  explicit ClassProbabilities(const Vector& p);

  static ClassProbabilities uniform();

  double operator[](ClassLabel label) const { return p_(static_cast<Eigen::Index>(index_of(label))); }
  const Vector& values() const { return p_; }

  friend bool operator==(const ClassProbabilities& a, const ClassProbabilities& b) { return a.p_ == b.p_; }

 private:
  Vector p_;
};

/// Label of the largest probability; exact ties go to the highest-precedence tied label.
ClassLabel argmax_label(const ClassProbabilities& probs);

struct PatchPrediction {
  PatchSpec patch;
  ClassProbabilities probs;
  ClassLabel label;
};

/// Patch-level scorer. Implementations must allow concurrent classify() calls.
class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;

  virtual ClassProbabilities classify(const RgbRaster& patch) const = 0;
  virtual int input_size() const { return kDefaultPatchSize; }
  virtual std::string describe() const = 0;
};

/// Validates the patch shape against the backend and scores it.
ClassProbabilities classify_patch(const ClassifierBackend& backend, const RgbRaster& patch);

/// Returns the same distribution for every patch.
class ConstantStubBackend final : public ClassifierBackend {
 public:
  explicit ConstantStubBackend(const ClassProbabilities& probs, int input_size = kDefaultPatchSize);

  ClassProbabilities classify(const RgbRaster& patch) const override;
  int input_size() const override { return input_size_; }
  std::string describe() const override;

 private:
  ClassProbabilities probs_;
  int input_size_;
};

/// Deterministic pseudo-random distribution derived from a 64-bit FNV-1a hash of the
/// interleaved RGB bytes and the salt. Bitwise reproducible on every platform.
class HashStubBackend final : public ClassifierBackend {
 public:
  explicit HashStubBackend(std::uint64_t salt = 0, int input_size = kDefaultPatchSize);

  ClassProbabilities classify(const RgbRaster& patch) const override;
  int input_size() const override { return input_size_; }
  std::string describe() const override;

 private:
  std::uint64_t salt_;
  int input_size_;
};

/// Builds a backend from a selector:
///   "stub" | "stub:hash"                   hash stub salted with `seed`
///   "stub:constant:p0,p1,p2,p3"            constant stub (Normal, Benign, InSitu, Invasive)
///   "model:<path.onnx>"                    ONNX model with its `.meta.json` sidecar
std::unique_ptr<ClassifierBackend> make_backend(const std::string& selector, std::uint64_t seed = 0,
                                                int patch_size = kDefaultPatchSize);

}  // namespace histovote

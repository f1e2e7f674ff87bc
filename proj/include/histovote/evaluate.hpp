#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "histovote/aggregate.hpp"
#include "histovote/labels.hpp"

namespace histovote {

/// Exact accuracy ratio; converted to floating point only on demand.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 0;

  /// NaN when den == 0.
  double value() const;
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

/// Percentage to two significant figures ("85%", "7.5%"); "n/a" for an empty ratio.
std::string format_percent(const Ratio& r);

/// Counts with predicted labels as rows and actual labels as columns.
template <int N>
class Confusion {
 public:
  using Counts = Eigen::Matrix<std::int64_t, N, N>;

  Confusion() : counts_(Counts::Zero()) {}
  explicit Confusion(const Counts& counts) : counts_(counts) {}

  void add(int predicted, int actual, std::int64_t n = 1) { counts_(predicted, actual) += n; }
  std::int64_t operator()(int predicted, int actual) const { return counts_(predicted, actual); }
  const Counts& counts() const { return counts_; }

  std::int64_t total() const { return counts_.sum(); }
  Ratio accuracy() const { return {counts_.trace(), total()}; }
  /// Diagonal over the column (actual) total.
  Ratio class_accuracy(int actual) const { return {counts_(actual, actual), counts_.col(actual).sum()}; }

  friend bool operator==(const Confusion& a, const Confusion& b) { return a.counts_ == b.counts_; }

 private:
  Counts counts_;
};

using ConfusionMatrix = Confusion<4>;
using BinaryConfusionMatrix = Confusion<2>;

/// (predicted, actual)
using LabelPair = std::pair<ClassLabel, ClassLabel>;
using BinaryPair = std::pair<BinaryLabel, BinaryLabel>;

ConfusionMatrix build_confusion(std::span<const LabelPair> pairs);
BinaryConfusionMatrix build_binary_confusion(std::span<const BinaryPair> pairs);
/// Sums rows and columns through to_binary.
BinaryConfusionMatrix collapse_to_binary(const ConfusionMatrix& cm);

/// One image's outcome as seen by the evaluator.
struct ImageOutcome {
  std::string image_id;
  ClassLabel decision = ClassLabel::Normal;
  std::vector<ClassLabel> patch_labels;
};

struct EvalReport {
  Ratio patch_accuracy;
  Ratio image_accuracy_4class;
  Ratio image_accuracy_2class;
  std::array<Ratio, kNumClasses> per_class_accuracy{};
  ConfusionMatrix cm4;
  BinaryConfusionMatrix cm2;
};

/// Patch ground truth is the label of its image. Throws ManifestError for ids missing from `truth`.
EvalReport evaluate_run(std::span<const ImageOutcome> outcomes, const std::map<std::string, ClassLabel>& truth);

/// Published reference figures of the grid-sampling benchmark the method is compared against.
struct BenchmarkFigures {
  double patch_accuracy = 0.67;
  double image_accuracy_4class = 0.78;
  double image_accuracy_2class = 0.83;
};

/// Human-readable tables: 4-class and 2-class confusion matrices plus the benchmark comparison.
std::string render_report(const EvalReport& report, const BenchmarkFigures& benchmark = {});

}  // namespace histovote

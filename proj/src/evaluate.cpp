#include "histovote/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "histovote/errors.hpp"

namespace histovote {

double Ratio::value() const {
  return den == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(num) / static_cast<double>(den);
}

std::string format_percent(const Ratio& r) {
  if (r.den == 0) return "n/a";
  const double pct = 100.0 * r.value();
  std::ostringstream os;
  if (pct == 0.0) {
    os << "0%";
  } else if (pct >= 10.0) {
    os << std::llround(pct) << "%";
  } else {
    // Two significant figures below 10%.
    const int decimals = std::max(1, 1 - static_cast<int>(std::floor(std::log10(pct))));
    os << std::fixed << std::setprecision(decimals) << pct << "%";
  }
  return os.str();
}

ConfusionMatrix build_confusion(std::span<const LabelPair> pairs) {
  ConfusionMatrix cm;
  for (const auto& [predicted, actual] : pairs) {
    cm.add(static_cast<int>(index_of(predicted)), static_cast<int>(index_of(actual)));
  }
  return cm;
}

BinaryConfusionMatrix build_binary_confusion(std::span<const BinaryPair> pairs) {
  BinaryConfusionMatrix cm;
  for (const auto& [predicted, actual] : pairs) cm.add(static_cast<int>(predicted), static_cast<int>(actual));
  return cm;
}

BinaryConfusionMatrix collapse_to_binary(const ConfusionMatrix& cm) {
  BinaryConfusionMatrix out;
  for (ClassLabel p : kAllLabels) {
    for (ClassLabel a : kAllLabels) {
      out.add(static_cast<int>(to_binary(p)), static_cast<int>(to_binary(a)),
              cm(static_cast<int>(index_of(p)), static_cast<int>(index_of(a))));
    }
  }
  return out;
}

EvalReport evaluate_run(std::span<const ImageOutcome> outcomes, const std::map<std::string, ClassLabel>& truth) {
  std::vector<LabelPair> image_pairs;
  std::vector<BinaryPair> binary_pairs;
  Ratio patch{0, 0};
  for (const auto& o : outcomes) {
    const auto it = truth.find(o.image_id);
    if (it == truth.end()) throw ManifestError("image '" + o.image_id + "' has no ground-truth label in the manifest");
    const ClassLabel actual = it->second;
    image_pairs.emplace_back(o.decision, actual);
    binary_pairs.emplace_back(to_binary(o.decision), to_binary(actual));
    for (ClassLabel l : o.patch_labels) {
      patch.num += l == actual ? 1 : 0;
      ++patch.den;
    }
  }
  EvalReport r;
  r.cm4 = build_confusion(image_pairs);
  r.cm2 = build_binary_confusion(binary_pairs);
  r.patch_accuracy = patch;
  r.image_accuracy_4class = r.cm4.accuracy();
  r.image_accuracy_2class = r.cm2.accuracy();
  for (ClassLabel l : kAllLabels) {
    r.per_class_accuracy[index_of(l)] = r.cm4.class_accuracy(static_cast<int>(index_of(l)));
  }
  return r;
}

namespace {

template <int N, typename NameFn>
void render_matrix(std::ostringstream& os, const Confusion<N>& cm, NameFn name, int width) {
  os << std::setw(width) << "Predicted \\ Actual";
  for (int a = 0; a < N; ++a) os << std::setw(width) << name(a);
  os << "\n";
  for (int p = 0; p < N; ++p) {
    os << std::setw(width) << name(p);
    for (int a = 0; a < N; ++a) os << std::setw(width) << cm(p, a);
    os << "\n";
  }
}

std::string pct(double v) { return format_percent(Ratio{std::llround(v * 1000.0), 1000}); }

}  // namespace

std::string render_report(const EvalReport& report, const BenchmarkFigures& benchmark) {
  std::ostringstream os;
  os << "Four class confusion matrix (rows predicted, columns actual)\n";
  render_matrix(os, report.cm4, [](int i) { return std::string(label_name(kAllLabels[static_cast<std::size_t>(i)])); },
                20);
  os << "\nPer-class accuracy:";
  for (ClassLabel l : kAllLabels) os << " " << label_name(l) << "=" << format_percent(report.per_class_accuracy[index_of(l)]);
  os << "\n\nTwo class confusion matrix (rows predicted, columns actual)\n";
  render_matrix(os, report.cm2,
                [](int i) { return std::string(binary_label_name(static_cast<BinaryLabel>(i))); }, 20);
  os << "\nComparison with the grid-sampling benchmark\n";
  os << std::left << std::setw(34) << "Metric" << std::setw(14) << "This run" << "Benchmark\n";
  const auto row = [&](const char* name, const Ratio& ours, double theirs) {
    os << std::left << std::setw(34) << name << std::setw(14) << format_percent(ours) << pct(theirs) << "\n";
  };
  row("Patch-wise accuracy (4 class)", report.patch_accuracy, benchmark.patch_accuracy);
  row("Image-wise accuracy (4 class)", report.image_accuracy_4class, benchmark.image_accuracy_4class);
  row("Image-wise accuracy (2 class)", report.image_accuracy_2class, benchmark.image_accuracy_2class);
  return os.str();
}

}  // namespace histovote

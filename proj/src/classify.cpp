#include "histovote/classify.hpp"

#include <cmath>
#include <sstream>
#include <string_view>

#include "histovote/errors.hpp"
#include "histovote/model_backend.hpp"

namespace histovote {

ClassProbabilities::ClassProbabilities(const Vector& p) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p(i)) || p(i) < 0.0) {
      std::ostringstream os;
      os << "probability " << i << " is " << p(i) << "; expected a finite non-negative value";
      throw ModelContractError(os.str());
    }
  }
  const double sum = p.sum();
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities sum to " << sum << ", outside 1 +/- " << kSumTolerance;
    throw ModelContractError(os.str());
  }
  p_ = sum == 1.0 ? p : Vector(p / sum);
}

ClassProbabilities ClassProbabilities::uniform() { return ClassProbabilities(Vector::Constant(0.25)); }

ClassLabel argmax_label(const ClassProbabilities& probs) {
  ClassLabel best = kPrecedenceOrder.front();
  for (ClassLabel l : kPrecedenceOrder) {
    if (probs[l] > probs[best]) best = l;
  }
  return best;
}

ClassProbabilities classify_patch(const ClassifierBackend& backend, const RgbRaster& patch) {
  const int n = backend.input_size();
  if (patch.width() != n || patch.height() != n) {
    std::ostringstream os;
    os << "patch is " << patch.width() << "x" << patch.height() << ", backend expects " << n << "x" << n;
    throw ShapeError(os.str());
  }
  return backend.classify(patch);
}

ConstantStubBackend::ConstantStubBackend(const ClassProbabilities& probs, int input_size)
    : probs_(probs), input_size_(input_size) {}

ClassProbabilities ConstantStubBackend::classify(const RgbRaster&) const { return probs_; }

std::string ConstantStubBackend::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "stub:constant:";
  for (int i = 0; i < 4; ++i) os << (i ? "," : "") << probs_.values()(i);
  return os.str();
}

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

HashStubBackend::HashStubBackend(std::uint64_t salt, int input_size) : salt_(salt), input_size_(input_size) {}

ClassProbabilities HashStubBackend::classify(const RgbRaster& patch) const {
  std::uint64_t h = kFnvOffset;
  const auto mix = [&h](std::uint8_t byte) {
    h ^= byte;
    h *= kFnvPrime;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(salt_ >> (8 * i)));
  for (int y = 0; y < patch.height(); ++y) {
    for (int x = 0; x < patch.width(); ++x) {
      mix(patch.red()(y, x));
      mix(patch.green()(y, x));
      mix(patch.blue()(y, x));
    }
  }
  // Integer weights in [1, 65536]; the division below is exactly rounded IEEE arithmetic.
  Eigen::Vector4d w;
  std::uint64_t state = h;
  for (int i = 0; i < 4; ++i) {
    state = splitmix64(state);
    w(i) = static_cast<double>((state >> 48) + 1);
  }
  return ClassProbabilities(w / w.sum());
}

std::string HashStubBackend::describe() const { return "stub:hash(salt=" + std::to_string(salt_) + ")"; }

std::unique_ptr<ClassifierBackend> make_backend(const std::string& selector, std::uint64_t seed, int patch_size) {
  const std::string_view sel = selector;
  if (sel == "stub" || sel == "stub:hash") return std::make_unique<HashStubBackend>(seed, patch_size);
  if (constexpr std::string_view prefix = "stub:constant:"; sel.starts_with(prefix)) {
    std::istringstream in{std::string(sel.substr(prefix.size()))};
    Eigen::Vector4d p;
    std::string item;
    int i = 0;
    while (std::getline(in, item, ',')) {
      if (i >= 4) throw ConfigError("constant stub takes exactly 4 probabilities: " + selector);
      try {
        std::size_t used = 0;
        p(i) = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::logic_error&) {
        throw ConfigError("bad probability '" + item + "' in " + selector);
      }
      ++i;
    }
    if (i != 4) throw ConfigError("constant stub takes exactly 4 probabilities: " + selector);
    return std::make_unique<ConstantStubBackend>(ClassProbabilities(p), patch_size);
  }
  if (constexpr std::string_view prefix = "model:"; sel.starts_with(prefix)) {
    return OnnxModelBackend::load(std::string(sel.substr(prefix.size())));
  }
  throw ConfigError("unknown backend selector '" + selector + "'");
}

}  // namespace histovote

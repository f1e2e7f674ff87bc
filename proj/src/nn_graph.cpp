#include "histovote/nn_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <Eigen/Core>

#include "histovote/errors.hpp"
#include "onnx.pb.h"

namespace histovote::nn {

namespace {

using Shape = std::vector<std::int64_t>;
using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::string_view kOps[] = {
    "Add",     "AveragePool",       "BatchNormalization", "Clip",    "Concat",  "Constant", "Conv",
    "Div",     "Dropout",           "Flatten",            "Gather",  "Gemm",    "GlobalAveragePool",
    "GlobalMaxPool", "Identity",    "MatMul",             "MaxPool", "Mul",     "ReduceMean", "Relu",
    "Reshape", "Shape",             "Sigmoid",            "Softmax", "Squeeze", "Sub",      "Transpose",
    "Unsqueeze"};

std::int64_t product(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::int64_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

[[noreturn]] void fail(const Node& node, const std::string& what) {
  throw ModelContractError(node.op_type + " node '" + node.name + "': " + what);
}

// ---------------------------------------------------------------- attributes

const Attribute* find_attr(const Node& n, const std::string& name) {
  const auto it = n.attributes.find(name);
  return it == n.attributes.end() ? nullptr : &it->second;
}

std::int64_t attr_int(const Node& n, const std::string& name, std::int64_t fallback) {
  const Attribute* a = find_attr(n, name);
  return a ? a->i : fallback;
}

float attr_float(const Node& n, const std::string& name, float fallback) {
  const Attribute* a = find_attr(n, name);
  return a ? a->f : fallback;
}

std::string attr_string(const Node& n, const std::string& name, const std::string& fallback) {
  const Attribute* a = find_attr(n, name);
  return a ? a->s : fallback;
}

std::vector<std::int64_t> attr_ints(const Node& n, const std::string& name, std::vector<std::int64_t> fallback) {
  const Attribute* a = find_attr(n, name);
  return a ? a->ints : std::move(fallback);
}

// ---------------------------------------------------------------- protobuf conversion

Tensor convert_tensor(const onnx::TensorProto& t) {
  if (t.data_location() == onnx::TensorProto::EXTERNAL || t.external_data_size() > 0) {
    throw BackendLoadError("tensor '" + t.name() + "' uses external data, which is not supported");
  }
  Shape shape(t.dims().begin(), t.dims().end());
  const auto n = static_cast<std::size_t>(product(shape));
  const std::string& raw = t.raw_data();
  const auto bad_size = [&]() {
    return BackendLoadError("tensor '" + t.name() + "' payload does not match shape " + shape_string(shape));
  };
  switch (t.data_type()) {
    case onnx::TensorProto::FLOAT: {
      std::vector<float> v(n);
      if (!raw.empty()) {
        if (raw.size() != n * sizeof(float)) throw bad_size();
        std::memcpy(v.data(), raw.data(), raw.size());
      } else {
        if (static_cast<std::size_t>(t.float_data_size()) != n) throw bad_size();
        std::copy(t.float_data().begin(), t.float_data().end(), v.begin());
      }
      return Tensor::floats(std::move(shape), std::move(v));
    }
    case onnx::TensorProto::DOUBLE: {
      std::vector<float> v(n);
      if (!raw.empty()) {
        if (raw.size() != n * sizeof(double)) throw bad_size();
        for (std::size_t i = 0; i < n; ++i) {
          double d;
          std::memcpy(&d, raw.data() + i * sizeof(double), sizeof d);
          v[i] = static_cast<float>(d);
        }
      } else {
        if (static_cast<std::size_t>(t.double_data_size()) != n) throw bad_size();
        for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(t.double_data(static_cast<int>(i)));
      }
      return Tensor::floats(std::move(shape), std::move(v));
    }
    case onnx::TensorProto::INT64: {
      std::vector<std::int64_t> v(n);
      if (!raw.empty()) {
        if (raw.size() != n * sizeof(std::int64_t)) throw bad_size();
        std::memcpy(v.data(), raw.data(), raw.size());
      } else {
        if (static_cast<std::size_t>(t.int64_data_size()) != n) throw bad_size();
        std::copy(t.int64_data().begin(), t.int64_data().end(), v.begin());
      }
      return Tensor::integers(std::move(shape), std::move(v));
    }
    case onnx::TensorProto::INT32: {
      std::vector<std::int64_t> v(n);
      if (!raw.empty()) {
        if (raw.size() != n * sizeof(std::int32_t)) throw bad_size();
        for (std::size_t i = 0; i < n; ++i) {
          std::int32_t x;
          std::memcpy(&x, raw.data() + i * sizeof x, sizeof x);
          v[i] = x;
        }
      } else {
        if (static_cast<std::size_t>(t.int32_data_size()) != n) throw bad_size();
        std::copy(t.int32_data().begin(), t.int32_data().end(), v.begin());
      }
      return Tensor::integers(std::move(shape), std::move(v));
    }
    default:
      throw BackendLoadError("tensor '" + t.name() + "' has unsupported data type " + std::to_string(t.data_type()));
  }
}

Attribute convert_attribute(const onnx::AttributeProto& a) {
  Attribute out;
  switch (a.type()) {
    case onnx::AttributeProto::FLOAT:
      out.kind = Attribute::Kind::Float;
      out.f = a.f();
      break;
    case onnx::AttributeProto::INT:
      out.kind = Attribute::Kind::Int;
      out.i = a.i();
      break;
    case onnx::AttributeProto::STRING:
      out.kind = Attribute::Kind::String;
      out.s = a.s();
      break;
    case onnx::AttributeProto::FLOATS:
      out.kind = Attribute::Kind::Floats;
      out.floats.assign(a.floats().begin(), a.floats().end());
      break;
    case onnx::AttributeProto::INTS:
      out.kind = Attribute::Kind::Ints;
      out.ints.assign(a.ints().begin(), a.ints().end());
      break;
    case onnx::AttributeProto::TENSOR:
      out.kind = Attribute::Kind::Tensor;
      out.tensor = convert_tensor(a.t());
      break;
    default:
      throw BackendLoadError("attribute '" + a.name() + "' has unsupported type " + std::to_string(a.type()));
  }
  return out;
}

Tensor constant_value(const Node& n) {
  if (const Attribute* a = find_attr(n, "value")) return a->tensor;
  if (const Attribute* a = find_attr(n, "value_float")) return Tensor::floats({}, {a->f});
  if (const Attribute* a = find_attr(n, "value_floats")) {
    return Tensor::floats({static_cast<std::int64_t>(a->floats.size())}, a->floats);
  }
  if (const Attribute* a = find_attr(n, "value_int")) return Tensor::integers({}, {a->i});
  if (const Attribute* a = find_attr(n, "value_ints")) {
    return Tensor::integers({static_cast<std::int64_t>(a->ints.size())}, a->ints);
  }
  throw BackendLoadError("Constant node '" + n.name + "' has no supported value attribute");
}

// ---------------------------------------------------------------- kernels

int normalize_axis(std::int64_t axis, int rank, const Node& node) {
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) fail(node, "axis out of range");
  return static_cast<int>(axis);
}

const Tensor& require_float(const Tensor& t, const Node& node) {
  if (t.is_integer) fail(node, "expected a float tensor");
  return t;
}

Shape broadcast_shape(const Shape& a, const Shape& b, const Node& node) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::int64_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::int64_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) fail(node, "cannot broadcast " + shape_string(a) + " with " + shape_string(b));
    out[i] = std::max(da, db);
  }
  return out;
}

// Strides of `s` aligned to an output of rank `rank`, zero where the dimension broadcasts.
std::vector<std::int64_t> broadcast_strides(const Shape& s, const Shape& out) {
  std::vector<std::int64_t> strides(out.size(), 0);
  std::int64_t stride = 1;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const std::size_t i = s.size() - 1 - k;
    const std::size_t o = out.size() - 1 - k;
    strides[o] = s[i] == 1 ? 0 : stride;
    stride *= s[i];
  }
  return strides;
}

template <typename T, typename Op>
std::vector<T> broadcast_apply(const std::vector<T>& a, const Shape& sa, const std::vector<T>& b, const Shape& sb,
                               const Shape& out, Op op) {
  const auto n = static_cast<std::size_t>(product(out));
  std::vector<T> result(n);
  if (sa == sb) {
    for (std::size_t i = 0; i < n; ++i) result[i] = op(a[i], b[i]);
    return result;
  }
  const auto st_a = broadcast_strides(sa, out);
  const auto st_b = broadcast_strides(sb, out);
  std::vector<std::int64_t> index(out.size(), 0);
  std::int64_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < n; ++i) {
    result[i] = op(a[static_cast<std::size_t>(ia)], b[static_cast<std::size_t>(ib)]);
    for (int d = static_cast<int>(out.size()) - 1; d >= 0; --d) {
      ++index[d];
      ia += st_a[d];
      ib += st_b[d];
      if (index[d] < out[d]) break;
      ia -= st_a[d] * out[d];
      ib -= st_b[d] * out[d];
      index[d] = 0;
    }
  }
  return result;
}

Tensor binary_op(const Node& node, const Tensor& a, const Tensor& b) {
  const Shape out = broadcast_shape(a.shape, b.shape, node);
  const std::string& op = node.op_type;
  if (a.is_integer && b.is_integer) {
    auto fn = [&op](std::int64_t x, std::int64_t y) -> std::int64_t {
      if (op == "Add") return x + y;
      if (op == "Sub") return x - y;
      if (op == "Mul") return x * y;
      return y == 0 ? 0 : x / y;
    };
    return Tensor::integers(out, broadcast_apply(a.ints, a.shape, b.ints, b.shape, out, fn));
  }
  if (a.is_integer != b.is_integer) fail(node, "mixed integer and float operands");
  std::vector<float> values;
  if (op == "Add") values = broadcast_apply(a.values, a.shape, b.values, b.shape, out, std::plus<float>());
  else if (op == "Sub") values = broadcast_apply(a.values, a.shape, b.values, b.shape, out, std::minus<float>());
  else if (op == "Mul") values = broadcast_apply(a.values, a.shape, b.values, b.shape, out, std::multiplies<float>());
  else values = broadcast_apply(a.values, a.shape, b.values, b.shape, out, std::divides<float>());
  return Tensor::floats(out, std::move(values));
}

struct Window2d {
  std::int64_t kh, kw, sh, sw, dh, dw, pad_top, pad_left, pad_bottom, pad_right, out_h, out_w;
};

Window2d window_for(const Node& node, std::int64_t in_h, std::int64_t in_w, std::int64_t kh, std::int64_t kw,
                    bool allow_ceil) {
  const auto strides = attr_ints(node, "strides", {1, 1});
  const auto dilations = attr_ints(node, "dilations", {1, 1});
  auto pads = attr_ints(node, "pads", {0, 0, 0, 0});
  if (strides.size() != 2 || dilations.size() != 2 || pads.size() != 4) fail(node, "only 2-D windows are supported");
  Window2d w{kh, kw, strides[0], strides[1], dilations[0], dilations[1], pads[0], pads[1], pads[2], pads[3], 0, 0};
  const std::int64_t ext_h = (kh - 1) * w.dh + 1;
  const std::int64_t ext_w = (kw - 1) * w.dw + 1;
  const std::string auto_pad = attr_string(node, "auto_pad", "NOTSET");
  if (auto_pad == "SAME_UPPER" || auto_pad == "SAME_LOWER") {
    w.out_h = (in_h + w.sh - 1) / w.sh;
    w.out_w = (in_w + w.sw - 1) / w.sw;
    const std::int64_t th = std::max<std::int64_t>(0, (w.out_h - 1) * w.sh + ext_h - in_h);
    const std::int64_t tw = std::max<std::int64_t>(0, (w.out_w - 1) * w.sw + ext_w - in_w);
    const bool upper = auto_pad == "SAME_UPPER";
    w.pad_top = upper ? th / 2 : th - th / 2;
    w.pad_bottom = th - w.pad_top;
    w.pad_left = upper ? tw / 2 : tw - tw / 2;
    w.pad_right = tw - w.pad_left;
    return w;
  }
  if (auto_pad == "VALID") w.pad_top = w.pad_left = w.pad_bottom = w.pad_right = 0;
  else if (auto_pad != "NOTSET") fail(node, "unsupported auto_pad " + auto_pad);
  const bool ceil_mode = allow_ceil && attr_int(node, "ceil_mode", 0) != 0;
  const auto out_dim = [&](std::int64_t in, std::int64_t pad_begin, std::int64_t pad_end, std::int64_t ext,
                           std::int64_t stride) {
    const std::int64_t span = in + pad_begin + pad_end - ext;
    if (span < 0) fail(node, "window larger than padded input");
    std::int64_t o = (ceil_mode ? (span + stride - 1) / stride : span / stride) + 1;
    // The last window must start inside the input or its leading padding.
    if (ceil_mode && (o - 1) * stride >= in + pad_begin) --o;
    return o;
  };
  w.out_h = out_dim(in_h, w.pad_top, w.pad_bottom, ext_h, w.sh);
  w.out_w = out_dim(in_w, w.pad_left, w.pad_right, ext_w, w.sw);
  return w;
}

Tensor conv(const Node& node, const Tensor& x, const Tensor& weight, const Tensor* bias) {
  require_float(x, node);
  if (x.rank() != 4 || weight.rank() != 4) fail(node, "only 2-D convolution on NCHW input is supported");
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), wdt = x.dim(3);
  const std::int64_t m = weight.dim(0), cg = weight.dim(1), kh = weight.dim(2), kw = weight.dim(3);
  const std::int64_t group = attr_int(node, "group", 1);
  if (group < 1 || c != cg * group || m % group != 0) {
    fail(node, "channel mismatch: input " + shape_string(x.shape) + ", weight " + shape_string(weight.shape));
  }
  const Window2d win = window_for(node, h, wdt, kh, kw, false);
  const std::int64_t mg = m / group;
  const std::int64_t out_hw = win.out_h * win.out_w;
  const std::int64_t patch = cg * kh * kw;
  std::vector<float> out(static_cast<std::size_t>(n * m * out_hw));

  const bool pointwise = kh == 1 && kw == 1 && win.sh == 1 && win.sw == 1 && win.pad_top == 0 &&
                         win.pad_left == 0 && win.pad_bottom == 0 && win.pad_right == 0;
  RowMatrix cols;
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t g = 0; g < group; ++g) {
      const float* src = x.values.data() + (b * c + g * cg) * h * wdt;
      Eigen::Map<const RowMatrix> wmat(weight.values.data() + g * mg * patch, mg, patch);
      Eigen::Map<RowMatrix> dst(out.data() + (b * m + g * mg) * out_hw, mg, out_hw);
      if (pointwise) {
        dst.noalias() = wmat * Eigen::Map<const RowMatrix>(src, cg, out_hw);
      } else {
        cols.resize(patch, out_hw);
        for (std::int64_t ch = 0; ch < cg; ++ch) {
          for (std::int64_t ky = 0; ky < kh; ++ky) {
            for (std::int64_t kx = 0; kx < kw; ++kx) {
              float* row = cols.data() + ((ch * kh + ky) * kw + kx) * out_hw;
              for (std::int64_t oy = 0; oy < win.out_h; ++oy) {
                const std::int64_t iy = oy * win.sh - win.pad_top + ky * win.dh;
                for (std::int64_t ox = 0; ox < win.out_w; ++ox) {
                  const std::int64_t ix = ox * win.sw - win.pad_left + kx * win.dw;
                  row[oy * win.out_w + ox] =
                      (iy >= 0 && iy < h && ix >= 0 && ix < wdt) ? src[(ch * h + iy) * wdt + ix] : 0.0f;
                }
              }
            }
          }
        }
        dst.noalias() = wmat * cols;
      }
      if (bias) {
        for (std::int64_t k = 0; k < mg; ++k) dst.row(k).array() += bias->values[static_cast<std::size_t>(g * mg + k)];
      }
    }
  }
  return Tensor::floats({n, m, win.out_h, win.out_w}, std::move(out));
}

Tensor pool(const Node& node, const Tensor& x, bool is_max) {
  require_float(x, node);
  if (x.rank() != 4) fail(node, "only 2-D pooling on NCHW input is supported");
  const auto kernel = attr_ints(node, "kernel_shape", {});
  if (kernel.size() != 2) fail(node, "kernel_shape must have two entries");
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const Window2d win = window_for(node, h, w, kernel[0], kernel[1], true);
  const bool include_pad = attr_int(node, "count_include_pad", 0) != 0;
  std::vector<float> out(static_cast<std::size_t>(n * c * win.out_h * win.out_w));
  std::size_t k = 0;
  for (std::int64_t plane = 0; plane < n * c; ++plane) {
    const float* src = x.values.data() + plane * h * w;
    for (std::int64_t oy = 0; oy < win.out_h; ++oy) {
      for (std::int64_t ox = 0; ox < win.out_w; ++ox) {
        float acc = is_max ? -std::numeric_limits<float>::infinity() : 0.0f;
        std::int64_t count = 0, padded_count = 0;
        for (std::int64_t ky = 0; ky < win.kh; ++ky) {
          const std::int64_t iy = oy * win.sh - win.pad_top + ky * win.dh;
          for (std::int64_t kx = 0; kx < win.kw; ++kx) {
            const std::int64_t ix = ox * win.sw - win.pad_left + kx * win.dw;
            if (iy >= -win.pad_top && iy < h + win.pad_bottom && ix >= -win.pad_left && ix < w + win.pad_right) {
              ++padded_count;
            }
            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
            const float v = src[iy * w + ix];
            acc = is_max ? std::max(acc, v) : acc + v;
            ++count;
          }
        }
        if (!is_max) {
          const std::int64_t denom = include_pad ? padded_count : count;
          acc = denom > 0 ? acc / static_cast<float>(denom) : 0.0f;
        }
        out[k++] = acc;
      }
    }
  }
  return Tensor::floats({n, c, win.out_h, win.out_w}, std::move(out));
}

Tensor global_pool(const Node& node, const Tensor& x, bool is_max) {
  require_float(x, node);
  if (x.rank() < 3) fail(node, "expected N x C x spatial input");
  const std::int64_t n = x.dim(0), c = x.dim(1);
  const std::int64_t spatial = product(x.shape) / (n * c);
  Eigen::Map<const RowMatrix> in(x.values.data(), n * c, spatial);
  Eigen::VectorXf reduced = is_max ? Eigen::VectorXf(in.rowwise().maxCoeff()) : Eigen::VectorXf(in.rowwise().mean());
  Shape shape(x.shape.size(), 1);
  shape[0] = n;
  shape[1] = c;
  return Tensor::floats(shape, std::vector<float>(reduced.data(), reduced.data() + reduced.size()));
}

Tensor concat(const Node& node, const std::vector<const Tensor*>& parts) {
  if (parts.empty()) fail(node, "no inputs");
  const int rank = parts[0]->rank();
  const int axis = normalize_axis(attr_int(node, "axis", 0), rank, node);
  Shape out = parts[0]->shape;
  out[axis] = 0;
  for (const Tensor* p : parts) {
    if (p->rank() != rank || p->is_integer != parts[0]->is_integer) fail(node, "incompatible inputs");
    for (int d = 0; d < rank; ++d) {
      if (d != axis && p->shape[d] != parts[0]->shape[d]) fail(node, "mismatched dimension " + std::to_string(d));
    }
    out[axis] += p->shape[axis];
  }
  std::int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= out[d];
  for (int d = axis + 1; d < rank; ++d) inner *= out[d];
  const bool ints = parts[0]->is_integer;
  std::vector<float> fv;
  std::vector<std::int64_t> iv;
  (ints ? iv.reserve(product(out)) : fv.reserve(product(out)));
  for (std::int64_t o = 0; o < outer; ++o) {
    for (const Tensor* p : parts) {
      const std::int64_t chunk = p->shape[axis] * inner;
      if (ints) {
        iv.insert(iv.end(), p->ints.begin() + o * chunk, p->ints.begin() + (o + 1) * chunk);
      } else {
        fv.insert(fv.end(), p->values.begin() + o * chunk, p->values.begin() + (o + 1) * chunk);
      }
    }
  }
  return ints ? Tensor::integers(out, std::move(iv)) : Tensor::floats(out, std::move(fv));
}

Tensor with_shape(const Tensor& t, Shape shape) {
  Tensor out = t;
  out.shape = std::move(shape);
  return out;
}

Tensor reshape(const Node& node, const Tensor& x, const Tensor& shape_t) {
  if (!shape_t.is_integer) fail(node, "shape input must be int64");
  Shape shape = shape_t.ints;
  std::int64_t known = 1;
  int infer = -1;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == 0 && attr_int(node, "allowzero", 0) == 0) shape[i] = x.shape.at(i);
    if (shape[i] == -1) {
      if (infer >= 0) fail(node, "more than one -1 in target shape");
      infer = static_cast<int>(i);
    } else {
      known *= shape[i];
    }
  }
  if (infer >= 0) shape[static_cast<std::size_t>(infer)] = known == 0 ? 0 : x.numel() / known;
  if (product(shape) != x.numel()) fail(node, "cannot reshape " + shape_string(x.shape) + " to " + shape_string(shape));
  return with_shape(x, std::move(shape));
}

Tensor flatten(const Node& node, const Tensor& x) {
  const int rank = x.rank();
  std::int64_t axis = attr_int(node, "axis", 1);
  if (axis < 0) axis += rank;
  if (axis < 0 || axis > rank) fail(node, "axis out of range");
  std::int64_t outer = 1;
  for (int d = 0; d < axis; ++d) outer *= x.shape[d];
  return with_shape(x, {outer, outer == 0 ? 0 : x.numel() / outer});
}

Tensor gemm(const Node& node, const Tensor& a, const Tensor& b, const Tensor* c) {
  require_float(a, node);
  require_float(b, node);
  if (a.rank() != 2 || b.rank() != 2) fail(node, "inputs must be matrices");
  const bool ta = attr_int(node, "transA", 0) != 0;
  const bool tb = attr_int(node, "transB", 0) != 0;
  const float alpha = attr_float(node, "alpha", 1.0f);
  const float beta = attr_float(node, "beta", 1.0f);
  Eigen::Map<const RowMatrix> am(a.values.data(), a.dim(0), a.dim(1));
  Eigen::Map<const RowMatrix> bm(b.values.data(), b.dim(0), b.dim(1));
  RowMatrix lhs = ta ? RowMatrix(am.transpose()) : RowMatrix(am);
  RowMatrix rhs = tb ? RowMatrix(bm.transpose()) : RowMatrix(bm);
  if (lhs.cols() != rhs.rows()) fail(node, "inner dimensions differ");
  RowMatrix y = alpha * (lhs * rhs);
  if (c) {
    require_float(*c, node);
    const Shape out{y.rows(), y.cols()};
    const auto bias = broadcast_apply(std::vector<float>(static_cast<std::size_t>(y.size()), 0.0f), out, c->values,
                                      c->shape, broadcast_shape(out, c->shape, node), std::plus<float>());
    if (static_cast<Eigen::Index>(bias.size()) != y.size()) fail(node, "C does not broadcast to the output");
    y += beta * Eigen::Map<const RowMatrix>(bias.data(), y.rows(), y.cols());
  }
  return Tensor::floats({y.rows(), y.cols()}, std::vector<float>(y.data(), y.data() + y.size()));
}

Tensor matmul(const Node& node, const Tensor& a, const Tensor& b) {
  require_float(a, node);
  require_float(b, node);
  if (a.rank() < 2 || b.rank() != 2) fail(node, "only (..., K) x (K, N) products are supported");
  const std::int64_t k = a.shape.back();
  if (b.dim(0) != k) fail(node, "inner dimensions differ");
  const std::int64_t rows = a.numel() / k;
  Eigen::Map<const RowMatrix> am(a.values.data(), rows, k);
  Eigen::Map<const RowMatrix> bm(b.values.data(), k, b.dim(1));
  RowMatrix y = am * bm;
  Shape out = a.shape;
  out.back() = b.dim(1);
  return Tensor::floats(out, std::vector<float>(y.data(), y.data() + y.size()));
}

Tensor softmax(const Node& node, const Tensor& x, int opset) {
  require_float(x, node);
  const int rank = x.rank();
  const int axis = normalize_axis(attr_int(node, "axis", opset >= 13 ? -1 : 1), rank, node);
  std::int64_t outer = 1, len = 1, inner = 1;
  if (opset >= 13) {
    for (int d = 0; d < axis; ++d) outer *= x.shape[d];
    len = x.shape[axis];
    for (int d = axis + 1; d < rank; ++d) inner *= x.shape[d];
  } else {
    for (int d = 0; d < axis; ++d) outer *= x.shape[d];
    len = x.numel() / std::max<std::int64_t>(outer, 1);
  }
  std::vector<float> out(x.values.size());
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t i = 0; i < inner; ++i) {
      const auto at = [&](std::int64_t j) { return static_cast<std::size_t>((o * len + j) * inner + i); };
      float mx = -std::numeric_limits<float>::infinity();
      for (std::int64_t j = 0; j < len; ++j) mx = std::max(mx, x.values[at(j)]);
      double sum = 0.0;
      for (std::int64_t j = 0; j < len; ++j) sum += std::exp(static_cast<double>(x.values[at(j)] - mx));
      for (std::int64_t j = 0; j < len; ++j) {
        out[at(j)] = static_cast<float>(std::exp(static_cast<double>(x.values[at(j)] - mx)) / sum);
      }
    }
  }
  return Tensor::floats(x.shape, std::move(out));
}

Tensor batch_norm(const Node& node, const Tensor& x, const Tensor& scale, const Tensor& bias, const Tensor& mean,
                  const Tensor& var) {
  require_float(x, node);
  if (x.rank() < 2) fail(node, "expected N x C x ... input");
  const float eps = attr_float(node, "epsilon", 1e-5f);
  const std::int64_t n = x.dim(0), c = x.dim(1);
  const std::int64_t inner = x.numel() / (n * c);
  std::vector<float> out(x.values.size());
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const auto i = static_cast<std::size_t>(ch);
      const float s = scale.values[i] / std::sqrt(var.values[i] + eps);
      const float t = bias.values[i] - mean.values[i] * s;
      const std::int64_t base = (b * c + ch) * inner;
      for (std::int64_t k = 0; k < inner; ++k) {
        out[static_cast<std::size_t>(base + k)] = x.values[static_cast<std::size_t>(base + k)] * s + t;
      }
    }
  }
  return Tensor::floats(x.shape, std::move(out));
}

Tensor transpose(const Node& node, const Tensor& x) {
  const int rank = x.rank();
  std::vector<std::int64_t> perm(static_cast<std::size_t>(rank));
  std::iota(perm.rbegin(), perm.rend(), 0);
  perm = attr_ints(node, "perm", perm);
  if (static_cast<int>(perm.size()) != rank) fail(node, "perm length differs from rank");
  Shape out(static_cast<std::size_t>(rank));
  for (int d = 0; d < rank; ++d) out[d] = x.shape.at(static_cast<std::size_t>(perm[d]));
  std::vector<std::int64_t> in_strides(static_cast<std::size_t>(rank), 1);
  for (int d = rank - 2; d >= 0; --d) in_strides[d] = in_strides[d + 1] * x.shape[d + 1];
  std::vector<std::int64_t> strides(static_cast<std::size_t>(rank));
  for (int d = 0; d < rank; ++d) strides[d] = in_strides[static_cast<std::size_t>(perm[d])];
  const auto n = static_cast<std::size_t>(x.numel());
  std::vector<std::size_t> src_index(n);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(rank), 0);
  std::int64_t off = 0;
  for (std::size_t i = 0; i < n; ++i) {
    src_index[i] = static_cast<std::size_t>(off);
    for (int d = rank - 1; d >= 0; --d) {
      ++idx[d];
      off += strides[d];
      if (idx[d] < out[d]) break;
      off -= strides[d] * out[d];
      idx[d] = 0;
    }
  }
  if (x.is_integer) {
    std::vector<std::int64_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = x.ints[src_index[i]];
    return Tensor::integers(out, std::move(v));
  }
  std::vector<float> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = x.values[src_index[i]];
  return Tensor::floats(out, std::move(v));
}

std::vector<std::int64_t> axes_operand(const Node& node, const std::vector<const Tensor*>& in) {
  if (in.size() > 1 && in[1]) {
    if (!in[1]->is_integer) fail(node, "axes must be int64");
    return in[1]->ints;
  }
  return attr_ints(node, "axes", {});
}

Tensor unsqueeze(const Node& node, const Tensor& x, std::vector<std::int64_t> axes) {
  const int out_rank = x.rank() + static_cast<int>(axes.size());
  for (auto& a : axes) a = normalize_axis(a, out_rank, node);
  std::sort(axes.begin(), axes.end());
  Shape out;
  std::size_t src = 0, ai = 0;
  for (int d = 0; d < out_rank; ++d) {
    if (ai < axes.size() && axes[ai] == d) {
      out.push_back(1);
      ++ai;
    } else {
      out.push_back(x.shape.at(src++));
    }
  }
  return with_shape(x, std::move(out));
}

Tensor squeeze(const Node& node, const Tensor& x, std::vector<std::int64_t> axes) {
  for (auto& a : axes) a = normalize_axis(a, x.rank(), node);
  Shape out;
  for (int d = 0; d < x.rank(); ++d) {
    const bool listed = std::find(axes.begin(), axes.end(), d) != axes.end();
    if ((axes.empty() && x.shape[d] == 1) || listed) {
      if (x.shape[d] != 1) fail(node, "cannot squeeze a dimension of size " + std::to_string(x.shape[d]));
      continue;
    }
    out.push_back(x.shape[d]);
  }
  return with_shape(x, std::move(out));
}

Tensor gather(const Node& node, const Tensor& data, const Tensor& indices) {
  if (!indices.is_integer) fail(node, "indices must be integers");
  const int axis = normalize_axis(attr_int(node, "axis", 0), data.rank(), node);
  std::int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= data.shape[d];
  for (int d = axis + 1; d < data.rank(); ++d) inner *= data.shape[d];
  const std::int64_t len = data.shape[axis];
  Shape out(data.shape.begin(), data.shape.begin() + axis);
  out.insert(out.end(), indices.shape.begin(), indices.shape.end());
  out.insert(out.end(), data.shape.begin() + axis + 1, data.shape.end());
  std::vector<float> fv;
  std::vector<std::int64_t> iv;
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t raw : indices.ints) {
      const std::int64_t j = raw < 0 ? raw + len : raw;
      if (j < 0 || j >= len) fail(node, "index out of range");
      const std::int64_t base = (o * len + j) * inner;
      if (data.is_integer) iv.insert(iv.end(), data.ints.begin() + base, data.ints.begin() + base + inner);
      else fv.insert(fv.end(), data.values.begin() + base, data.values.begin() + base + inner);
    }
  }
  return data.is_integer ? Tensor::integers(out, std::move(iv)) : Tensor::floats(out, std::move(fv));
}

Tensor reduce_mean(const Node& node, const Tensor& x, std::vector<std::int64_t> axes) {
  require_float(x, node);
  const int rank = x.rank();
  if (axes.empty()) {
    axes.resize(static_cast<std::size_t>(rank));
    std::iota(axes.begin(), axes.end(), 0);
  }
  std::vector<bool> reduced(static_cast<std::size_t>(rank), false);
  for (auto a : axes) reduced[static_cast<std::size_t>(normalize_axis(a, rank, node))] = true;
  const bool keep = attr_int(node, "keepdims", 1) != 0;
  Shape kept_shape(x.shape);
  std::int64_t count = 1;
  for (int d = 0; d < rank; ++d) {
    if (reduced[d]) {
      count *= x.shape[d];
      kept_shape[d] = 1;
    }
  }
  std::vector<float> acc(static_cast<std::size_t>(product(kept_shape)), 0.0f);
  const auto st = broadcast_strides(kept_shape, x.shape);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(rank), 0);
  std::int64_t off = 0;
  for (float v : x.values) {
    acc[static_cast<std::size_t>(off)] += v;
    for (int d = rank - 1; d >= 0; --d) {
      ++idx[d];
      off += st[d];
      if (idx[d] < x.shape[d]) break;
      off -= st[d] * x.shape[d];
      idx[d] = 0;
    }
  }
  for (float& v : acc) v /= static_cast<float>(count);
  Shape out;
  for (int d = 0; d < rank; ++d) {
    if (!reduced[d]) out.push_back(x.shape[d]);
    else if (keep) out.push_back(1);
  }
  return Tensor::floats(out, std::move(acc));
}

template <typename Fn>
Tensor unary(const Node& node, const Tensor& x, Fn fn) {
  require_float(x, node);
  std::vector<float> out(x.values.size());
  std::transform(x.values.begin(), x.values.end(), out.begin(), fn);
  return Tensor::floats(x.shape, std::move(out));
}

}  // namespace

Tensor Tensor::floats(std::vector<std::int64_t> shape, std::vector<float> values) {
  Tensor t;
  t.shape = std::move(shape);
  t.values = std::move(values);
  return t;
}

Tensor Tensor::integers(std::vector<std::int64_t> shape, std::vector<std::int64_t> ints) {
  Tensor t;
  t.shape = std::move(shape);
  t.ints = std::move(ints);
  t.is_integer = true;
  return t;
}

std::int64_t Tensor::numel() const { return product(shape); }

std::span<const std::string_view> supported_ops() { return kOps; }

Graph Graph::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BackendLoadError("cannot open model file '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return load_bytes(bytes);
  } catch (const BackendLoadError& e) {
    throw BackendLoadError(path.string() + ": " + e.what());
  }
}

Graph Graph::load_bytes(std::span<const std::uint8_t> bytes) {
  onnx::ModelProto model;
  if (bytes.empty() || !model.ParseFromArray(bytes.data(), static_cast<int>(bytes.size()))) {
    throw BackendLoadError("model is not a valid ONNX protobuf");
  }
  if (!model.has_graph()) throw BackendLoadError("model has no graph");
  int opset = 0;
  for (const auto& imp : model.opset_import()) {
    if (imp.domain().empty() || imp.domain() == "ai.onnx") opset = static_cast<int>(imp.version());
  }
  const onnx::GraphProto& g = model.graph();

  Graph graph;
  graph.opset_ = opset == 0 ? 13 : opset;
  for (const auto& init : g.initializer()) graph.initializers_.emplace(init.name(), convert_tensor(init));
  for (const auto& vi : g.input()) {
    if (graph.initializers_.count(vi.name())) continue;
    graph.inputs_.push_back(vi.name());
    Shape shape;
    if (vi.type().has_tensor_type() && vi.type().tensor_type().has_shape()) {
      for (const auto& d : vi.type().tensor_type().shape().dim()) shape.push_back(d.has_dim_value() ? d.dim_value() : -1);
    }
    graph.input_shapes_[vi.name()] = shape;
  }
  for (const auto& vi : g.output()) graph.outputs_.push_back(vi.name());
  if (graph.inputs_.empty() || graph.outputs_.empty()) throw BackendLoadError("graph declares no inputs or outputs");

  const std::unordered_set<std::string_view> ops(std::begin(kOps), std::end(kOps));
  for (const auto& np : g.node()) {
    if (!np.domain().empty() && np.domain() != "ai.onnx") {
      throw BackendLoadError("operator " + np.domain() + "::" + np.op_type() + " is not supported");
    }
    if (!ops.count(np.op_type())) throw BackendLoadError("operator '" + np.op_type() + "' is not supported");
    Node node;
    node.name = np.name();
    node.op_type = np.op_type();
    node.inputs.assign(np.input().begin(), np.input().end());
    node.outputs.assign(np.output().begin(), np.output().end());
    for (const auto& a : np.attribute()) node.attributes.emplace(a.name(), convert_attribute(a));
    if (node.op_type == "Constant") {
      graph.initializers_[node.outputs.at(0)] = constant_value(node);
      continue;
    }
    graph.nodes_.push_back(std::move(node));
  }

  // Topological check and liveness.
  std::unordered_set<std::string> available(graph.inputs_.begin(), graph.inputs_.end());
  for (const auto& [name, _] : graph.initializers_) available.insert(name);
  std::unordered_map<std::string, std::size_t> last_use;
  for (std::size_t i = 0; i < graph.nodes_.size(); ++i) {
    for (const auto& in : graph.nodes_[i].inputs) {
      if (in.empty()) continue;
      if (!available.count(in)) {
        throw BackendLoadError("node '" + graph.nodes_[i].name + "' reads '" + in + "' before it is produced");
      }
      last_use[in] = i;
    }
    for (const auto& out : graph.nodes_[i].outputs) available.insert(out);
  }
  for (const auto& out : graph.outputs_) {
    if (!available.count(out)) throw BackendLoadError("graph output '" + out + "' is never produced");
  }
  graph.release_after_.resize(graph.nodes_.size());
  const std::unordered_set<std::string> keep(graph.outputs_.begin(), graph.outputs_.end());
  for (const auto& [name, index] : last_use) {
    if (!keep.count(name) && !graph.initializers_.count(name)) graph.release_after_[index].push_back(name);
  }
  return graph;
}

std::vector<std::int64_t> Graph::input_shape(const std::string& name) const {
  const auto it = input_shapes_.find(name);
  return it == input_shapes_.end() ? std::vector<std::int64_t>{} : it->second;
}

std::vector<Tensor> Graph::run(const std::vector<std::pair<std::string, Tensor>>& feeds) const {
  std::unordered_map<std::string, Tensor> env;
  for (const auto& [name, t] : feeds) env[name] = t;
  for (const auto& name : inputs_) {
    if (!env.count(name)) throw ModelContractError("missing feed for graph input '" + name + "'");
  }
  const auto lookup = [&](const std::string& name) -> const Tensor* {
    if (name.empty()) return nullptr;
    if (auto it = env.find(name); it != env.end()) return &it->second;
    if (auto it = initializers_.find(name); it != initializers_.end()) return &it->second;
    throw ModelContractError("value '" + name + "' is not available");
  };

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& node = nodes_[i];
    std::vector<const Tensor*> in;
    in.reserve(node.inputs.size());
    for (const auto& name : node.inputs) in.push_back(lookup(name));
    const auto arg = [&](std::size_t k) -> const Tensor& {
      if (k >= in.size() || !in[k]) fail(node, "missing input " + std::to_string(k));
      return *in[k];
    };
    const auto opt = [&](std::size_t k) -> const Tensor* { return k < in.size() ? in[k] : nullptr; };
    const std::string& op = node.op_type;

    Tensor out;
    if (op == "Conv") out = conv(node, arg(0), arg(1), opt(2));
    else if (op == "Relu") out = unary(node, arg(0), [](float v) { return v > 0.0f ? v : 0.0f; });
    else if (op == "Sigmoid") out = unary(node, arg(0), [](float v) { return 1.0f / (1.0f + std::exp(-v)); });
    else if (op == "Clip") {
      float lo = attr_float(node, "min", -std::numeric_limits<float>::infinity());
      float hi = attr_float(node, "max", std::numeric_limits<float>::infinity());
      if (const Tensor* t = opt(1)) lo = t->values.at(0);
      if (const Tensor* t = opt(2)) hi = t->values.at(0);
      out = unary(node, arg(0), [lo, hi](float v) { return std::clamp(v, lo, hi); });
    } else if (op == "MaxPool") out = pool(node, arg(0), true);
    else if (op == "AveragePool") out = pool(node, arg(0), false);
    else if (op == "GlobalAveragePool") out = global_pool(node, arg(0), false);
    else if (op == "GlobalMaxPool") out = global_pool(node, arg(0), true);
    else if (op == "Concat") out = concat(node, in);
    else if (op == "Flatten") out = flatten(node, arg(0));
    else if (op == "Reshape") out = reshape(node, arg(0), arg(1));
    else if (op == "Gemm") out = gemm(node, arg(0), arg(1), opt(2));
    else if (op == "MatMul") out = matmul(node, arg(0), arg(1));
    else if (op == "Softmax") out = softmax(node, arg(0), opset_);
    else if (op == "BatchNormalization") out = batch_norm(node, arg(0), arg(1), arg(2), arg(3), arg(4));
    else if (op == "Add" || op == "Sub" || op == "Mul" || op == "Div") out = binary_op(node, arg(0), arg(1));
    else if (op == "Identity" || op == "Dropout") out = arg(0);
    else if (op == "Transpose") out = transpose(node, arg(0));
    else if (op == "Shape") {
      out = Tensor::integers({arg(0).rank()}, arg(0).shape);
    } else if (op == "Gather") out = gather(node, arg(0), arg(1));
    else if (op == "Unsqueeze") out = unsqueeze(node, arg(0), axes_operand(node, in));
    else if (op == "Squeeze") out = squeeze(node, arg(0), axes_operand(node, in));
    else if (op == "ReduceMean") out = reduce_mean(node, arg(0), axes_operand(node, in));
    else fail(node, "operator not implemented");

    env[node.outputs.at(0)] = std::move(out);
    for (const auto& name : release_after_[i]) env.erase(name);
  }

  std::vector<Tensor> results;
  for (const auto& name : outputs_) results.push_back(*lookup(name));
  return results;
}

}  // namespace histovote::nn

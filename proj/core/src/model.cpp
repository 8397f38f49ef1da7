#include "gridssa/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "gridssa/errors.hpp"
#include "gridssa/rng.hpp"

namespace gridssa {

long ModelSpec::parameter_count() const {
  long total = conv_weight_count();
  long in = flatten_size();
  for (int w : fc_sizes) {
    total += in * w + w;
    in = w;
  }
  return total;
}

void ModelSpec::validate() const {
  if (conv_filters < 1) throw ValidationError("conv_filters must be >= 1");
  if (conv_kernel < 1 || conv_kernel > rows)
    throw ValidationError("conv_kernel must be in [1, rows]");
  if (fc_sizes[0] < 1 || fc_sizes[1] < 1)
    throw ValidationError("fc widths must be >= 1");
  if (fc_sizes[2] != 1)
    throw ValidationError("final layer width must be 1");
  if (rows < 3) throw ValidationError("rows must be >= 3 (K >= 1)");
  if (features < 1 || n_nodes < 1)
    throw ValidationError("features and n_nodes must be >= 1");
}

namespace {

struct Layout {
  long conv_off = 0, conv_len = 0;
  std::array<long, 3> w_off{}, w_len{}, b_off{}, b_len{};
  long total = 0;
};

Layout layout_of(const ModelSpec& s) {
  Layout l;
  l.conv_off = 0;
  l.conv_len = s.conv_weight_count();
  long pos = l.conv_len;
  long in = s.flatten_size();
  for (int i = 0; i < 3; ++i) {
    const int out = s.fc_sizes[i];
    l.w_off[i] = pos;
    l.w_len[i] = in * out;
    pos += l.w_len[i];
    l.b_off[i] = pos;
    l.b_len[i] = out;
    pos += out;
    in = out;
  }
  l.total = pos;
  return l;
}

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using WMap = Eigen::Map<const RowMajor>;
using BMap = Eigen::Map<const Eigen::VectorXd>;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Forward {
  Eigen::MatrixXd xs;      // standardized input, rows x channels
  Eigen::MatrixXd conv_z;  // out_len x conv_channels (pre-activation)
  Eigen::VectorXd flat;    // flatten after ReLU
  Eigen::VectorXd z1, a1, z2, a2;
  double z3 = 0.0;
  double p = 0.0;
};

// conv output column for (channel, filter)
inline int conv_col(const ModelSpec& s, int channel, int filter) {
  return channel * s.conv_filters + filter;
}

Forward run_forward(const ModelParams& params, const Eigen::MatrixXd& in) {
  const ModelSpec& s = params.spec;
  if (in.rows() != s.rows || in.cols() != s.channels())
    throw ValidationError(
        "feature shape mismatch: got " + std::to_string(in.rows()) + "x" +
        std::to_string(in.cols()) + ", model expects " +
        std::to_string(s.rows) + "x" + std::to_string(s.channels()));

  const Layout l = layout_of(s);
  const double* theta = params.theta.data();

  Forward f;
  f.xs = (in - params.input_shift).cwiseQuotient(params.input_scale);

  const int out_len = s.conv_out_len();
  f.conv_z.resize(out_len, s.conv_channels());
  for (int c = 0; c < s.channels(); ++c) {
    for (int k = 0; k < s.conv_filters; ++k) {
      const double* w =
          theta + l.conv_off + (c * s.conv_filters + k) * s.conv_kernel;
      for (int t = 0; t < out_len; ++t) {
        double acc = 0.0;
        for (int u = 0; u < s.conv_kernel; ++u)
          acc += w[u] * f.xs(t + u, c);
        f.conv_z(t, conv_col(s, c, k)) = acc;
      }
    }
  }

  // flatten ReLU(conv_z), column-major over (channel, filter), time fastest
  f.flat.resize(s.flatten_size());
  long idx = 0;
  for (int col = 0; col < s.conv_channels(); ++col)
    for (int t = 0; t < out_len; ++t)
      f.flat[idx++] = std::max(0.0, f.conv_z(t, col));

  const WMap w1(theta + l.w_off[0], s.fc_sizes[0], s.flatten_size());
  const BMap b1(theta + l.b_off[0], s.fc_sizes[0]);
  f.z1 = w1 * f.flat + b1;
  f.a1 = f.z1.cwiseMax(0.0);

  const WMap w2(theta + l.w_off[1], s.fc_sizes[1], s.fc_sizes[0]);
  const BMap b2(theta + l.b_off[1], s.fc_sizes[1]);
  f.z2 = w2 * f.a1 + b2;
  f.a2 = f.z2.cwiseMax(0.0);

  const WMap w3(theta + l.w_off[2], 1, s.fc_sizes[1]);
  const BMap b3(theta + l.b_off[2], 1);
  f.z3 = (w3 * f.a2)(0) + b3(0);
  f.p = sigmoid(f.z3);
  return f;
}

}  // namespace

ModelParams init_model(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Layout l = layout_of(spec);
  ModelParams p;
  p.spec = spec;
  p.theta.assign(l.total, 0.0);
  p.input_shift = Eigen::MatrixXd::Zero(spec.rows, spec.channels());
  p.input_scale = Eigen::MatrixXd::Ones(spec.rows, spec.channels());

  Rng rng(seed);
  auto fill = [&rng](double* dst, long count, long fan_in) {
    const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (long i = 0; i < count; ++i)
      dst[i] = rng.uniform(-bound, bound);
  };
  fill(p.theta.data() + l.conv_off, l.conv_len, spec.conv_kernel);
  long in = spec.flatten_size();
  for (int i = 0; i < 3; ++i) {
    fill(p.theta.data() + l.w_off[i], l.w_len[i], in);
    in = spec.fc_sizes[i];
    // biases stay zero
  }
  return p;
}

double predict(const ModelParams& params, const Eigen::MatrixXd& input) {
  const double p = run_forward(params, input).p;
  const double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(p, lo, hi);
}

double bce_loss(const std::vector<double>& probs,
                const std::vector<int>& labels) {
  if (probs.empty()) throw ValidationError("bce_loss on empty input");
  if (probs.size() != labels.size())
    throw ValidationError("bce_loss length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kBceEps, 1.0 - kBceEps);
    acc += labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  return -acc / static_cast<double>(probs.size());
}

double batch_loss(const ModelParams& params,
                  const std::vector<const Eigen::MatrixXd*>& batch,
                  const std::vector<int>& labels) {
  std::vector<double> probs;
  probs.reserve(batch.size());
  for (const auto* sample : batch)
    probs.push_back(run_forward(params, *sample).p);
  return bce_loss(probs, labels);
}

std::vector<double> gradients(
    const ModelParams& params,
    const std::vector<const Eigen::MatrixXd*>& batch,
    const std::vector<int>& labels) {
  if (batch.empty()) throw ValidationError("gradient of an empty batch");
  if (batch.size() != labels.size())
    throw ValidationError("gradients length mismatch");

  const ModelSpec& s = params.spec;
  const Layout l = layout_of(s);
  const double* theta = params.theta.data();
  std::vector<double> grad(l.total, 0.0);

  const WMap w1(theta + l.w_off[0], s.fc_sizes[0], s.flatten_size());
  const WMap w2(theta + l.w_off[1], s.fc_sizes[1], s.fc_sizes[0]);
  const WMap w3(theta + l.w_off[2], 1, s.fc_sizes[1]);

  using GradWMap = Eigen::Map<RowMajor>;
  GradWMap gw1(grad.data() + l.w_off[0], s.fc_sizes[0], s.flatten_size());
  GradWMap gw2(grad.data() + l.w_off[1], s.fc_sizes[1], s.fc_sizes[0]);
  GradWMap gw3(grad.data() + l.w_off[2], 1, s.fc_sizes[1]);
  Eigen::Map<Eigen::VectorXd> gb1(grad.data() + l.b_off[0], s.fc_sizes[0]);
  Eigen::Map<Eigen::VectorXd> gb2(grad.data() + l.b_off[1], s.fc_sizes[1]);
  Eigen::Map<Eigen::VectorXd> gb3(grad.data() + l.b_off[2], 1);

  const int out_len = s.conv_out_len();
  const double inv_m = 1.0 / static_cast<double>(batch.size());

  for (std::size_t m = 0; m < batch.size(); ++m) {
    const Forward f = run_forward(params, *batch[m]);

    // d(mean BCE)/dz3 of the clamped loss: p - y inside the clamp window,
    // zero where the clamp froze the loss.
    double gz3 = 0.0;
    if (f.p > kBceEps && f.p < 1.0 - kBceEps)
      gz3 = (f.p - static_cast<double>(labels[m])) * inv_m;

    gb3(0) += gz3;
    gw3 += gz3 * f.a2.transpose();
    Eigen::VectorXd ga2 = w3.transpose() * gz3;

    Eigen::VectorXd gz2 =
        (f.z2.array() > 0.0).select(ga2, Eigen::VectorXd::Zero(ga2.size()));
    gb2 += gz2;
    gw2 += gz2 * f.a1.transpose();
    Eigen::VectorXd ga1 = w2.transpose() * gz2;

    Eigen::VectorXd gz1 =
        (f.z1.array() > 0.0).select(ga1, Eigen::VectorXd::Zero(ga1.size()));
    gb1 += gz1;
    gw1 += gz1 * f.flat.transpose();
    Eigen::VectorXd gflat = w1.transpose() * gz1;

    // through the flatten + conv ReLU back to per-channel kernels
    long idx = 0;
    for (int col = 0; col < s.conv_channels(); ++col) {
      const int c = col / s.conv_filters;
      const int k = col % s.conv_filters;
      double* gw = grad.data() + l.conv_off +
                   (c * s.conv_filters + k) * s.conv_kernel;
      for (int t = 0; t < out_len; ++t, ++idx) {
        if (f.conv_z(t, col) <= 0.0) continue;
        const double gz = gflat[idx];
        if (gz == 0.0) continue;
        for (int u = 0; u < s.conv_kernel; ++u)
          gw[u] += gz * f.xs(t + u, c);
      }
    }
  }
  return grad;
}

namespace {

constexpr char kModelMagic[] = "GRIDSSA MODEL v1\n";

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size())
    throw FormatError("model payload truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::string persist_model(const ModelParams& params) {
  params.spec.validate();
  const Layout l = layout_of(params.spec);
  if (static_cast<long>(params.theta.size()) != l.total)
    throw FormatError("parameter vector does not match spec");

  std::string out(kModelMagic);
  const ModelSpec& s = params.spec;
  for (int v : {s.conv_filters, s.conv_kernel, s.fc_sizes[0], s.fc_sizes[1],
                s.fc_sizes[2], s.rows, s.features, s.n_nodes})
    put<std::int32_t>(out, v);
  put<std::uint64_t>(out, params.theta.size());
  for (double v : params.theta) put<double>(out, v);
  const long sc = static_cast<long>(s.rows) * s.channels();
  for (long i = 0; i < sc; ++i)
    put<double>(out, params.input_shift(i % s.rows, i / s.rows));
  for (long i = 0; i < sc; ++i)
    put<double>(out, params.input_scale(i % s.rows, i / s.rows));
  return out;
}

ModelParams restore_model(const std::string& bytes) {
  const std::size_t magic_len = sizeof(kModelMagic) - 1;
  if (bytes.size() < magic_len ||
      bytes.compare(0, magic_len, kModelMagic) != 0)
    throw FormatError("not a model file or unsupported version");

  std::size_t pos = magic_len;
  ModelSpec s;
  s.conv_filters = take<std::int32_t>(bytes, pos);
  s.conv_kernel = take<std::int32_t>(bytes, pos);
  s.fc_sizes[0] = take<std::int32_t>(bytes, pos);
  s.fc_sizes[1] = take<std::int32_t>(bytes, pos);
  s.fc_sizes[2] = take<std::int32_t>(bytes, pos);
  s.rows = take<std::int32_t>(bytes, pos);
  s.features = take<std::int32_t>(bytes, pos);
  s.n_nodes = take<std::int32_t>(bytes, pos);
  s.validate();

  const std::uint64_t count = take<std::uint64_t>(bytes, pos);
  const Layout l = layout_of(s);
  if (count != static_cast<std::uint64_t>(l.total))
    throw FormatError("header inconsistent: " + std::to_string(count) +
                      " parameters for a spec needing " +
                      std::to_string(l.total));

  ModelParams p;
  p.spec = s;
  p.theta.resize(count);
  for (auto& v : p.theta) v = take<double>(bytes, pos);
  p.input_shift.resize(s.rows, s.channels());
  p.input_scale.resize(s.rows, s.channels());
  const long sc = static_cast<long>(s.rows) * s.channels();
  for (long i = 0; i < sc; ++i)
    p.input_shift(i % s.rows, i / s.rows) = take<double>(bytes, pos);
  for (long i = 0; i < sc; ++i)
    p.input_scale(i % s.rows, i / s.rows) = take<double>(bytes, pos);
  if (pos != bytes.size())
    throw FormatError("trailing bytes after model payload");
  return p;
}

}  // namespace gridssa

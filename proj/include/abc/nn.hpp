#pragma once

// Small convolutional policy network: two 2x2 valid convolutions, three fully
// connected layers (64, 16, 5) with ReLU in between and a softmax output.
// Everything is double precision and written out by hand so the gradients can
// be checked against finite differences.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "abc/errors.hpp"
#include "abc/factory_floor.hpp"
#include "abc/rng.hpp"

namespace abc::nn {

inline constexpr std::size_t kKernel = 2;

struct NetworkArch {
  std::uint32_t input_channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t conv1_filters = 16;
  std::uint32_t conv2_filters = 16;
  std::uint32_t fc1 = 64;
  std::uint32_t fc2 = 16;
  std::uint32_t fc3 = 5;

  friend bool operator==(const NetworkArch&, const NetworkArch&) = default;

  std::size_t h1() const noexcept { return height - 1; }
  std::size_t w1() const noexcept { return width - 1; }
  std::size_t h2() const noexcept { return height - 2; }
  std::size_t w2() const noexcept { return width - 2; }
  std::size_t input_size() const noexcept { return std::size_t{input_channels} * height * width; }
  std::size_t conv1_size() const noexcept { return conv1_filters * h1() * w1(); }
  std::size_t conv2_size() const noexcept { return conv2_filters * h2() * w2(); }
};

/// Architecture for an n-robot floor of the given size.
inline NetworkArch arch_for(const DomainSpec& spec) {
  NetworkArch a;
  a.input_channels = static_cast<std::uint32_t>(spec.n_agents() + 2);
  a.height = static_cast<std::uint32_t>(spec.height);
  a.width = static_cast<std::uint32_t>(spec.width);
  return a;
}

inline void validate(const NetworkArch& a) {
  if (a.input_channels < 1) throw ArgumentError("network needs at least one input channel");
  if (a.height < 3 || a.width < 3) throw ArgumentError("network input must be at least 3x3");
  if (a.conv1_filters < 1 || a.conv2_filters < 1 || a.fc1 < 1 || a.fc2 < 1)
    throw ArgumentError("layer sizes must be positive");
  if (a.fc3 != kNumActions) throw ArgumentError("output layer must have 5 units");
}

/// Offsets of each parameter block inside the flat weight vector. Blocks are
/// stored layer by layer, weights before biases. Conv kernels are
/// [filter][channel][row][col]; dense matrices are row-major [out][in].
struct Layout {
  std::size_t conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w, fc2_b, fc3_w, fc3_b, total;

  explicit Layout(const NetworkArch& a) {
    std::size_t o = 0;
    auto take = [&o](std::size_t n) {
      const std::size_t at = o;
      o += n;
      return at;
    };
    conv1_w = take(std::size_t{a.conv1_filters} * a.input_channels * kKernel * kKernel);
    conv1_b = take(a.conv1_filters);
    conv2_w = take(std::size_t{a.conv2_filters} * a.conv1_filters * kKernel * kKernel);
    conv2_b = take(a.conv2_filters);
    fc1_w = take(std::size_t{a.fc1} * a.conv2_size());
    fc1_b = take(a.fc1);
    fc2_w = take(std::size_t{a.fc2} * a.fc1);
    fc2_b = take(a.fc2);
    fc3_w = take(std::size_t{a.fc3} * a.fc2);
    fc3_b = take(a.fc3);
    total = o;
  }
};

inline std::size_t parameter_count(const NetworkArch& a) { return Layout(a).total; }

struct TrainingMeta {
  std::uint32_t generation = 0;
  std::uint32_t agent_id = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

struct PolicyModel {
  NetworkArch arch;
  std::vector<double> weights;
  TrainingMeta meta;

  friend bool operator==(const PolicyModel&, const PolicyModel&) = default;
};

using Probabilities = std::array<double, kNumActions>;

/// Glorot-uniform weights, zero biases.
inline PolicyModel init_weights(const NetworkArch& arch, std::uint64_t seed) {
  validate(arch);
  const Layout L(arch);
  PolicyModel m{arch, std::vector<double>(L.total, 0.0), {0, 0, seed}};
  Rng rng(derive_seed(seed, {0x494e4954ULL}));
  auto fill = [&](std::size_t off, std::size_t count, double fan_in, double fan_out) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t k = 0; k < count; ++k) m.weights[off + k] = rng.uniform(-bound, bound);
  };
  const double kk = kKernel * kKernel;
  fill(L.conv1_w, L.conv1_b - L.conv1_w, arch.input_channels * kk, arch.conv1_filters * kk);
  fill(L.conv2_w, L.conv2_b - L.conv2_w, arch.conv1_filters * kk, arch.conv2_filters * kk);
  fill(L.fc1_w, L.fc1_b - L.fc1_w, static_cast<double>(arch.conv2_size()), arch.fc1);
  fill(L.fc2_w, L.fc2_b - L.fc2_w, arch.fc1, arch.fc2);
  fill(L.fc3_w, L.fc3_b - L.fc3_w, arch.fc2, arch.fc3);
  return m;
}

/// Intermediate values of one forward pass, kept for backpropagation.
struct Activations {
  std::vector<double> c1, c2, d1, d2;  // post-ReLU outputs
  std::array<double, kNumActions> logits{};
  Probabilities probs{};
};

namespace detail {

// out[f][r][c] = b[f] + sum_{ch,kr,kc} w[f][ch][kr][kc] * in[ch][r+kr][c+kc]
inline void conv2x2(const double* in, std::size_t channels, std::size_t h, std::size_t w,
                    const double* weight, const double* bias, std::size_t filters, double* out) {
  const std::size_t oh = h - 1, ow = w - 1;
  for (std::size_t f = 0; f < filters; ++f) {
    double* o = out + f * oh * ow;
    std::fill(o, o + oh * ow, bias[f]);
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const double* k = weight + (f * channels + ch) * 4;
      const double* x = in + ch * h * w;
      for (std::size_t r = 0; r < oh; ++r) {
        const double* row0 = x + r * w;
        const double* row1 = row0 + w;
        double* orow = o + r * ow;
        for (std::size_t c = 0; c < ow; ++c)
          orow[c] += k[0] * row0[c] + k[1] * row0[c + 1] + k[2] * row1[c] + k[3] * row1[c + 1];
      }
    }
  }
}

inline void conv2x2_backward(const double* in, std::size_t channels, std::size_t h, std::size_t w,
                             const double* weight, std::size_t filters, const double* dout,
                             double* dweight, double* dbias, double* din /* nullable */) {
  const std::size_t oh = h - 1, ow = w - 1;
  for (std::size_t f = 0; f < filters; ++f) {
    const double* g = dout + f * oh * ow;
    double gb = 0.0;
    for (std::size_t k = 0; k < oh * ow; ++k) gb += g[k];
    dbias[f] += gb;
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const double* k = weight + (f * channels + ch) * 4;
      double* dk = dweight + (f * channels + ch) * 4;
      const double* x = in + ch * h * w;
      double* dx = din ? din + ch * h * w : nullptr;
      for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
          const double gv = g[r * ow + c];
          if (gv == 0.0) continue;
          dk[0] += gv * x[r * w + c];
          dk[1] += gv * x[r * w + c + 1];
          dk[2] += gv * x[(r + 1) * w + c];
          dk[3] += gv * x[(r + 1) * w + c + 1];
          if (dx) {
            dx[r * w + c] += gv * k[0];
            dx[r * w + c + 1] += gv * k[1];
            dx[(r + 1) * w + c] += gv * k[2];
            dx[(r + 1) * w + c + 1] += gv * k[3];
          }
        }
      }
    }
  }
}

inline void dense(const double* in, std::size_t n_in, const double* weight, const double* bias,
                  std::size_t n_out, double* out) {
  for (std::size_t o = 0; o < n_out; ++o) {
    const double* row = weight + o * n_in;
    double s = bias[o];
    for (std::size_t i = 0; i < n_in; ++i) s += row[i] * in[i];
    out[o] = s;
  }
}

inline void relu(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

inline void check_input(const NetworkArch& a, std::span<const double> input) {
  if (input.size() != a.input_size())
    throw ArgumentError("network input has " + std::to_string(input.size()) + " values, expected " +
                        std::to_string(a.input_size()));
}

}  // namespace detail

inline void forward(const PolicyModel& m, std::span<const double> input, Activations& act) {
  const NetworkArch& a = m.arch;
  detail::check_input(a, input);
  if (m.weights.size() != parameter_count(a)) throw ArgumentError("weight vector does not match architecture");
  const Layout L(a);
  const double* W = m.weights.data();
  act.c1.resize(a.conv1_size());
  act.c2.resize(a.conv2_size());
  act.d1.resize(a.fc1);
  act.d2.resize(a.fc2);
  detail::conv2x2(input.data(), a.input_channels, a.height, a.width, W + L.conv1_w, W + L.conv1_b,
                  a.conv1_filters, act.c1.data());
  detail::relu(act.c1);
  detail::conv2x2(act.c1.data(), a.conv1_filters, a.h1(), a.w1(), W + L.conv2_w, W + L.conv2_b,
                  a.conv2_filters, act.c2.data());
  detail::relu(act.c2);
  detail::dense(act.c2.data(), act.c2.size(), W + L.fc1_w, W + L.fc1_b, a.fc1, act.d1.data());
  detail::relu(act.d1);
  detail::dense(act.d1.data(), a.fc1, W + L.fc2_w, W + L.fc2_b, a.fc2, act.d2.data());
  detail::relu(act.d2);
  detail::dense(act.d2.data(), a.fc2, W + L.fc3_w, W + L.fc3_b, kNumActions, act.logits.data());
  const double mx = *std::max_element(act.logits.begin(), act.logits.end());
  double z = 0.0;
  for (std::size_t k = 0; k < kNumActions; ++k) z += (act.probs[k] = std::exp(act.logits[k] - mx));
  for (double& p : act.probs) p /= z;
}

inline Probabilities forward(const PolicyModel& m, std::span<const double> input) {
  Activations act;
  forward(m, input, act);
  return act.probs;
}

inline Probabilities forward(const PolicyModel& m, const EncodedState& input) {
  if (input.channels != m.arch.input_channels || input.height != m.arch.height ||
      input.width != m.arch.width)
    throw ArgumentError("encoded state shape does not match network architecture");
  return forward(m, std::span<const double>(input.values));
}

/// -log p(label), computed from the logits for stability.
inline double cross_entropy(const Activations& act, std::size_t label) {
  const double mx = *std::max_element(act.logits.begin(), act.logits.end());
  double z = 0.0;
  for (double l : act.logits) z += std::exp(l - mx);
  return mx + std::log(z) - act.logits[label];
}

/// Adds d(-log p(label))/dweights to `grad` and returns the loss.
inline double accumulate_gradient(const PolicyModel& m, std::span<const double> input, std::size_t label,
                                  std::span<double> grad, Activations& act) {
  if (label >= kNumActions) throw ArgumentError("label out of range");
  forward(m, input, act);
  const NetworkArch& a = m.arch;
  const Layout L(a);
  const double* W = m.weights.data();
  double* G = grad.data();

  std::array<double, kNumActions> g_logits{};
  for (std::size_t k = 0; k < kNumActions; ++k) g_logits[k] = act.probs[k] - (k == label ? 1.0 : 0.0);

  auto dense_back = [](const double* in, std::size_t n_in, const double* weight, std::size_t n_out,
                       const double* gout, double* gw, double* gb, double* gin) {
    for (std::size_t o = 0; o < n_out; ++o) {
      const double g = gout[o];
      gb[o] += g;
      if (g == 0.0) continue;
      double* gwr = gw + o * n_in;
      const double* wr = weight + o * n_in;
      for (std::size_t i = 0; i < n_in; ++i) {
        gwr[i] += g * in[i];
        if (gin) gin[i] += g * wr[i];
      }
    }
  };
  auto relu_mask = [](const std::vector<double>& post, std::vector<double>& g) {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (post[i] <= 0.0) g[i] = 0.0;
  };

  std::vector<double> g_d2(a.fc2, 0.0), g_d1(a.fc1, 0.0), g_c2(a.conv2_size(), 0.0), g_c1(a.conv1_size(), 0.0);
  dense_back(act.d2.data(), a.fc2, W + L.fc3_w, kNumActions, g_logits.data(), G + L.fc3_w, G + L.fc3_b, g_d2.data());
  relu_mask(act.d2, g_d2);
  dense_back(act.d1.data(), a.fc1, W + L.fc2_w, a.fc2, g_d2.data(), G + L.fc2_w, G + L.fc2_b, g_d1.data());
  relu_mask(act.d1, g_d1);
  dense_back(act.c2.data(), act.c2.size(), W + L.fc1_w, a.fc1, g_d1.data(), G + L.fc1_w, G + L.fc1_b, g_c2.data());
  relu_mask(act.c2, g_c2);
  detail::conv2x2_backward(act.c1.data(), a.conv1_filters, a.h1(), a.w1(), W + L.conv2_w, a.conv2_filters,
                           g_c2.data(), G + L.conv2_w, G + L.conv2_b, g_c1.data());
  relu_mask(act.c1, g_c1);
  detail::conv2x2_backward(input.data(), a.input_channels, a.height, a.width, W + L.conv1_w, a.conv1_filters,
                           g_c1.data(), G + L.conv1_w, G + L.conv1_b, nullptr);
  return cross_entropy(act, label);
}

struct Sample {
  std::vector<double> input;  // flattened EncodedState
  std::size_t label = 0;
};

/// Mean cross-entropy over a batch and its gradient.
inline double batch_gradient(const PolicyModel& m, std::span<const Sample* const> batch, std::vector<double>& grad) {
  if (batch.empty()) throw ArgumentError("empty batch");
  grad.assign(m.weights.size(), 0.0);
  Activations act;
  double loss = 0.0;
  for (const Sample* s : batch) loss += accumulate_gradient(m, s->input, s->label, grad, act);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= inv;
  return loss * inv;
}

struct AdamState {
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_model(const PolicyModel& model, double lr = 1e-3) {
    AdamState s;
    s.m.assign(model.weights.size(), 0.0);
    s.v.assign(model.weights.size(), 0.0);
    s.learning_rate = lr;
    return s;
  }

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update.
inline void adam_update(std::vector<double>& weights, AdamState& opt, std::span<const double> grad) {
  if (opt.m.size() != weights.size() || opt.v.size() != weights.size() || grad.size() != weights.size())
    throw ArgumentError("optimizer state does not match weight vector");
  ++opt.step;
  const double t = static_cast<double>(opt.step);
  const double c1 = 1.0 - std::pow(opt.beta1, t);
  const double c2 = 1.0 - std::pow(opt.beta2, t);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    opt.m[i] = opt.beta1 * opt.m[i] + (1.0 - opt.beta1) * grad[i];
    opt.v[i] = opt.beta2 * opt.v[i] + (1.0 - opt.beta2) * grad[i] * grad[i];
    const double mhat = opt.m[i] / c1;
    const double vhat = opt.v[i] / c2;
    weights[i] -= opt.learning_rate * mhat / (std::sqrt(vhat) + opt.epsilon);
  }
}

/// Backpropagates the mean batch loss and applies one Adam step. Returns the
/// loss measured before the update.
inline double training_step(PolicyModel& model, AdamState& opt, std::span<const Sample* const> batch) {
  std::vector<double> grad;
  const double loss = batch_gradient(model, batch, grad);
  adam_update(model.weights, opt, grad);
  return loss;
}

inline double training_step(PolicyModel& model, AdamState& opt, std::span<const Sample> batch) {
  std::vector<const Sample*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& s : batch) ptrs.push_back(&s);
  return training_step(model, opt, std::span<const Sample* const>(ptrs));
}

inline double sample_loss(const PolicyModel& m, std::span<const double> input, std::size_t label) {
  Activations act;
  forward(m, input, act);
  return cross_entropy(act, label);
}

namespace detail {

// Straight-loop forward pass in extended precision; the reference side of
// gradient_check.
inline long double reference_loss(const NetworkArch& a, const std::vector<long double>& weights,
                                  std::span<const double> input, std::size_t label) {
  using T = long double;
  const Layout L(a);
  auto w = [&](std::size_t i) { return weights[i]; };
  auto conv = [&](const std::vector<T>& in, std::size_t ch, std::size_t h, std::size_t wd, std::size_t wo,
                  std::size_t bo, std::size_t filters) {
    std::vector<T> out(filters * (h - 1) * (wd - 1));
    for (std::size_t f = 0; f < filters; ++f)
      for (std::size_t r = 0; r + 1 < h; ++r)
        for (std::size_t c = 0; c + 1 < wd; ++c) {
          T s = w(bo + f);
          for (std::size_t q = 0; q < ch; ++q)
            for (std::size_t kr = 0; kr < 2; ++kr)
              for (std::size_t kc = 0; kc < 2; ++kc)
                s += w(wo + ((f * ch + q) * 2 + kr) * 2 + kc) * in[(q * h + r + kr) * wd + c + kc];
          out[(f * (h - 1) + r) * (wd - 1) + c] = std::max(s, T{0});
        }
    return out;
  };
  auto fc = [&](const std::vector<T>& in, std::size_t wo, std::size_t bo, std::size_t n_out, bool rectify) {
    std::vector<T> out(n_out);
    for (std::size_t o = 0; o < n_out; ++o) {
      T s = w(bo + o);
      for (std::size_t i = 0; i < in.size(); ++i) s += w(wo + o * in.size() + i) * in[i];
      out[o] = rectify ? std::max(s, T{0}) : s;
    }
    return out;
  };
  std::vector<T> x(input.begin(), input.end());
  x = conv(x, a.input_channels, a.height, a.width, L.conv1_w, L.conv1_b, a.conv1_filters);
  x = conv(x, a.conv1_filters, a.h1(), a.w1(), L.conv2_w, L.conv2_b, a.conv2_filters);
  x = fc(x, L.fc1_w, L.fc1_b, a.fc1, true);
  x = fc(x, L.fc2_w, L.fc2_b, a.fc2, true);
  x = fc(x, L.fc3_w, L.fc3_b, a.fc3, false);
  const T mx = *std::max_element(x.begin(), x.end());
  T z = 0;
  for (T v : x) z += std::exp(v - mx);
  return mx + std::log(z) - x[label];
}

}  // namespace detail

/// Largest relative discrepancy |a - n| / max(1e-12, |a| + |n|) between the
/// backpropagated gradient a and a central difference n of step `epsilon`.
/// The finite differences use an extended-precision forward pass so that
/// round-off does not swamp small partial derivatives.
inline double gradient_check(const PolicyModel& model, std::span<const double> input, std::size_t label,
                             double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1e-2)) throw ArgumentError("epsilon must lie in (0, 1e-2]");
  if (label >= kNumActions) throw ArgumentError("label out of range");
  std::vector<double> analytic(model.weights.size(), 0.0);
  Activations act;
  accumulate_gradient(model, input, label, analytic, act);
  double worst = 0.0;
  const long double eps = epsilon;
  std::vector<long double> probe(model.weights.begin(), model.weights.end());
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const long double w0 = probe[i];
    probe[i] = w0 + eps;
    const long double up = detail::reference_loss(model.arch, probe, input, label);
    probe[i] = w0 - eps;
    const long double down = detail::reference_loss(model.arch, probe, input, label);
    probe[i] = w0;
    const double numeric = static_cast<double>((up - down) / (2 * eps));
    const double err = std::abs(analytic[i] - numeric) /
                       std::max(1e-12, std::abs(analytic[i]) + std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

/// Index of the largest probability; lowest index wins ties.
inline std::size_t argmax(const Probabilities& p) noexcept {
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.size(); ++k)
    if (p[k] > p[best]) best = k;
  return best;
}

// ---------------------------------------------------------------------------
// Binary model format: "ABCNN" + version byte, ten LE u32 header fields, LE
// u64 seed, LE u64 parameter count, then the parameters as LE IEEE-754 doubles.

inline constexpr std::array<std::uint8_t, 5> kMagic{'A', 'B', 'C', 'N', 'N'};
inline constexpr std::uint8_t kFormatVersion = 0x01;

class ModelFormatError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, VersionMismatch, Truncated, ParameterCountMismatch, BadArchitecture };

  ModelFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

template <class T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <class T>
T get_le(std::span<const std::uint8_t> in, std::size_t& pos) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in[pos + i]) << (8 * i));
  pos += sizeof(T);
  return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> save_model(const PolicyModel& m) {
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.push_back(kFormatVersion);
  const NetworkArch& a = m.arch;
  for (std::uint32_t f : {a.input_channels, a.height, a.width, a.conv1_filters, a.conv2_filters, a.fc1, a.fc2,
                          a.fc3, m.meta.generation, m.meta.agent_id})
    detail::put_le(out, f);
  detail::put_le(out, m.meta.seed);
  detail::put_le(out, static_cast<std::uint64_t>(m.weights.size()));
  for (double w : m.weights) detail::put_le(out, std::bit_cast<std::uint64_t>(w));
  return out;
}

inline PolicyModel load_model(std::span<const std::uint8_t> bytes) {
  using K = ModelFormatError::Kind;
  constexpr std::size_t kHeader = 6 + 10 * 4 + 8 + 8;
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw ModelFormatError(K::BadMagic, "not an ABCNN model file (bad magic)");
  if (bytes.size() < 6) throw ModelFormatError(K::Truncated, "model file truncated in header");
  if (bytes[5] != kFormatVersion)
    throw ModelFormatError(K::VersionMismatch, "unsupported model format version " + std::to_string(bytes[5]));
  if (bytes.size() < kHeader)
    throw ModelFormatError(K::Truncated, "model file truncated in header: expected at least " +
                                             std::to_string(kHeader) + " bytes, got " + std::to_string(bytes.size()));
  std::size_t pos = 6;
  PolicyModel m;
  NetworkArch& a = m.arch;
  for (std::uint32_t* f : {&a.input_channels, &a.height, &a.width, &a.conv1_filters, &a.conv2_filters, &a.fc1,
                           &a.fc2, &a.fc3, &m.meta.generation, &m.meta.agent_id})
    *f = detail::get_le<std::uint32_t>(bytes, pos);
  m.meta.seed = detail::get_le<std::uint64_t>(bytes, pos);
  const auto count = detail::get_le<std::uint64_t>(bytes, pos);
  try {
    validate(a);
  } catch (const ArgumentError& e) {
    throw ModelFormatError(K::BadArchitecture, std::string("invalid architecture in model file: ") + e.what());
  }
  const std::size_t expected_count = parameter_count(a);
  if (count != expected_count)
    throw ModelFormatError(K::ParameterCountMismatch, "parameter count " + std::to_string(count) +
                                                          " does not match architecture (" +
                                                          std::to_string(expected_count) + ")");
  const std::size_t expected_len = kHeader + 8 * expected_count;
  if (bytes.size() < expected_len)
    throw ModelFormatError(K::Truncated, "model file truncated: expected " + std::to_string(expected_len) +
                                             " bytes, got " + std::to_string(bytes.size()));
  m.weights.resize(expected_count);
  for (double& w : m.weights) w = std::bit_cast<double>(detail::get_le<std::uint64_t>(bytes, pos));
  return m;
}

}  // namespace abc::nn

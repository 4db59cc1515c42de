#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "abc/nn.hpp"
#include "abc/verification.hpp"

namespace abc::nn {
namespace {

NetworkArch two_robot_arch() {
  NetworkArch a;
  a.input_channels = 4;
  a.height = 4;
  a.width = 6;
  return a;
}

NetworkArch small_arch(Rng& rng) {
  NetworkArch a;
  a.input_channels = 2 + static_cast<std::uint32_t>(rng.below(3));
  a.height = 3 + static_cast<std::uint32_t>(rng.below(3));
  a.width = 3 + static_cast<std::uint32_t>(rng.below(3));
  a.conv1_filters = 1 + static_cast<std::uint32_t>(rng.below(4));
  a.conv2_filters = 1 + static_cast<std::uint32_t>(rng.below(4));
  a.fc1 = 1 + static_cast<std::uint32_t>(rng.below(8));
  a.fc2 = 1 + static_cast<std::uint32_t>(rng.below(8));
  return a;
}

std::vector<double> random_input(const NetworkArch& a, Rng& rng) {
  std::vector<double> x(a.input_size());
  for (auto& v : x) v = rng.uniform(-1.0, 2.0);
  return x;
}

TEST(Layout, ParameterCountByHand) {
  // conv1 16*4*4+16, conv2 16*16*4+16, fc1 64*(16*2*4)+64, fc2 16*64+16, fc3 5*16+5
  EXPECT_EQ(parameter_count(two_robot_arch()), 272u + 1040u + 8256u + 1040u + 85u);
}

TEST(Arch, Validation) {
  auto a = two_robot_arch();
  a.fc3 = 4;
  EXPECT_THROW(validate(a), ArgumentError);
  a = two_robot_arch();
  a.height = 2;
  EXPECT_THROW(validate(a), ArgumentError);
}

TEST(Init, DeterministicZeroBiasesBoundedWeights) {
  const auto a = two_robot_arch();
  const auto m1 = init_weights(a, 5), m2 = init_weights(a, 5), m3 = init_weights(a, 6);
  EXPECT_EQ(m1.weights, m2.weights);
  EXPECT_NE(m1.weights, m3.weights);
  const Layout L(a);
  auto check = [&](std::size_t w, std::size_t b, std::size_t end, double fan_in, double fan_out) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t k = w; k < b; ++k) EXPECT_LE(std::abs(m1.weights[k]), bound);
    for (std::size_t k = b; k < end; ++k) EXPECT_EQ(m1.weights[k], 0.0);
  };
  check(L.conv1_w, L.conv1_b, L.conv2_w, 16, 64);
  check(L.conv2_w, L.conv2_b, L.fc1_w, 64, 64);
  check(L.fc1_w, L.fc1_b, L.fc2_w, 128, 64);
  check(L.fc2_w, L.fc2_b, L.fc3_w, 64, 16);
  check(L.fc3_w, L.fc3_b, L.total, 16, 5);
}

TEST(Forward, ZeroWeightsGiveUniform) {
  const auto a = two_robot_arch();
  PolicyModel m{a, std::vector<double>(parameter_count(a), 0.0), {}};
  Rng rng(1);
  for (double p : forward(m, random_input(a, rng))) EXPECT_DOUBLE_EQ(p, 0.2);
}

TEST(Forward, SoftmaxNormalizationProperty) {
  Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const auto a = small_arch(rng);
    const auto m = init_weights(a, rng());
    const auto p = forward(m, random_input(a, rng));
    EXPECT_EQ(p.size(), 5u);
    double sum = 0;
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Forward, ShiftInvariance) {
  const auto a = two_robot_arch();
  auto m = init_weights(a, 3);
  Rng rng(3);
  const auto x = random_input(a, rng);
  const auto before = forward(m, x);
  const Layout L(a);
  for (std::size_t k = 0; k < 5; ++k) m.weights[L.fc3_b + k] += 4.25;
  const auto after = forward(m, x);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(before[k], after[k], 1e-12);
}

TEST(Forward, ShapeMismatchThrows) {
  const auto m = init_weights(two_robot_arch(), 1);
  EXPECT_THROW(forward(m, std::vector<double>(10, 0.0)), ArgumentError);
}

TEST(Loss, NonNegative) {
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    const auto a = small_arch(rng);
    const auto m = init_weights(a, rng());
    EXPECT_GE(sample_loss(m, random_input(a, rng), rng.below(5)), 0.0);
  }
}

TEST(Adam, ZeroGradientLeavesWeights) {
  auto m = init_weights(two_robot_arch(), 1);
  const auto w0 = m.weights;
  auto opt = AdamState::for_model(m);
  adam_update(m.weights, opt, std::vector<double>(w0.size(), 0.0));
  EXPECT_EQ(m.weights, w0);
  EXPECT_EQ(opt.step, 1u);
}

TEST(Adam, TwoStepsByHand) {
  std::vector<double> w{1.0, -2.0};
  PolicyModel dummy{{}, w, {}};
  auto opt = AdamState::for_model(dummy, 0.1);
  const std::vector<double> g1{0.5, -4.0}, g2{1.0, 0.0};
  adam_update(w, opt, g1);
  // Step 1: bias-corrected moments equal g and g^2, so the step is lr * g / (|g| + eps).
  EXPECT_NEAR(w[0], 1.0 - 0.1 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(w[1], -2.0 + 0.1 * 4.0 / (4.0 + 1e-8), 1e-15);
  adam_update(w, opt, g2);
  const double m0 = (0.9 * 0.05 + 0.1 * 1.0) / (1 - 0.81);
  const double v0 = (0.999 * 0.001 * 0.25 + 0.001 * 1.0) / (1 - 0.999 * 0.999);
  EXPECT_NEAR(w[0], 1.0 - 0.1 * 0.5 / (0.5 + 1e-8) - 0.1 * m0 / (std::sqrt(v0) + 1e-8), 1e-12);
}

TEST(Training, SingleSampleLossDecreasesEveryStep) {
  const auto a = two_robot_arch();
  auto m = init_weights(a, 11);
  auto opt = AdamState::for_model(m);
  Rng rng(11);
  const std::vector<Sample> batch{{random_input(a, rng), 3}};
  double prev = training_step(m, opt, batch);
  for (int k = 0; k < 10; ++k) {
    const double loss = training_step(m, opt, batch);
    EXPECT_LT(loss, prev) << "step " << k;
    prev = loss;
  }
}

TEST(Training, MemorizesOneSample) {
  const auto a = two_robot_arch();
  auto m = init_weights(a, 12);
  auto opt = AdamState::for_model(m, 1e-2);
  Rng rng(12);
  const std::vector<Sample> batch{{random_input(a, rng), 2}};
  for (int k = 0; k < 300; ++k) training_step(m, opt, batch);
  EXPECT_LT(sample_loss(m, batch[0].input, 2), 1e-3);
  EXPECT_EQ(argmax(forward(m, batch[0].input)), 2u);
}

TEST(Training, EmptyBatchThrows) {
  auto m = init_weights(two_robot_arch(), 1);
  auto opt = AdamState::for_model(m);
  EXPECT_THROW(training_step(m, opt, std::span<const Sample>{}), ArgumentError);
}

TEST(Training, PureFunctionOfInputs) {
  const auto a = two_robot_arch();
  Rng rng(13);
  std::vector<Sample> batch;
  for (int k = 0; k < 8; ++k) batch.push_back({random_input(a, rng), rng.below(5)});
  auto m1 = init_weights(a, 13), m2 = m1;
  auto o1 = AdamState::for_model(m1), o2 = o1;
  EXPECT_EQ(training_step(m1, o1, batch), training_step(m2, o2, batch));
  EXPECT_EQ(m1, m2);
  EXPECT_EQ(o1, o2);
}

TEST(GradientCheck, SeededModelsPass) {
  const auto a = two_robot_arch();
  for (std::uint64_t k = 0; k < 3; ++k) {
    Rng rng(derive_seed(99, {k}));
    const auto m = init_weights(a, rng());
    const auto s = verify::random_sample(a, rng);
    EXPECT_LT(gradient_check(m, s.input, s.label, 1e-5), 1e-4);
  }
}

TEST(GradientCheck, ZeroInputPasses) {
  Rng rng(5);
  auto a = small_arch(rng);
  auto m = init_weights(a, 5);
  // Non-zero biases keep the ReLUs off their kinks for an all-zero input.
  const Layout L(a);
  for (std::size_t j = L.conv1_b; j < L.conv2_w; ++j) m.weights[j] = 0.3;
  const std::vector<double> zeros(a.input_size(), 0.0);
  const double err = gradient_check(m, zeros, 1, 1e-5);
  EXPECT_TRUE(std::isfinite(err));
  EXPECT_LT(err, 1e-4);
}

TEST(GradientCheck, SmallerStepIsNoWorse) {
  const auto a = two_robot_arch();
  Rng rng(6);
  const auto m = init_weights(a, 6);
  const auto s = verify::random_sample(a, rng);
  EXPECT_LE(gradient_check(m, s.input, s.label, 1e-5), gradient_check(m, s.input, s.label, 1e-3) + 1e-6);
}

TEST(GradientCheck, RejectsBadEpsilon) {
  const auto m = init_weights(two_robot_arch(), 1);
  const std::vector<double> x(m.arch.input_size(), 0.5);
  EXPECT_THROW(gradient_check(m, x, 0, 0.0), ArgumentError);
  EXPECT_THROW(gradient_check(m, x, 0, 0.1), ArgumentError);
}

TEST(Serialization, RoundTripProperty) {
  Rng rng(7);
  for (int k = 0; k < 100; ++k) {
    auto m = init_weights(small_arch(rng), rng());
    m.meta.generation = static_cast<std::uint32_t>(rng.below(50));
    m.meta.agent_id = 1 + static_cast<std::uint32_t>(rng.below(4));
    for (auto& w : m.weights) w += rng.uniform(-1e-3, 1e-3);
    const auto back = load_model(save_model(m));
    ASSERT_EQ(back, m);
    for (std::size_t i = 0; i < m.weights.size(); ++i)
      ASSERT_EQ(std::bit_cast<std::uint64_t>(back.weights[i]), std::bit_cast<std::uint64_t>(m.weights[i]));
  }
}

TEST(Serialization, HeaderLayout) {
  auto m = init_weights(two_robot_arch(), 0x0102030405060708ULL);
  m.meta.generation = 3;
  m.meta.agent_id = 2;
  const auto bytes = save_model(m);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 5), "ABCNN");
  EXPECT_EQ(bytes[5], 0x01);
  EXPECT_EQ(bytes[6], 4);  // input_channels, little-endian
  EXPECT_EQ(bytes[7], 0);
  EXPECT_EQ(bytes[10], 4);   // height
  EXPECT_EQ(bytes[14], 6);   // width
  EXPECT_EQ(bytes[38], 3);   // generation
  EXPECT_EQ(bytes[42], 2);   // agent id
  EXPECT_EQ(bytes[46], 0x08);  // seed, low byte first
  EXPECT_EQ(bytes[53], 0x01);
  EXPECT_EQ(bytes.size(), 62 + 8 * parameter_count(m.arch));
}

ModelFormatError::Kind load_error(const std::vector<std::uint8_t>& bytes) {
  try {
    load_model(bytes);
  } catch (const ModelFormatError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "load_model accepted corrupt bytes";
  return ModelFormatError::Kind::BadArchitecture;
}

TEST(Serialization, DistinctErrors) {
  const auto good = save_model(init_weights(two_robot_arch(), 1));
  using K = ModelFormatError::Kind;

  auto bad_magic = good;
  for (int i = 0; i < 6; ++i) bad_magic[i] = 'x';
  EXPECT_EQ(load_error(bad_magic), K::BadMagic);

  auto bad_version = good;
  bad_version[5] = 0x02;
  EXPECT_EQ(load_error(bad_version), K::VersionMismatch);

  std::vector<std::uint8_t> truncated(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(good.size() / 2));
  EXPECT_EQ(load_error(truncated), K::Truncated);
  try {
    load_model(truncated);
  } catch (const ModelFormatError& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(good.size())), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(std::to_string(truncated.size())), std::string::npos);
  }

  auto bad_count = good;
  bad_count[54] ^= 0x01;
  EXPECT_EQ(load_error(bad_count), K::ParameterCountMismatch);

  auto bad_arch = good;
  bad_arch[34] = 7;  // fc3 must be 5
  EXPECT_EQ(load_error(bad_arch), K::BadArchitecture);
}

}  // namespace
}  // namespace abc::nn

#include <sstream>

#include <gtest/gtest.h>

#include "rlsp/checkpoint.hpp"
#include "rlsp/gradcheck.hpp"

using namespace rlsp;

namespace {

Eigen::MatrixXd random_cols(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
  return m;
}

ApproximatorConfig small_net(Activation act) {
  ApproximatorConfig cfg;
  cfg.layer_sizes = {16, 16};
  cfg.activation = act;
  return cfg;
}

}  // namespace

class GradientCheck : public ::testing::TestWithParam<Activation> {};

TEST_P(GradientCheck, Regressor) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_stream(seed, 40);
    Regressor r;
    r.input_norm = Normalizer::identity(3);
    r.net = Mlp(3, {16, 16}, 2, GetParam(), rng);
    EXPECT_LT(check_gradients(r, random_cols(3, 8, rng), random_cols(2, 8, rng), rng), 1e-3) << seed;
  }
}

TEST_P(GradientCheck, MixtureDensity) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_stream(seed, 41);
    const auto m = make_density_model(3, 2, small_net(GetParam()), MixtureDensityHead{}, rng);
    EXPECT_LT(check_gradients(m, random_cols(3, 8, rng), random_cols(2, 8, rng), rng), 1e-3) << seed;
  }
}

TEST_P(GradientCheck, EncoderDecoder) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_stream(seed, 42);
    auto cfg = small_net(GetParam());
    cfg.epochs = 0;
    cfg.seed = seed;
    const auto e = train_encoder(random_cols(4, 8, rng).transpose(), cfg, 3, 0.1);
    EXPECT_LT(check_gradients(e, random_cols(4, 8, rng), random_cols(3, 8, rng), rng), 1e-3) << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(Activations, GradientCheck, ::testing::Values(Activation::relu, Activation::tanh),
                         [](const auto& info) { return to_string(info.param); });

TEST(Regressor, LearnsASmoothFunction) {
  Rng rng = make_stream(1, 43);
  SupervisedData d;
  d.inputs = Eigen::MatrixXd(512, 1);
  d.targets = Eigen::MatrixXd(512, 1);
  for (int i = 0; i < 512; ++i) {
    d.inputs(i, 0) = 4.0 * uniform01(rng) - 2.0;
    d.targets(i, 0) = std::sin(d.inputs(i, 0));
  }
  auto cfg = small_net(Activation::tanh);
  cfg.learning_rate = 1e-2;
  cfg.epochs = 200;
  cfg.batch_size = 32;
  const auto r = train_regressor(d, cfg);
  EXPECT_LT(r.train_loss, 5e-3);
}

TEST(Regressor, TrainingIsDeterministic) {
  Rng rng = make_stream(2, 43);
  SupervisedData d{random_cols(40, 2, rng), random_cols(40, 1, rng)};
  auto cfg = small_net(Activation::relu);
  cfg.epochs = 3;
  EXPECT_EQ(train_regressor(d, cfg).net.params(), train_regressor(d, cfg).net.params());
}

TEST(ApproximatorConfig, Validation) {
  ApproximatorConfig cfg;
  cfg.layer_sizes = {};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.layer_sizes = {4};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(parse_activation("gelu"), ConfigError);
}

TEST(Normalizer, FloorsDegenerateDimensions) {
  Eigen::MatrixXd rows(3, 2);
  rows << 1, 5, 2, 5, 3, 5;
  bool degenerate = false;
  const auto n = Normalizer::fit(rows, &degenerate);
  EXPECT_TRUE(degenerate);
  EXPECT_EQ(n.std(1), Normalizer::kStdFloor);
  EXPECT_TRUE(n.invert(n.apply(rows.transpose())).isApprox(rows.transpose()));
}

TEST(Checkpoint, RoundTripsEveryKind) {
  Rng rng = make_stream(3, 44);
  Regressor r;
  r.input_norm = Normalizer::fit(random_cols(10, 3, rng));
  r.net = Mlp(3, {5}, 2, Activation::tanh, rng);
  std::stringstream s1;
  ckpt::save(s1, r);
  Regressor r2;
  ckpt::load(s1, r2);
  const Eigen::MatrixXd x = random_cols(3, 4, rng);
  EXPECT_EQ(r.predict_cols(x), r2.predict_cols(x));

  auto m = make_density_model(3, 2, small_net(Activation::relu), MixtureDensityHead{3, 0.1}, rng);
  m.lower = Eigen::Vector2d(-1, -2);
  m.upper = Eigen::Vector2d(1, 2);
  std::stringstream s2;
  ckpt::save(s2, m);
  MixtureDensityModel m2;
  ckpt::load(s2, m2);
  EXPECT_EQ(m2.head.components, 3);
  EXPECT_EQ(m2.lower, m.lower);
  EXPECT_EQ(m.log_prob(x.col(0), Eigen::Vector2d(0.1, 0.2)), m2.log_prob(x.col(0), Eigen::Vector2d(0.1, 0.2)));

  auto cfg = small_net(Activation::relu);
  cfg.epochs = 1;
  const auto e = train_encoder(random_cols(20, 4, rng), cfg, 2, 0.01);
  std::stringstream s3;
  ckpt::save(s3, e);
  EncoderDecoder e2;
  ckpt::load(s3, e2);
  const Eigen::VectorXd probe = random_cols(4, 1, rng).col(0);
  EXPECT_EQ(e.encode(probe), e2.encode(probe));
  EXPECT_EQ(e.decode(Eigen::Vector2d(0.3, -0.1)), e2.decode(Eigen::Vector2d(0.3, -0.1)));

  std::stringstream s4;
  const Eigen::VectorXd v = random_cols(5, 1, rng).col(0);
  ckpt::save(s4, v);
  Eigen::VectorXd v2;
  ckpt::load(s4, v2);
  EXPECT_EQ(v, v2);
}

TEST(Checkpoint, RejectsWrongKindAndTruncation) {
  std::stringstream s;
  ckpt::save(s, Eigen::VectorXd::Ones(3).eval());
  Regressor r;
  EXPECT_THROW(ckpt::load(s, r), ConfigError);
  std::string bytes;
  {
    std::stringstream full;
    ckpt::save(full, Eigen::VectorXd::Ones(3).eval());
    bytes = full.str();
  }
  std::stringstream cut(bytes.substr(0, bytes.size() - 4));
  Eigen::VectorXd v;
  EXPECT_THROW(ckpt::load(cut, v), ConfigError);
  std::stringstream junk("not a checkpoint at all");
  EXPECT_THROW(ckpt::load(junk, v), ConfigError);
}

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <utility>

#include "doctest.h"
#include "gradcheck.hpp"
#include "rcgan/errors.hpp"
#include "rcgan/gan.hpp"

using namespace rcgan;

namespace {

const double kLog2 = std::log(2.0);

RCGANModel small_model(std::uint64_t seed, std::size_t x_dim = 2, std::size_t latent = 2) {
  Architecture arch;
  arch.latent_dim = latent;
  arch.hidden = {5, 4};
  return RCGANModel::make(x_dim, arch, DistSpec::standard_normal(x_dim), seed);
}

Tensor gaussian_batch(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Tensor t = Tensor::matrix(rows, cols);
  for (auto& v : t.values()) v = g(rng);
  return t;
}

void zero_last_layer(DenseNet& net) {
  auto params = net.parameters();
  params[params.size() - 2]->fill(0.0);
  params[params.size() - 1]->fill(0.0);
}

// Plain scalar evaluation of one network on one input row.
std::vector<double> scalar_eval(const DenseNet& net, std::vector<double> x) {
  for (const auto& layer : net.layers()) {
    std::vector<double> y(layer.weight.rows());
    for (std::size_t o = 0; o < y.size(); ++o) {
      double s = layer.bias[o];
      for (std::size_t i = 0; i < x.size(); ++i) s += layer.weight(o, i) * x[i];
      switch (layer.activation.kind) {
        case ActivationKind::identity: break;
        case ActivationKind::leaky_relu: s = s > 0 ? s : layer.activation.alpha * s; break;
        case ActivationKind::tanh: s = std::tanh(s); break;
        case ActivationKind::sigmoid: s = 1.0 / (1.0 + std::exp(-s)); break;
      }
      y[o] = s;
    }
    x = std::move(y);
  }
  return x;
}

std::vector<double> row_of(const Tensor& t, std::size_t r) {
  std::vector<double> v(t.cols());
  for (std::size_t c = 0; c < t.cols(); ++c) v[c] = t(r, c);
  return v;
}

std::vector<double> join(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

LossPair scalar_v_ano(const RCGANModel& m, const Tensor& x, const Tensor& x_pen, const Tensor& z) {
  double lr = 0, lf = 0, lr1m = 0, lf_log = 0, lp = 0;
  const auto n = static_cast<double>(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto xr = row_of(x, r);
    const double d_real = scalar_eval(m.disc_xz, join(xr, scalar_eval(m.encoder, xr)))[0];
    const auto zr = row_of(z, r);
    const double d_fake = scalar_eval(m.disc_xz, join(scalar_eval(m.generator, zr), zr))[0];
    lr += std::log(d_real);
    lr1m += std::log(1.0 - d_real);
    lf += std::log(1.0 - d_fake);
    lf_log += std::log(d_fake);
  }
  for (std::size_t r = 0; !x_pen.empty() && r < x_pen.rows(); ++r) {
    const auto xp = row_of(x_pen, r);
    lp += std::log(1.0 - scalar_eval(m.disc_xz, join(xp, scalar_eval(m.encoder, xp)))[0]);
  }
  LossPair out;
  out.disc = -(lr / n + lf / n + (x_pen.empty() ? 0.0 : lp / static_cast<double>(x_pen.rows())));
  out.gen = -(lr1m / n + lf_log / n);
  return out;
}

LossPair scalar_v_cycle(const RCGANModel& m, const Tensor& x) {
  double same = 0, rec1m = 0, rec = 0;
  const auto n = static_cast<double>(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto xr = row_of(x, r);
    const auto xt = scalar_eval(m.generator, scalar_eval(m.encoder, xr));
    same += std::log(scalar_eval(m.disc_xx, join(xr, xr))[0]);
    const double d = scalar_eval(m.disc_xx, join(xr, xt))[0];
    rec1m += std::log(1.0 - d);
    rec += std::log(d);
  }
  return {-(same / n + rec1m / n), -rec / n};
}

std::vector<Tensor*> concat(std::vector<Tensor*> a, const std::vector<Tensor*>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<const Tensor*> concat(std::vector<const Tensor*> a, const std::vector<const Tensor*>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

Tensor ring_data(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::data);
  return sample(DistSpec::loop(), n, rng);
}

TrainConfig short_config(TrainMode mode, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.epochs = 2;
  cfg.batch_size = 16;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("training mode names round trip") {
  for (auto m : {TrainMode::rcgan, TrainMode::no_penalty, TrainMode::alice_baseline}) {
    CHECK(parse_train_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_train_mode("bigan"), InvalidArgument);
}

TEST_CASE("model construction checks dimensions") {
  auto m = small_model(3, 3, 2);
  CHECK(m.x_dim() == 3);
  CHECK(m.latent_dim() == 2);
  CHECK(m.disc_xz.input_dim() == 5);
  CHECK(m.disc_xx.input_dim() == 6);
  CHECK_NOTHROW(m.validate());
  CHECK_THROWS_AS(RCGANModel::make(3, {}, DistSpec::standard_normal(2), 1), DimensionError);
  CHECK(small_model(3, 3, 2) == m);
  CHECK_FALSE(small_model(4, 3, 2) == m);
}

TEST_CASE("losses with discriminators fixed at one half") {
  auto m = small_model(11);
  zero_last_layer(m.disc_xz);
  zero_last_layer(m.disc_xx);
  Rng rng(5);
  const Tensor x = gaussian_batch(7, 2, rng);
  const Tensor z = gaussian_batch(7, 2, rng);
  const Tensor pen = gaussian_batch(7, 2, rng, 2.0);

  const auto without = loss_v_ano(m, x, Tensor(), z);
  CHECK(without.disc == doctest::Approx(2 * kLog2).epsilon(1e-14));
  CHECK(without.gen == doctest::Approx(2 * kLog2).epsilon(1e-14));
  const auto with = loss_v_ano(m, x, pen, z);
  CHECK(with.disc == doctest::Approx(3 * kLog2).epsilon(1e-14));
  CHECK(with.gen == doctest::Approx(2 * kLog2).epsilon(1e-14));

  const auto cyc = loss_v_cycle(m, x);
  CHECK(cyc.disc == doctest::Approx(2 * kLog2).epsilon(1e-14));
  CHECK(cyc.gen == doctest::Approx(kLog2).epsilon(1e-14));
}

TEST_CASE("losses match a scalar re-evaluation") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto m = small_model(seed, 3, 2);
    Rng rng(seed + 100);
    const Tensor x = gaussian_batch(6, 3, rng);
    const Tensor z = gaussian_batch(6, 2, rng);
    const Tensor pen = gaussian_batch(6, 3, rng, 1.5);
    for (const Tensor* p : {&pen, static_cast<const Tensor*>(nullptr)}) {
      const Tensor xp = p ? *p : Tensor();
      const auto got = loss_v_ano(m, x, xp, z);
      const auto want = scalar_v_ano(m, x, xp, z);
      CHECK(got.disc == doctest::Approx(want.disc).epsilon(1e-12));
      CHECK(got.gen == doctest::Approx(want.gen).epsilon(1e-12));
    }
    const auto got = loss_v_cycle(m, x);
    const auto want = scalar_v_cycle(m, x);
    CHECK(got.disc == doctest::Approx(want.disc).epsilon(1e-12));
    CHECK(got.gen == doctest::Approx(want.gen).epsilon(1e-12));
  }
}

TEST_CASE("loss inputs are validated") {
  auto m = small_model(1);
  Rng rng(1);
  const Tensor x = gaussian_batch(4, 2, rng);
  CHECK_THROWS_AS(loss_v_ano(m, gaussian_batch(4, 3, rng), Tensor(), x), DimensionError);
  CHECK_THROWS_AS(loss_v_ano(m, x, gaussian_batch(4, 1, rng), x), DimensionError);
  CHECK_THROWS_AS(loss_v_cycle(m, gaussian_batch(4, 5, rng)), DimensionError);
}

TEST_CASE("loss values stay finite when the discriminator saturates") {
  auto m = small_model(2);
  auto params = m.disc_xz.parameters();
  params.back()->fill(1e4);  // output bias: D = 1 everywhere
  Rng rng(3);
  const Tensor x = gaussian_batch(5, 2, rng);
  const auto l = loss_v_ano(m, x, x, x);
  CHECK(std::isfinite(l.disc));
  CHECK(std::isfinite(l.gen));
  CHECK(l.disc == doctest::Approx(-2 * std::log(kProbEps) - std::log(1 - kProbEps)));
  // clamp active: no gradient flows
  const auto g = discriminator_gradients(m, x, x, x);
  for (const Tensor* t : g.disc_xz.parameters()) {
    for (double v : t->values()) CHECK(v == 0.0);
  }
}

TEST_CASE("discriminator gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto m = small_model(seed, 2, 2);
    Rng rng(seed * 7);
    const Tensor x = gaussian_batch(8, 2, rng);
    const Tensor z = gaussian_batch(8, 2, rng);
    const Tensor pen = gaussian_batch(8, 2, rng, 2.0);
    const auto g = discriminator_gradients(m, x, pen, z);
    CHECK(g.ano.disc == doctest::Approx(loss_v_ano(m, x, pen, z).disc).epsilon(1e-14));

    const double err_xz = testing::max_gradient_error(
        m.disc_xz.parameters(), g.disc_xz.parameters(),
        [&] { return loss_v_ano(m, x, pen, z).disc; });
    const double err_xx = testing::max_gradient_error(
        m.disc_xx.parameters(), g.disc_xx.parameters(),
        [&] { return loss_v_cycle(m, x).disc; });
    CHECK(err_xz < 1e-4);
    CHECK(err_xx < 1e-4);
  }
}

TEST_CASE("encoder and generator gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto m = small_model(seed, 3, 2);
    Rng rng(seed * 13);
    const Tensor x = gaussian_batch(8, 3, rng);
    const Tensor z = gaussian_batch(8, 2, rng);
    const auto g = generator_gradients(m, x, z);
    auto total = [&] { return loss_v_ano(m, x, Tensor(), z).gen + loss_v_cycle(m, x).gen; };
    CHECK(g.ano.gen + g.cycle.gen == doctest::Approx(total()).epsilon(1e-14));
    const double err = testing::max_gradient_error(
        concat(m.encoder.parameters(), m.generator.parameters()),
        concat(std::as_const(g.encoder).parameters(), std::as_const(g.generator).parameters()),
        total);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("penalty samples reach only the joint discriminator") {
  auto m = small_model(4);
  Rng rng(9);
  const Tensor x = gaussian_batch(6, 2, rng);
  const Tensor z = gaussian_batch(6, 2, rng);
  const Tensor pen = gaussian_batch(6, 2, rng, 3.0);
  const auto with = discriminator_gradients(m, x, pen, z);
  const auto without = discriminator_gradients(m, x, Tensor(), z);
  const auto a = with.disc_xx.parameters();
  const auto b = without.disc_xx.parameters();
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(*a[k] == *b[k]);
  CHECK(with.cycle.disc == without.cycle.disc);
  CHECK_FALSE(*with.disc_xz.parameters()[0] == *without.disc_xz.parameters()[0]);
  CHECK(with.encoder.layers.empty());
  CHECK(with.generator.layers.empty());
}

TEST_CASE("batcher visits every row once per pass") {
  Tensor data = Tensor::matrix(10, 1);
  for (std::size_t i = 0; i < 10; ++i) data(i, 0) = static_cast<double>(i);
  Batcher b(data, 3, Rng(1));
  CHECK(b.batches_per_epoch() == 3);
  std::set<double> seen;
  for (int k = 0; k < 3; ++k) {
    const Tensor t = b.next();
    CHECK(t.rows() == 3);
    for (double v : t.values()) seen.insert(v);
  }
  CHECK(seen.size() == 9);
  CHECK_THROWS_AS(Batcher(data, 0, Rng(1)), InvalidArgument);
}

TEST_CASE("training config is validated") {
  auto m = small_model(1);
  const Tensor data = ring_data(64, 1);
  auto cfg = short_config(TrainMode::rcgan, 1);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train(m, data, cfg), InvalidArgument);
  cfg = short_config(TrainMode::rcgan, 1);
  cfg.disc_steps = 0;
  CHECK_THROWS_AS(train(m, data, cfg), InvalidArgument);
  cfg = short_config(TrainMode::rcgan, 1);
  CHECK_THROWS_AS(train(m, Tensor::matrix(10, 3), cfg), DimensionError);
}

TEST_CASE("zero epochs leave the model untouched") {
  auto m = small_model(6);
  const auto before = m;
  auto cfg = short_config(TrainMode::rcgan, 6);
  cfg.epochs = 0;
  const auto report = train(m, ring_data(100, 6), cfg);
  CHECK(report.steps.empty());
  CHECK(m == before);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  auto m = small_model(7);
  const auto before = m;
  auto cfg = short_config(TrainMode::rcgan, 7);
  cfg.disc_optimizer.lr = 0.0;
  cfg.gen_optimizer.lr = 0.0;
  const auto report = train(m, ring_data(100, 7), cfg);
  CHECK_FALSE(report.steps.empty());
  CHECK(m == before);
}

TEST_CASE("training is deterministic for a seed") {
  const Tensor data = ring_data(200, 2);
  auto a = small_model(2);
  auto b = small_model(2);
  const auto ra = train(a, data, short_config(TrainMode::rcgan, 2));
  const auto rb = train(b, data, short_config(TrainMode::rcgan, 2));
  CHECK(a == b);
  REQUIRE(ra.steps.size() == rb.steps.size());
  for (std::size_t i = 0; i < ra.steps.size(); ++i) {
    CHECK(ra.steps[i].ano.disc == rb.steps[i].ano.disc);
    CHECK(ra.steps[i].cycle.gen == rb.steps[i].cycle.gen);
  }
  auto c = small_model(2);
  train(c, data, short_config(TrainMode::rcgan, 3));
  CHECK_FALSE(a == c);
}

TEST_CASE("baseline mode trains exactly like the no-penalty ablation") {
  const Tensor data = ring_data(200, 5);
  auto a = small_model(5);
  auto b = small_model(5);
  auto c = small_model(5);
  train(a, data, short_config(TrainMode::alice_baseline, 5));
  train(b, data, short_config(TrainMode::no_penalty, 5));
  train(c, data, short_config(TrainMode::rcgan, 5));
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("training changes every network and keeps losses finite") {
  auto m = small_model(8);
  const auto before = m;
  auto cfg = short_config(TrainMode::rcgan, 8);
  cfg.epochs = 3;
  const auto report = train(m, ring_data(160, 8), cfg);
  CHECK(report.steps.size() == 3 * 10);
  for (const auto& r : report.steps) {
    CHECK(std::isfinite(r.ano.disc));
    CHECK(std::isfinite(r.ano.gen));
    CHECK(std::isfinite(r.cycle.disc));
    CHECK(std::isfinite(r.cycle.gen));
  }
  CHECK_FALSE(m.encoder == before.encoder);
  CHECK_FALSE(m.generator == before.generator);
  CHECK_FALSE(m.disc_xz == before.disc_xz);
  CHECK_FALSE(m.disc_xx == before.disc_xx);
  const auto means = report.epoch_means();
  REQUIRE(means.size() == 3);
  double first = 0;
  for (std::size_t i = 0; i < 10; ++i) first += report.steps[i].ano.disc;
  CHECK(means[0].ano.disc == doctest::Approx(first / 10));
  CHECK(means[2].epoch == 2);
}

TEST_CASE("discriminator step ratio divides the steps per epoch") {
  auto m = small_model(9);
  auto cfg = short_config(TrainMode::rcgan, 9);
  cfg.epochs = 1;
  cfg.disc_steps = 3;
  const auto report = train(m, ring_data(160, 9), cfg);
  CHECK(report.steps.size() == 3);
}

TEST_CASE("loss report csv has one row per step") {
  auto m = small_model(10);
  const auto report = train(m, ring_data(64, 10), short_config(TrainMode::rcgan, 10));
  const auto path = std::filesystem::temp_directory_path() / "rcgan_test_losses.csv";
  report.write_csv(path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "step,epoch,ano_disc,ano_gen,cycle_disc,cycle_gen");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == report.steps.size());
  std::filesystem::remove(path);
}

TEST_CASE("checkpoints round trip exactly") {
  auto m = small_model(12, 3, 2);
  m.penalty = DistSpec::box(3, -1.0, 1.0);
  train(m, [] {
    Rng rng(1);
    return sample(DistSpec::standard_normal(3), 64, rng);
  }(), short_config(TrainMode::rcgan, 12));
  std::stringstream ss;
  write_model(ss, m);
  const auto back = read_model(ss);
  CHECK(back == m);

  const auto path = std::filesystem::temp_directory_path() / "rcgan_test_model.txt";
  save_model(path, m);
  CHECK(load_model(path) == m);
  std::filesystem::remove(path);

  std::stringstream bad("rcgan-model v2\n");
  CHECK_THROWS_AS(read_model(bad), FormatError);
  std::stringstream truncated(ss.str().substr(0, ss.str().size() / 2));
  CHECK_THROWS_AS(read_model(truncated), FormatError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), IoError);
}

#include "rcgan/gan.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "rcgan/errors.hpp"

namespace rcgan {

namespace {

double clamp_prob(double d) { return std::clamp(d, kProbEps, 1.0 - kProbEps); }

bool inside_clamp(double d) { return d > kProbEps && d < 1.0 - kProbEps; }

// mean over the batch of log(clamp(d)) or log(1 - clamp(d))
double mean_log(const Tensor& d) {
  double s = 0.0;
  for (double v : d.values()) s += std::log(clamp_prob(v));
  return s / static_cast<double>(d.size());
}

double mean_log1m(const Tensor& d) {
  double s = 0.0;
  for (double v : d.values()) s += std::log(1.0 - clamp_prob(v));
  return s / static_cast<double>(d.size());
}

// dL/dd for L = sign * mean log(clamp(d)); zero where the clamp is active.
Tensor upstream_log(const Tensor& d, double sign) {
  Tensor g(d.shape());
  const double scale = sign / static_cast<double>(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    g[i] = inside_clamp(d[i]) ? scale / d[i] : 0.0;
  }
  return g;
}

// dL/dd for L = sign * mean log(1 - clamp(d)).
Tensor upstream_log1m(const Tensor& d, double sign) {
  Tensor g(d.shape());
  const double scale = sign / static_cast<double>(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    g[i] = inside_clamp(d[i]) ? -scale / (1.0 - d[i]) : 0.0;
  }
  return g;
}

void check_batch(const Tensor& batch, std::size_t width, const char* what) {
  if (batch.rank() != 2 || batch.cols() != width) {
    throw DimensionError(std::string(what) + " batch has width " + std::to_string(batch.cols()) +
                         ", expected " + std::to_string(width));
  }
}

bool finite(const LossPair& p) { return std::isfinite(p.disc) && std::isfinite(p.gen); }

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void expect_word(std::istream& in, const std::string& word) {
  std::string token;
  if (!(in >> token) || token != word) {
    throw FormatError("checkpoint: expected '" + word + "', found '" + token + "'");
  }
}

std::string read_word(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw FormatError("checkpoint: unexpected end of file");
  return token;
}

}  // namespace

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::rcgan: return "rcgan";
    case TrainMode::no_penalty: return "no-penalty";
    case TrainMode::alice_baseline: return "alice-baseline";
  }
  return "rcgan";
}

TrainMode parse_train_mode(std::string_view name) {
  if (name == "rcgan") return TrainMode::rcgan;
  if (name == "no-penalty" || name == "no_penalty") return TrainMode::no_penalty;
  if (name == "alice-baseline" || name == "alice_baseline" || name == "alice") {
    return TrainMode::alice_baseline;
  }
  throw InvalidArgument("unknown training mode '" + std::string(name) + "'");
}

RCGANModel RCGANModel::make(std::size_t x_dim, const Architecture& arch, DistSpec penalty,
                            std::uint64_t seed) {
  if (x_dim == 0 || arch.latent_dim == 0) throw InvalidArgument("dimensions must be positive");
  penalty.validate();
  if (penalty.dim != x_dim) {
    throw DimensionError("penalty distribution has dimension " + std::to_string(penalty.dim) +
                         " but data has " + std::to_string(x_dim));
  }
  auto dims = [&](std::size_t in, std::size_t out) {
    std::vector<std::size_t> d{in};
    d.insert(d.end(), arch.hidden.begin(), arch.hidden.end());
    d.push_back(out);
    return d;
  };
  const auto hidden = Activation::leaky_relu(arch.leaky_alpha);
  Rng enc_rng = make_rng(seed, Stream::init_encoder);
  Rng gen_rng = make_rng(seed, Stream::init_generator);
  Rng dxz_rng = make_rng(seed, Stream::init_disc_xz);
  Rng dxx_rng = make_rng(seed, Stream::init_disc_xx);
  RCGANModel m;
  m.encoder = DenseNet::make(dims(x_dim, arch.latent_dim), hidden, Activation::identity(), enc_rng);
  m.generator = DenseNet::make(dims(arch.latent_dim, x_dim), hidden, Activation::identity(), gen_rng);
  m.disc_xz = DenseNet::make(dims(x_dim + arch.latent_dim, 1), hidden, Activation::sigmoid(), dxz_rng);
  m.disc_xx = DenseNet::make(dims(2 * x_dim, 1), hidden, Activation::sigmoid(), dxx_rng);
  m.latent = DistSpec::standard_normal(arch.latent_dim);
  m.penalty = std::move(penalty);
  return m;
}

void RCGANModel::validate() const {
  const std::size_t xd = x_dim();
  const std::size_t zd = latent_dim();
  if (generator.input_dim() != zd || generator.output_dim() != xd) {
    throw DimensionError("generator must map latent width to data width");
  }
  if (disc_xz.input_dim() != xd + zd || disc_xz.output_dim() != 1) {
    throw DimensionError("D_xz must take (x, z) and return one probability");
  }
  if (disc_xx.input_dim() != 2 * xd || disc_xx.output_dim() != 1) {
    throw DimensionError("D_xx must take (x, x~) and return one probability");
  }
  for (const DenseNet* d : {&disc_xz, &disc_xx}) {
    if (d->layers().back().activation.kind != ActivationKind::sigmoid) {
      throw InvalidArgument("discriminators must end in a sigmoid");
    }
  }
  latent.validate();
  penalty.validate();
  if (latent.dim != zd) throw DimensionError("latent prior dimension does not match encoder");
  if (penalty.dim != xd) throw DimensionError("penalty dimension does not match data");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw InvalidArgument("batch size must be at least 1");
  if (disc_steps < 1) throw InvalidArgument("discriminator step ratio must be at least 1");
}

LossPair loss_v_ano(const RCGANModel& model, const Tensor& x_real, const Tensor& x_pen,
                    const Tensor& z) {
  check_batch(x_real, model.x_dim(), "real");
  check_batch(z, model.latent_dim(), "latent");
  const Tensor d_real = predict(model.disc_xz, concat_cols(x_real, predict(model.encoder, x_real)));
  const Tensor d_fake = predict(model.disc_xz, concat_cols(predict(model.generator, z), z));
  LossPair out;
  out.disc = -(mean_log(d_real) + mean_log1m(d_fake));
  out.gen = -(mean_log1m(d_real) + mean_log(d_fake));
  if (!x_pen.empty()) {
    check_batch(x_pen, model.x_dim(), "penalty");
    const Tensor d_pen = predict(model.disc_xz, concat_cols(x_pen, predict(model.encoder, x_pen)));
    out.disc -= mean_log1m(d_pen);
  }
  return out;
}

LossPair loss_v_cycle(const RCGANModel& model, const Tensor& x_real) {
  check_batch(x_real, model.x_dim(), "real");
  const Tensor recon = predict(model.generator, predict(model.encoder, x_real));
  const Tensor d_same = predict(model.disc_xx, concat_cols(x_real, x_real));
  const Tensor d_recon = predict(model.disc_xx, concat_cols(x_real, recon));
  return {-(mean_log(d_same) + mean_log1m(d_recon)), -mean_log(d_recon)};
}

ModelGradients discriminator_gradients(const RCGANModel& model, const Tensor& x_real,
                                       const Tensor& x_pen, const Tensor& z) {
  check_batch(x_real, model.x_dim(), "real");
  check_batch(z, model.latent_dim(), "latent");
  ModelGradients g;

  const Tensor encoded = predict(model.encoder, x_real);
  const auto real = forward(model.disc_xz, concat_cols(x_real, encoded));
  const auto fake = forward(model.disc_xz, concat_cols(predict(model.generator, z), z));
  g.ano.disc = -(mean_log(real.output()) + mean_log1m(fake.output()));
  g.ano.gen = -(mean_log1m(real.output()) + mean_log(fake.output()));
  g.disc_xz = backward(model.disc_xz, real, upstream_log(real.output(), -1.0));
  g.disc_xz.accumulate(backward(model.disc_xz, fake, upstream_log1m(fake.output(), -1.0)));
  if (!x_pen.empty()) {
    check_batch(x_pen, model.x_dim(), "penalty");
    const auto pen = forward(model.disc_xz, concat_cols(x_pen, predict(model.encoder, x_pen)));
    g.ano.disc -= mean_log1m(pen.output());
    g.disc_xz.accumulate(backward(model.disc_xz, pen, upstream_log1m(pen.output(), -1.0)));
  }

  const Tensor recon = predict(model.generator, encoded);
  const auto same = forward(model.disc_xx, concat_cols(x_real, x_real));
  const auto rec = forward(model.disc_xx, concat_cols(x_real, recon));
  g.cycle.disc = -(mean_log(same.output()) + mean_log1m(rec.output()));
  g.cycle.gen = -mean_log(rec.output());
  g.disc_xx = backward(model.disc_xx, same, upstream_log(same.output(), -1.0));
  g.disc_xx.accumulate(backward(model.disc_xx, rec, upstream_log1m(rec.output(), -1.0)));
  return g;
}

ModelGradients generator_gradients(const RCGANModel& model, const Tensor& x_real,
                                   const Tensor& z) {
  check_batch(x_real, model.x_dim(), "real");
  check_batch(z, model.latent_dim(), "latent");
  const std::size_t xd = model.x_dim();
  ModelGradients g;

  const auto enc = forward(model.encoder, x_real);
  const auto gen_z = forward(model.generator, z);
  const auto gen_ex = forward(model.generator, enc.output());

  // joint-matching terms
  const auto real = forward(model.disc_xz, concat_cols(x_real, enc.output()));
  const auto fake = forward(model.disc_xz, concat_cols(gen_z.output(), z));
  g.ano.disc = -(mean_log(real.output()) + mean_log1m(fake.output()));
  g.ano.gen = -(mean_log1m(real.output()) + mean_log(fake.output()));
  const auto d_real = backward(model.disc_xz, real, upstream_log1m(real.output(), -1.0));
  const auto d_fake = backward(model.disc_xz, fake, upstream_log(fake.output(), -1.0));
  Tensor d_encoded = split_cols(d_real.input, xd).second;
  g.generator = backward(model.generator, gen_z, split_cols(d_fake.input, xd).first);

  // cycle term, through G(E(x))
  const auto same = forward(model.disc_xx, concat_cols(x_real, x_real));
  const auto rec = forward(model.disc_xx, concat_cols(x_real, gen_ex.output()));
  g.cycle.disc = -(mean_log(same.output()) + mean_log1m(rec.output()));
  g.cycle.gen = -mean_log(rec.output());
  const auto d_rec = backward(model.disc_xx, rec, upstream_log(rec.output(), -1.0));
  const auto g_cycle = backward(model.generator, gen_ex, split_cols(d_rec.input, xd).second);
  g.generator.accumulate(g_cycle);
  for (std::size_t i = 0; i < d_encoded.size(); ++i) d_encoded[i] += g_cycle.input[i];

  g.encoder = backward(model.encoder, enc, d_encoded);
  return g;
}

std::vector<LossRecord> LossReport::epoch_means() const {
  std::vector<LossRecord> out;
  std::size_t count = 0;
  for (const auto& rec : steps) {
    if (out.empty() || out.back().epoch != rec.epoch) {
      if (!out.empty()) {
        auto& last = out.back();
        const auto n = static_cast<double>(count);
        last.ano.disc /= n;
        last.ano.gen /= n;
        last.cycle.disc /= n;
        last.cycle.gen /= n;
      }
      out.push_back(LossRecord{rec.step, rec.epoch, {}, {}});
      count = 0;
    }
    auto& acc = out.back();
    acc.ano.disc += rec.ano.disc;
    acc.ano.gen += rec.ano.gen;
    acc.cycle.disc += rec.cycle.disc;
    acc.cycle.gen += rec.cycle.gen;
    acc.step = rec.step;
    ++count;
  }
  if (!out.empty()) {
    auto& last = out.back();
    const auto n = static_cast<double>(count);
    last.ano.disc /= n;
    last.ano.gen /= n;
    last.cycle.disc /= n;
    last.cycle.gen /= n;
  }
  return out;
}

void LossReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "step,epoch,ano_disc,ano_gen,cycle_disc,cycle_gen\n";
  for (const auto& r : steps) {
    out << r.step << ',' << r.epoch << ',' << format_number(r.ano.disc) << ','
        << format_number(r.ano.gen) << ',' << format_number(r.cycle.disc) << ','
        << format_number(r.cycle.gen) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Batcher::Batcher(const Tensor& data, std::size_t batch_size, Rng rng)
    : data_(&data), batch_size_(std::min(batch_size, data.rows())), rng_(std::move(rng)) {
  if (batch_size == 0) throw InvalidArgument("batch size must be at least 1");
  order_.resize(data.rows());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  reshuffle();
}

void Batcher::reshuffle() {
  std::shuffle(order_.begin(), order_.end(), rng_);
  cursor_ = 0;
}

std::size_t Batcher::batches_per_epoch() const { return order_.size() / batch_size_; }

Tensor Batcher::next() {
  if (cursor_ + batch_size_ > order_.size()) reshuffle();
  std::span<const std::size_t> idx(order_.data() + cursor_, batch_size_);
  cursor_ += batch_size_;
  return gather_rows(*data_, idx);
}

Trainer::Trainer(RCGANModel& model, TrainConfig cfg)
    : model_(model),
      cfg_(std::move(cfg)),
      opt_encoder_(AdamState::for_net(model.encoder, cfg_.gen_optimizer)),
      opt_generator_(AdamState::for_net(model.generator, cfg_.gen_optimizer)),
      opt_disc_xz_(AdamState::for_net(model.disc_xz, cfg_.disc_optimizer)),
      opt_disc_xx_(AdamState::for_net(model.disc_xx, cfg_.disc_optimizer)),
      latent_rng_(make_rng(cfg_.seed, Stream::latent)),
      penalty_rng_(make_rng(cfg_.seed, Stream::penalty)) {
  cfg_.validate();
  model_.validate();
}

LossRecord Trainer::step(Batcher& batches) {
  LossRecord record;
  record.step = steps_;
  Tensor x;
  for (std::size_t k = 0; k < cfg_.disc_steps; ++k) {
    x = batches.next();
    const Tensor z = sample(model_.latent, x.rows(), latent_rng_);
    const Tensor x_pen = cfg_.mode == TrainMode::rcgan
                             ? sample(model_.penalty, x.rows(), penalty_rng_)
                             : Tensor();
    auto g = discriminator_gradients(model_, x, x_pen, z);
    if (!finite(g.ano) || !finite(g.cycle)) {
      throw NumericError("non-finite discriminator loss at step " + std::to_string(steps_));
    }
    adam_step(model_.disc_xz, g.disc_xz, opt_disc_xz_);
    adam_step(model_.disc_xx, g.disc_xx, opt_disc_xx_);
    record.ano.disc = g.ano.disc;
    record.cycle.disc = g.cycle.disc;
  }

  const Tensor z = sample(model_.latent, x.rows(), latent_rng_);
  auto g = generator_gradients(model_, x, z);
  if (!finite(g.ano) || !finite(g.cycle)) {
    throw NumericError("non-finite encoder/generator loss at step " + std::to_string(steps_));
  }
  adam_step(model_.encoder, g.encoder, opt_encoder_);
  adam_step(model_.generator, g.generator, opt_generator_);
  record.ano.gen = g.ano.gen;
  record.cycle.gen = g.cycle.gen;
  ++steps_;
  return record;
}

LossReport train(RCGANModel& model, const Tensor& dataset, const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  if (dataset.rank() != 2 || dataset.cols() != model.x_dim()) {
    throw DimensionError("dataset width does not match the model");
  }
  LossReport report;
  if (cfg.epochs == 0) return report;
  Batcher batches(dataset, cfg.batch_size, make_rng(cfg.seed, Stream::shuffle));
  Trainer trainer(model, cfg);
  const std::size_t per_epoch = std::max<std::size_t>(1, batches.batches_per_epoch() / cfg.disc_steps);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t s = 0; s < per_epoch; ++s) {
      auto record = trainer.step(batches);
      record.epoch = epoch;
      report.steps.push_back(record);
    }
  }
  return report;
}

void write_model(std::ostream& out, const RCGANModel& model) {
  out << "rcgan-model v1\n";
  out << "latent " << to_string(model.latent) << "\n";
  out << "penalty " << to_string(model.penalty) << "\n";
  out << "encoder\n";
  write_net(out, model.encoder);
  out << "generator\n";
  write_net(out, model.generator);
  out << "disc_xz\n";
  write_net(out, model.disc_xz);
  out << "disc_xx\n";
  write_net(out, model.disc_xx);
  if (!out) throw IoError("failed to write checkpoint");
}

RCGANModel read_model(std::istream& in) {
  expect_word(in, "rcgan-model");
  expect_word(in, "v1");
  RCGANModel m;
  expect_word(in, "latent");
  m.latent = parse_dist_spec(read_word(in));
  expect_word(in, "penalty");
  m.penalty = parse_dist_spec(read_word(in));
  expect_word(in, "encoder");
  m.encoder = read_net(in);
  expect_word(in, "generator");
  m.generator = read_net(in);
  expect_word(in, "disc_xz");
  m.disc_xz = read_net(in);
  expect_word(in, "disc_xx");
  m.disc_xx = read_net(in);
  m.validate();
  return m;
}

void save_model(const std::filesystem::path& path, const RCGANModel& model) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_model(out, model);
}

RCGANModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return read_model(in);
}

}  // namespace rcgan

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rcgan/adam.hpp"
#include "rcgan/dense_net.hpp"
#include "rcgan/distributions.hpp"
#include "rcgan/random.hpp"
#include "rcgan/tensor.hpp"

namespace rcgan {

// Sigmoid outputs are clamped to [kProbEps, 1 - kProbEps] before any log.
inline constexpr double kProbEps = 1e-7;

// rcgan:          joint-matching loss with the penalty term, plus cycle loss.
// no_penalty:     ablation; the penalty term is dropped and t(x) is never sampled.
// alice_baseline: joint-matching without penalty plus the identical cycle loss.
//                 Numerically the same objective as no_penalty.
enum class TrainMode { rcgan, no_penalty, alice_baseline };

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(std::string_view name);

struct Architecture {
  std::size_t latent_dim = 2;
  std::vector<std::size_t> hidden{64, 64};
  double leaky_alpha = 0.2;
};

struct RCGANModel {
  DenseNet encoder;    // x -> z
  DenseNet generator;  // z -> x
  DenseNet disc_xz;    // (x, z) -> (0, 1)
  DenseNet disc_xx;    // (x, x~) -> (0, 1)
  DistSpec latent;     // p(z)
  DistSpec penalty;    // t(x)

  // Fresh networks for data of width x_dim; latent prior N(0, I). Each
  // network draws its initial weights from its own seed stream.
  static RCGANModel make(std::size_t x_dim, const Architecture& arch, DistSpec penalty,
                         std::uint64_t seed);

  std::size_t x_dim() const { return encoder.input_dim(); }
  std::size_t latent_dim() const { return encoder.output_dim(); }
  void validate() const;

  friend bool operator==(const RCGANModel&, const RCGANModel&) = default;
};

struct TrainConfig {
  TrainMode mode = TrainMode::rcgan;
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  std::size_t disc_steps = 1;  // discriminator updates per encoder/generator update
  AdamConfig disc_optimizer{};
  AdamConfig gen_optimizer{};
  std::uint64_t seed = 0;

  void validate() const;
};

// Discriminator-side and encoder/generator-side values of one objective.
struct LossPair {
  double disc = 0.0;
  double gen = 0.0;
};

// Joint-matching loss. `x_pen` may be empty (no penalty term).
//   disc = -[mean log D(x,E(x)) + mean log(1-D(G(z),z)) + mean log(1-D(x_pen,E(x_pen)))]
//   gen  = -[mean log(1-D(x,E(x))) + mean log D(G(z),z)]     (non-saturating)
LossPair loss_v_ano(const RCGANModel& model, const Tensor& x_real, const Tensor& x_pen,
                    const Tensor& z);

// Cycle-consistency loss with x~ = G(E(x)).
//   disc = -[mean log Dxx(x,x) + mean log(1-Dxx(x,x~))]
//   gen  = -mean log Dxx(x,x~)
LossPair loss_v_cycle(const RCGANModel& model, const Tensor& x_real);

// Gradients of the discriminator losses w.r.t. discriminator parameters and
// of the encoder/generator losses w.r.t. encoder/generator parameters.
// Penalty samples reach D_xz only; the encoder receives no gradient from them.
struct ModelGradients {
  LossPair ano;
  LossPair cycle;
  NetGradients disc_xz;
  NetGradients disc_xx;
  NetGradients encoder;
  NetGradients generator;
};

ModelGradients discriminator_gradients(const RCGANModel& model, const Tensor& x_real,
                                       const Tensor& x_pen, const Tensor& z);
ModelGradients generator_gradients(const RCGANModel& model, const Tensor& x_real,
                                   const Tensor& z);

struct LossRecord {
  std::size_t step = 0;
  std::size_t epoch = 0;
  LossPair ano;
  LossPair cycle;
};

struct LossReport {
  std::vector<LossRecord> steps;

  // Per-epoch means of every column.
  std::vector<LossRecord> epoch_means() const;
  void write_csv(const std::filesystem::path& path) const;
};

// Cycles through a dataset in seeded shuffled order.
class Batcher {
 public:
  Batcher(const Tensor& data, std::size_t batch_size, Rng rng);
  Tensor next();
  // Batches per pass over the data (the final partial batch is dropped).
  std::size_t batches_per_epoch() const;

 private:
  void reshuffle();

  const Tensor* data_;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

// Optimiser state and random streams for one training run.
class Trainer {
 public:
  Trainer(RCGANModel& model, TrainConfig cfg);

  // cfg.disc_steps discriminator updates (each on a fresh real batch), then one
  // encoder/generator update on the last real batch. Throws NumericError if
  // any loss is not finite.
  LossRecord step(Batcher& batches);

  std::size_t steps_taken() const { return steps_; }

 private:
  RCGANModel& model_;
  TrainConfig cfg_;
  AdamState opt_encoder_, opt_generator_, opt_disc_xz_, opt_disc_xx_;
  Rng latent_rng_, penalty_rng_;
  std::size_t steps_ = 0;
};

// Runs cfg.epochs passes of Trainer::step over shuffled normal-only data.
LossReport train(RCGANModel& model, const Tensor& dataset, const TrainConfig& cfg);

// Checkpoint: plain text, hexadecimal floats, bit-exact round trip.
void write_model(std::ostream& out, const RCGANModel& model);
RCGANModel read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const RCGANModel& model);
RCGANModel load_model(const std::filesystem::path& path);

}  // namespace rcgan

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rcgan/random.hpp"
#include "rcgan/tensor.hpp"

namespace rcgan {

enum class ActivationKind { identity, leaky_relu, tanh, sigmoid };

struct Activation {
  ActivationKind kind = ActivationKind::identity;
  double alpha = 0.2;  // leaky-relu negative slope

  static Activation identity() { return {ActivationKind::identity, 0.0}; }
  static Activation leaky_relu(double alpha = 0.2) { return {ActivationKind::leaky_relu, alpha}; }
  static Activation tanh() { return {ActivationKind::tanh, 0.0}; }
  static Activation sigmoid() { return {ActivationKind::sigmoid, 0.0}; }

  friend bool operator==(const Activation&, const Activation&) = default;
};

std::string to_string(ActivationKind kind);
ActivationKind parse_activation_kind(std::string_view name);

struct DenseLayer {
  Tensor weight;  // [out x in]
  Tensor bias;    // [out]
  Activation activation;

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Chain of affine layers. Sigmoid is only allowed on the final layer.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  // Glorot-uniform weights in +-sqrt(6/(in+out)), zero biases. `dims` lists
  // every width including input and output.
  static DenseNet make(const std::vector<std::size_t>& dims, Activation hidden,
                       Activation output, Rng& rng);

  std::size_t input_dim() const { return layers_.front().in_dim(); }
  std::size_t output_dim() const { return layers_.back().out_dim(); }
  std::size_t depth() const { return layers_.size(); }
  std::size_t parameter_count() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  // Flat views over weight/bias tensors, layer by layer (weight then bias).
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;

  friend bool operator==(const DenseNet&, const DenseNet&) = default;

 private:
  std::vector<DenseLayer> layers_;
};

// Everything the backward pass and the feature-matching score need.
struct ActivationTrace {
  Tensor input;                      // [B x in]
  std::vector<Tensor> pre;           // per layer, before activation
  std::vector<Tensor> post;          // per layer, after activation

  const Tensor& output() const { return post.back(); }
  // Input to the final affine layer ("last layer before the logit").
  const Tensor& penultimate() const { return post.size() > 1 ? post[post.size() - 2] : input; }
};

struct LayerGradients {
  Tensor weight;
  Tensor bias;
};

struct NetGradients {
  std::vector<LayerGradients> layers;
  Tensor input;  // dL/d(input batch)

  static NetGradients zeros_like(const DenseNet& net);
  std::vector<const Tensor*> parameters() const;
  std::vector<Tensor*> parameters();
  // this += other, parameter tensors only.
  void accumulate(const NetGradients& other);
};

ActivationTrace forward(const DenseNet& net, const Tensor& batch);

// Output only; skips storing the trace.
Tensor predict(const DenseNet& net, const Tensor& batch);

// Reverse-mode pass through `trace` (which must come from `net`) given
// dL/d(output).
NetGradients backward(const DenseNet& net, const ActivationTrace& trace, const Tensor& upstream);

// Plain-text layout with hexadecimal floats; round-trips bit-exactly.
void write_net(std::ostream& out, const DenseNet& net);
DenseNet read_net(std::istream& in);

}  // namespace rcgan

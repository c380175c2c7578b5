#include "rcgan/dense_net.hpp"

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "rcgan/errors.hpp"

namespace rcgan {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using ConstRowVectorMap = Eigen::Map<const Eigen::RowVectorXd>;
using RowVectorMap = Eigen::Map<Eigen::RowVectorXd>;

ConstMatrixMap as_matrix(const Tensor& t) {
  return ConstMatrixMap(t.values().data(), static_cast<Eigen::Index>(t.rows()),
                        static_cast<Eigen::Index>(t.cols()));
}

MatrixMap as_matrix(Tensor& t) {
  return MatrixMap(t.values().data(), static_cast<Eigen::Index>(t.rows()),
                   static_cast<Eigen::Index>(t.cols()));
}

void apply_activation(const Activation& act, const Tensor& pre, Tensor& post) {
  auto in = pre.values();
  auto out = post.values();
  switch (act.kind) {
    case ActivationKind::identity:
      if (in.data() != out.data()) std::copy(in.begin(), in.end(), out.begin());
      break;
    case ActivationKind::leaky_relu:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : act.alpha * in[i];
      break;
    case ActivationKind::tanh:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::tanh(in[i]);
      break;
    case ActivationKind::sigmoid:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-in[i]));
      break;
  }
}

// upstream <- upstream * act'(pre), in place.
void scale_by_derivative(const Activation& act, const Tensor& pre, const Tensor& post,
                         Tensor& upstream) {
  auto g = upstream.values();
  auto z = pre.values();
  auto a = post.values();
  switch (act.kind) {
    case ActivationKind::identity:
      break;
    case ActivationKind::leaky_relu:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= z[i] > 0.0 ? 1.0 : act.alpha;
      break;
    case ActivationKind::tanh:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - a[i] * a[i];
      break;
    case ActivationKind::sigmoid:
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= a[i] * (1.0 - a[i]);
      break;
  }
}

void write_hex(std::ostream& out, double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  if (ec != std::errc()) throw FormatError("cannot format value");
  out.write(buf, end - buf);
}

double read_hex(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw FormatError("net: unexpected end of input while reading values");
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v,
                                   std::chars_format::hex);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw FormatError("net: bad value '" + token + "'");
  }
  return v;
}

void expect_word(std::istream& in, const std::string& word) {
  std::string token;
  if (!(in >> token) || token != word) {
    throw FormatError("net: expected '" + word + "', found '" + token + "'");
  }
}

}  // namespace

std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::identity: return "identity";
    case ActivationKind::leaky_relu: return "leaky_relu";
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::sigmoid: return "sigmoid";
  }
  return "identity";
}

ActivationKind parse_activation_kind(std::string_view name) {
  if (name == "identity") return ActivationKind::identity;
  if (name == "leaky_relu" || name == "leaky-relu") return ActivationKind::leaky_relu;
  if (name == "tanh") return ActivationKind::tanh;
  if (name == "sigmoid") return ActivationKind::sigmoid;
  throw InvalidArgument("unknown activation '" + std::string(name) + "'");
}

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw DimensionError("network needs at least one layer");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& layer = layers_[k];
    if (layer.weight.rank() != 2) throw DimensionError("layer weight must be a matrix");
    if (layer.bias.size() != layer.out_dim()) {
      throw DimensionError("layer " + std::to_string(k) + ": bias length does not match rows");
    }
    if (k + 1 < layers_.size()) {
      if (layer.out_dim() != layers_[k + 1].in_dim()) {
        throw DimensionError("layer " + std::to_string(k) + " output width " +
                             std::to_string(layer.out_dim()) + " does not feed layer " +
                             std::to_string(k + 1) + " input width " +
                             std::to_string(layers_[k + 1].in_dim()));
      }
      if (layer.activation.kind == ActivationKind::sigmoid) {
        throw InvalidArgument("sigmoid is only allowed on the final layer");
      }
    }
  }
}

DenseNet DenseNet::make(const std::vector<std::size_t>& dims, Activation hidden,
                        Activation output, Rng& rng) {
  if (dims.size() < 2) throw DimensionError("network needs input and output widths");
  std::vector<DenseLayer> layers;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const std::size_t in = dims[k];
    const std::size_t out = dims[k + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> init(-bound, bound);
    DenseLayer layer{Tensor::matrix(out, in), Tensor::vector(out),
                     k + 2 == dims.size() ? output : hidden};
    for (auto& w : layer.weight.values()) w = init(rng);
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

std::vector<Tensor*> DenseNet::parameters() {
  std::vector<Tensor*> out;
  for (auto& layer : layers_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<const Tensor*> DenseNet::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& layer : layers_) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

NetGradients NetGradients::zeros_like(const DenseNet& net) {
  NetGradients g;
  for (const auto& layer : net.layers()) {
    g.layers.push_back({Tensor(layer.weight.shape()), Tensor(layer.bias.shape())});
  }
  return g;
}

std::vector<const Tensor*> NetGradients::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& layer : layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<Tensor*> NetGradients::parameters() {
  std::vector<Tensor*> out;
  for (auto& layer : layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

void NetGradients::accumulate(const NetGradients& other) {
  if (other.layers.size() != layers.size()) throw DimensionError("gradient depth mismatch");
  auto mine = parameters();
  auto theirs = other.parameters();
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i]->shape() != theirs[i]->shape()) throw DimensionError("gradient shape mismatch");
    auto dst = mine[i]->values();
    auto src = theirs[i]->values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

ActivationTrace forward(const DenseNet& net, const Tensor& batch) {
  if (batch.rank() != 2 || batch.cols() != net.input_dim()) {
    throw DimensionError("forward: batch width " + std::to_string(batch.cols()) +
                         " does not match network input " + std::to_string(net.input_dim()));
  }
  ActivationTrace trace;
  trace.input = batch;
  trace.pre.reserve(net.depth());
  trace.post.reserve(net.depth());
  const Tensor* current = &trace.input;
  for (const auto& layer : net.layers()) {
    Tensor pre = Tensor::matrix(batch.rows(), layer.out_dim());
    auto z = as_matrix(pre);
    z.noalias() = as_matrix(*current) * as_matrix(layer.weight).transpose();
    z.rowwise() += ConstRowVectorMap(layer.bias.values().data(),
                                     static_cast<Eigen::Index>(layer.bias.size()));
    Tensor post(pre.shape());
    apply_activation(layer.activation, pre, post);
    trace.pre.push_back(std::move(pre));
    trace.post.push_back(std::move(post));
    current = &trace.post.back();
  }
  return trace;
}

// Same arithmetic as forward, without keeping the trace. The loss functions
// call this hundreds of thousands of times in the gradient checks.
Tensor predict(const DenseNet& net, const Tensor& batch) {
  if (batch.rank() != 2 || batch.cols() != net.input_dim()) {
    throw DimensionError("forward: batch width " + std::to_string(batch.cols()) +
                         " does not match network input " + std::to_string(net.input_dim()));
  }
  Tensor current;
  const Tensor* input = &batch;
  for (const auto& layer : net.layers()) {
    Tensor out = Tensor::matrix(batch.rows(), layer.out_dim());
    auto z = as_matrix(out);
    z.noalias() = as_matrix(*input) * as_matrix(layer.weight).transpose();
    z.rowwise() += ConstRowVectorMap(layer.bias.values().data(),
                                     static_cast<Eigen::Index>(layer.bias.size()));
    apply_activation(layer.activation, out, out);  // elementwise, safe in place
    current = std::move(out);
    input = &current;
  }
  return current;
}

NetGradients backward(const DenseNet& net, const ActivationTrace& trace, const Tensor& upstream) {
  if (trace.post.size() != net.depth()) throw DimensionError("backward: trace depth mismatch");
  if (upstream.shape() != trace.output().shape()) {
    throw DimensionError("backward: upstream shape does not match network output");
  }
  NetGradients grads;
  grads.layers.resize(net.depth());
  Tensor delta = upstream;
  for (std::size_t k = net.depth(); k-- > 0;) {
    const auto& layer = net.layers()[k];
    scale_by_derivative(layer.activation, trace.pre[k], trace.post[k], delta);
    const Tensor& layer_input = k == 0 ? trace.input : trace.post[k - 1];

    auto d = as_matrix(delta);
    LayerGradients g{Tensor(layer.weight.shape()), Tensor(layer.bias.shape())};
    as_matrix(g.weight).noalias() = d.transpose() * as_matrix(layer_input);
    RowVectorMap(g.bias.values().data(), static_cast<Eigen::Index>(g.bias.size())) =
        d.colwise().sum();

    Tensor next = Tensor::matrix(delta.rows(), layer.in_dim());
    as_matrix(next).noalias() = d * as_matrix(layer.weight);
    grads.layers[k] = std::move(g);
    delta = std::move(next);
  }
  grads.input = std::move(delta);
  return grads;
}

void write_net(std::ostream& out, const DenseNet& net) {
  out << "dense-net v1\n";
  out << "layers " << net.depth() << "\n";
  for (const auto& layer : net.layers()) {
    out << "layer " << layer.in_dim() << " " << layer.out_dim() << " "
        << to_string(layer.activation.kind) << " ";
    write_hex(out, layer.activation.alpha);
    out << "\n";
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
      for (std::size_t c = 0; c < layer.in_dim(); ++c) {
        if (c) out << ' ';
        write_hex(out, layer.weight(r, c));
      }
      out << "\n";
    }
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
      if (r) out << ' ';
      write_hex(out, layer.bias[r]);
    }
    out << "\n";
  }
  if (!out) throw IoError("failed to write network");
}

DenseNet read_net(std::istream& in) {
  expect_word(in, "dense-net");
  expect_word(in, "v1");
  expect_word(in, "layers");
  std::size_t depth = 0;
  if (!(in >> depth) || depth == 0) throw FormatError("net: bad layer count");
  std::vector<DenseLayer> layers;
  for (std::size_t k = 0; k < depth; ++k) {
    expect_word(in, "layer");
    std::size_t in_dim = 0, out_dim = 0;
    std::string act;
    if (!(in >> in_dim >> out_dim >> act) || in_dim == 0 || out_dim == 0) {
      throw FormatError("net: bad layer header");
    }
    Activation activation{parse_activation_kind(act), read_hex(in)};
    DenseLayer layer{Tensor::matrix(out_dim, in_dim), Tensor::vector(out_dim), activation};
    for (auto& w : layer.weight.values()) w = read_hex(in);
    for (auto& b : layer.bias.values()) b = read_hex(in);
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

}  // namespace rcgan

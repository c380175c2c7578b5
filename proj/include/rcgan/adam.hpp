#pragma once

#include <cstdint>
#include <vector>

#include "rcgan/dense_net.hpp"
#include "rcgan/tensor.hpp"

namespace rcgan {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;

  static AdamState for_parameters(const std::vector<const Tensor*>& params, AdamConfig config);
  static AdamState for_net(const DenseNet& net, AdamConfig config) {
    return for_parameters(net.parameters(), config);
  }
};

// One bias-corrected adaptive-moment update.
void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state);

inline void adam_step(DenseNet& net, const NetGradients& grads, AdamState& state) {
  adam_step(net.parameters(), grads.parameters(), state);
}

}  // namespace rcgan

#include "rispoison/nn/adam.hpp"

#include <cmath>

#include "rispoison/errors.hpp"
#include "rispoison/kernels.hpp"

namespace rispoison::nn {

Adam::Adam(AdamConfig config, const std::vector<const Array2*>& params) : config_(config) {
  for (const Array2* p : params) {
    first_.emplace_back(p->rows(), p->cols());
    second_.emplace_back(p->rows(), p->cols());
  }
}

void Adam::step(const std::vector<Array2*>& params, const std::vector<Array2>& grads) {
  if (params.size() != first_.size() || grads.size() != first_.size()) {
    throw ConfigError("Adam::step: parameter count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(first_[i]) || !grads[i].same_shape(first_[i])) {
      throw ConfigError("Adam::step: shape mismatch at parameter " + std::to_string(i));
    }
    if (!grads[i].all_finite()) {
      throw DivergenceError("Adam::step: non-finite gradient at parameter " + std::to_string(i));
    }
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const kernels::AdamParams hp{config_.learning_rate,
                               config_.beta1,
                               config_.beta2,
                               config_.epsilon,
                               1.0 - std::pow(config_.beta1, t),
                               1.0 - std::pow(config_.beta2, t)};
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < params.size(); ++i) {
    k.adam_update(params[i]->size(), params[i]->data().data(), grads[i].data().data(),
                  first_[i].data().data(), second_[i].data().data(), hp);
  }
}

}  // namespace rispoison::nn

#include "sacl/optim.hpp"

#include <cmath>

#include "sacl/error.hpp"

namespace sacl {

void AdamOptions::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("Adam lr must be finite and >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("Adam eps must be positive");
}

AdamState::AdamState(AdamOptions options, std::vector<std::size_t> block_sizes)
    : options_(options) {
  options_.validate();
  for (std::size_t n : block_sizes) {
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
  }
}

void adam_step(AdamState& state, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads) {
  if (params.size() != state.m_.size() || grads.size() != state.m_.size()) {
    throw ShapeError("adam_step: parameter block count differs from optimizer state");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != state.m_[b].size() || grads[b].size() != state.m_[b].size()) {
      throw ShapeError("adam_step: block " + std::to_string(b) + " has the wrong size");
    }
  }
  const auto& o = state.options_;
  ++state.steps_;
  const double t = static_cast<double>(state.steps_);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& m = state.m_[b];
    auto& v = state.v_[b];
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double g = grads[b][k];
      m[k] = o.beta1 * m[k] + (1.0 - o.beta1) * g;
      v[k] = o.beta2 * v[k] + (1.0 - o.beta2) * g * g;
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      params[b][k] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
    }
  }
}

}  // namespace sacl

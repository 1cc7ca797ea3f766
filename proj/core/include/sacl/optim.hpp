#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sacl {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

// Bias-corrected Adam moments for a fixed list of parameter blocks.
class AdamState {
 public:
  AdamState(AdamOptions options, std::vector<std::size_t> block_sizes);

  const AdamOptions& options() const noexcept { return options_; }
  std::uint64_t step_count() const noexcept { return steps_; }
  const std::vector<std::vector<double>>& first_moments() const noexcept { return m_; }
  const std::vector<std::vector<double>>& second_moments() const noexcept { return v_; }

 private:
  friend void adam_step(AdamState&, std::span<const std::span<double>>,
                        std::span<const std::span<const double>>);

  AdamOptions options_;
  std::uint64_t steps_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// One update of every block in place. Throws ShapeError if the blocks do not
// match the sizes the state was built for.
void adam_step(AdamState& state, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads);

}  // namespace sacl

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qgd {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam over a fixed list of parameter blocks. Moment buffers
/// are sized lazily on the first step; later steps must pass the same shapes.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
            double lr);
  void step(std::span<double> params, std::span<const double> grads, double lr);

  std::int64_t steps_taken() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace qgd

#include "qgd/adam.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace qgd {

void Adam::step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
                double lr) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument(fmt::format("{} parameter blocks but {} gradient blocks", params.size(), grads.size()));
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Adam state does not match parameter blocks");

  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto p = params[b];
    auto g = grads[b];
    auto& m = m_[b];
    auto& v = v_[b];
    if (p.size() != m.size() || g.size() != m.size()) {
      throw std::invalid_argument(fmt::format("block {} changed shape between Adam steps", b));
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

void Adam::step(std::span<double> params, std::span<const double> grads, double lr) {
  const std::span<double> p[] = {params};
  const std::span<const double> g[] = {grads};
  step(std::span<const std::span<double>>(p), std::span<const std::span<const double>>(g), lr);
}

}  // namespace qgd

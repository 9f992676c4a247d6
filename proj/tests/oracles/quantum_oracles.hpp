#pragma once
// Reference implementations used only by tests. They share no code with the
// library: perfect matchings are enumerated explicitly and reduced states are
// built as dense density matrices.

#include <array>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Edge index from first principles: pairs are ranked lexicographically and the
// two endpoint modes form the low two bits (lower vertex first).
inline int edge(int a, int ma, int b, int mb) {
  if (a > b) {
    std::swap(a, b);
    std::swap(ma, mb);
  }
  int rank = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      if (i == a && j == b) return 4 * rank + 2 * ma + mb;
      ++rank;
    }
  return -1;
}

// Every perfect matching of K4 as a list of two vertex pairs.
inline std::vector<std::array<std::pair<int, int>, 2>> perfect_matchings() {
  std::vector<std::array<std::pair<int, int>, 2>> out;
  for (int partner = 1; partner < 4; ++partner) {
    std::array<int, 2> rest{};
    int n = 0;
    for (int v = 1; v < 4; ++v)
      if (v != partner) rest[n++] = v;
    out.push_back({std::pair{0, partner}, std::pair{rest[0], rest[1]}});
  }
  return out;
}

// Unnormalized amplitudes: for every matching and every assignment of a mode
// to every vertex, the product of the two edge weights joins the ket spelled
// by those modes.
inline std::array<double, 16> brute_force_state(const std::array<double, 24>& w) {
  std::array<double, 16> amp{};
  for (const auto& pm : perfect_matchings()) {
    for (int assign = 0; assign < 16; ++assign) {
      std::array<int, 4> mode{};
      for (int v = 0; v < 4; ++v) mode[v] = (assign >> (3 - v)) & 1;
      double term = 1.0;
      for (const auto& [a, b] : pm) term *= w[edge(a, mode[a], b, mode[b])];
      int ket = 0;
      for (int v = 0; v < 4; ++v) ket = 2 * ket + mode[v];
      amp[ket] += term;
    }
  }
  return amp;
}

// tr(rho_M^2) from an explicit 16x16 density matrix traced down to the
// parties in `keep_mask` (bit v = party v).
inline double dense_purity(const std::array<double, 16>& psi, unsigned keep_mask) {
  Eigen::MatrixXd rho(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) rho(i, j) = psi[i] * psi[j];
  std::vector<int> keep, drop;
  for (int v = 0; v < 4; ++v) ((keep_mask >> v) & 1u ? keep : drop).push_back(v);
  const int dk = 1 << keep.size();
  const int dd = 1 << drop.size();
  auto compose = [&](int k, int d) {
    std::array<int, 4> bits{};
    for (std::size_t i = 0; i < keep.size(); ++i) bits[keep[i]] = (k >> (keep.size() - 1 - i)) & 1;
    for (std::size_t i = 0; i < drop.size(); ++i) bits[drop[i]] = (d >> (drop.size() - 1 - i)) & 1;
    return bits[0] * 8 + bits[1] * 4 + bits[2] * 2 + bits[3];
  };
  Eigen::MatrixXd red = Eigen::MatrixXd::Zero(dk, dk);
  for (int a = 0; a < dk; ++a)
    for (int b = 0; b < dk; ++b)
      for (int d = 0; d < dd; ++d) red(a, b) += rho(compose(a, d), compose(b, d));
  return (red * red).trace();
}

inline std::array<unsigned, 7> bipartition_masks() { return {1u, 2u, 4u, 8u, 3u, 5u, 9u}; }

inline std::array<double, 16> normalized(std::array<double, 16> a) {
  double n = 0.0;
  for (double x : a) n += x * x;
  n = std::sqrt(n);
  for (double& x : a) x /= n;
  return a;
}

}  // namespace oracle

#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "dendroflow/rng.hpp"
#include "dendroflow/series.hpp"
#include "dendroflow/tree.hpp"

namespace dendroflow {

/// Two-sided exponential jump mixture {p, lambda_u, lambda_d}: with
/// probability p an upward Exp(lambda_u) jump, otherwise a downward
/// Exp(lambda_d) jump. A and gamma are always recomputed from the triplet.
struct EhmcParams {
  double p = 0.5;
  double lambda_u = 1.0;
  double lambda_d = 1.0;

  double big_a() const { return (1.0 - p) / p; }
  double gamma() const { return lambda_d / lambda_u; }
  bool symmetric() const { return p == 0.5 && lambda_u == lambda_d; }
  /// E[jump] = p/lambda_u - (1-p)/lambda_d = 0.
  bool mean_zero() const { return p * lambda_d == (1.0 - p) * lambda_u; }
  void validate() const;
};

struct GaussianKernel {
  double sigma = 1.0;
};
struct UniformKernel {
  double half_width = 1.0;  // uniform on [-h, h]
};
struct LaplaceKernel {
  double lambda = 1.0;
};
struct ExponentialMixtureKernel {
  EhmcParams params;
};
struct RademacherKernel {};  // +-1 steps

using KernelSpec =
    std::variant<GaussianKernel, UniformKernel, LaplaceKernel, ExponentialMixtureKernel, RademacherKernel>;

double sample_jump(const KernelSpec& kernel, Rng& rng);
bool is_symmetric(const KernelSpec& kernel);
std::string kernel_name(const KernelSpec& kernel);
void validate_kernel(const KernelSpec& kernel);

/// Homogeneous Markov chain: X_0 = 0 and i.i.d. jumps from the kernel.
/// Identical (kernel, n, seed) give identical output.
Series gen_chain(const KernelSpec& kernel, std::size_t n, std::uint64_t seed);

/// Binary Galton-Watson law: a vertex has two children with probability p2,
/// none otherwise. Rates mirror the rise/fall rates of the matching
/// exponential excursion.
struct GwParams {
  double p2 = 0.5;
  double edge_rate_up = 1.0;    // mu + lambda
  double edge_rate_down = 1.0;  // mu - lambda

  double p0() const { return 1.0 - p2; }
  void validate() const;
};

/// Samples a binary Galton-Watson tree with i.i.d. exponential edge lengths
/// (rate = mean of the two rates). Requires p2 <= 1/2; aborts with an error
/// once the arena exceeds max_nodes.
Tree gen_gw_tree(const GwParams& g, std::size_t max_nodes, std::uint64_t seed);

/// Fractional Brownian motion by circulant embedding of the fractional
/// Gaussian noise autocovariance (exact in distribution). n must be a power
/// of two; the path starts at 0. Throws when the embedding produces a
/// negative eigenvalue (small n with H near 1) with advice to enlarge n.
Series gen_fbm(double hurst, std::size_t n, std::uint64_t seed);

/// First maximal segment of the path strictly above its running minimum,
/// shifted to start and end at 0 (terminal crossing interpolated). Throws
/// when no excursion completes.
Series first_excursion(const Series& s);

}  // namespace dendroflow

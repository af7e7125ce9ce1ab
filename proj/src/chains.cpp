#include "dendroflow/chains.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "dendroflow/level_set.hpp"

namespace dendroflow {

void EhmcParams::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ehmc: p must be in [0,1]");
  if (!(lambda_u > 0.0) || !(lambda_d > 0.0))
    throw std::invalid_argument("ehmc: rates must be positive");
}

void GwParams::validate() const {
  if (!(p2 >= 0.0 && p2 <= 0.5))
    throw std::invalid_argument("gw: p2 must lie in [0, 1/2] (supercritical trees explode)");
  if (!(edge_rate_up > 0.0) || !(edge_rate_down > 0.0))
    throw std::invalid_argument("gw: edge rates must be positive");
}

double sample_jump(const KernelSpec& kernel, Rng& rng) {
  return std::visit(
      [&rng](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianKernel>) {
          return k.sigma * rng.next_gaussian();
        } else if constexpr (std::is_same_v<T, UniformKernel>) {
          return k.half_width * (2.0 * rng.next_double() - 1.0);
        } else if constexpr (std::is_same_v<T, LaplaceKernel>) {
          double mag = rng.next_exponential(k.lambda);
          return rng.next_bernoulli(0.5) ? mag : -mag;
        } else if constexpr (std::is_same_v<T, ExponentialMixtureKernel>) {
          const EhmcParams& e = k.params;
          return rng.next_bernoulli(e.p) ? rng.next_exponential(e.lambda_u)
                                         : -rng.next_exponential(e.lambda_d);
        } else {
          return rng.next_bernoulli(0.5) ? 1.0 : -1.0;
        }
      },
      kernel);
}

bool is_symmetric(const KernelSpec& kernel) {
  if (const auto* m = std::get_if<ExponentialMixtureKernel>(&kernel)) return m->params.symmetric();
  return true;  // gaussian, uniform, laplace, rademacher
}

std::string kernel_name(const KernelSpec& kernel) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianKernel>)
          return "gaussian";
        else if constexpr (std::is_same_v<T, UniformKernel>)
          return "uniform";
        else if constexpr (std::is_same_v<T, LaplaceKernel>)
          return "laplace";
        else if constexpr (std::is_same_v<T, ExponentialMixtureKernel>)
          return "ehmc";
        else
          return "rademacher";
      },
      kernel);
}

void validate_kernel(const KernelSpec& kernel) {
  std::visit(
      [](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianKernel>) {
          if (!(k.sigma > 0)) throw std::invalid_argument("gaussian kernel: sigma must be positive");
        } else if constexpr (std::is_same_v<T, UniformKernel>) {
          if (!(k.half_width > 0)) throw std::invalid_argument("uniform kernel: h must be positive");
        } else if constexpr (std::is_same_v<T, LaplaceKernel>) {
          if (!(k.lambda > 0)) throw std::invalid_argument("laplace kernel: lambda must be positive");
        } else if constexpr (std::is_same_v<T, ExponentialMixtureKernel>) {
          k.params.validate();
        }
      },
      kernel);
}

Series gen_chain(const KernelSpec& kernel, std::size_t n, std::uint64_t seed) {
  validate_kernel(kernel);
  if (n == 0) throw std::invalid_argument("gen_chain: n must be >= 1");
  Rng rng(seed);
  Series s;
  s.values.resize(n);
  s.values[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) s.values[k] = s.values[k - 1] + sample_jump(kernel, rng);
  return s;
}

Tree gen_gw_tree(const GwParams& g, std::size_t max_nodes, std::uint64_t seed) {
  g.validate();
  Rng rng(seed);
  double rate = 0.5 * (g.edge_rate_up + g.edge_rate_down);
  Tree t;
  auto& arena = t.mutable_nodes();
  arena.emplace_back();
  double ghost = rng.next_exponential(rate);
  std::vector<NodeId> stack{0};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    if (!rng.next_bernoulli(g.p2)) continue;  // leaf
    for (int side = 0; side < 2; ++side) {
      if (arena.size() >= max_nodes)
        throw std::runtime_error("gen_gw_tree: max_nodes exceeded (" + std::to_string(max_nodes) + ")");
      NodeId c = static_cast<NodeId>(arena.size());
      arena.emplace_back();
      arena[static_cast<std::size_t>(c)].parent = id;
      arena[static_cast<std::size_t>(c)].parent_edge_length = rng.next_exponential(rate);
      arena[static_cast<std::size_t>(id)].children.push_back(c);
    }
    // push right child first so the left subtree is generated first
    stack.push_back(arena[static_cast<std::size_t>(id)].children[1]);
    stack.push_back(arena[static_cast<std::size_t>(id)].children[0]);
  }
  t.set_root(0);
  t.set_ghost(ghost);
  t.validate();
  return t;
}

namespace {

// Iterative radix-2 complex FFT; size must be a power of two. Enough for the
// circulant embedding below, which only ever sees power-of-two lengths.
void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * 3.14159265358979323846 / static_cast<double>(len) * (inverse ? -1.0 : 1.0);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& z : a) z /= static_cast<double>(n);
}

}  // namespace

Series gen_fbm(double hurst, std::size_t n, std::uint64_t seed) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("gen_fbm: H must lie in (0,1)");
  if (n < 2 || (n & (n - 1)) != 0)
    throw std::invalid_argument("gen_fbm: n must be a power of two >= 2");

  const std::size_t m = 2 * n;
  double h2 = 2.0 * hurst;
  auto gamma = [h2](std::size_t k) {
    double kk = static_cast<double>(k);
    return 0.5 * (std::pow(std::abs(kk - 1.0), h2) - 2.0 * std::pow(kk, h2) +
                  std::pow(kk + 1.0, h2));
  };
  std::vector<std::complex<double>> c(m);
  for (std::size_t k = 0; k <= n; ++k) c[k] = gamma(k);
  for (std::size_t k = 1; k < n; ++k) c[m - k] = c[k];
  fft_radix2(c, false);

  double max_eig = 0.0;
  for (const auto& z : c) max_eig = std::max(max_eig, z.real());
  std::vector<double> lambda(m);
  for (std::size_t k = 0; k < m; ++k) {
    double ev = c[k].real();
    if (ev < -1e-9 * std::max(1.0, max_eig))
      throw std::runtime_error("gen_fbm: circulant embedding has a negative eigenvalue; use a larger n");
    lambda[k] = std::max(ev, 0.0);
  }

  Rng rng(seed);
  std::vector<std::complex<double>> v(m);
  v[0] = std::sqrt(lambda[0]) * rng.next_gaussian();
  v[n] = std::sqrt(lambda[n]) * rng.next_gaussian();
  for (std::size_t k = 1; k < n; ++k) {
    double a = rng.next_gaussian();
    double b = rng.next_gaussian();
    std::complex<double> z(a, b);
    v[k] = std::sqrt(lambda[k] / 2.0) * z;
    v[m - k] = std::conj(v[k]);
  }
  fft_radix2(v, false);

  double scale = 1.0 / std::sqrt(static_cast<double>(m));
  Series out;
  out.values.resize(n);
  out.values[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k)
    out.values[k] = out.values[k - 1] + v[k - 1].real() * scale;
  return out;
}

Series first_excursion(const Series& s) {
  auto ladder = descending_ladder(s);
  if (ladder.excursions.empty())
    throw std::runtime_error("first_excursion: no completed excursion in the series");
  return ladder.excursions.front();
}

}  // namespace dendroflow

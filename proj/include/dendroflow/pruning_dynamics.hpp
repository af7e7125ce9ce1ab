#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "dendroflow/chains.hpp"

namespace dendroflow {

/// Parameters of the chain formed by the local minima:
/// p* = p ld / (p ld + (1-p) lu), ld* = p ld, lu* = (1-p) lu.
EhmcParams ehmc_prune_params(const EhmcParams& e);

/// One pruning step in the (A, gamma) plane: A* = A/gamma, gamma* = gamma/A.
/// The product A* gamma* is identically 1.
std::pair<double, double> a_gamma_step(double big_a, double gamma);

/// Binary Galton-Watson branching probability after one pruning:
/// p2' = p2^2 / ((1-p2)^2 + p2^2). Requires p2 in [0, 1/2].
double gw_p2_step(double p2);

/// Galton-Watson law of the level-set tree of the first positive excursion:
/// p2 = p ld / ((1-p) lu + p ld). Flagged supercritical when p2 > 1/2
/// (positive drift; excursions need not complete).
struct GwCorrespondence {
  GwParams gw;
  bool supercritical = false;
};
GwCorrespondence ehmc_to_gw(const EhmcParams& e);

/// Characteristic function s -> E[exp(isX)] of a jump density.
using CharacteristicFn = std::function<std::complex<double>(double)>;

CharacteristicFn exponential_cf(double lambda);  // density lambda e^{-lambda x}, x >= 0
CharacteristicFn uniform01_cf();                 // density 1 on (0, 1)

/// 401 evenly spaced points on [-10, 10].
std::vector<double> default_dss_grid();

/// Distributional self-similarity residual: the maximum over the grid of
/// | Re f^(2s) - | f^(s) / (2 - f^(s)) |^2 |; zero exactly for densities whose
/// symmetrized chain reproduces its own minima law at scale 2.
double dss_residual(const CharacteristicFn& fhat, std::span<const double> grid);

/// One row per pruning iterate of an exponential chain.
struct DynamicsRow {
  int m = 0;
  double p, lambda_u, lambda_d;
  double big_a, gamma;
  double p2;     // excursion branching probability of the current chain
  double p_min;  // probability a point of the current chain is a local extremum
};
std::vector<DynamicsRow> iterate_dynamics(EhmcParams e, int steps);

}  // namespace dendroflow

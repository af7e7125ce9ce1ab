#include "dendroflow/pruning_dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace dendroflow {

EhmcParams ehmc_prune_params(const EhmcParams& e) {
  e.validate();
  double d = e.p * e.lambda_d;
  double u = (1.0 - e.p) * e.lambda_u;
  EhmcParams out;
  out.p = d / (d + u);
  out.lambda_d = d;
  out.lambda_u = u;
  return out;
}

std::pair<double, double> a_gamma_step(double big_a, double gamma) {
  if (!(big_a > 0.0) || !(gamma > 0.0))
    throw std::invalid_argument("a_gamma_step: A and gamma must be positive");
  return {big_a / gamma, gamma / big_a};
}

double gw_p2_step(double p2) {
  if (!(p2 >= 0.0 && p2 <= 0.5)) throw std::invalid_argument("gw_p2_step: p2 must lie in [0, 1/2]");
  double q = 1.0 - p2;
  return p2 * p2 / (q * q + p2 * p2);
}

GwCorrespondence ehmc_to_gw(const EhmcParams& e) {
  e.validate();
  double d = e.p * e.lambda_d;        // fall rate of the excursion
  double u = (1.0 - e.p) * e.lambda_u;  // rise rate
  GwCorrespondence out;
  out.gw.p2 = d / (u + d);
  out.gw.edge_rate_up = u;
  out.gw.edge_rate_down = d;
  out.supercritical = out.gw.p2 > 0.5;
  return out;
}

CharacteristicFn exponential_cf(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("exponential_cf: lambda must be positive");
  return [lambda](double s) {
    return lambda / std::complex<double>(lambda, -s);  // lambda / (lambda - is)
  };
}

CharacteristicFn uniform01_cf() {
  return [](double s) -> std::complex<double> {
    if (s == 0.0) return {1.0, 0.0};
    // (e^{is} - 1) / (is)
    std::complex<double> num = std::exp(std::complex<double>(0.0, s)) - 1.0;
    return num / std::complex<double>(0.0, s);
  };
}

std::vector<double> default_dss_grid() {
  std::vector<double> g(401);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = -10.0 + static_cast<double>(i) * 0.05;
  return g;
}

double dss_residual(const CharacteristicFn& fhat, std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("dss_residual: empty grid");
  double worst = 0.0;
  for (double s : grid) {
    std::complex<double> f2 = fhat(2.0 * s);
    std::complex<double> f1 = fhat(s);
    std::complex<double> ratio = f1 / (2.0 - f1);
    double lhs = f2.real();
    double rhs = std::norm(ratio);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

std::vector<DynamicsRow> iterate_dynamics(EhmcParams e, int steps) {
  e.validate();
  if (steps < 0) throw std::invalid_argument("iterate_dynamics: steps must be >= 0");
  std::vector<DynamicsRow> rows;
  rows.reserve(static_cast<std::size_t>(steps) + 1);
  for (int m = 0; m <= steps; ++m) {
    DynamicsRow r;
    r.m = m;
    r.p = e.p;
    r.lambda_u = e.lambda_u;
    r.lambda_d = e.lambda_d;
    r.big_a = e.big_a();
    r.gamma = e.gamma();
    r.p2 = ehmc_to_gw(e).gw.p2;
    r.p_min = e.p * (1.0 - e.p);
    rows.push_back(r);
    e = ehmc_prune_params(e);
  }
  return rows;
}

}  // namespace dendroflow

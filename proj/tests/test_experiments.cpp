#include "doctest.h"

#include <cmath>
#include <map>

#include "dendroflow/experiments.hpp"
#include "dendroflow/horton.hpp"
#include "dendroflow/level_set.hpp"
#include "test_support.hpp"

using namespace dendroflow;
using testsupport::random_gaussian_series;

TEST_SUITE("experiments") {

TEST_CASE("config: parsing and schema errors") {
  ExperimentConfig cfg = parse_config(
      "# comment\n"
      "kind = horton_tokunaga\n"
      "kernel = gaussian\n"
      "sigma = 2.0\n"
      "chain_length = 5000\n"
      "replicates = 3\n"
      "seed = 99\n"
      "complete_only = false\n"
      "check eta_1 = 4 0.5\n"
      "check_min some_p = 0.01\n");
  CHECK(cfg.kind == "horton_tokunaga");
  CHECK(cfg.chain_length == 5000);
  CHECK(cfg.replicates == 3);
  CHECK(cfg.master_seed == 99);
  CHECK(!cfg.complete_only);
  REQUIRE(cfg.checks.size() == 2);
  CHECK(cfg.checks[0].name == "eta_1");
  CHECK(cfg.checks[0].tol == 0.5);
  CHECK(cfg.checks[1].lower_bound_only);

  CHECK_THROWS_WITH_AS(parse_config("kind = horton_tokunaga\nbogus_key = 3\n"),
                       doctest::Contains("unknown key 'bogus_key'"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config("kind = horton_tokunaga\nchain_length = -5\n"),
                       doctest::Contains("chain_length"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config("kernel = gaussian\n"), doctest::Contains("kind"),
                       std::runtime_error);
}

TEST_CASE("reports are bit-identical across thread counts") {
  ExperimentConfig cfg;
  cfg.kind = "horton_tokunaga";
  cfg.kernel = GaussianKernel{1.0};
  cfg.chain_length = 20'000;
  cfg.replicates = 6;
  cfg.batches = 6;
  cfg.master_seed = 4242;
  cfg.threads = 1;
  std::string one = run_horton_tokunaga(cfg).to_json();
  cfg.threads = 4;
  std::string four = run_horton_tokunaga(cfg).to_json();
  CHECK(one == four);
}

TEST_CASE("horton-tokunaga: small-scale sanity") {
  ExperimentConfig cfg;
  cfg.kind = "horton_tokunaga";
  cfg.kernel = GaussianKernel{1.0};
  cfg.chain_length = 100'000;
  cfg.replicates = 4;
  cfg.batches = 4;
  cfg.master_seed = 7;
  cfg.threads = 4;
  ExperimentReport rep = run_horton_tokunaga(cfg);
  const Estimate* eta1 = rep.find("eta_1");
  REQUIRE(eta1 != nullptr);
  CHECK(std::abs(eta1->value - 4.0) < 0.3);
  const Estimate* t12 = rep.find("T_12");
  REQUIRE(t12 != nullptr);
  CHECK(std::abs(t12->value - 1.0) < 0.2);
  const Estimate* dens = rep.find("interior_maxima_density");
  REQUIRE(dens != nullptr);
  CHECK(std::abs(dens->value - 0.25) < 0.01);
}

TEST_CASE("forest with a single excursion matches the whole-chain estimator") {
  ExperimentConfig f;
  f.kind = "forest";
  f.kernel = RademacherKernel{};
  f.excursions = 1;
  f.sample_budget = 100'000;
  f.master_seed = 2121;
  f.batches = 1;
  f.complete_only = false;
  ExperimentReport forest = run_forest(f);

  Series chain = gen_chain(f.kernel, f.sample_budget, derive_seed(f.master_seed, 0));
  Series exc = first_excursion(chain);
  ExperimentConfig h = f;
  h.kind = "horton_tokunaga";
  h.replicates = 1;
  // feed the excursion through the same statistics path
  IndexedTree it = level_set_tree_indexed(exc);
  OrderedTree ot = assign_orders(std::move(it.tree));
  BranchSet bs = branch_decomposition(ot);
  HortonStats hs = horton_stats(bs);

  const Estimate* eta1 = forest.find("eta_1");
  REQUIRE(eta1 != nullptr);
  if (hs.omega >= 2) CHECK(eta1->value == doctest::Approx(hs.eta[1]));
  const Estimate* n_exc = forest.find("excursions_completed");
  REQUIRE(n_exc != nullptr);
  CHECK(n_exc->value == 1.0);
}

TEST_CASE("forest: partial flag when the budget is too small") {
  ExperimentConfig f;
  f.kind = "forest";
  f.kernel = RademacherKernel{};
  f.excursions = 100'000;
  f.sample_budget = 50'000;
  f.master_seed = 5;
  ExperimentReport rep = run_forest(f);
  CHECK(rep.partial);
}

TEST_CASE("side-branch classification matches the tree bookkeeping exactly") {
  for (std::uint64_t seed = 900; seed < 1000; ++seed) {
    Series s = random_gaussian_series(seed, 500);
    IndexedTree it = level_set_tree_indexed(s);
    OrderedTree ot = assign_orders(std::move(it.tree));
    BranchSet bs = branch_decomposition(ot);
    auto t_lists = iterated_minima_positions(s);
    mark_completeness(bs, ot, it.source, t_lists);
    TokunagaMatrix tm = tokunaga_matrix(ot, bs, true);

    std::map<std::pair<int, int>, long> series_counts;
    for (const auto& rec : classify_side_branches(s))
      if (rec.host_complete) ++series_counts[{rec.branch_order, rec.host_order}];

    for (int i = 1; i <= bs.omega; ++i)
      for (int j = i + 1; j <= bs.omega; ++j) {
        long expect = 0;
        auto itc = series_counts.find({i, j});
        if (itc != series_counts.end()) expect = itc->second;
        CHECK(tm.n_side(i, j) == expect);
      }
  }
}

TEST_CASE("basin endpoints: adjacent minima sit below their interior minima") {
  // The adjacent endpoint (same side as the minimum relative to the apex) is
  // always strictly lower; the classification in classify_side_branches
  // rests on this, not on monotonicity of the opposite values.
  long checked = 0;
  for (std::uint64_t seed = 1100; seed < 1130; ++seed) {
    Series s = random_gaussian_series(seed, 400);
    auto t_lists = iterated_minima_positions(s);
    if (t_lists.empty()) continue;
    for (std::size_t pos : t_lists[0]) {
      for (std::size_t j = 1; j <= t_lists.size(); ++j) {
        const auto& tj = t_lists[j - 1];
        auto it = std::lower_bound(tj.begin(), tj.end(), pos);
        if (it != tj.end() && *it == pos) continue;  // pos is an order-j minimum itself
        if (it == tj.begin() || it == tj.end()) break;
        std::size_t l = *std::prev(it), r = *it;
        const auto& pts = t_lists[j >= 2 ? j - 2 : 0];
        std::size_t apex = l;
        double best = -std::numeric_limits<double>::infinity();
        if (j == 1) {
          for (std::size_t q = l + 1; q < r; ++q)
            if (s[q] > best) {
              best = s[q];
              apex = q;
            }
        } else {
          for (auto q = std::upper_bound(pts.begin(), pts.end(), l); q != pts.end() && *q < r; ++q)
            if (s[*q] > best) {
              best = s[*q];
              apex = *q;
            }
        }
        if (apex == pos) break;  // a principal merge point, not a side branch
        double adjacent = (pos < apex) ? s[l] : s[r];
        CHECK(s[pos] > adjacent);
        ++checked;
      }
    }
  }
  CHECK(checked > 2000);
}

TEST_CASE("opposite minima are NOT monotone in the order (documented counterexample)") {
  // A minimum next to a deep basin endpoint can see its opposite value rise
  // with the order: for this seed, position 150 has opposite -5.26 at order 2
  // but +7.26 at order 3. The side-branch classification therefore uses the
  // smallest order whose opposite lies below the minimum, which the exact
  // tree cross-check above validates.
  Series s = gen_chain(GaussianKernel{1.0}, 400, derive_seed(0, 1100));
  auto t_lists = iterated_minima_positions(s);
  REQUIRE(t_lists.size() >= 3);
  const std::size_t pos = 150;
  const auto& t2 = t_lists[1];
  const auto& t3 = t_lists[2];
  auto it2 = std::lower_bound(t2.begin(), t2.end(), pos);
  auto it3 = std::lower_bound(t3.begin(), t3.end(), pos);
  REQUIRE(it2 != t2.begin());
  REQUIRE(it3 != t3.begin());
  double opposite2 = s[*it2];      // apex right of pos at both orders
  double opposite3 = s[*it3];
  CHECK(opposite2 == doctest::Approx(-5.2601).epsilon(1e-3));
  CHECK(opposite3 == doctest::Approx(7.2647).epsilon(1e-3));
  CHECK(opposite3 > opposite2);
}

TEST_CASE("forest and whole-chain estimators agree on eta_1") {
  ExperimentConfig f;
  f.kind = "forest";
  f.kernel = GaussianKernel{1.0};
  f.excursions = 1'000'000;
  f.sample_budget = 4'000'000;
  f.batches = 20;
  f.master_seed = 808;
  f.complete_only = false;
  ExperimentReport forest = run_forest(f);

  ExperimentConfig h;
  h.kind = "horton_tokunaga";
  h.kernel = GaussianKernel{1.0};
  h.chain_length = 1'000'000;
  h.replicates = 4;
  h.batches = 4;
  h.master_seed = 809;
  h.threads = 4;
  ExperimentReport whole = run_horton_tokunaga(h);

  const Estimate* a = forest.find("eta_1");
  const Estimate* b = whole.find("eta_1");
  REQUIRE(a != nullptr);
  REQUIRE(b != nullptr);
  double joint = std::sqrt(a->se * a->se + b->se * b->se);
  CHECK(std::abs(a->value - b->value) <= 3.0 * joint + 1e-9);
}

TEST_CASE("gw equivalence: symmetric chain matches the critical law") {
  ExperimentConfig cfg;
  cfg.kind = "gw";
  cfg.kernel = ExponentialMixtureKernel{{0.5, 1.0, 1.0}};
  cfg.excursions = 20'000;
  cfg.master_seed = 31;
  cfg.threads = 4;
  ExperimentReport rep = run_gw_equivalence(cfg);
  const Estimate* p = rep.find("gw_chi2_p");
  REQUIRE(p != nullptr);
  CHECK(p->value > 0.01);
  const Estimate* pp = rep.find("gw_pruned_chi2_p");
  REQUIRE(pp != nullptr);
  CHECK(pp->value > 0.01);
  const Estimate* single = rep.find("single_leaf_freq");
  REQUIRE(single != nullptr);
  CHECK(std::abs(single->value - 0.5) < 0.02);
}

TEST_CASE("gw equivalence: rejects non-exponential kernels and drifting chains") {
  ExperimentConfig cfg;
  cfg.kind = "gw";
  cfg.kernel = GaussianKernel{1.0};
  CHECK_THROWS_AS(run_gw_equivalence(cfg), std::invalid_argument);
  cfg.kernel = ExponentialMixtureKernel{{0.5, 1.0, 2.0}};
  CHECK_THROWS_AS(run_gw_equivalence(cfg), std::invalid_argument);
}

TEST_CASE("basins: small-scale sanity") {
  ExperimentConfig cfg;
  cfg.kind = "basins";
  cfg.kernel = GaussianKernel{1.0};
  cfg.chain_length = 200'000;
  cfg.replicates = 2;
  cfg.master_seed = 55;
  cfg.threads = 2;
  ExperimentReport rep = run_basin_counts(cfg);
  CHECK(std::abs(rep.find("order1_basins_per_order2")->value - 4.0) < 0.2);
  CHECK(std::abs(rep.find("order1_basins_per_order3")->value - 16.0) < 1.5);
  CHECK(std::abs(rep.find("interior_minima_per_order2")->value - 3.0) < 0.2);
}

TEST_CASE("report serialization carries quantities and checks") {
  ExperimentConfig cfg;
  cfg.kind = "basins";
  cfg.kernel = GaussianKernel{1.0};
  cfg.chain_length = 20'000;
  cfg.replicates = 1;
  cfg.master_seed = 3;
  cfg.checks.push_back({"order1_basins_per_order2", 4.0, 1.0, false});
  ExperimentReport rep = run_basin_counts(cfg);
  CHECK(rep.checks.size() == 1);
  CHECK(rep.checks[0].pass);
  CHECK(rep.passed());
  std::string js = rep.to_json();
  CHECK(js.find("order1_basins_per_order2") != std::string::npos);
  CHECK(js.find("\"all_passed\": true") != std::string::npos);
  std::string csv = rep.to_csv();
  CHECK(csv.find("check:order1_basins_per_order2") != std::string::npos);
}

TEST_CASE("fbm conjecture probe: brownian case is consistent with c = 2") {
  ExperimentConfig cfg;
  cfg.kind = "fbm";
  cfg.hurst = 0.5;
  cfg.fbm_length = std::size_t{1} << 16;
  cfg.replicates = 4;
  cfg.master_seed = 10;
  cfg.threads = 4;
  ExperimentReport rep = run_fbm_conjecture(cfg);
  const Estimate* c = rep.find("c_hat");
  REQUIRE(c != nullptr);
  CHECK(std::abs(c->value - 2.0) < 0.4);
  CHECK(rep.find("c_conjectured")->value == doctest::Approx(2.0));
  CHECK(rep.find("eta_conjectured")->value == doctest::Approx(4.0));
}

TEST_CASE("predicted fbm constants") {
  CHECK(fbm_predicted_c(0.5) == doctest::Approx(2.0));
  CHECK(fbm_predicted_eta(0.5) == doctest::Approx(4.0));
  CHECK(fbm_predicted_eta(1.0) == doctest::Approx(3.0 + std::sqrt(3.0)));
  CHECK(fbm_predicted_c(0.7) == doctest::Approx(2.4));
}

}  // TEST_SUITE

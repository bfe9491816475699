#include <doctest.h>

#include "fixtures.hpp"

#include <lqnet/oracle.hpp>
#include <lqnet/theory.hpp>

using namespace lqnet;
using namespace lqnet::testing;

TEST_CASE("closed-form optimal cost matches the frozen reference") {
  const auto spec = reference_instance();
  CHECK(optimal_cost_closed_form(spec, synthesize(spec)) ==
        doctest::Approx(kReferenceOptimalCost).epsilon(1e-12));
}

TEST_CASE("closed-form cost is zero without randomness") {
  auto spec = reference_instance();
  for (auto& S : spec.sigma_x0) S.setZero();
  for (auto& row : spec.sigma_w)
    for (auto& S : row) S.setZero();
  CHECK(optimal_cost_closed_form(spec, synthesize(spec)) == 0.0);
}

TEST_CASE("closed-form cost with reliable channels is the centralized LQR cost") {
  const auto spec = reference_instance(0.0, 0.0);
  const double j = optimal_cost_closed_form(spec, synthesize(spec));
  CHECK(j == doctest::Approx(kReferenceCentralizedCost).epsilon(1e-12));
  CHECK(j == doctest::Approx(centralized_lqr(spec).optimal_cost).epsilon(1e-9));
}

TEST_CASE("noise term scales linearly with the noise covariance") {
  const auto spec = reference_instance();
  auto quiet = spec;
  for (auto& row : quiet.sigma_w)
    for (auto& S : row) S.setZero();
  auto loud = spec;
  const double alpha = 3.0;
  for (auto& row : loud.sigma_w)
    for (auto& S : row) S *= alpha;
  const double init = optimal_cost_closed_form(quiet, synthesize(quiet));
  const double noise = optimal_cost_closed_form(spec, synthesize(spec)) - init;
  const double loud_noise = optimal_cost_closed_form(loud, synthesize(loud)) - init;
  CHECK(loud_noise == doctest::Approx(alpha * noise).epsilon(1e-12));
}

TEST_CASE("optimal_cost_closed_form rejects a mismatched schedule") {
  const auto s = synthesize(reference_instance());
  CHECK_THROWS_AS(optimal_cost_closed_form(three_subsystem_instance(), s), StructuralError);
}

TEST_CASE("decomposition under the optimal strategy has vanishing penalties") {
  const auto spec = reference_instance();
  const auto schedule = synthesize(spec);
  const auto d = decomposition_check(spec, schedule, LinearStrategy::optimal(schedule), 2000, 4);
  CHECK(std::abs(d.control_penalty_common.estimate) < 1e-9);
  for (const auto& e : d.control_penalty_local) CHECK(std::abs(e.estimate) < 1e-9);
  CHECK(d.residual.within(3.0));
}

TEST_CASE("decomposition of the zero strategy has positive penalties") {
  const auto spec = reference_instance();
  const auto schedule = synthesize(spec);
  const auto d = decomposition_check(spec, schedule, LinearStrategy::zero(spec), 4000, 5);
  CHECK(d.control_penalty_common.estimate > 3.0 * d.control_penalty_common.se);
  for (const auto& e : d.control_penalty_local) CHECK(e.estimate > 3.0 * e.se);
  CHECK(d.residual.within(3.0));
}

TEST_CASE("decomposition of a silent instance is identically zero") {
  auto spec = reference_instance();
  for (auto& S : spec.sigma_x0) S.setZero();
  for (auto& row : spec.sigma_w)
    for (auto& S : row) S.setZero();
  const auto schedule = synthesize(spec);
  const auto d = decomposition_check(spec, schedule, LinearStrategy::zero(spec), 100, 6);
  CHECK(d.total_cost.estimate == 0.0);
  CHECK(d.init_term.estimate == 0.0);
  CHECK(d.noise_term.estimate == 0.0);
  CHECK(d.residual.estimate == 0.0);
}

TEST_CASE("orthogonality residuals vanish exactly without drops") {
  const auto spec = reference_instance(0.0, 0.0);
  const Simulator sim(spec, LinearStrategy::optimal(synthesize(spec)));
  const auto report = orthogonality_check(sim, 300, 1);
  CHECK(report.samples == 300);
  CHECK(report.delivered_nonzero_error == 0);
  for (const auto& e : report.entries)
    if (e.property != "cost-split") CHECK(e.value.estimate == 0.0);
}

TEST_CASE("orthogonality holds statistically with drops") {
  const auto spec = reference_instance(1.0, 1.0);
  const Simulator sim(spec, LinearStrategy::optimal(synthesize(spec)));
  const auto report = orthogonality_check(sim, 20000, 2);
  CHECK(report.delivered_nonzero_error == 0);
  bool saw_cross = false;
  for (const auto& e : report.entries) saw_cross |= e.property == "cross-error";
  CHECK(saw_cross);
  CHECK(report.within(4.0));
}

TEST_CASE("orthogonality of an arbitrary structured strategy") {
  std::mt19937_64 rng(12);
  const auto spec = reference_instance(0.4, 0.6, 3);
  auto strategy = LinearStrategy::optimal(synthesize(spec));
  for (std::size_t k = 0; k < strategy.parameter_count(); ++k)
    strategy.parameter(k) += std::normal_distribution<double>(0.0, 0.3)(rng);
  const Simulator sim(spec, strategy);
  const auto report = orthogonality_check(sim, 20000, 3);
  CHECK(report.within(4.0));
  bool saw_prefix = false;
  for (const auto& e : report.entries) saw_prefix |= e.detail.find('|') != std::string::npos;
  CHECK(saw_prefix);
}

TEST_CASE("orthogonality_check rejects an empty ensemble") {
  const auto spec = reference_instance();
  std::vector<TrajectoryRecord> none;
  CHECK_THROWS_AS(orthogonality_check(spec, none), std::invalid_argument);
}

TEST_CASE("span and simulator forms of orthogonality_check agree") {
  const auto spec = reference_instance();
  const Simulator sim(spec, LinearStrategy::zero(spec));
  std::vector<TrajectoryRecord> ensemble;
  for (std::uint64_t r = 0; r < 1000; ++r) ensemble.push_back(sim.run(10, r));
  const auto a = orthogonality_check(spec, ensemble, 50);
  const auto b = orthogonality_check(sim, 1000, 10, 50);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t k = 0; k < a.entries.size(); ++k)
    CHECK(a.entries[k].value.estimate == b.entries[k].value.estimate);
}

#include "helpers.hpp"
#include "oracle_values.hpp"

#include "sdidml/didcore.hpp"
#include "sdidml/error.hpp"
#include "sdidml/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace sdidml;

namespace {

// a, b adopt at t = 2; c, d never do.
PanelDataset hand_panel() {
  const std::vector<std::pair<const char*, std::pair<double, double>>> y{
      {"a", {1.0, 4.0}}, {"b", {2.0, 3.5}}, {"c", {0.5, 1.0}}, {"d", {-1.0, 0.0}}};
  std::vector<PanelObservation> rows;
  for (const auto& [u, v] : y) {
    const int treated = u[0] == 'a' || u[0] == 'b';
    rows.push_back({u, 1, v.first, 0, {}});
    rows.push_back({u, 2, v.second, treated, {}});
  }
  return build_panel(std::move(rows), {});
}

double outcome(int u, int t) { return std::sin(1.3 * u) + 0.7 * std::cos(0.9 * t * (u + 1)) + 0.1 * t; }

}  // namespace

TEST_CASE("hand 2x2 double difference") {
  const ResidualPanel r = fixture::zero_nuisance(hand_panel());
  const GroupTimeEffects e = estimate_group_time(r);
  REQUIRE(e.cells.size() == 1);
  const CellEstimate& c = e.cells.at({2, 2});
  CHECK(c.tau == doctest::Approx(oracle::kHandDoubleDifference).epsilon(1e-14));
  CHECK(c.n_treated == 2);
  CHECK(c.n_control == 2);
  CHECK(e.base_period_rule() == "g-1-0");

  const GroupTimeEffects reg = estimate_interacted_regression(r);
  CHECK(reg.cells.at({2, 2}).tau == doctest::Approx(oracle::kHandRegressionTau).epsilon(1e-10));
}

TEST_CASE("regression and contrast forms agree when m_hat is zero") {
  const PanelDataset p = fixture::toy_panel({3, 0, 5, 3, 0, 5, 0, 3, 5, 0, 0, 3}, 6, outcome);
  const ResidualPanel r = fixture::zero_nuisance(p);
  const GroupTimeEffects a = estimate_group_time(r);
  const GroupTimeEffects b = estimate_interacted_regression(r);
  REQUIRE(a.cells.size() == b.cells.size());
  for (const auto& [key, cell] : a.cells) CHECK(b.cells.at(key).tau == doctest::Approx(cell.tau).epsilon(1e-8));
  REQUIRE(b.solver.has_value());
  CHECK(b.solver->coefficients.count("tau[g=3,t=4]") == 1);
}

TEST_CASE("zero residual outcome gives zero effects") {
  const PanelDataset p = fixture::toy_panel({3, 0, 5, 3, 0, 5, 0}, 6, [](int, int) { return 0.0; });
  const GroupTimeEffects e = estimate_group_time(fixture::zero_nuisance(p, 2));
  for (const auto& [key, cell] : e.cells) CHECK(cell.tau == 0.0);
}

TEST_CASE("additive shifts cancel") {
  const std::vector<int> cohorts{3, 0, 5, 3, 0, 5, 0, 3};
  const PanelDataset p = fixture::toy_panel(cohorts, 6, outcome);
  const PanelDataset q = fixture::toy_panel(cohorts, 6, [](int u, int t) { return outcome(u, t) + 4.0 + 0.3 * u - 0.2 * t; });
  const GroupTimeEffects a = estimate_group_time(fixture::zero_nuisance(p, 2));
  const GroupTimeEffects b = estimate_group_time(fixture::zero_nuisance(q, 2));
  for (const auto& [key, cell] : a.cells) CHECK(b.cells.at(key).tau == doctest::Approx(cell.tau).epsilon(1e-10));
}

TEST_CASE("not-yet-treated controls") {
  const PanelDataset p = fixture::toy_panel({2, 3, 0, 3, 2}, 4, outcome);
  const ResidualPanel r = fixture::zero_nuisance(p);
  const GroupTimeEffects never = estimate_group_time(r);
  CHECK(never.cells.at({2, 2}).n_control == 1);
  const GroupTimeEffects nyt = estimate_group_time(r, {ControlRule::NotYetTreated, 0, FoldPooling::PerFold});
  CHECK(nyt.cells.at({2, 2}).n_control == 3);  // cohort 3 still untreated at t = 2
  CHECK(nyt.cells.at({2, 3}).n_control == 1);
  CHECK(to_string(ControlRule::NotYetTreated) == "not_yet_treated");
  CHECK(control_rule_from_string("never_treated") == ControlRule::NeverTreated);
}

TEST_CASE("a cohort without a base period is omitted") {
  const PanelDataset p = fixture::toy_panel({1, 3, 0, 0}, 4, outcome);
  const GroupTimeEffects e = estimate_group_time(fixture::zero_nuisance(p));
  bool found = false;
  for (const CellOmission& o : e.omitted) found = found || (o.cell.g == 1 && o.reason == "MissingBasePeriod");
  CHECK(found);
  for (const auto& [key, cell] : e.cells) CHECK(key.g == 3);
}

TEST_CASE("anticipation moves the base period") {
  const PanelDataset p = fixture::toy_panel({4, 0, 4, 0}, 5, outcome);
  const GroupTimeEffects e = estimate_group_time(fixture::zero_nuisance(p), {ControlRule::NeverTreated, 1, FoldPooling::PerFold});
  CHECK(e.cells.count({4, 2}) == 0);
  CHECK(e.cells.count({4, 3}) == 1);
  CHECK(e.base_period_rule() == "g-1-1");
}

TEST_CASE("static TWFE recovers a homogeneous effect") {
  const PanelDataset p = fixture::toy_panel({3, 0, 5, 3, 0, 5, 0}, 6, [](int u, int t) { return 0.5 * u - 0.3 * t * t + 2.0 * 0.0; });
  std::vector<PanelObservation> rows = p.observations();
  for (auto& r : rows) r.outcome += 2.0 * r.treatment;
  const TwfeResult t = twfe_baseline(build_panel(std::move(rows), p.covariate_names()));
  CHECK(t.tau == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(t.se < 1e-6);
}

TEST_CASE("static TWFE needs more than one unit") {
  std::vector<PanelObservation> rows{{"a", 1, 0.0, 0, {}}, {"a", 2, 1.0, 0, {}}};
  try {
    twfe_baseline(build_panel(std::move(rows), {}));
    FAIL("expected DegenerateDesign");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateDesign);
  }
}

TEST_CASE("static TWFE on the staggered dynamic scenario") {
  DGPConfig c = scenario("S2");
  c.seed = 2;
  const OraclePanel o = generate(c);
  CHECK(o.true_overall_att == doctest::Approx(oracle::kS2Seed2TrueOverall).epsilon(1e-12));
  const TwfeResult t = twfe_baseline(o.panel);
  CHECK(t.tau == doctest::Approx(oracle::kS2Seed2TwfeTau).epsilon(1e-8));
  CHECK(o.true_overall_att - t.tau > 0.5);
}

TEST_CASE("subgroup effects") {
  const std::vector<int> cohorts{3, 0, 3, 0, 3, 0, 3, 0};
  const PanelDataset p = fixture::toy_panel(cohorts, 4, [](int u, int t) { return outcome(u % 4, t); });
  const ResidualPanel r = fixture::zero_nuisance(p);
  std::map<UnitId, std::string> label;
  for (std::size_t u = 0; u < p.n_units(); ++u) label[p.units()[u]] = u < 4 ? "lo" : "hi";
  const auto res = subgroup_effects(r, label);
  REQUIRE(res.at("lo").effects);
  REQUIRE(res.at("hi").effects);
  for (const auto& [key, cell] : res.at("lo").effects->cells)
    CHECK(res.at("hi").effects->cells.at(key).tau == doctest::Approx(cell.tau).epsilon(1e-12));

  std::map<UnitId, std::string> treated_only = label;
  for (std::size_t u = 0; u < p.n_units(); ++u) treated_only[p.units()[u]] = cohorts[u] ? "t" : "c";
  const auto bad = subgroup_effects(r, treated_only);
  CHECK(bad.at("t").error.has_value());

  label.erase(p.units()[0]);
  try {
    subgroup_effects(r, label);
    FAIL("expected MissingSubgroupLabel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingSubgroupLabel);
  }
}

TEST_CASE("no estimable cell") {
  const PanelDataset p = fixture::toy_panel({1, 0}, 3, outcome);
  try {
    estimate_group_time(fixture::zero_nuisance(p));
    FAIL("expected EmptyResult");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyResult);
  }
}

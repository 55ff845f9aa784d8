#include "sdidml/error.hpp"
#include "sdidml/panel.hpp"
#include "sdidml/panel_io.hpp"
#include "sdidml/rng.hpp"
#include "sdidml/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace sdidml;

namespace {

RawRecord raw(const char* unit, int t, double y, double d, std::vector<std::optional<double>> cov = {}) {
  return RawRecord{std::string(unit), t, y, d, std::move(cov)};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an sdidml::Error");
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST_CASE("cohorts are the first treated period") {
  const PanelDataset p = build_panel(
      {raw("A", 1, 0, 0), raw("A", 2, 1, 1), raw("A", 3, 1, 1), raw("B", 1, 0, 0), raw("B", 2, 0, 0), raw("B", 3, 0, 0)},
      {});
  CHECK(p.cohort("A") == Cohort::first_treated_at(2));
  CHECK(p.cohort("B").is_never_treated());
  CHECK(p.cohort_times() == std::vector<int>{2});
  CHECK(p.n_never_treated() == 1);
}

TEST_CASE("panel validation errors") {
  CHECK(code_of([] { build_panel({raw("A", 1, 0, 0), raw("A", 2, 0, 1), raw("A", 3, 0, 0), raw("B", 1, 0, 0)}, {}); }) ==
        ErrorCode::NonAbsorbingTreatment);
  CHECK(code_of([] { build_panel({raw("A", 1, 0, 1), raw("B", 1, 0, 1)}, {}); }) == ErrorCode::EmptyControlPool);
  CHECK(code_of([] { build_panel({raw("A", 1, 0, 0), raw("A", 1, 1, 0)}, {}); }) == ErrorCode::DuplicateIndex);
  CHECK(code_of([] {
          RawRecord r = raw("A", 1, 0, 0);
          r.treatment.reset();
          build_panel({r}, {});
        }) == ErrorCode::MissingField);
  CHECK(code_of([] { build_panel({raw("A", 1, std::nan(""), 0)}, {}); }) == ErrorCode::NonFiniteValue);
  CHECK(code_of([] { build_panel({raw("A", 1, 0, 0.5)}, {}); }) == ErrorCode::InvalidValue);
  CHECK(code_of([] { build_panel({raw("A", 1, 0, 0, {1.0, 2.0})}, {"x1"}); }) == ErrorCode::MissingField);
}

TEST_CASE("event time") {
  const PanelDataset p = build_panel(
      {raw("A", 1, 0, 0), raw("A", 2, 1, 1), raw("A", 4, 1, 1), raw("B", 1, 0, 0), raw("B", 4, 0, 0)}, {});
  CHECK(event_time(p, "A", 4) == 2);
  CHECK(event_time(p, "A", 1) == -1);
  CHECK_FALSE(event_time(p, "B", 4).has_value());
  CHECK(code_of([&] { event_time(p, "B", 3); }) == ErrorCode::UnknownPeriod);
}

TEST_CASE("cohort derivation ignores input row order") {
  DGPConfig c = scenario("S1");
  c.n_units = 30;
  const PanelDataset base = generate(c).panel;
  std::vector<PanelObservation> rows = base.observations();
  Rng rng(5);
  rng.shuffle(rows);
  const PanelDataset shuffled = build_panel(std::move(rows), base.covariate_names());
  CHECK(shuffled == base);
  CHECK(shuffled.cohort_map() == base.cohort_map());
}

TEST_CASE("feature standardization uses the population SD") {
  const PanelDataset p = build_panel({raw("A", 1, 0, 0, {1.0, 5.0}), raw("A", 2, 0, 1, {2.0, 5.0}),
                                      raw("B", 1, 0, 0, {3.0, 5.0})},
                                     {"x1", "x2"});
  const FeatureMatrix f = feature_matrix(p, true);
  CHECK(f.values(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(f.values(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.values(2, 0) == doctest::Approx(1.224744871391589).epsilon(1e-12));
  CHECK(f.values.col(1).isZero());
  CHECK(f.scales(1) == 1.0);
  const FeatureMatrix raw_f = feature_matrix(p, false);
  CHECK(raw_f.values(2, 0) == 3.0);
  CHECK(raw_f.values(0, 1) == 5.0);
}

TEST_CASE("CSV round trip is lossless") {
  DGPConfig c = scenario("S3");
  c.n_units = 12;
  const PanelDataset p = generate(c).panel;
  std::stringstream s;
  write_panel_csv(p, s);
  CHECK(read_panel_csv(s) == p);
}

TEST_CASE("CSV reading") {
  std::istringstream ok("unit,time,outcome,treatment,x1\n\"a\",1,0.5,0,1e-3\na,2,1.5,1,NA\nb,1,0,0,2\nb,2,0.25,0,3\n");
  CHECK(code_of([&] { read_panel_csv(ok); }) == ErrorCode::MissingField);  // NA covariate

  std::istringstream good("unit,time,outcome,treatment,x1\na,1,0.5,0,1e-3\na,2,1.5,1,2\nb,1,0,0,2\nb,2,0.25,0,3\n");
  const PanelDataset p = read_panel_csv(good);
  CHECK(p.n_obs() == 4);
  CHECK(p.observation(0).covariates[0] == 1e-3);

  std::istringstream missing("unit,time,outcome,x1\na,1,0,1\n");
  try {
    read_panel_csv(missing);
    FAIL("expected MissingField");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingField);
    CHECK(std::string(e.what()).find("treatment") != std::string::npos);
  }
  std::istringstream inf("unit,time,outcome,treatment\na,1,inf,0\n");
  CHECK(code_of([&] { read_panel_csv(inf); }) == ErrorCode::NonFiniteValue);
}

TEST_CASE("unbalanced panels are accepted") {
  const PanelDataset p = build_panel({raw("A", 1, 0, 0), raw("A", 3, 1, 1), raw("B", 2, 0, 0)}, {});
  CHECK(p.periods() == std::vector<int>{1, 2, 3});
  CHECK_FALSE(p.find(0, 1).has_value());
  CHECK(p.find(0, 2).has_value());
}

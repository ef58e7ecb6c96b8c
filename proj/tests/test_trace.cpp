#include "doctest.h"

#include "los/errors.hpp"
#include "los/trace.hpp"

#include <cmath>

using namespace los;

TEST_CASE("constant trace returns its value everywhere") {
  Trace t = Trace::constant(7.5);
  CHECK(t.value_at(0.0) == 7.5);
  CHECK(t.value_at(-3.0) == 7.5);
  CHECK(t.value_at(1e9) == 7.5);
  CHECK(t.valid_positive());
}

TEST_CASE("piecewise trace interpolates and clamps") {
  Trace t({{0.0, 10.0}, {10.0, 20.0}, {30.0, 20.0}});
  CHECK(t.value_at(5.0) == doctest::Approx(15.0));
  CHECK(t.value_at(0.0) == 10.0);
  CHECK(t.value_at(20.0) == doctest::Approx(20.0));
  CHECK(t.value_at(-1.0) == 10.0);   // clamp below
  CHECK(t.value_at(99.0) == 20.0);   // clamp past the end
  CHECK(t.end_time() == 30.0);
}

TEST_CASE("trace rejects unordered or empty input") {
  CHECK_THROWS_AS(Trace(std::vector<TracePoint>{}), ValidationError);
  CHECK_THROWS_AS(Trace({{0.0, 1.0}, {0.0, 2.0}}), ValidationError);
  CHECK_THROWS_AS(Trace({{5.0, 1.0}, {2.0, 2.0}}), ValidationError);
}

TEST_CASE("valid_positive spots non-positive values") {
  CHECK_FALSE(Trace({{0.0, 1.0}, {1.0, 0.0}}).valid_positive());
  CHECK_FALSE(Trace::constant(-2.0).valid_positive());
  CHECK(Trace({{0.0, 1.0}, {1.0, 2.0}}).valid_positive());
}

TEST_CASE("sinusoid sampling stays close to the continuous curve") {
  double base = 30.0, amp = 20.0, period = 240.0, phase = 0.7, dur = 1440.0;
  Trace t = Trace::sinusoid(base, amp, period, phase, dur);
  CHECK(t.end_time() == doctest::Approx(dur));
  for (int i = 0; i <= 500; ++i) {
    double x = dur * i / 500.0;
    double exact = base + amp * std::sin(2.0 * M_PI * x / period + phase);
    CHECK(std::abs(t.value_at(x) - exact) <= amp * 0.012);
  }
}

TEST_CASE("sinusoid covers short durations with at least the end points") {
  Trace t = Trace::sinusoid(5.0, 1.0, 1000.0, 0.0, 3.0);
  CHECK(t.points().size() >= 2);
  CHECK(t.end_time() == doctest::Approx(3.0));
}

#pragma once

#include <vector>

namespace los {

struct TracePoint {
  double time_s = 0.0;
  double value = 0.0;
};

// Piecewise-linear time series over [0, duration]. Queries clamp to the
// covered span; they never extrapolate beyond the end points.
class Trace {
public:
  Trace() = default;
  explicit Trace(std::vector<TracePoint> points);

  static Trace constant(double value);
  // Samples base + amplitude * sin(2*pi*(t/period) + phase) into a piecewise
  // series covering [0, duration]. Mimics slow latency drift.
  static Trace sinusoid(double base, double amplitude, double period_s, double phase_rad,
                        double duration_s);

  double value_at(double time_s) const;

  const std::vector<TracePoint>& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  // True if all values are > 0 and times strictly increase.
  bool valid_positive() const;
  double end_time() const { return points_.empty() ? 0.0 : points_.back().time_s; }

private:
  std::vector<TracePoint> points_;
};

} // namespace los

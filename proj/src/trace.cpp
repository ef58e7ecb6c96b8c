#include "los/trace.hpp"

#include "los/errors.hpp"

#include <algorithm>
#include <cmath>

namespace los {

Trace::Trace(std::vector<TracePoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw ValidationError("trace needs at least one point");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (points_[i].time_s <= points_[i - 1].time_s)
      throw ValidationError("trace times must be strictly increasing");
  }
}

Trace Trace::constant(double value) { return Trace({{0.0, value}}); }

Trace Trace::sinusoid(double base, double amplitude, double period_s, double phase_rad,
                      double duration_s) {
  if (period_s <= 0.0 || duration_s <= 0.0)
    throw ValidationError("sinusoid trace needs positive period and duration");
  // 24 samples per cycle keeps the piecewise approximation within ~1%.
  double step = period_s / 24.0;
  std::size_t n = static_cast<std::size_t>(std::ceil(duration_s / step)) + 1;
  std::vector<TracePoint> pts;
  pts.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    double t = std::min(static_cast<double>(i) * step, duration_s);
    pts.push_back({t, base + amplitude * std::sin(2.0 * M_PI * t / period_s + phase_rad)});
    if (t >= duration_s) break;
  }
  if (pts.back().time_s < duration_s)
    pts.push_back({duration_s,
                   base + amplitude * std::sin(2.0 * M_PI * duration_s / period_s + phase_rad)});
  return Trace(std::move(pts));
}

double Trace::value_at(double time_s) const {
  if (points_.empty()) throw ValidationError("querying empty trace");
  if (time_s <= points_.front().time_s) return points_.front().value;
  if (time_s >= points_.back().time_s) return points_.back().value;
  auto it = std::lower_bound(points_.begin(), points_.end(), time_s,
                             [](const TracePoint& p, double t) { return p.time_s < t; });
  const TracePoint& hi = *it;
  const TracePoint& lo = *(it - 1);
  double w = (time_s - lo.time_s) / (hi.time_s - lo.time_s);
  return lo.value + w * (hi.value - lo.value);
}

bool Trace::valid_positive() const {
  if (points_.empty()) return false;
  for (const auto& p : points_)
    if (!(p.value > 0.0)) return false;
  return true;
}

} // namespace los

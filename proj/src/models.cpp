#include "los/models.hpp"

#include "los/errors.hpp"
#include "los/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace los {

double RuntimeFit::predict(double limit_mc) const {
  if (limit_mc + b <= 0.0) throw ValidationError("runtime curve evaluated at non-positive R + b");
  return a * std::pow(limit_mc + b, -c) + d;
}

namespace {

struct LinearSolve {
  double a = 0.0;
  double d = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

// For fixed (b, c) the curve is linear in (a, d): t = a * x + d with
// x = (R + b)^(-c). Ordinary least squares, then clamp a and d to stay
// non-negative (runtimes cannot grow with more cpu, nor go below zero).
LinearSolve solve_linear(const std::deque<TrainingRecord>& hist, double b, double c) {
  LinearSolve out;
  double sx = 0.0, st = 0.0, sxx = 0.0, sxt = 0.0;
  double n = static_cast<double>(hist.size());
  for (const auto& r : hist) {
    double base = r.cpu_limit_mc + b;
    if (base <= 0.0) return out;
    double x = std::pow(base, -c);
    sx += x;
    st += r.duration_s;
    sxx += x * x;
    sxt += x * r.duration_s;
  }
  double det = n * sxx - sx * sx;
  double a, d;
  if (std::abs(det) < 1e-12) {
    a = 0.0;
    d = st / n;
  } else {
    a = (n * sxt - sx * st) / det;
    d = (st - a * sx) / n;
  }
  if (a < 0.0) {
    a = 0.0;
    d = st / n;
  }
  if (d < 0.0) {
    d = 0.0;
    a = sxx > 0.0 ? std::max(0.0, sxt / sxx) : 0.0;
  }
  double sse = 0.0;
  for (const auto& r : hist) {
    double e = a * std::pow(r.cpu_limit_mc + b, -c) + d - r.duration_s;
    sse += e * e;
  }
  out.a = a;
  out.d = d;
  out.sse = sse;
  return out;
}

} // namespace

std::optional<FitResult> fit_runtime_curve(const std::deque<TrainingRecord>& history,
                                           const FitConfig& cfg) {
  if (history.size() < cfg.min_fit_records) return std::nullopt;
  std::set<int> limits;
  for (const auto& r : history) limits.insert(r.cpu_limit_mc);
  if (limits.size() < 2) return std::nullopt;

  // Coarse grid over (log10 b, log10 c).
  double best_lb = 0.0, best_lc = 0.0;
  LinearSolve best;
  for (int bi = 0; bi <= 28; ++bi) {
    double lb = -2.0 + 0.25 * bi; // b in [1e-2, 1e5]
    for (int ci = 0; ci <= 20; ++ci) {
      double lc = -1.0 + 0.1 * ci; // c in [0.1, 10]
      LinearSolve s = solve_linear(history, std::pow(10.0, lb), std::pow(10.0, lc));
      if (s.sse < best.sse) {
        best = s;
        best_lb = lb;
        best_lc = lc;
      }
    }
  }
  if (!std::isfinite(best.sse)) return std::nullopt;

  // Pattern search refinement in the same log space.
  double step = 0.25;
  int evals = 0;
  while (step > 1e-6 && evals < 2000) {
    bool moved = false;
    const double dirs[4][2] = {{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}};
    for (const auto& dir : dirs) {
      double lb = best_lb + dir[0];
      double lc = best_lc + dir[1];
      LinearSolve s = solve_linear(history, std::pow(10.0, lb), std::pow(10.0, lc));
      ++evals;
      if (s.sse + 1e-15 < best.sse) {
        best = s;
        best_lb = lb;
        best_lc = lc;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }

  FitResult out;
  out.fit = {best.a, std::pow(10.0, best_lb), std::pow(10.0, best_lc), best.d};
  out.rmse = std::sqrt(best.sse / static_cast<double>(history.size()));
  return out;
}

double estimate_worst_case(const std::vector<double>& samples, double k_sigma) {
  if (samples.empty()) return 0.0;
  if (samples.size() == 1) return samples[0];
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= static_cast<double>(samples.size() - 1);
  return mean + k_sigma * std::sqrt(var);
}

double transfer_time_s(double payload_bytes, const std::vector<LinkMetrics>& path) {
  double total = 0.0;
  for (const auto& link : path) {
    if (link.bandwidth_bps <= 0.0) throw ValidationError("transfer across zero-bandwidth link");
    total += payload_bytes / link.bandwidth_bps + link.latency_ms / 1000.0;
  }
  return total;
}

double predict_t_complete(const RuntimeModel& model, double limit_mc, const Overheads& ovh,
                          double transfer_s) {
  if (!model.fit) throw ValidationError("prediction requested before any runtime fit");
  if (limit_mc <= 0.0) throw ValidationError("prediction requested with non-positive limit");
  return model.fit->predict(limit_mc) + ovh.t_cstart_s + ovh.t_cstop_s + transfer_s;
}

Residual residual(double t_complete_s, double t_period_s) {
  if (t_period_s <= 0.0) throw ValidationError("residual needs a positive period");
  double abs = std::abs(t_complete_s - t_period_s);
  return {abs, abs / t_period_s};
}

void RuntimeModel::observe(const TrainingRecord& rec, const FitConfig& cfg) {
  history.push_back(rec);
  while (history.size() > cfg.history_cap) history.pop_front();
  if (auto res = fit_runtime_curve(history, cfg)) {
    fit = res->fit;
    fit_rmse = res->rmse;
  }
  std::vector<double> mems, nets;
  mems.reserve(history.size());
  nets.reserve(history.size());
  for (const auto& r : history) {
    mems.push_back(r.mem_peak_mb);
    nets.push_back(r.net_bytes);
  }
  mem_estimate_mb = estimate_worst_case(mems, cfg.k_sigma);
  net_estimate_bytes = estimate_worst_case(nets, cfg.k_sigma);
}

bool RuntimeModel::newer_than(const RuntimeModel& other) const {
  if (limits.iteration != other.limits.iteration)
    return limits.iteration > other.limits.iteration;
  double mine = history.empty() ? 0.0 : history.back().finished_at_s;
  double theirs = other.history.empty() ? 0.0 : other.history.back().finished_at_s;
  return mine > theirs;
}

std::string RuntimeModel::to_text() const {
  std::string s;
  s += "job " + key.to_string() + " period=" + fnum(t_period_s) + "\n";
  s += "iteration " + inum(limits.iteration) + " limit=" + inum(limits.current_limit_mc) + "\n";
  if (fit) {
    s += "fit a=" + fnum(fit->a, 4) + " b=" + fnum(fit->b, 4) + " c=" + fnum(fit->c, 4) +
         " d=" + fnum(fit->d, 4) + " rmse=" + fnum(fit_rmse, 4) + "\n";
  } else {
    s += "fit none\n";
  }
  s += "mem_estimate=" + fnum(mem_estimate_mb, 2) + " net_estimate=" + fnum(net_estimate_bytes, 0) +
       "\n";
  s += "records " + inum(static_cast<long long>(history.size())) + "\n";
  return s;
}

} // namespace los

// End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
// process exits non-zero if any of them fail. Tolerances are pinned here,
// next to the check that uses them.

#include "los/errors.hpp"
#include "los/metrics.hpp"
#include "los/models.hpp"
#include "los/rng.hpp"
#include "los/scenario.hpp"
#include "los/scheduler.hpp"
#include "los/sim.hpp"
#include "los/text.hpp"
#include "harness.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace los;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", number, name.c_str(), detail.c_str());
  if (!ok) ++failures;
}

// ---- 1: runtime curve recovery ------------------------------------------

void check_fit_recovery() {
  const double a = 100000.0, b = 50.0, c = 1.0, d = 5.0;
  std::deque<TrainingRecord> hist;
  std::vector<int> limits;
  for (int r = 100; r <= 800; r += 50) limits.push_back(r);
  int i = 0;
  for (int r : limits) {
    TrainingRecord rec;
    rec.iteration = ++i;
    rec.cpu_limit_mc = r;
    rec.duration_s = a * std::pow(r + b, -c) + d;
    hist.push_back(rec);
  }
  auto fitted = fit_runtime_curve(hist, {});
  if (!fitted) {
    report(1, "curve recovery", false, "no fit produced");
    return;
  }
  double worst = 0.0;
  for (const auto& r : hist) {
    double pred = fitted->fit.predict(r.cpu_limit_mc);
    worst = std::max(worst, std::abs(pred - r.duration_s) / r.duration_s);
  }
  RuntimeFit ref = oracle::fit_lattice(hist);
  double worst_vs_ref = 0.0;
  for (const auto& r : hist) {
    double ours = fitted->fit.predict(r.cpu_limit_mc);
    double theirs = ref.predict(r.cpu_limit_mc);
    worst_vs_ref = std::max(worst_vs_ref, std::abs(ours - theirs) / theirs);
  }
  bool ok = worst <= 0.01 && worst_vs_ref <= 0.02; // 1% to truth, 2% to reference search
  report(1, "curve recovery", ok,
         "worst prediction error " + fnum(worst * 100.0, 3) + "%, vs reference search " +
             fnum(worst_vs_ref * 100.0, 3) + "%");
}

// ---- 2: limit convergence on the flat mesh ------------------------------

void check_convergence() {
  Scenario sc = builtin_scenario("edge26");
  RunResult r = run_scenario(sc, {1, false});

  const int need_iters = 55;
  std::map<int, std::vector<double>> limits, residuals;
  std::map<JobKey, int> per_job;
  for (const auto& row : r.report.iterations) {
    limits[row.iteration].push_back(row.limit_mc);
    residuals[row.iteration].push_back(row.relative_residual);
    per_job[row.key] = std::max(per_job[row.key], row.iteration);
  }
  bool coverage = per_job.size() == sc.streams.size();
  for (const auto& [key, n] : per_job) coverage = coverage && n >= need_iters;
  if (!coverage) {
    report(2, "limit convergence", false, "fewer than 26 jobs x 55 iterations");
    return;
  }

  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  std::vector<double> limit_curve, residual_curve;
  for (int it = 1; it <= need_iters; ++it) {
    limit_curve.push_back(mean(limits[it]));
    residual_curve.push_back(mean(residuals[it]));
  }

  // Plateau: the band center is the mean over the last 10 iterations; the
  // curve must start well above it and sit inside +-15% of it for at least
  // 10 consecutive iterations.
  double center = 0.0;
  for (int it = need_iters - 10; it < need_iters; ++it) center += limit_curve[it];
  center /= 10.0;
  int consecutive = 0, best_streak = 0;
  for (double v : limit_curve) {
    if (std::abs(v - center) <= 0.15 * center)
      best_streak = std::max(best_streak, ++consecutive);
    else
      consecutive = 0;
  }
  bool decreased = limit_curve.front() > center * 1.15;
  bool plateau = best_streak >= 10;

  // Residuals: by iteration 40 the mean relative residual has lost at least
  // 40% of its starting value.
  double res0 = residual_curve.front();
  double res40 = residual_curve[39];
  bool residual_drop = res40 <= 0.6 * res0;

  bool ok = decreased && plateau && residual_drop;
  report(2, "limit convergence", ok,
         "limit " + fnum(limit_curve.front(), 1) + " -> " + fnum(center, 1) + " (streak " +
             inum(best_streak) + "), residual " + fnum(res0, 3) + " -> " + fnum(res40, 3) +
             " at iteration 40");
}

// ---- 3..6, 8: the stream-count sweep -------------------------------------

struct SweepOutcome {
  std::map<int, std::vector<double>> insitu_rates;
  std::map<int, std::vector<double>> los_rates;
  std::map<int, std::vector<double>> hop_fractions; // mean over repeats per hop
  bool engine_clean = true;
  std::string engine_error;
};

SweepOutcome run_sweeps() {
  SweepOutcome out;
  const std::vector<int> counts{2, 4, 6, 8, 10};
  const int repeats = 5;
  const std::uint64_t base_seed = 20240801;
  Scenario full = builtin_scenario("testbed");
  for (int n : counts) {
    std::vector<std::vector<double>> hop_acc;
    for (int rep = 0; rep < repeats; ++rep) {
      Scenario sc = full.with_streams(static_cast<std::size_t>(n));
      RunConfig rc;
      rc.seed = derive_seed(base_seed, static_cast<std::uint64_t>(n),
                            static_cast<std::uint64_t>(rep));
      try {
        Scenario insitu = sc;
        insitu.defaults.max_hops = 0;
        RunResult base = run_scenario(insitu, rc);
        out.insitu_rates[n].push_back(base.report.drop_rate());

        RunResult los = run_scenario(sc, rc);
        out.los_rates[n].push_back(los.report.drop_rate());
        hop_acc.push_back(los.report.hop_distribution());
      } catch (const EngineError& e) {
        out.engine_clean = false;
        out.engine_error = e.what();
        return out;
      }
    }
    std::vector<double> mean_hops;
    for (std::size_t h = 0; h <= 4; ++h) {
      double s = 0.0;
      for (const auto& dist : hop_acc) s += h < dist.size() ? dist[h] : 0.0;
      mean_hops.push_back(s / static_cast<double>(hop_acc.size()));
    }
    out.hop_fractions[n] = mean_hops;
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void check_sweeps() {
  SweepOutcome sw = run_sweeps();

  // 8: engine invariants held across every run in the sweep.
  report(8, "engine accounting", sw.engine_clean,
         sw.engine_clean ? "capacity and trigger accounting held across 50 runs"
                         : sw.engine_error);
  if (!sw.engine_clean) {
    report(3, "in-situ baseline", false, "sweep aborted");
    report(4, "offload improvement", false, "sweep aborted");
    report(5, "pressure monotonicity", false, "sweep aborted");
    report(6, "hop profile", false, "sweep aborted");
    return;
  }

  // 3: the baseline drops everything at every count.
  bool all_full = true;
  for (const auto& [n, rates] : sw.insitu_rates)
    for (double r : rates) all_full = all_full && r == 1.0;
  report(3, "in-situ baseline", all_full, "every baseline run at exactly 100% drops");

  // 4: the scheduler beats the baseline everywhere, by 60pp at 4 streams
  // and by 20pp at 10.
  std::string detail;
  bool beats = true;
  std::map<int, double> mean_los;
  for (const auto& [n, rates] : sw.los_rates) {
    mean_los[n] = mean_of(rates);
    beats = beats && mean_los[n] < mean_of(sw.insitu_rates[n]);
    detail += inum(n) + "=" + fnum(mean_los[n] * 100.0, 2) + "% ";
  }
  double imp4 = (mean_of(sw.insitu_rates[4]) - mean_los[4]) * 100.0;
  double imp10 = (mean_of(sw.insitu_rates[10]) - mean_los[10]) * 100.0;
  bool ok4 = beats && imp4 >= 60.0 && imp10 >= 20.0;
  report(4, "offload improvement", ok4,
         detail + "improvement " + fnum(imp4, 1) + "pp at 4, " + fnum(imp10, 1) + "pp at 10");

  // 5: mean drop rate never goes down when streams are added.
  bool monotone = true;
  const std::vector<int> counts{2, 4, 6, 8, 10};
  for (std::size_t i = 1; i < counts.size(); ++i)
    monotone = monotone && mean_los[counts[i]] >= mean_los[counts[i - 1]];
  report(5, "pressure monotonicity", monotone, detail);

  // 6: at 2 streams at least 70% of executions stay within one hop; at 10
  // the most common hop count is 2 or 3.
  const auto& h2 = sw.hop_fractions[2];
  const auto& h10 = sw.hop_fractions[10];
  double near = h2[0] + h2[1];
  std::size_t modal = 0;
  for (std::size_t h = 1; h < h10.size(); ++h)
    if (h10[h] > h10[modal]) modal = h;
  bool ok6 = near >= 0.70 && (modal == 2 || modal == 3);
  report(6, "hop profile", ok6,
         "2 streams <=1 hop " + fnum(near * 100.0, 1) + "%, 10 streams modal hop " +
             inum(static_cast<long long>(modal)));
}

// ---- 7: determinism -------------------------------------------------------

void check_determinism() {
  bool ok = true;
  std::string detail = "testbed and edge26 reproduce byte-identical artifacts";
  for (const char* name : {"testbed", "edge26"}) {
    Scenario sc = builtin_scenario(name);
    RunConfig rc;
    rc.seed = 4242;
    rc.verbose_events = true;
    RunResult a = run_scenario(sc, rc);
    RunResult b = run_scenario(sc, rc);
    std::ostringstream ra, rb;
    write_report_csv(a.report, ra);
    write_report_csv(b.report, rb);
    if (a.event_log != b.event_log || ra.str() != rb.str() ||
        a.report.to_text() != b.report.to_text()) {
      ok = false;
      detail = std::string("divergence in ") + name;
    }
  }
  report(7, "determinism", ok, detail);
}

// ---- 9: forwarding chains ------------------------------------------------

void check_chains() {
  Rng rng(555);
  int bad = 0, executions = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    harness::World w = harness::random_world(rng);
    NodeId origin = harness::world_id(static_cast<int>(rng.uniform_index(w.nodes.size())));
    int max_hops = 1 + static_cast<int>(rng.uniform_index(5));
    TrainingJob job = harness::make_job(w, origin, max_hops, rng);
    harness::ChainResult res = harness::walk_chain(w, job, rng);
    bool fine = res.forwards <= max_hops && !res.revisited && !res.bad_edge &&
                res.last.kind != DecisionKind::Forward;
    if (!fine) ++bad;
    if (res.last.kind == DecisionKind::ExecuteLocal) ++executions;
  }
  report(9, "chain termination", bad == 0,
         inum(trials) + " random chains, " + inum(executions) + " executed, " + inum(bad) +
             " violations");
}

// ---- 10: ranking ----------------------------------------------------------

void check_ranking() {
  Rng rng(777);
  int mismatches = 0, unstable = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    std::size_t n = 1 + rng.uniform_index(9);
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < n; ++i) {
      Candidate c;
      c.id = "n" + std::to_string(i);
      c.predicted_residual = static_cast<double>(rng.uniform_index(6)) / 5.0;
      c.load = static_cast<double>(rng.uniform_index(6)) / 5.0;
      c.latency_ms = 1.0 + static_cast<double>(rng.uniform_index(30));
      cands.push_back(c);
    }
    CandidateRanking got = rank_candidates(cands, 1.0, 1.0);
    if (got.winner != oracle::winner(cands, 1.0, 1.0)) ++mismatches;

    std::vector<Candidate> scaled = cands;
    double sr = rng.uniform(0.05, 20.0), sl = rng.uniform(0.05, 20.0);
    for (auto& c : scaled) {
      c.predicted_residual *= sr;
      c.load *= sl;
    }
    if (rank_candidates(scaled, 1.0, 1.0).winner != got.winner) ++unstable;
  }
  report(10, "ranking invariance", mismatches == 0 && unstable == 0,
         inum(trials) + " candidate sets, " + inum(mismatches) + " reference mismatches, " +
             inum(unstable) + " rescale instabilities");
}

} // namespace

int main() {
  check_fit_recovery();
  check_convergence();
  check_sweeps();
  check_determinism();
  check_chains();
  check_ranking();
  if (failures == 0) {
    std::printf("all acceptance checks passed\n");
    return 0;
  }
  std::printf("%d acceptance check(s) failed\n", failures);
  return 1;
}

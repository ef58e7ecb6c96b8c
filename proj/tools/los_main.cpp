#include "los/errors.hpp"
#include "los/metrics.hpp"
#include "los/models.hpp"
#include "los/rng.hpp"
#include "los/scenario.hpp"
#include "los/sim.hpp"
#include "los/text.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace los;

namespace {

Scenario resolve_scenario(const std::string& ref) {
  auto names = builtin_scenario_names();
  if (std::find(names.begin(), names.end(), ref) != names.end()) return builtin_scenario(ref);
  return load_scenario_file(ref);
}

std::ofstream open_out(const fs::path& p, bool force) {
  if (fs::exists(p) && !force)
    throw ValidationError("refusing to overwrite " + p.string() + " (pass --force)");
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

json defaults_json(const SimDefaults& d) {
  return json{{"gossip_interval_s", d.gossip_interval_s},
              {"scrape_interval_s", d.scrape_interval_s},
              {"latency_sample_interval_s", d.latency_sample_interval_s},
              {"max_hops", d.max_hops},
              {"t_cstart_s", d.overheads.t_cstart_s},
              {"t_cstop_s", d.overheads.t_cstop_s},
              {"history_cap", d.fit.history_cap},
              {"min_fit_records", d.fit.min_fit_records},
              {"k_sigma", d.fit.k_sigma},
              {"coldstart_threshold", d.sched.coldstart_threshold},
              {"weight_residual", d.sched.weight_residual},
              {"weight_load", d.sched.weight_load},
              {"headroom", d.sched.optimizer.headroom},
              {"min_limit_mc", d.sched.optimizer.min_limit_mc},
              {"shrink_factor", d.sched.optimizer.shrink_factor},
              {"grow_factor", d.sched.optimizer.grow_factor},
              {"duration_s", d.duration_s}};
}

void write_run_outputs(const fs::path& dir, const Scenario& sc, const RunConfig& rc,
                       const RunResult& result, bool force) {
  fs::create_directories(dir);
  json cfg{{"scenario", sc.name},
           {"seed", rc.seed},
           {"streams", sc.streams.size()},
           {"defaults", defaults_json(sc.defaults)}};
  open_out(dir / "config.json", force) << cfg.dump(2) << "\n";
  auto report = open_out(dir / "report.csv", force);
  write_report_csv(result.report, report);
  auto hops = open_out(dir / "hops.csv", force);
  write_hops_csv(result.report, hops);
  auto drops = open_out(dir / "drops.csv", force);
  write_drops_csv(result.report, drops);
  auto latency = open_out(dir / "latency.csv", force);
  write_latency_csv(result.report, latency);
  open_out(dir / "summary.txt", force) << result.report.to_text();
  open_out(dir / "events.log", force) << result.event_log;
}

int cmd_validate(const std::string& ref) {
  Scenario sc = resolve_scenario(ref);
  sc.validate();
  std::cout << "scenario '" << sc.name << "' ok: " << sc.topology.nodes().size() << " nodes, "
            << sc.topology.links().size() << " links, " << sc.streams.size() << " streams, "
            << fnum(sc.defaults.duration_s, 0) << "s\n";
  return 0;
}

struct RunArgs {
  std::string scenario;
  std::uint64_t seed = 1;
  int streams = 0; // 0 means all declared
  int max_hops = -1;
  bool insitu = false;
  std::string out;
  bool force = false;
  bool verbose_events = false;
};

Scenario configure(const RunArgs& a) {
  Scenario sc = resolve_scenario(a.scenario);
  if (a.streams > 0) sc = sc.with_streams(static_cast<std::size_t>(a.streams));
  if (a.max_hops >= 0) sc.defaults.max_hops = a.max_hops;
  if (a.insitu) sc.defaults.max_hops = 0;
  return sc;
}

int cmd_run(const RunArgs& a) {
  Scenario sc = configure(a);
  RunConfig rc{a.seed, a.verbose_events};
  RunResult result = run_scenario(sc, rc);
  std::cout << result.report.to_text();
  if (!a.out.empty()) {
    write_run_outputs(a.out, sc, rc, result, a.force);
    std::cout << "wrote " << a.out << "\n";
  }
  return 0;
}

struct SweepArgs {
  std::string scenario;
  std::uint64_t seed = 1;
  std::vector<int> streams{2, 4, 6, 8, 10};
  int repeats = 5;
  bool insitu = false;
  std::string out;
  bool force = false;
};

int cmd_sweep(const SweepArgs& a) {
  if (a.repeats < 1) throw ValidationError("--repeats must be at least 1");
  Scenario base = resolve_scenario(a.scenario);
  if (a.insitu) base.defaults.max_hops = 0;

  std::string runs_csv = "streams,repeat,seed,triggers,executions,dropped,drop_rate\n";
  std::string drops_csv = "streams,repeats,mean,min,q1,median,q3,max\n";
  std::string hops_csv = "streams,hops,mean_fraction\n";
  for (int n : a.streams) {
    Scenario sc = base.with_streams(static_cast<std::size_t>(n));
    std::vector<double> rates;
    std::vector<double> hop_frac(static_cast<std::size_t>(sc.defaults.max_hops) + 1, 0.0);
    for (int r = 0; r < a.repeats; ++r) {
      RunConfig rc{derive_seed(a.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)),
                   false};
      RunResult res = run_scenario(sc, rc);
      JobCounts t = res.report.totals();
      rates.push_back(res.report.drop_rate());
      auto dist = res.report.hop_distribution();
      for (std::size_t h = 0; h < dist.size() && h < hop_frac.size(); ++h)
        hop_frac[h] += dist[h] / a.repeats;
      runs_csv += inum(n) + "," + inum(r) + "," + unum(rc.seed) + "," +
                  inum(t.triggers) + "," + inum(t.executions) + "," + inum(t.dropped_total()) +
                  "," + fnum(res.report.drop_rate()) + "\n";
    }
    Summary s = summarize(rates);
    drops_csv += inum(n) + "," + inum(a.repeats) + "," + fnum(s.mean) + "," + fnum(s.min) + "," +
                 fnum(s.q1) + "," + fnum(s.median) + "," + fnum(s.q3) + "," + fnum(s.max) + "\n";
    for (std::size_t h = 0; h < hop_frac.size(); ++h)
      hops_csv += inum(n) + "," + inum(static_cast<long long>(h)) + "," + fnum(hop_frac[h]) + "\n";
    std::cout << "streams=" << n << " mean_drop_rate=" << fnum(s.mean * 100.0, 2) << "% ["
              << fnum(s.min * 100.0, 2) << ".." << fnum(s.max * 100.0, 2) << "]\n";
  }
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    open_out(fs::path(a.out) / "runs.csv", a.force) << runs_csv;
    open_out(fs::path(a.out) / "sweep_drops.csv", a.force) << drops_csv;
    open_out(fs::path(a.out) / "sweep_hops.csv", a.force) << hops_csv;
    std::cout << "wrote " << a.out << "\n";
  }
  return 0;
}

int cmd_compare(const SweepArgs& a) {
  if (a.repeats < 1) throw ValidationError("--repeats must be at least 1");
  Scenario base = resolve_scenario(a.scenario);
  std::string csv = "streams,insitu_drop_pct,distributed_drop_pct,improvement_pp\n";
  for (int n : a.streams) {
    Scenario sc = base.with_streams(static_cast<std::size_t>(n));
    Scenario insitu = sc;
    insitu.defaults.max_hops = 0;
    double sum_in = 0.0, sum_los = 0.0;
    for (int r = 0; r < a.repeats; ++r) {
      std::uint64_t seed =
          derive_seed(a.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r));
      sum_in += run_scenario(insitu, {seed, false}).report.drop_rate();
      sum_los += run_scenario(sc, {seed, false}).report.drop_rate();
    }
    double mean_in = sum_in / a.repeats * 100.0;
    double mean_los = sum_los / a.repeats * 100.0;
    csv += inum(n) + "," + fnum(mean_in, 2) + "," + fnum(mean_los, 2) + "," +
           fnum(mean_in - mean_los, 2) + "\n";
    std::cout << "streams=" << n << " insitu=" << fnum(mean_in, 2) << "% distributed="
              << fnum(mean_los, 2) << "% improvement=" << fnum(mean_in - mean_los, 2) << "pp\n";
  }
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    open_out(fs::path(a.out) / "compare.csv", a.force) << csv;
    std::cout << "wrote " << a.out << "\n";
  }
  return 0;
}

struct FitArgs {
  double a = 100000.0;
  double b = 50.0;
  double c = 1.0;
  double d = 5.0;
  double noise = 0.0;
  int samples = 8;
  std::uint64_t seed = 1;
};

// Round-trips a known runtime curve through the fitter and reports how well
// the parameters and the predictions came back.
int cmd_fitcheck(const FitArgs& fa) {
  RuntimeFit truth{fa.a, fa.b, fa.c, fa.d};
  Rng rng(fa.seed);
  std::deque<TrainingRecord> hist;
  for (int i = 0; i < fa.samples; ++i) {
    TrainingRecord rec;
    rec.cpu_limit_mc = 100 + i * (700 / std::max(1, fa.samples - 1));
    rec.duration_s = truth.predict(rec.cpu_limit_mc) * (1.0 + rng.gaussian(0.0, fa.noise));
    hist.push_back(rec);
  }
  FitConfig cfg;
  auto res = fit_runtime_curve(hist, cfg);
  if (!res) {
    std::cout << "no fit (need at least " << cfg.min_fit_records
              << " records over two distinct limits)\n";
    return 1;
  }
  std::cout << "true  a=" << fnum(fa.a, 4) << " b=" << fnum(fa.b, 4) << " c=" << fnum(fa.c, 4)
            << " d=" << fnum(fa.d, 4) << "\n";
  std::cout << "fit   a=" << fnum(res->fit.a, 4) << " b=" << fnum(res->fit.b, 4)
            << " c=" << fnum(res->fit.c, 4) << " d=" << fnum(res->fit.d, 4)
            << " rmse=" << fnum(res->rmse, 6) << "\n";
  double worst = 0.0;
  for (int r = 100; r <= 800; r += 50) {
    double err = std::abs(res->fit.predict(r) - truth.predict(r)) / truth.predict(r);
    worst = std::max(worst, err);
  }
  std::cout << "worst relative prediction error over [100, 800] mc: " << fnum(worst * 100.0, 3)
            << "%\n";
  // Scriptable: a round trip this far off means the sample set is too thin
  // or too noisy to trust.
  return worst > 0.05 ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"local-optimistic scheduling simulator"};
  app.require_subcommand(1);

  std::string validate_ref;
  auto* v = app.add_subcommand("validate", "check a scenario and print its shape");
  v->add_option("scenario", validate_ref, "builtin name or path to a scenario json")->required();

  RunArgs ra;
  auto* r = app.add_subcommand("run", "run one scenario once");
  r->add_option("scenario", ra.scenario, "builtin name or path to a scenario json")->required();
  r->add_option("--seed", ra.seed, "rng seed");
  r->add_option("--streams", ra.streams, "use only the first N declared streams");
  r->add_option("--max-hops", ra.max_hops, "override the forwarding hop budget");
  r->add_flag("--baseline-insitu", ra.insitu, "disable forwarding (hop budget 0)");
  r->add_option("--out", ra.out, "directory for csv/log outputs");
  r->add_flag("--force", ra.force, "overwrite existing output files");
  r->add_flag("--verbose-events", ra.verbose_events, "log scrapes, gossip and latency samples");

  SweepArgs sa;
  auto* s = app.add_subcommand("sweep", "repeat runs across stream counts");
  s->add_option("scenario", sa.scenario, "builtin name or path to a scenario json")->required();
  s->add_option("--seed", sa.seed, "base seed; per-run seeds derive from it");
  s->add_option("--streams", sa.streams, "stream counts to sweep")->delimiter(',');
  s->add_option("--repeats", sa.repeats, "runs per stream count");
  s->add_flag("--baseline-insitu", sa.insitu, "disable forwarding (hop budget 0)");
  s->add_option("--out", sa.out, "directory for csv outputs");
  s->add_flag("--force", sa.force, "overwrite existing output files");

  SweepArgs ca;
  auto* c = app.add_subcommand("compare", "paired sweep against the in-situ baseline");
  c->add_option("scenario", ca.scenario, "builtin name or path to a scenario json")->required();
  c->add_option("--seed", ca.seed, "base seed; per-run seeds derive from it");
  c->add_option("--streams", ca.streams, "stream counts to compare")->delimiter(',');
  c->add_option("--repeats", ca.repeats, "runs per stream count and mode");
  c->add_option("--out", ca.out, "directory for compare.csv");
  c->add_flag("--force", ca.force, "overwrite existing output files");

  FitArgs fa;
  auto* f = app.add_subcommand("fitcheck", "round-trip a known runtime curve through the fitter");
  f->add_option("--a", fa.a, "curve scale");
  f->add_option("--b", fa.b, "curve shift");
  f->add_option("--c", fa.c, "curve exponent");
  f->add_option("--d", fa.d, "curve floor");
  f->add_option("--noise", fa.noise, "multiplicative noise stddev on samples");
  f->add_option("--samples", fa.samples, "number of profiled runs");
  f->add_option("--seed", fa.seed, "rng seed for the noise");

  CLI11_PARSE(app, argc, argv);

  try {
    if (v->parsed()) return cmd_validate(validate_ref);
    if (r->parsed()) return cmd_run(ra);
    if (s->parsed()) return cmd_sweep(sa);
    if (c->parsed()) return cmd_compare(ca);
    if (f->parsed()) return cmd_fitcheck(fa);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

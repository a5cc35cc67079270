// Command-line front end. Talks to the simulator only through the C API.

#include "wlantcp/wlantcp.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace {

constexpr const char *kOutEnv = "WLANTCP_OUT";

/// Process exit code for a library status.
int
ExitCode (wlantcp_status s)
{
  switch (s)
    {
    case WLANTCP_OK:
      return 0;
    case WLANTCP_ERR_PARSE:
    case WLANTCP_ERR_IO:
      return 2;
    case WLANTCP_ERR_VALIDATION:
      return 3;
    case WLANTCP_ERR_RUNTIME:
      return 4;
    default:
      return 1;
    }
}

struct Failure
{
  wlantcp_status status;
};

void
Check (wlantcp_status s)
{
  if (s != WLANTCP_OK)
    {
      throw Failure{s};
    }
}

std::string
DefaultOut ()
{
  const char *env = std::getenv (kOutEnv);
  return env != nullptr && *env != '\0' ? env : "out";
}

struct ScenarioHandle
{
  wlantcp_scenario *p = nullptr;
  ~ScenarioHandle () { wlantcp_scenario_free (p); }
};

struct Common
{
  std::vector<std::uint64_t> seeds;
  std::string out;
  unsigned jobs = 1;
  double duration = 0;
};

void
AddCommon (CLI::App *cmd, Common &c, bool multiSeed)
{
  if (multiSeed)
    {
      cmd->add_option ("--seed", c.seeds, "RNG seed (repeatable); overrides the scenario's seeds");
    }
  else
    {
      cmd->add_option ("--seed", c.seeds, "base RNG seed")->expected (1);
    }
  cmd->add_option ("--out", c.out, std::string ("output directory (default $") + kOutEnv + " or ./out)");
  cmd->add_option ("--jobs", c.jobs, "worker threads")->check (CLI::Range (1u, 256u));
  cmd->add_option ("--duration", c.duration, "simulated seconds, overrides the scenario")
    ->check (CLI::PositiveNumber);
}

void
PrintList (const char *files)
{
  if (files != nullptr)
    {
      std::fputs (files, stdout);
    }
}

// run ------------------------------------------------------------------------

struct RunArgs
{
  Common common;
  std::string scenario;
  std::string catalogue;
  std::vector<std::string> sets;
  bool quiet = false;
};

void
Load (const RunArgs &a, ScenarioHandle &h)
{
  if (!a.catalogue.empty ())
    {
      Check (wlantcp_scenario_catalogue (a.catalogue.c_str (), &h.p));
    }
  else
    {
      Check (wlantcp_scenario_load (a.scenario.c_str (), &h.p));
    }
  for (const std::string &kv : a.sets)
    {
      auto eq = kv.find ('=');
      if (eq == std::string::npos)
        {
          std::fprintf (stderr, "--set expects key=value, got '%s'\n", kv.c_str ());
          throw Failure{WLANTCP_ERR_PARSE};
        }
      Check (wlantcp_scenario_set (h.p, kv.substr (0, eq).c_str (), kv.substr (eq + 1).c_str ()));
    }
  if (a.common.duration > 0)
    {
      Check (wlantcp_scenario_set (h.p, "duration", std::to_string (a.common.duration).c_str ()));
    }
  Check (wlantcp_scenario_validate (h.p));
}

void
DoRun (const RunArgs &a)
{
  ScenarioHandle h;
  Load (a, h);
  std::vector<std::uint64_t> seeds = a.common.seeds;
  if (seeds.empty ())
    {
      for (size_t i = 0; i < wlantcp_scenario_seed_count (h.p); ++i)
        seeds.push_back (wlantcp_scenario_seed (h.p, i));
    }
  std::vector<wlantcp_report *> reports (seeds.size (), nullptr);
  Check (wlantcp_run_batch (h.p, seeds.data (), seeds.size (), a.common.jobs, reports.data ()));

  std::string out = a.common.out.empty () ? DefaultOut () : a.common.out;
  std::string name = wlantcp_scenario_name (h.p);
  std::filesystem::create_directories (out);
  std::string summaryPath = out + "/" + name + "_summary.csv";
  std::ofstream summary (summaryPath);
  summary << "seed,jain,uplink_bps,downlink_bps,total_bps,max_plr,mean_plr,ap_drop_ratio,"
             "short_completed,max_completion\n";

  wlantcp_status status = WLANTCP_OK;
  for (size_t i = 0; i < reports.size (); ++i)
    {
      wlantcp_report *r = reports[i];
      std::string stem = name + "_seed" + std::to_string (seeds[i]);
      wlantcp_summary s{};
      if (status == WLANTCP_OK)
        status = wlantcp_report_write (r, out.c_str (), stem.c_str ());
      if (status == WLANTCP_OK)
        status = wlantcp_report_summary (r, &s);
      if (status == WLANTCP_OK)
        {
          char line[512];
          std::snprintf (line, sizeof line, "%llu,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%zu,%.6g\n",
                         static_cast<unsigned long long> (seeds[i]), s.jain, s.uplink_bps,
                         s.downlink_bps, s.total_bps, s.max_plr, s.mean_plr, s.ap_drop_ratio,
                         s.short_completed, s.max_completion);
          summary << line;
          std::printf ("seed %llu: jain %.4f  up %.3f Mb/s  down %.3f Mb/s  max PLR %.4f\n",
                       static_cast<unsigned long long> (seeds[i]), s.jain, s.uplink_bps / 1e6,
                       s.downlink_bps / 1e6, s.max_plr);
          if (!a.quiet)
            {
              for (size_t f = 0; f < wlantcp_report_flow_count (r); ++f)
                {
                  wlantcp_flow_result fr{};
                  wlantcp_report_flow (r, f, &fr);
                  std::printf ("  flow %2u %-4s ld %6.1f ms  %8.3f Mb/s  drops %llu\n", fr.id,
                               fr.uplink ? "up" : "down", fr.ld * 1e3, fr.throughput_bps / 1e6,
                               static_cast<unsigned long long> (fr.ap_drops));
                }
            }
        }
      wlantcp_report_free (r);
    }
  Check (status);
  if (!summary)
    {
      std::fprintf (stderr, "cannot write %s\n", summaryPath.c_str ());
      throw Failure{WLANTCP_ERR_IO};
    }
  std::printf ("wrote %s\n", out.c_str ());
}

// calc -----------------------------------------------------------------------

struct CalcArgs
{
  wlantcp_calc_input in{};
  std::string scenario;
  std::string grid;
  bool ldGiven = false;
};

void
PrintCalcHeader ()
{
  std::printf ("%6s %6s %4s %8s %6s  %10s %10s %9s %6s %10s %s\n", "n_up", "n_down", "b",
               "ld_ms", "bs_ap", "ct_ap_us", "ct_flow_us", "w_lim", "floor", "buf_size",
               "check");
}

void
PrintCalcRow (const wlantcp_calc_input &in, const wlantcp_calc_result &r)
{
  // buffer_size(w_lim) must give bs_ap back.
  bool ok = std::abs (r.buffer_roundtrip - in.bs_ap) <= 1e-9 * std::max (1.0, in.bs_ap);
  std::printf ("%6g %6g %4g %8.2f %6g  %10.2f %10.2f %9.4f %6lld %10.4f %s\n", in.n_up,
               in.n_down, in.b, in.ld * 1e3, in.bs_ap, r.ct_ap * 1e6, r.ct_flow * 1e6, r.w_lim,
               static_cast<long long> (r.w_lim_floor), r.buffer_roundtrip, ok ? "ok" : "MISMATCH");
}

void
DoCalc (const CalcArgs &a)
{
  PrintCalcHeader ();
  wlantcp_calc_result r{};
  if (!a.scenario.empty ())
    {
      ScenarioHandle h;
      Check (wlantcp_scenario_load (a.scenario.c_str (), &h.p));
      Check (wlantcp_scenario_validate (h.p));
      for (size_t i = 0; i < wlantcp_scenario_flow_count (h.p); ++i)
        {
          wlantcp_calc_input in{};
          Check (wlantcp_scenario_calc (h.p, i, &in, &r));
          PrintCalcRow (in, r);
        }
      return;
    }
  if (a.grid.empty ())
    {
      Check (wlantcp_calc (&a.in, &r));
      PrintCalcRow (a.in, r);
      std::printf ("packet types: AP data %.4f  AP ack %.4f  STA data %.4f  STA ack %.4f\n",
                   r.pr_ap_data, r.pr_ap_ack, r.pr_sta_data, r.pr_sta_ack);
      std::printf ("cycle times (us): data/data %.2f  data/ack %.2f  ack/data %.2f  ack/ack %.2f\n",
                   r.ct_data_data * 1e6, r.ct_data_ack * 1e6, r.ct_ack_data * 1e6,
                   r.ct_ack_ack * 1e6);
      std::printf ("baseline window %.4f\n", r.baseline_window);
      return;
    }
  std::vector<std::pair<double, double>> sizes;
  wlantcp_calc_input in = a.in;
  if (!a.ldGiven)
    {
      in.ld = 0.05;
    }
  if (a.grid == "delayed-ack")
    {
      in.b = 2;
      for (double nDown : {5.0, 10.0, 15.0})
        for (double nUp : {5.0, 10.0, 15.0})
          sizes.emplace_back (nUp, nDown);
    }
  else
    {
      in.b = 1;
      for (int n = 1; n <= 8; ++n)
        sizes.emplace_back (n, n);
    }
  for (auto [nUp, nDown] : sizes)
    {
      in.n_up = nUp;
      in.n_down = nDown;
      Check (wlantcp_calc (&in, &r));
      PrintCalcRow (in, r);
    }
}

} // namespace

int
main (int argc, char **argv)
{
  CLI::App app{"802.11 DCF + TCP simulator with FCWA and ACCF control blocks"};
  app.require_subcommand (1);
  app.set_version_flag ("--version", wlantcp_version ());

  RunArgs run;
  CLI::App *runCmd = app.add_subcommand ("run", "run a scenario file");
  auto *path = runCmd->add_option ("scenario", run.scenario, "scenario file");
  auto *cat = runCmd->add_option ("--catalogue", run.catalogue, "built-in scenario name instead of a file");
  path->excludes (cat);
  runCmd->add_option ("--set", run.sets, "override a scenario key (key=value, repeatable)");
  runCmd->add_flag ("--quiet", run.quiet, "omit per-flow lines");
  AddCommon (runCmd, run.common, true);

  CalcArgs calc;
  wlantcp_calc_defaults (&calc.in);
  CLI::App *calcCmd = app.add_subcommand ("calc", "evaluate the analytic window-limit model");
  calcCmd->add_option ("--n-up", calc.in.n_up, "uplink flows")->capture_default_str ();
  calcCmd->add_option ("--n-down", calc.in.n_down, "downlink flows")->capture_default_str ();
  calcCmd->add_option ("--b", calc.in.b, "data packets per TCP ACK")->capture_default_str ();
  calcCmd->add_option ("--ld", calc.in.ld, "wired delay, seconds")->capture_default_str ();
  calcCmd->add_option ("--bs", calc.in.bs_ap, "AP buffer, packets")->capture_default_str ();
  calcCmd->add_option ("--data-size", calc.in.data_size, "bytes")->capture_default_str ();
  calcCmd->add_option ("--ack-size", calc.in.ack_size, "bytes")->capture_default_str ();
  calcCmd->add_option ("--scenario", calc.scenario, "one row per flow of a scenario file");
  calcCmd->add_option ("--grid", calc.grid, "predefined table (ld defaults to 50 ms)")
    ->check (CLI::IsMember ({"delayed-ack", "equal-ld"}));

  Common rep;
  std::string figure;
  CLI::App *repCmd = app.add_subcommand ("replicate", "run the scenario suite behind a figure");
  repCmd->add_option ("figure", figure, "figure id, or 'all'")->required ();
  AddCommon (repCmd, rep, false);

  Common sw;
  std::string sweepFile;
  CLI::App *swCmd = app.add_subcommand ("sweep", "run a parameter sweep file");
  swCmd->add_option ("file", sweepFile, "sweep file")->required ();
  AddCommon (swCmd, sw, true);

  CLI::App *listCmd = app.add_subcommand ("list", "list figure ids and catalogue scenarios");

  try
    {
      app.parse (argc, argv);
    }
  catch (const CLI::ParseError &e)
    {
      int code = app.exit (e);
      return code == 0 ? 0 : 1;
    }

  try
    {
      if (*runCmd)
        {
          if (run.scenario.empty () && run.catalogue.empty ())
            {
              std::fprintf (stderr, "run: a scenario file or --catalogue is required\n");
              return 1;
            }
          DoRun (run);
        }
      else if (*calcCmd)
        {
          calc.ldGiven = calcCmd->count ("--ld") > 0;
          DoCalc (calc);
        }
      else if (*repCmd)
        {
          std::string out = rep.out.empty () ? DefaultOut () : rep.out;
          std::uint64_t seed = rep.seeds.empty () ? 1 : rep.seeds.front ();
          std::vector<std::string> ids;
          if (figure == "all")
            {
              for (size_t i = 0; i < wlantcp_figure_count (); ++i)
                ids.push_back (wlantcp_figure_id (i));
            }
          else
            {
              ids.push_back (figure);
            }
          for (const std::string &id : ids)
            {
              char *written = nullptr;
              Check (wlantcp_replicate (id.c_str (), out.c_str (), rep.jobs, seed, rep.duration,
                                        &written));
              PrintList (written);
              wlantcp_string_free (written);
            }
        }
      else if (*swCmd)
        {
          std::string out = sw.out.empty () ? DefaultOut () : sw.out;
          char *written = nullptr;
          Check (wlantcp_sweep_file (sweepFile.c_str (), sw.seeds.data (), sw.seeds.size (),
                                     sw.jobs, sw.duration, out.c_str (), &written));
          PrintList (written);
          wlantcp_string_free (written);
        }
      else if (*listCmd)
        {
          std::printf ("figures:\n");
          for (size_t i = 0; i < wlantcp_figure_count (); ++i)
            std::printf ("  %s\n", wlantcp_figure_id (i));
          std::printf ("scenarios:\n");
          for (size_t i = 0; i < wlantcp_catalogue_count (); ++i)
            std::printf ("  %s\n", wlantcp_catalogue_name (i));
        }
    }
  catch (const Failure &f)
    {
      const char *msg = wlantcp_last_error ();
      if (msg != nullptr && *msg != '\0')
        std::fprintf (stderr, "error: %s\n", msg);
      return ExitCode (f.status);
    }
  catch (const std::filesystem::filesystem_error &e)
    {
      std::fprintf (stderr, "error: %s\n", e.what ());
      return ExitCode (WLANTCP_ERR_IO);
    }
  return 0;
}

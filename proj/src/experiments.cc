#include "wlantcp/experiments.h"

#include "wlantcp/analytic_model.h"
#include "wlantcp/metrics.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace wlantcp {

namespace fs = std::filesystem;

namespace {

std::ofstream
OpenOut (const fs::path &path)
{
  std::ofstream os (path);
  if (!os)
    {
      throw Error (ErrorCode::Io, "cannot write " + path.string ());
    }
  return os;
}

void
EnsureDir (const fs::path &dir)
{
  std::error_code ec;
  fs::create_directories (dir, ec);
  if (ec || !fs::is_directory (dir))
    {
      throw Error (ErrorCode::Io, "cannot create directory " + dir.string ());
    }
}

double
Mbps (double bps)
{
  return bps / 1e6;
}

struct Stats
{
  double mean = 0;
  double stderrMean = 0;
};

Stats
MeanStderr (const std::vector<double> &x)
{
  Stats s;
  if (x.empty ())
    {
      return s;
    }
  for (double v : x)
    {
      s.mean += v;
    }
  s.mean /= static_cast<double> (x.size ());
  if (x.size () > 1)
    {
      double ss = 0;
      for (double v : x)
        {
          ss += (v - s.mean) * (v - s.mean);
        }
      double sd = std::sqrt (ss / static_cast<double> (x.size () - 1));
      s.stderrMean = sd / std::sqrt (static_cast<double> (x.size ()));
    }
  return s;
}

/// Comma-separated table with a header row; doubles in shortest form.
class Table
{
public:
  explicit Table (std::vector<std::string> header) : m_header (std::move (header)) {}

  Table &Row () { m_rows.emplace_back (); return *this; }
  Table &
  operator<< (double v)
  {
    m_rows.back ().push_back (std::isnan (v) ? std::string () : FormatDouble (v));
    return *this;
  }
  Table &
  operator<< (std::uint64_t v)
  {
    m_rows.back ().push_back (std::to_string (v));
    return *this;
  }
  Table &operator<< (std::uint32_t v) { return *this << static_cast<std::uint64_t> (v); }
  Table &operator<< (int v) { return *this << static_cast<std::uint64_t> (v); }
  Table &
  operator<< (const std::string &v)
  {
    m_rows.back ().push_back (v);
    return *this;
  }
  Table &operator<< (const char *v) { return *this << std::string (v); }

  fs::path
  WriteCsv (const fs::path &path) const
  {
    auto os = OpenOut (path);
    Emit (os, m_header, ',', "");
    for (const auto &r : m_rows)
      {
        Emit (os, r, ',', "");
      }
    return path;
  }

  /// Whitespace-separated; empty cells become '?' (gnuplot's missing value).
  fs::path
  WriteDat (const fs::path &path) const
  {
    auto os = OpenOut (path);
    Emit (os, m_header, ' ', "# ");
    for (const auto &r : m_rows)
      {
        std::vector<std::string> cells = r;
        for (auto &c : cells)
          {
            if (c.empty ())
              c = "?";
          }
        Emit (os, cells, ' ', "");
      }
    return path;
  }

private:
  static void
  Emit (std::ostream &os, const std::vector<std::string> &cells, char sep,
        const char *prefix)
  {
    os << prefix;
    for (std::size_t i = 0; i < cells.size (); ++i)
      {
        os << (i ? std::string (1, sep) : std::string ()) << cells[i];
      }
    os << '\n';
  }

  std::vector<std::string> m_header;
  std::vector<std::vector<std::string>> m_rows;
};

struct Curve
{
  int column;     // 1-based column of the y values
  std::string title;
  std::string style = "linespoints";
};

fs::path
WriteGnuplot (const fs::path &dir, const std::string &stem,
              const std::string &dat, const std::string &title,
              const std::string &xlabel, const std::string &ylabel,
              const std::vector<Curve> &curves, int xColumn = 1,
              const std::string &extra = "")
{
  fs::path path = dir / (stem + ".gp");
  auto os = OpenOut (path);
  os << "set terminal pngcairo size 900,600\n"
     << "set output '" << stem << ".png'\n"
     << "set title '" << title << "'\n"
     << "set xlabel '" << xlabel << "'\n"
     << "set ylabel '" << ylabel << "'\n"
     << "set key outside right\n"
     << "set grid\n"
     << extra;
  os << "plot ";
  for (std::size_t i = 0; i < curves.size (); ++i)
    {
      os << (i ? ", \\\n     " : "") << "'" << (i ? "" : dat) << "' using "
         << xColumn << ':' << curves[i].column << " with " << curves[i].style
         << " title '" << curves[i].title << "'";
    }
  os << '\n';
  return path;
}

ScenarioSpec
WithBlock (ScenarioSpec s, ControlBlock b)
{
  s.controlBlock = b;
  return s;
}

/// Every flow gets a fixed advertised window.
ScenarioSpec
WithWindow (ScenarioSpec s, std::uint32_t w)
{
  for (FlowGroup &g : s.flows)
    {
      g.advWindows = {w};
    }
  return s;
}

FlowGroup
Group (Direction d, std::uint32_t count, double ld)
{
  FlowGroup g;
  g.direction = d;
  g.count = count;
  g.ld = ld;
  return g;
}

ScenarioSpec
UpDown (const std::string &name, std::uint32_t nUp, std::uint32_t nDown, double ld)
{
  ScenarioSpec s;
  s.name = name;
  if (nUp > 0)
    s.flows.push_back (Group (Direction::Up, nUp, ld));
  if (nDown > 0)
    s.flows.push_back (Group (Direction::Down, nDown, ld));
  return s;
}

/// First flow of each direction at 10 ms, each next one 2 ms later.
ScenarioSpec
AccfGrid (std::uint32_t nUp, std::uint32_t nDown, double per, ControlBlock b)
{
  ScenarioSpec s = UpDown ("accf_grid", nUp, nDown, 0.010);
  for (FlowGroup &g : s.flows)
    {
      g.ldSchedule = LdSchedule::Arithmetic;
      g.ldStep = 0.002;
    }
  s.per = per;
  s.controlBlock = b;
  return s;
}

ScenarioSpec
VaryingLd (std::uint32_t n)
{
  ScenarioSpec s = UpDown ("varying_ld", n, n, 0.001);
  for (FlowGroup &g : s.flows)
    {
      g.ldSchedule = LdSchedule::Triangular;
      g.ldStep = 0.001;
    }
  s.flows[1].ldIndexOffset = n;
  return s;
}

ScenarioSpec
MixedTraffic (std::uint32_t perDirection)
{
  ScenarioSpec s;
  s.name = "mixed_traffic";
  std::uint32_t ftp = (perDirection + 1) / 2;
  std::uint32_t telnet = perDirection - ftp;
  for (Direction d : {Direction::Up, Direction::Down})
    {
      FlowGroup f = Group (d, ftp, 0.010);
      f.ldSchedule = LdSchedule::Arithmetic;
      f.ldStep = 0.002;
      s.flows.push_back (f);
      if (telnet > 0)
        {
          FlowGroup t = f;
          t.count = telnet;
          t.kind = FlowKind::Telnet;
          t.ld = 0.010 + 0.002 * ftp;
          t.telnetRates = {150e3, 250e3, 350e3, 450e3, 550e3};
          s.flows.push_back (t);
        }
    }
  s.controlBlock = ControlBlock::Accf;
  return s;
}

ScenarioSpec
WindowMix (std::uint32_t flows, double ld)
{
  ScenarioSpec s = UpDown ("window_mix", flows / 2, flows - flows / 2, ld);
  for (FlowGroup &g : s.flows)
    {
      g.advWindows = {12, 20, 42, 84};
    }
  s.b = 2;
  s.controlBlock = ControlBlock::Accf;
  return s;
}

std::uint32_t
BaselineWindow (const ScenarioSpec &s)
{
  std::uint32_t n = s.CountFlows (Direction::Up) + s.CountFlows (Direction::Down);
  return std::max<std::uint32_t> (1, s.bsAp / n);
}

/// One group per flow, each with its own window.
ScenarioSpec
Explode (const ScenarioSpec &s, const std::vector<std::uint32_t> &windows)
{
  ScenarioSpec out = s;
  out.flows.clear ();
  auto flows = s.ExpandFlows ();
  for (std::size_t i = 0; i < flows.size (); ++i)
    {
      FlowGroup g = Group (flows[i].direction, 1, flows[i].ld);
      g.kind = flows[i].kind;
      g.start = flows[i].start;
      g.advWindows = {windows[i]};
      out.flows.push_back (g);
    }
  return out;
}

/// floor(W_lim) for every flow of an FTP scenario.
std::vector<std::uint32_t>
FloorLimits (const ScenarioSpec &s)
{
  TrafficMix mix;
  mix.nUp = s.CountFlows (Direction::Up);
  mix.nDown = s.CountFlows (Direction::Down);
  mix.b = s.b;
  mix.dataSize = s.dataSize;
  mix.ackSize = s.ackSize;
  std::vector<std::uint32_t> w;
  for (const FlowSpec &f : s.ExpandFlows ())
    {
      auto r = WindowLimit (f.ld, mix, s.bsAp, s.mac);
      w.push_back (static_cast<std::uint32_t> (std::max<std::int64_t> (r.wLimFloor, 1)));
    }
  return w;
}

WindowLimitResult
EqualLdLimit (const ScenarioSpec &s)
{
  TrafficMix mix;
  mix.nUp = s.CountFlows (Direction::Up);
  mix.nDown = s.CountFlows (Direction::Down);
  mix.b = s.b;
  mix.dataSize = s.dataSize;
  mix.ackSize = s.ackSize;
  return WindowLimit (s.flows.front ().ld, mix, s.bsAp, s.mac);
}

/// Collects jobs, runs them in one batch, hands results back by handle.
class Plan
{
public:
  explicit Plan (const ReplicateOptions &o) : m_opt (o) {}

  std::size_t
  Add (ScenarioSpec s)
  {
    if (m_opt.duration)
      {
        s.duration = *m_opt.duration;
        s.warmup = std::min (s.warmup, s.duration / 2);
      }
    m_jobs.push_back ({std::move (s), m_opt.seed});
    return m_jobs.size () - 1;
  }

  void Run () { m_reports = RunBatch (m_jobs, m_opt.workers); }
  const RunReport &operator[] (std::size_t i) const { return m_reports.at (i); }

private:
  const ReplicateOptions &m_opt;
  std::vector<Job> m_jobs;
  std::vector<RunReport> m_reports;
};

using Paths = std::vector<fs::path>;

void
Append (Paths &to, const Paths &from)
{
  to.insert (to.end (), from.begin (), from.end ());
}

Paths
PerFlowBars (const std::string &stem, const std::string &scenario,
             const std::string &title, const ReplicateOptions &opt)
{
  Plan plan (opt);
  auto h = plan.Add (CatalogueScenario (scenario));
  plan.Run ();
  const RunReport &r = plan[h];
  Paths out = WriteRunArtifacts (r, opt.outDir, stem);
  Table t ({"flow", "direction", "throughput_mbps"});
  for (const FlowReport &f : r.flows)
    {
      t.Row () << f.spec.id + 1 << ToString (f.spec.direction) << Mbps (f.throughput);
    }
  out.push_back (t.WriteCsv (opt.outDir / (stem + ".csv")));
  out.push_back (t.WriteDat (opt.outDir / (stem + ".dat")));
  out.push_back (WriteGnuplot (opt.outDir, stem, stem + ".dat", title,
                               "TCP connection", "throughput (Mbps)",
                               {{3, "throughput", "boxes fill solid 0.5"}}, 1,
                               "set yrange [0:*]\nset boxwidth 0.8\n"));
  return out;
}

Paths
Fig4 (const ReplicateOptions &opt)
{
  Plan plan (opt);
  std::vector<std::size_t> h;
  for (std::uint32_t nUp = 1; nUp <= 10; ++nUp)
    {
      ScenarioSpec s = CatalogueScenario ("fig4_up_down");
      s.flows[0].count = nUp;
      h.push_back (plan.Add (s));
    }
  plan.Run ();
  Table t ({"n_up", "uplink_mbps", "downlink_mbps", "total_mbps", "jain"});
  for (std::uint32_t i = 0; i < h.size (); ++i)
    {
      RunSummary s = Summarize (plan[h[i]]);
      t.Row () << i + 1 << Mbps (s.uplinkBps) << Mbps (s.downlinkBps)
               << Mbps (s.totalBps) << s.jain;
    }
  return {t.WriteCsv (opt.outDir / "fig4.csv"), t.WriteDat (opt.outDir / "fig4.dat"),
          WriteGnuplot (opt.outDir, "fig4", "fig4.dat",
                        "10 downlink flows, varying uplink flows",
                        "uplink flows", "throughput (Mbps)",
                        {{2, "uplink"}, {3, "downlink"}, {4, "total"}})};
}

/// Analytic, scanned and baseline window limits for equal-LD scenarios.
/// The simulated limit is the largest uniform window with no AP drops in
/// steady state, scanning upwards from below the analytic floor.
Paths
WindowLimitFigure (const std::string &stem, const std::vector<ScenarioSpec> &cases,
                   int below, int above, ReplicateOptions opt)
{
  if (!opt.duration)
    {
      opt.duration = 100;
    }
  Plan plan (opt);
  std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> scans;
  for (const ScenarioSpec &s : cases)
    {
      auto floorW = EqualLdLimit (s).wLimFloor;
      std::vector<std::pair<std::uint32_t, std::size_t>> scan;
      for (std::int64_t w = std::max<std::int64_t> (1, floorW - below);
           w <= floorW + above; ++w)
        {
          auto wu = static_cast<std::uint32_t> (w);
          scan.emplace_back (wu, plan.Add (WithWindow (s, wu)));
        }
      scans.push_back (scan);
    }
  plan.Run ();
  Table t ({"n_up", "n_down", "b", "wlim_analytic", "wlim_floor", "wlim_simulated",
            "wlim_baseline"});
  Table scanTable ({"n_up", "n_down", "b", "window", "ap_drop_ratio", "jain",
                    "total_mbps"});
  for (std::size_t i = 0; i < cases.size (); ++i)
    {
      const ScenarioSpec &s = cases[i];
      auto nUp = s.CountFlows (Direction::Up);
      auto nDown = s.CountFlows (Direction::Down);
      auto lim = EqualLdLimit (s);
      double simulated = std::nan ("");
      bool dropped = false;
      for (auto [w, h] : scans[i])
        {
          RunSummary sum = Summarize (plan[h]);
          scanTable.Row () << nUp << nDown << s.b << w << sum.apDropRatio << sum.jain
                           << Mbps (sum.totalBps);
          if (!dropped && sum.apDropRatio == 0)
            simulated = w;
          dropped = dropped || sum.apDropRatio > 0;
        }
      t.Row () << nUp << nDown << s.b << lim.wLim << static_cast<std::uint64_t> (lim.wLimFloor)
               << simulated << static_cast<double> (s.bsAp) / (nUp + nDown);
    }
  return {t.WriteCsv (opt.outDir / (stem + ".csv")),
          scanTable.WriteCsv (opt.outDir / (stem + "_scan.csv")),
          t.WriteDat (opt.outDir / (stem + ".dat")),
          WriteGnuplot (opt.outDir, stem, stem + ".dat",
                        "Congestion window limit", "scenario", "window (packets)",
                        {{4, "analytic"}, {6, "simulated"}, {7, "BS/(n_up+n_down)"}},
                        0)};
}

/// Total throughput with per-flow floor(W_lim), the baseline rule, and the
/// FCWA block attached.
Paths
ThroughputFigure (const std::string &stem, const std::vector<ScenarioSpec> &cases,
                  const ReplicateOptions &opt, bool perFlow)
{
  Plan plan (opt);
  struct Handles
  {
    std::size_t limit, baseline, block;
  };
  std::vector<Handles> h;
  for (const ScenarioSpec &s : cases)
    {
      ScenarioSpec open = WithWindow (s, 1000);
      h.push_back ({plan.Add (Explode (s, FloorLimits (s))),
                    plan.Add (WithWindow (s, BaselineWindow (s))),
                    plan.Add (WithBlock (open, ControlBlock::Fcwa))});
    }
  plan.Run ();
  Paths out;
  Table t ({"n_up", "n_down", "b", "total_wlim_mbps", "total_baseline_mbps",
            "total_fcwa_mbps", "jain_wlim", "jain_baseline", "jain_fcwa",
            "drop_ratio_fcwa"});
  Table flows ({"n_up", "n_down", "flow", "direction", "ld", "wlim_mbps",
                "baseline_mbps", "fcwa_mbps"});
  for (std::size_t i = 0; i < cases.size (); ++i)
    {
      const ScenarioSpec &s = cases[i];
      auto nUp = s.CountFlows (Direction::Up);
      auto nDown = s.CountFlows (Direction::Down);
      RunSummary a = Summarize (plan[h[i].limit]);
      RunSummary b = Summarize (plan[h[i].baseline]);
      RunSummary c = Summarize (plan[h[i].block]);
      t.Row () << nUp << nDown << s.b << Mbps (a.totalBps) << Mbps (b.totalBps)
               << Mbps (c.totalBps) << a.jain << b.jain << c.jain << c.apDropRatio;
      if (perFlow)
        {
          for (std::size_t k = 0; k < plan[h[i].block].flows.size (); ++k)
            {
              const FlowReport &f = plan[h[i].block].flows[k];
              flows.Row () << nUp << nDown << f.spec.id + 1 << ToString (f.spec.direction)
                           << f.spec.ld << Mbps (plan[h[i].limit].flows[k].throughput)
                           << Mbps (plan[h[i].baseline].flows[k].throughput)
                           << Mbps (f.throughput);
            }
        }
    }
  out.push_back (t.WriteCsv (opt.outDir / (stem + ".csv")));
  out.push_back (t.WriteDat (opt.outDir / (stem + ".dat")));
  out.push_back (WriteGnuplot (opt.outDir, stem, stem + ".dat", "Total throughput",
                               "scenario", "throughput (Mbps)",
                               {{4, "floor(W_lim)"}, {5, "BS/(n_up+n_down)"},
                                {6, "FCWA block"}},
                               0));
  if (perFlow)
    {
      out.push_back (flows.WriteCsv (opt.outDir / (stem + "_flows.csv")));
      out.push_back (flows.WriteDat (opt.outDir / (stem + "_flows.dat")));
      out.push_back (WriteGnuplot (opt.outDir, stem + "_flows", stem + "_flows.dat",
                                   "Per-flow throughput, varying wired delay",
                                   "flow", "throughput (Mbps)",
                                   {{8, "FCWA block", "points"},
                                    {7, "BS/(n_up+n_down)", "points"}},
                                   0));
    }
  return out;
}

std::vector<ScenarioSpec>
EqualLdCases (std::uint32_t b)
{
  std::vector<ScenarioSpec> cases;
  if (b == 1)
    {
      for (std::uint32_t n = 1; n <= 8; ++n)
        {
          ScenarioSpec s = CatalogueScenario ("fig5_equal_ld");
          s.flows[0].count = n;
          s.flows[1].count = n;
          cases.push_back (s);
        }
      return cases;
    }
  for (std::uint32_t nDown : {5u, 10u, 15u})
    {
      for (std::uint32_t nUp : {5u, 10u, 15u})
        {
          ScenarioSpec s = CatalogueScenario ("fig8_delayed_ack");
          s.flows[0].count = nUp;
          s.flows[1].count = nDown;
          cases.push_back (s);
        }
    }
  return cases;
}

Paths
Fig9To13 (const ReplicateOptions &opt)
{
  Plan plan (opt);
  const std::vector<std::uint32_t> ups{3, 5, 10};
  const std::vector<std::uint32_t> downs{5, 10, 15, 20, 25, 30};
  const std::vector<double> pers{0.0, 0.01};
  const std::vector<ControlBlock> blocks{ControlBlock::None, ControlBlock::Fcwa,
                                         ControlBlock::Accf};
  std::map<std::tuple<double, std::uint32_t, std::uint32_t, int>, std::size_t> h;
  for (double per : pers)
    for (auto nUp : ups)
      for (auto nDown : downs)
        for (ControlBlock b : blocks)
          h[{per, nUp, nDown, static_cast<int> (b)}] = plan.Add (AccfGrid (nUp, nDown, per, b));
  auto staggeredNone = plan.Add (WithBlock (CatalogueScenario ("fig11_delayed_ack_staggered"),
                                            ControlBlock::None));
  auto staggeredAccf = plan.Add (CatalogueScenario ("fig11_delayed_ack_staggered"));
  plan.Run ();

  Paths out;
  Table grid ({"per", "n_up", "n_down", "control_block", "jain", "uplink_mbps",
               "downlink_mbps", "total_mbps"});
  for (double per : pers)
    for (auto nUp : ups)
      {
        Table dat ({"n_down", "jain_none", "jain_fcwa", "jain_accf", "up_none",
                    "down_none", "total_none", "up_fcwa", "down_fcwa", "total_fcwa",
                    "up_accf", "down_accf", "total_accf"});
        for (auto nDown : downs)
          {
            std::vector<RunSummary> s;
            for (ControlBlock b : blocks)
              {
                s.push_back (Summarize (plan[h.at ({per, nUp, nDown, static_cast<int> (b)})]));
                grid.Row () << per << nUp << nDown << ToString (b) << s.back ().jain
                            << Mbps (s.back ().uplinkBps) << Mbps (s.back ().downlinkBps)
                            << Mbps (s.back ().totalBps);
              }
            dat.Row () << nDown << s[0].jain << s[1].jain << s[2].jain;
            for (const RunSummary &x : s)
              dat << Mbps (x.uplinkBps) << Mbps (x.downlinkBps) << Mbps (x.totalBps);
          }
        std::string stem = "fig9_13_per" + FormatDouble (per) + "_up" + std::to_string (nUp);
        out.push_back (dat.WriteDat (opt.outDir / (stem + ".dat")));
        out.push_back (WriteGnuplot (opt.outDir, stem, stem + ".dat",
                                     std::to_string (nUp) + " uplink flows, PER "
                                         + FormatDouble (per),
                                     "downlink flows", "Jain index / Mbps",
                                     {{2, "f DCF"}, {3, "f FCWA"}, {4, "f ACCF"},
                                      {7, "total DCF"}, {13, "total ACCF"}}));
      }
  out.push_back (grid.WriteCsv (opt.outDir / "fig9_13_grid.csv"));
  Append (out, WriteRunArtifacts (plan[staggeredNone], opt.outDir, "fig11_none"));
  Append (out, WriteRunArtifacts (plan[staggeredAccf], opt.outDir, "fig11_accf"));
  return out;
}

Paths
Fig14To15 (const ReplicateOptions &opt)
{
  Plan plan (opt);
  const std::vector<std::uint32_t> sizes{2, 4, 6, 8, 10};
  std::vector<std::pair<std::size_t, std::size_t>> h;
  for (auto n : sizes)
    {
      ScenarioSpec s = MixedTraffic (n);
      h.emplace_back (plan.Add (WithBlock (s, ControlBlock::None)), plan.Add (s));
    }
  plan.Run ();
  Table t ({"per_direction", "jain_none", "mean_plr_none", "max_plr_none",
            "total_none_mbps", "jain_accf", "mean_plr_accf", "max_plr_accf",
            "total_accf_mbps"});
  for (std::size_t i = 0; i < sizes.size (); ++i)
    {
      RunSummary a = Summarize (plan[h[i].first]);
      RunSummary b = Summarize (plan[h[i].second]);
      t.Row () << sizes[i] << a.jain << a.meanPlr << a.maxPlr << Mbps (a.totalBps)
               << b.jain << b.meanPlr << b.maxPlr << Mbps (b.totalBps);
    }
  return {t.WriteCsv (opt.outDir / "fig14_15.csv"), t.WriteDat (opt.outDir / "fig14_15.dat"),
          WriteGnuplot (opt.outDir, "fig14_15", "fig14_15.dat",
                        "FTP fairness and Telnet loss", "stations per direction",
                        "f / PLR / Mbps",
                        {{2, "f DCF"}, {6, "f ACCF"}, {3, "PLR DCF"}, {7, "PLR ACCF"}})};
}

Paths
Fig16 (const ReplicateOptions &opt)
{
  Plan plan (opt);
  ScenarioSpec s = CatalogueScenario ("fig16_short_lived");
  auto none = plan.Add (WithBlock (s, ControlBlock::None));
  auto accf = plan.Add (s);
  plan.Run ();
  Table t ({"short_flow", "direction", "start", "completion_none", "completion_accf"});
  std::uint32_t k = 0;
  const RunReport &a = plan[none];
  const RunReport &b = plan[accf];
  for (std::size_t i = 0; i < a.flows.size (); ++i)
    {
      if (a.flows[i].spec.kind != FlowKind::Short)
        continue;
      auto val = [] (const std::optional<double> &c) { return c ? *c : std::nan (""); };
      t.Row () << ++k << ToString (a.flows[i].spec.direction) << a.flows[i].spec.start
               << val (a.flows[i].completionTime) << val (b.flows[i].completionTime);
    }
  return {t.WriteCsv (opt.outDir / "fig16.csv"), t.WriteDat (opt.outDir / "fig16.dat"),
          WriteGnuplot (opt.outDir, "fig16", "fig16.dat",
                        "Short-lived flow completion time", "short flow",
                        "duration (s)",
                        {{4, "DCF", "points"}, {5, "ACCF", "points"}})};
}

Paths
Fig17To18 (const ReplicateOptions &opt)
{
  Plan plan (opt);
  const std::vector<std::uint32_t> counts{8, 16, 24};
  const std::vector<double> lds{0.0, 0.025, 0.05};
  std::vector<std::pair<std::size_t, std::size_t>> h;
  for (double ld : lds)
    for (auto n : counts)
      {
        ScenarioSpec s = WindowMix (n, ld);
        h.emplace_back (plan.Add (WithBlock (s, ControlBlock::None)), plan.Add (s));
      }
  plan.Run ();
  Table t ({"ld", "flows", "jain_none", "jain_accf", "total_none_mbps",
            "total_accf_mbps"});
  std::size_t i = 0;
  for (double ld : lds)
    for (auto n : counts)
      {
        RunSummary a = Summarize (plan[h[i].first]);
        RunSummary b = Summarize (plan[h[i].second]);
        t.Row () << ld << n << a.jain << b.jain << Mbps (a.totalBps) << Mbps (b.totalBps);
        ++i;
      }
  return {t.WriteCsv (opt.outDir / "fig17_18.csv"), t.WriteDat (opt.outDir / "fig17_18.dat"),
          WriteGnuplot (opt.outDir, "fig17_18", "fig17_18.dat",
                        "Mixed advertised windows", "scenario", "f / Mbps",
                        {{3, "f DCF"}, {4, "f ACCF"}, {5, "total DCF"}, {6, "total ACCF"}},
                        0)};
}

} // namespace

std::vector<RunReport>
RunBatch (const std::vector<Job> &jobs, unsigned workers)
{
  std::vector<RunReport> results (jobs.size ());
  std::vector<std::exception_ptr> errors (jobs.size ());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size (); i = next++)
      {
        try
          {
            results[i] = RunScenario (jobs[i].spec, jobs[i].seed);
          }
        catch (...)
          {
            errors[i] = std::current_exception ();
          }
      }
  };
  unsigned n = std::max (1u, std::min<unsigned> (workers, static_cast<unsigned> (jobs.size ())));
  if (n <= 1)
    {
      work ();
    }
  else
    {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < n; ++t)
        {
          pool.emplace_back (work);
        }
      for (std::thread &t : pool)
        {
          t.join ();
        }
    }
  for (const auto &e : errors)
    {
      if (e)
        std::rethrow_exception (e);
    }
  return results;
}

RunSummary
Summarize (const RunReport &report)
{
  RunSummary s;
  FairnessReport fr = MixedFairness (report);
  s.jain = fr.jainIndex;
  s.maxPlr = fr.maxPlr;
  for (double p : fr.nonsaturatedPlr)
    {
      s.meanPlr += p;
    }
  if (!fr.nonsaturatedPlr.empty ())
    {
      s.meanPlr /= static_cast<double> (fr.nonsaturatedPlr.size ());
    }
  for (const FlowReport &f : report.flows)
    {
      (f.spec.direction == Direction::Up ? s.uplinkBps : s.downlinkBps) += f.throughput;
    }
  s.totalBps = s.uplinkBps + s.downlinkBps;
  s.apDropRatio = report.SteadyApDropRatio ();
  s.shortFlows = fr.completionTimes.size ();
  for (const auto &c : fr.completionTimes)
    {
      if (c)
        {
          ++s.shortCompleted;
          s.maxCompletion = std::max (s.maxCompletion, *c);
        }
    }
  return s;
}

double
WindowThroughput (const FlowReport &flow, double bin, double from, double to)
{
  if (!(bin > 0) || !(to > from))
    {
      throw Error (ErrorCode::InvalidArgument, "empty throughput window");
    }
  auto first = static_cast<std::size_t> (std::llround (from / bin));
  auto last = std::min<std::size_t> (static_cast<std::size_t> (std::llround (to / bin)),
                                     flow.binBytes.size ());
  std::uint64_t bytes = 0;
  for (std::size_t i = first; i < last; ++i)
    {
      bytes += flow.binBytes[i];
    }
  double span = static_cast<double> (last > first ? last - first : 0) * bin;
  return span > 0 ? 8.0 * static_cast<double> (bytes) / span : 0.0;
}

std::vector<fs::path>
WriteRunArtifacts (const RunReport &report, const fs::path &dir, const std::string &stem)
{
  EnsureDir (dir);
  std::vector<fs::path> out;
  auto emit = [&] (const std::string &suffix, auto &&writer) {
    fs::path p = dir / (stem + suffix);
    auto os = OpenOut (p);
    writer (os);
    out.push_back (p);
  };
  emit ("_flows.csv", [&] (std::ostream &os) { WriteFlowsCsv (os, report); });
  emit ("_series.csv", [&] (std::ostream &os) { WriteSeriesCsv (os, report); });
  emit ("_fairness.csv", [&] (std::ostream &os) { WriteFairnessCsv (os, report); });

  std::vector<std::string> header{"time"};
  std::vector<Curve> curves;
  for (std::size_t i = 0; i < report.flows.size (); ++i)
    {
      const FlowSpec &f = report.flows[i].spec;
      header.push_back ("flow" + std::to_string (f.id));
      curves.push_back ({static_cast<int> (i) + 2,
                         "flow " + std::to_string (f.id + 1) + " (" + ToString (f.direction) + ")",
                         "lines"});
    }
  Table series (header);
  std::size_t bins = report.flows.empty () ? 0 : report.flows.front ().binBytes.size ();
  for (std::size_t b = 0; b < bins; ++b)
    {
      series.Row () << static_cast<double> (b) * report.bin;
      for (const FlowReport &f : report.flows)
        {
          series << Mbps (8.0 * static_cast<double> (f.binBytes[b]) / report.bin);
        }
    }
  out.push_back (series.WriteDat (dir / (stem + "_series.dat")));
  out.push_back (WriteGnuplot (dir, stem + "_series", stem + "_series.dat",
                               report.scenario + " (seed " + std::to_string (report.seed) + ")",
                               "time (s)", "throughput (Mbps)", curves));

  if (!report.fcwaLog.empty ())
    {
      Table t ({"time", "flow", "original", "advertised", "w_lim", "ld", "b",
                "n_up", "n_down"});
      for (const FcwaDecision &d : report.fcwaLog)
        {
          t.Row () << d.time << d.flowId << d.original << d.advertised << d.wLim
                   << d.ld << d.b << d.nUp << d.nDown;
        }
      out.push_back (t.WriteCsv (dir / (stem + "_fcwa.csv")));
    }
  if (!report.accfLog.empty ())
    {
      Table t ({"time", "flow", "num_cum", "t_buf", "d", "branch"});
      for (const AccfLogEntry &e : report.accfLog)
        {
          t.Row () << e.time << e.flowId << e.numCum << e.tBuf << e.d << ToString (e.branch);
        }
      out.push_back (t.WriteCsv (dir / (stem + "_accf.csv")));
    }
  return out;
}

SweepSpec
SweepSpec::Parse (std::string_view text)
{
  SweepSpec sweep;
  std::string rest;
  int lineNo = 0;
  while (!text.empty ())
    {
      auto nl = text.find ('\n');
      std::string line (text.substr (0, nl));
      text.remove_prefix (nl == std::string_view::npos ? text.size () : nl + 1);
      ++lineNo;
      std::string code = line.substr (0, line.find ('#'));
      auto first = code.find_first_not_of (" \t\r");
      if (first != std::string::npos && code.compare (first, 6, "sweep.") == 0)
        {
          auto eq = code.find ('=');
          if (eq == std::string::npos)
            {
              throw Error (ErrorCode::Parse,
                           "line " + std::to_string (lineNo) + ": expected 'sweep.key = v1, v2'");
            }
          SweepAxis axis;
          std::string key = code.substr (first + 6, eq - first - 6);
          key.erase (key.find_last_not_of (" \t") + 1);
          axis.key = key;
          std::stringstream values (code.substr (eq + 1));
          for (std::string v; std::getline (values, v, ',');)
            {
              auto a = v.find_first_not_of (" \t\r");
              auto b = v.find_last_not_of (" \t\r");
              if (a != std::string::npos)
                axis.values.push_back (v.substr (a, b - a + 1));
            }
          if (axis.key.empty () || axis.values.empty ())
            {
              throw Error (ErrorCode::Parse,
                           "line " + std::to_string (lineNo) + ": empty sweep axis");
            }
          sweep.axes.push_back (std::move (axis));
          rest += '\n'; // keep line numbers of the scenario part
          continue;
        }
      rest += line;
      rest += '\n';
    }
  sweep.base = ScenarioSpec::Parse (rest);
  return sweep;
}

SweepSpec
SweepSpec::ParseFile (const std::string &path)
{
  std::ifstream in (path);
  if (!in)
    {
      throw Error (ErrorCode::Io, "cannot read sweep file " + path);
    }
  std::ostringstream ss;
  ss << in.rdbuf ();
  try
    {
      return Parse (ss.str ());
    }
  catch (const Error &e)
    {
      throw Error (e.Code (), path + ": " + e.what ());
    }
}

std::vector<std::vector<std::pair<std::string, std::string>>>
SweepSpec::Points () const
{
  std::vector<std::vector<std::pair<std::string, std::string>>> points{{}};
  for (const SweepAxis &axis : axes)
    {
      std::vector<std::vector<std::pair<std::string, std::string>>> next;
      for (const auto &p : points)
        {
          for (const std::string &v : axis.values)
            {
              auto q = p;
              q.emplace_back (axis.key, v);
              next.push_back (std::move (q));
            }
        }
      points = std::move (next);
    }
  return points;
}

std::vector<fs::path>
RunSweep (const SweepSpec &sweep, const std::vector<std::uint64_t> &seedList,
          unsigned workers, const fs::path &dir)
{
  std::vector<std::uint64_t> seeds = seedList.empty () ? sweep.base.seeds : seedList;
  std::sort (seeds.begin (), seeds.end ());
  seeds.erase (std::unique (seeds.begin (), seeds.end ()), seeds.end ());
  if (seeds.empty ())
    {
      throw Error (ErrorCode::Validation, "sweep needs at least one seed");
    }
  auto points = sweep.Points ();
  std::vector<Job> jobs;
  for (const auto &point : points)
    {
      ScenarioSpec s = sweep.base;
      for (const auto &[k, v] : point)
        {
          s.Set (k, v);
        }
      s.Validate ();
      for (std::uint64_t seed : seeds)
        {
          jobs.push_back ({s, seed});
        }
    }
  EnsureDir (dir);
  std::vector<RunReport> reports = RunBatch (jobs, workers);

  std::vector<std::string> keys;
  for (const SweepAxis &a : sweep.axes)
    {
      keys.push_back (a.key);
    }
  auto header = [&] (std::vector<std::string> tail) {
    std::vector<std::string> h{"point"};
    h.insert (h.end (), keys.begin (), keys.end ());
    h.insert (h.end (), tail.begin (), tail.end ());
    return h;
  };
  Table runs (header ({"seed", "jain", "max_plr", "uplink_bps", "downlink_bps",
                       "total_bps", "ap_drop_ratio", "short_completed",
                       "max_completion"}));
  Table agg (header ({"seeds", "jain_mean", "jain_stderr", "total_bps_mean",
                      "total_bps_stderr", "uplink_bps_mean", "uplink_bps_stderr",
                      "downlink_bps_mean", "downlink_bps_stderr", "max_plr_mean",
                      "ap_drop_ratio_mean"}));
  std::size_t k = 0;
  for (std::size_t p = 0; p < points.size (); ++p)
    {
      std::vector<double> jain, total, up, down, plr, drop;
      for (std::uint64_t seed : seeds)
        {
          RunSummary s = Summarize (reports[k++]);
          runs.Row () << static_cast<std::uint64_t> (p);
          for (const auto &kv : points[p])
            runs << kv.second;
          runs << seed << s.jain << s.maxPlr << s.uplinkBps << s.downlinkBps
               << s.totalBps << s.apDropRatio << static_cast<std::uint64_t> (s.shortCompleted)
               << s.maxCompletion;
          jain.push_back (s.jain);
          total.push_back (s.totalBps);
          up.push_back (s.uplinkBps);
          down.push_back (s.downlinkBps);
          plr.push_back (s.maxPlr);
          drop.push_back (s.apDropRatio);
        }
      agg.Row () << static_cast<std::uint64_t> (p);
      for (const auto &kv : points[p])
        agg << kv.second;
      Stats j = MeanStderr (jain), t = MeanStderr (total), u = MeanStderr (up),
            d = MeanStderr (down);
      agg << static_cast<std::uint64_t> (seeds.size ()) << j.mean << j.stderrMean
          << t.mean << t.stderrMean << u.mean << u.stderrMean << d.mean << d.stderrMean
          << MeanStderr (plr).mean << MeanStderr (drop).mean;
    }
  return {runs.WriteCsv (dir / "sweep_runs.csv"), agg.WriteCsv (dir / "sweep.csv")};
}

const std::vector<std::string> &
FigureIds ()
{
  static const std::vector<std::string> ids{
      "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8",
      "fig9..13", "fig14..15", "fig16", "fig17..18"};
  return ids;
}

std::string
CanonicalFigureId (std::string_view id)
{
  for (const std::string &f : FigureIds ())
    {
      if (id == f)
        return f;
    }
  static const std::map<std::string, std::string, std::less<>> aliases{
      {"fig9", "fig9..13"},   {"fig10", "fig9..13"}, {"fig11", "fig9..13"},
      {"fig12", "fig9..13"},  {"fig13", "fig9..13"}, {"fig14", "fig14..15"},
      {"fig15", "fig14..15"}, {"fig17", "fig17..18"}, {"fig18", "fig17..18"}};
  auto it = aliases.find (id);
  if (it == aliases.end ())
    {
      std::string known;
      for (const std::string &f : FigureIds ())
        known += (known.empty () ? "" : ", ") + f;
      throw Error (ErrorCode::InvalidArgument,
                   "unknown figure id '" + std::string (id) + "' (known: " + known + ")");
    }
  return it->second;
}

std::vector<fs::path>
Replicate (std::string_view figureId, const ReplicateOptions &options)
{
  std::string id = CanonicalFigureId (figureId);
  EnsureDir (options.outDir);
  if (id == "fig2")
    return PerFlowBars ("fig2", "fig2_downlink_only", "15 downlink flows", options);
  if (id == "fig3")
    return PerFlowBars ("fig3", "fig3_uplink_only", "15 uplink flows", options);
  if (id == "fig4")
    return Fig4 (options);
  if (id == "fig5")
    return WindowLimitFigure ("fig5", EqualLdCases (1), 2, 2, options);
  if (id == "fig6")
    return ThroughputFigure ("fig6", EqualLdCases (1), options, false);
  if (id == "fig7")
    {
      std::vector<ScenarioSpec> cases;
      for (std::uint32_t n : {2u, 4u, 6u, 8u})
        cases.push_back (VaryingLd (n));
      return ThroughputFigure ("fig7", cases, options, true);
    }
  if (id == "fig8")
    {
      Paths out = WindowLimitFigure ("fig8", EqualLdCases (2), 1, 1, options);
      Append (out, ThroughputFigure ("fig8_throughput", EqualLdCases (2), options, false));
      return out;
    }
  if (id == "fig9..13")
    return Fig9To13 (options);
  if (id == "fig14..15")
    return Fig14To15 (options);
  if (id == "fig16")
    return Fig16 (options);
  return Fig17To18 (options);
}

const std::vector<std::string> &
CatalogueScenarioNames ()
{
  static const std::vector<std::string> names{
      "fig2_downlink_only", "fig3_uplink_only",  "fig4_up_down",
      "fig5_equal_ld",      "fig7_varying_ld",   "fig8_delayed_ack",
      "fig9_accf_grid",     "fig11_delayed_ack_staggered",
      "fig14_mixed_traffic", "fig16_short_lived", "fig17_window_mix"};
  return names;
}

ScenarioSpec
CatalogueScenario (std::string_view name)
{
  ScenarioSpec s;
  if (name == "fig2_downlink_only")
    s = UpDown ("", 0, 15, 0.010);
  else if (name == "fig3_uplink_only")
    s = UpDown ("", 15, 0, 0.010);
  else if (name == "fig4_up_down")
    s = UpDown ("", 2, 10, 0.010);
  else if (name == "fig5_equal_ld")
    {
      s = UpDown ("", 5, 5, 0.050);
      s.duration = 150;
    }
  else if (name == "fig7_varying_ld")
    {
      s = VaryingLd (4);
      s.controlBlock = ControlBlock::Fcwa;
      s = WithWindow (s, 1000);
    }
  else if (name == "fig8_delayed_ack")
    {
      s = UpDown ("", 5, 5, 0.050);
      s.b = 2;
      s.duration = 150;
    }
  else if (name == "fig9_accf_grid")
    s = AccfGrid (3, 5, 0.0, ControlBlock::Accf);
  else if (name == "fig11_delayed_ack_staggered")
    {
      s = UpDown ("", 10, 5, 0.010);
      for (FlowGroup &g : s.flows)
        {
          g.ldSchedule = LdSchedule::Arithmetic;
          g.ldStep = 0.002;
          g.startStep = g.direction == Direction::Down ? 10 : 20;
        }
      s.b = 2;
      s.controlBlock = ControlBlock::Accf;
    }
  else if (name == "fig14_mixed_traffic")
    s = MixedTraffic (4);
  else if (name == "fig16_short_lived")
    {
      s = UpDown ("", 5, 10, 0.010);
      for (Direction d : {Direction::Up, Direction::Down})
        {
          FlowGroup g = Group (d, 15, 0.010);
          g.kind = FlowKind::Short;
          g.start = d == Direction::Up ? 20 : 95;
          g.startStep = 5;
          s.flows.push_back (g);
        }
      for (FlowGroup &g : s.flows)
        {
          g.ldSchedule = LdSchedule::Arithmetic;
          g.ldStep = 0.002;
        }
      s.controlBlock = ControlBlock::Accf;
    }
  else if (name == "fig17_window_mix")
    s = WindowMix (16, 0.025);
  else
    throw Error (ErrorCode::InvalidArgument, "unknown catalogue scenario '" + std::string (name) + "'");
  s.name = std::string (name);
  return s;
}

} // namespace wlantcp

#ifndef WLANTCP_EXPERIMENTS_H
#define WLANTCP_EXPERIMENTS_H

// Batch execution, run artifacts, parameter sweeps and the figure catalogue.

#include "wlantcp/scenario.h"
#include "wlantcp/simulation.h"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wlantcp {

struct Job
{
  ScenarioSpec spec;
  std::uint64_t seed = 1;
};

/// Runs every job on a pool of `workers` threads. Results come back in job
/// order whatever the scheduling; if any job throws, the error of the
/// lowest-indexed failing job is rethrown after the pool drains.
std::vector<RunReport> RunBatch (const std::vector<Job> &jobs, unsigned workers);

/// Headline numbers of one run.
struct RunSummary
{
  double jain = 1.0;     // over saturated (FTP) flows
  double maxPlr = 0;     // over nonsaturated flows
  double meanPlr = 0;
  double uplinkBps = 0;
  double downlinkBps = 0;
  double totalBps = 0;
  double apDropRatio = 0; // steady state
  std::size_t shortFlows = 0;
  std::size_t shortCompleted = 0;
  double maxCompletion = 0; // over completed short flows
};

RunSummary Summarize (const RunReport &report);

/// Mean goodput of a flow over [from, to) seconds from its base bins.
double WindowThroughput (const FlowReport &flow, double bin, double from,
                         double to);

/// <stem>_flows.csv, _series.csv, _fairness.csv, _series.dat and _series.gp,
/// plus _fcwa.csv / _accf.csv when the run carries decision logs. Returns
/// the paths written.
std::vector<std::filesystem::path>
WriteRunArtifacts (const RunReport &report, const std::filesystem::path &dir,
                   const std::string &stem);

struct SweepAxis
{
  std::string key;
  std::vector<std::string> values;
};

/// A scenario plus `sweep.<key> = v1, v2, ...` lines; the grid is the
/// cartesian product of the axes in file order.
struct SweepSpec
{
  ScenarioSpec base;
  std::vector<SweepAxis> axes;

  static SweepSpec Parse (std::string_view text);
  static SweepSpec ParseFile (const std::string &path);

  /// Key/value assignments of each grid point, last axis varying fastest.
  std::vector<std::vector<std::pair<std::string, std::string>>> Points () const;
};

/// Runs every (point, seed) pair and writes sweep_runs.csv (one row per run)
/// and sweep.csv (per point mean and standard error over seeds). Rows are
/// ordered by point, then seed, independent of execution order.
std::vector<std::filesystem::path>
RunSweep (const SweepSpec &sweep, const std::vector<std::uint64_t> &seeds,
          unsigned workers, const std::filesystem::path &dir);

struct ReplicateOptions
{
  std::filesystem::path outDir = ".";
  unsigned workers = 1;
  std::uint64_t seed = 1;
  std::optional<double> duration; // overrides every scenario's duration
};

/// Ids accepted by Replicate, e.g. "fig2", "fig9..13".
const std::vector<std::string> &FigureIds ();

/// Resolves an id or an alias inside a range ("fig11" -> "fig9..13").
/// Throws InvalidArgument for unknown ids.
std::string CanonicalFigureId (std::string_view id);

/// Runs the scenario suite behind a figure and writes its CSV, gnuplot data
/// and script. Returns the paths written.
std::vector<std::filesystem::path> Replicate (std::string_view figureId,
                                              const ReplicateOptions &options);

/// Named base scenarios of the catalogue (the files under scenarios/ are
/// their serialized form). Throws InvalidArgument for unknown names.
ScenarioSpec CatalogueScenario (std::string_view name);
const std::vector<std::string> &CatalogueScenarioNames ();

} // namespace wlantcp

#endif

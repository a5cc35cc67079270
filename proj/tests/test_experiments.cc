#include "wlantcp/experiments.h"
#include "wlantcp/metrics.h"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wlantcp;

namespace {

std::string
Slurp (const std::filesystem::path &p)
{
  std::ifstream in (p);
  std::stringstream ss;
  ss << in.rdbuf ();
  return ss.str ();
}

std::string
Csv (const RunReport &r)
{
  std::ostringstream os;
  WriteFlowsCsv (os, r);
  return os.str ();
}

std::filesystem::path
TempDir (const std::string &name)
{
  auto p = std::filesystem::temp_directory_path () / ("wlantcp_test_" + name);
  std::filesystem::remove_all (p);
  std::filesystem::create_directories (p);
  return p;
}

const char *kSweep = R"(
sweep.control_block = none, accf
sweep.flow[0].count = 1, 2
name = small_sweep
duration = 15
warmup = 5
flow {
  direction = up
  count = 1
}
flow {
  count = 2
}
)";

} // namespace

TEST_CASE ("batch results keep job order for any worker count")
{
  ScenarioSpec s = CatalogueScenario ("fig4_up_down");
  s.duration = 10;
  s.warmup = 2;
  std::vector<Job> jobs;
  for (std::uint64_t seed : {5, 1, 3, 2})
    jobs.push_back ({s, seed});
  auto serial = RunBatch (jobs, 1);
  auto parallel = RunBatch (jobs, 3);
  REQUIRE (serial.size () == 4);
  for (std::size_t i = 0; i < jobs.size (); ++i)
    {
      CHECK (serial[i].seed == jobs[i].seed);
      CHECK (Csv (serial[i]) == Csv (parallel[i]));
    }
}

TEST_CASE ("batch errors surface")
{
  ScenarioSpec bad = CatalogueScenario ("fig2_downlink_only");
  bad.duration = -1;
  CHECK_THROWS_AS (RunBatch ({{bad, 1}}, 2), Error);
}

TEST_CASE ("sweep output does not depend on seed order or workers")
{
  SweepSpec sweep = SweepSpec::Parse (kSweep);
  REQUIRE (sweep.axes.size () == 2);
  auto points = sweep.Points ();
  REQUIRE (points.size () == 4);
  CHECK (points[1][0].second == "none");
  CHECK (points[1][1].second == "2");

  auto a = TempDir ("sweep_a");
  auto b = TempDir ("sweep_b");
  RunSweep (sweep, {1, 2}, 1, a);
  RunSweep (sweep, {2, 1}, 2, b);
  for (const char *f : {"sweep.csv", "sweep_runs.csv"})
    {
      CAPTURE (f);
      std::string x = Slurp (a / f);
      CHECK_FALSE (x.empty ());
      CHECK (x == Slurp (b / f));
    }
  std::string summary = Slurp (a / "sweep.csv");
  CHECK (std::count (summary.begin (), summary.end (), '\n') == 5);
}

TEST_CASE ("figure ids and aliases")
{
  CHECK_FALSE (FigureIds ().empty ());
  for (const std::string &id : FigureIds ())
    CHECK (CanonicalFigureId (id) == id);
  CHECK (CanonicalFigureId ("fig11") == "fig9..13");
  CHECK_THROWS_AS (CanonicalFigureId ("fig99"), Error);
  CHECK_THROWS_AS (CatalogueScenario ("nope"), Error);
}

TEST_CASE ("replicating a figure writes its data and script")
{
  ReplicateOptions opt;
  opt.outDir = TempDir ("replicate");
  opt.duration = 10;
  auto written = Replicate ("fig2", opt);
  CHECK_FALSE (written.empty ());
  bool csv = false, gp = false;
  for (const auto &p : written)
    {
      CHECK (std::filesystem::exists (p));
      csv = csv || p.extension () == ".csv";
      gp = gp || p.extension () == ".gp";
    }
  CHECK (csv);
  CHECK (gp);
}

TEST_CASE ("run artifacts")
{
  ScenarioSpec s = CatalogueScenario ("fig9_accf_grid");
  s.duration = 10;
  s.warmup = 2;
  s.accfLog = true;
  auto dir = TempDir ("artifacts");
  auto files = WriteRunArtifacts (RunScenario (s, 1), dir, "grid");
  std::vector<std::string> names;
  for (const auto &p : files)
    names.push_back (p.filename ().string ());
  for (const char *n : {"grid_flows.csv", "grid_series.csv", "grid_fairness.csv",
                        "grid_series.dat", "grid_series.gp", "grid_accf.csv"})
    CHECK (std::find (names.begin (), names.end (), n) != names.end ());
}

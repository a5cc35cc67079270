#include "wlantcp/metrics.h"
#include "wlantcp/simulation.h"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace wlantcp;

namespace {

FlowReport
Flow (std::uint32_t id, FlowKind kind, double throughput, double plr)
{
  FlowReport f;
  f.spec.id = id;
  f.spec.kind = kind;
  f.throughput = throughput;
  f.plr = plr;
  f.binBytes = {1000, 2000, 3000, 4000, 5000};
  return f;
}

RunReport
Synthetic ()
{
  RunReport r;
  r.scenario = "synthetic";
  r.bin = 1.0;
  r.flows = {Flow (0, FlowKind::Ftp, 1e6, 0.01), Flow (1, FlowKind::Ftp, 3e6, 0.02),
             Flow (2, FlowKind::Telnet, 2e5, 0.0), Flow (3, FlowKind::Telnet, 2e5, 0.004)};
  r.flows.push_back (Flow (4, FlowKind::Short, 5e5, 0.0));
  r.flows.back ().completionTime = 3.5;
  return r;
}

std::string
HeaderOf (const std::string &csv)
{
  return csv.substr (0, csv.find ('\n'));
}

} // namespace

TEST_CASE ("jain index examples")
{
  CHECK (JainIndex ({5, 5, 5}) == doctest::Approx (1.0).epsilon (1e-15));
  CHECK (JainIndex ({1, 0, 0, 0}) == doctest::Approx (0.25).epsilon (1e-15));
  CHECK (JainIndex ({1, 2, 3}) == doctest::Approx (36.0 / 42.0).epsilon (1e-15));
  CHECK (JainIndex ({7}) == 1.0);
}

TEST_CASE ("jain index rejects bad input")
{
  auto code = [] (const std::vector<double> &x) {
    try
      {
        JainIndex (x);
      }
    catch (const Error &e)
      {
        return e.Code ();
      }
    return ErrorCode::Runtime;
  };
  CHECK (code ({}) == ErrorCode::InvalidArgument);
  CHECK (code ({0, 0}) == ErrorCode::InvalidArgument);
  CHECK (code ({1, -1}) == ErrorCode::InvalidArgument);
}

TEST_CASE ("jain index bounds and invariances")
{
  std::mt19937_64 rng (5);
  std::uniform_real_distribution<double> u (0.0, 1e7);
  std::uniform_int_distribution<int> len (1, 30);
  std::uniform_real_distribution<double> scale (1e-3, 1e3);
  for (int trial = 0; trial < 1000; ++trial)
    {
      std::vector<double> x (len (rng));
      for (double &v : x)
        v = u (rng);
      double j = JainIndex (x);
      CHECK (j >= 1.0 / x.size () - 1e-12);
      CHECK (j <= 1.0 + 1e-12);
      std::vector<double> scaled = x;
      double c = scale (rng);
      for (double &v : scaled)
        v *= c;
      CHECK (JainIndex (scaled) == doctest::Approx (j).epsilon (1e-12));
      std::shuffle (x.begin (), x.end (), rng);
      CHECK (JainIndex (x) == doctest::Approx (j).epsilon (1e-12));
    }
}

TEST_CASE ("mixed fairness splits saturated and nonsaturated flows")
{
  RunReport r = Synthetic ();
  FairnessReport fr = MixedFairness (r);
  CHECK (fr.saturatedFlowIds == std::vector<std::uint32_t>{0, 1});
  CHECK (fr.nonsaturatedFlowIds == std::vector<std::uint32_t>{2, 3, 4});
  CHECK (fr.jainIndex == doctest::Approx (16.0 / 20.0));
  CHECK (fr.maxPlr == doctest::Approx (0.004));
  CHECK_FALSE (fr.fairAccess);
  REQUIRE (fr.completionTimes.size () == 1);
  CHECK (*fr.completionTimes[0] == 3.5);

  FairnessReport relabelled = MixedFairness (r, {true, true, true, true, false});
  CHECK (relabelled.saturatedFlowIds.size () == 4);
  CHECK (relabelled.maxPlr == 0);

  r.flows[1].throughput = 1e6;
  r.flows[3].plr = 0;
  CHECK (MixedFairness (r).fairAccess);

  try
    {
      MixedFairness (r, std::vector<bool>{true});
      FAIL ("expected an error");
    }
  catch (const Error &e)
    {
      CHECK (e.Code () == ErrorCode::InvalidArgument);
    }
}

TEST_CASE ("throughput series re-binning")
{
  RunReport r = Synthetic ();
  auto one = ThroughputSeries (r, 1.0);
  auto two = ThroughputSeries (r, 2.0);
  REQUIRE (one.size () == r.flows.size ());
  CHECK (one[0] == std::vector<double>{8000, 16000, 24000, 32000, 40000});
  CHECK (two[0] == std::vector<double>{24000, 56000, 40000});
  double a = 0, b = 0;
  for (double v : one[0])
    a += v;
  for (double v : two[0])
    b += v;
  CHECK (a == b);
  CHECK_THROWS (ThroughputSeries (r, 1.5));
  CHECK_THROWS (ThroughputSeries (r, 0));
}

TEST_CASE ("a constant-rate flow has a flat series")
{
  RunReport r;
  FlowReport f = Flow (0, FlowKind::Ftp, 1, 0);
  f.binBytes.assign (20, 12500);
  r.flows = {f};
  auto series = ThroughputSeries (r, 5.0);
  CHECK (series[0].size () == 4);
  for (double v : series[0])
    CHECK (v == 8.0 * 12500 * 5);
}

TEST_CASE ("csv headers")
{
  RunReport r = Synthetic ();
  std::ostringstream flows, series, fairness;
  WriteFlowsCsv (flows, r);
  WriteSeriesCsv (series, r);
  WriteFairnessCsv (fairness, r);
  CHECK (HeaderOf (flows.str ()).rfind ("flow,direction,kind,ld,adv_window", 0) == 0);
  CHECK (HeaderOf (series.str ()) == "time,flow0,flow1,flow2,flow3,flow4");
  CHECK (HeaderOf (fairness.str ()).rfind ("scenario,seed,control_block,flows,jain_saturated", 0) == 0);
  std::string f = flows.str ();
  std::string t = series.str ();
  CHECK (std::count (f.begin (), f.end (), '\n') == 6);
  CHECK (std::count (t.begin (), t.end (), '\n') == 6);
}

TEST_CASE ("number formatting round-trips")
{
  std::mt19937_64 rng (3);
  std::uniform_real_distribution<double> u (-1e9, 1e9);
  for (int i = 0; i < 1000; ++i)
    {
      double v = u (rng) / (i + 1);
      CHECK (std::stod (FormatDouble (v)) == v);
    }
  CHECK (FormatDouble (0.1) == "0.1");
  CHECK (FormatDouble (42) == "42");
}

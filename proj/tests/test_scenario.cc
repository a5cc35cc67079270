#include "wlantcp/experiments.h"
#include "wlantcp/scenario.h"

#include <doctest.h>

#include <filesystem>

using namespace wlantcp;

namespace {

ErrorCode
CodeOf (auto &&fn)
{
  try
    {
      fn ();
    }
  catch (const Error &e)
    {
      return e.Code ();
    }
  FAIL ("expected an error");
  return ErrorCode::Runtime;
}

const char *kMinimal = R"(
# two groups
name = tiny
duration = 30
flow {
  direction = up
  count = 2
}
flow {
  count = 3   # downlink by default
  ld = 0.02
}
)";

} // namespace

TEST_CASE ("bundled scenario files match the catalogue")
{
  std::size_t seen = 0;
  for (const std::string &name : CatalogueScenarioNames ())
    {
      CAPTURE (name);
      std::filesystem::path p = std::filesystem::path (WLANTCP_SCENARIO_DIR) / (name + ".scn");
      REQUIRE (std::filesystem::exists (p));
      ScenarioSpec file = ScenarioSpec::ParseFile (p.string ());
      CHECK_NOTHROW (file.Validate ());
      CHECK (file.Serialize () == CatalogueScenario (name).Serialize ());
      ++seen;
    }
  CHECK (seen == 11);
}

TEST_CASE ("serialize then parse is the identity")
{
  for (const std::string &name : CatalogueScenarioNames ())
    {
      ScenarioSpec s = CatalogueScenario (name);
      std::string text = s.Serialize ();
      CHECK (ScenarioSpec::Parse (text).Serialize () == text);
    }
}

TEST_CASE ("parsing a minimal file fills defaults")
{
  ScenarioSpec s = ScenarioSpec::Parse (kMinimal);
  CHECK (s.name == "tiny");
  CHECK (s.duration == 30);
  CHECK (s.bsAp == 100);
  REQUIRE (s.flows.size () == 2);
  CHECK (s.flows[0].direction == Direction::Up);
  CHECK (s.flows[1].direction == Direction::Down);
  CHECK (s.flows[1].ld == 0.02);
  CHECK (s.CountFlows (Direction::Up) == 2);
  CHECK (s.CountFlows (Direction::Down) == 3);
  auto flows = s.ExpandFlows ();
  REQUIRE (flows.size () == 5);
  for (std::uint32_t i = 0; i < flows.size (); ++i)
    CHECK (flows[i].id == i);
  CHECK (flows[4].group == 1);
}

TEST_CASE ("errors carry their category")
{
  CHECK (CodeOf ([] { ScenarioSpec::Parse ("nonsense = 1\n"); }) == ErrorCode::Parse);
  CHECK (CodeOf ([] { ScenarioSpec::Parse ("duration = abc\n"); }) == ErrorCode::Parse);
  CHECK (CodeOf ([] { ScenarioSpec::Parse ("flow {\n count = 1\n"); }) == ErrorCode::Parse);
  CHECK (CodeOf ([] { ScenarioSpec::Parse ("flow {\n colour = red\n}\n"); }) == ErrorCode::Parse);
  CHECK (CodeOf ([] { ScenarioSpec::ParseFile ("/nonexistent/x.scn"); }) == ErrorCode::Io);

  ScenarioSpec s = ScenarioSpec::Parse (kMinimal);
  CHECK_NOTHROW (s.Validate ());
  auto broken = [&] (const char *key, const char *value) {
    ScenarioSpec t = s;
    t.Set (key, value);
    return CodeOf ([&] { t.Validate (); });
  };
  CHECK (broken ("duration", "0") == ErrorCode::Validation);
  CHECK (broken ("warmup", "30") == ErrorCode::Validation);
  CHECK (broken ("b", "0") == ErrorCode::Validation);
  CHECK (broken ("per", "1") == ErrorCode::Validation);
  CHECK (broken ("ack_size", "1500") == ErrorCode::Validation);
  CHECK (broken ("flow[0].count", "0") == ErrorCode::Validation);
  CHECK (broken ("flow[1].ld", "-0.1") == ErrorCode::Validation);
  CHECK (broken ("flow[1].start", "40") == ErrorCode::Validation);
  CHECK (CodeOf ([&] { s.Set ("flow[7].count", "1"); }) == ErrorCode::Parse);
  CHECK (CodeOf ([&] { s.Set ("flow[x].count", "1"); }) == ErrorCode::Parse);
}

TEST_CASE ("set addresses flow groups by index")
{
  ScenarioSpec s = ScenarioSpec::Parse (kMinimal);
  s.Set ("flow[1].count", "7");
  s.Set ("flow[0].adv_window", "12, 20");
  s.Set ("control_block", "accf");
  CHECK (s.flows[1].count == 7);
  CHECK (s.flows[0].advWindows == std::vector<std::uint32_t>{12, 20});
  CHECK (s.controlBlock == ControlBlock::Accf);
}

TEST_CASE ("wired delay schedules")
{
  ScenarioSpec s = ScenarioSpec::Parse (kMinimal);
  s.flows[0].count = 4;
  s.flows[0].ld = 0.001;
  s.flows[0].ldStep = 0.001;
  s.flows[0].ldSchedule = LdSchedule::Triangular;
  s.flows[1].count = 2;
  s.flows[1].ld = 0.001;
  s.flows[1].ldStep = 0.001;
  s.flows[1].ldSchedule = LdSchedule::Triangular;
  s.flows[1].ldIndexOffset = 4;
  auto f = s.ExpandFlows ();
  const double expected[] = {0.001, 0.003, 0.006, 0.010, 0.015, 0.021};
  for (std::size_t i = 0; i < 6; ++i)
    CHECK (f[i].ld == doctest::Approx (expected[i]).epsilon (1e-12));

  s.flows[0].ldSchedule = LdSchedule::Arithmetic;
  s.flows[0].ld = 0.010;
  s.flows[0].ldStep = 0.002;
  f = s.ExpandFlows ();
  CHECK (f[3].ld == doctest::Approx (0.016).epsilon (1e-12));

  s.flows[0].ldSchedule = LdSchedule::Constant;
  f = s.ExpandFlows ();
  CHECK (f[3].ld == 0.010);
}

TEST_CASE ("windows, rates and start times cycle within a group")
{
  ScenarioSpec s = ScenarioSpec::Parse (kMinimal);
  s.flows[1].count = 6;
  s.flows[1].advWindows = {12, 20, 42, 84};
  s.flows[1].start = 5;
  s.flows[1].startStep = 2.5;
  s.flows[1].telnetRates = {1e5, 2e5};
  auto f = s.ExpandFlows ();
  REQUIRE (f.size () == 8);
  CHECK (f[2].advWindow == 12);
  CHECK (f[6].advWindow == 12);
  CHECK (f[7].advWindow == 20);
  CHECK (f[2].start == 5);
  CHECK (f[7].start == 17.5);
  CHECK (f[3].telnetRate == 2e5);
  CHECK (f[4].telnetRate == 1e5);
}

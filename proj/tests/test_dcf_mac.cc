#include "wlantcp/dcf_mac.h"
#include "wlantcp/simulation.h"

#include <doctest.h>

#include <cmath>

using namespace wlantcp;

namespace {

Frame
RawFrame (std::uint32_t size)
{
  Frame f;
  f.kind = FrameKind::Raw;
  f.size = size;
  return f;
}

struct CountingListener : MacListener
{
  std::uint64_t delivered = 0;
  std::uint64_t retryDrops = 0;
  void OnDelivered (std::uint32_t, std::uint32_t, const Frame &) override { ++delivered; }
  void OnRetryDrop (std::uint32_t, const Frame &) override { ++retryDrops; }
};

} // namespace

TEST_CASE ("a lone saturated node never collides")
{
  MacTiming t;
  EventQueue ev;
  CountingListener l;
  DcfMac mac (ev, t, 0.0, 1, &l);
  mac.AddNode (NodeRole::AccessPoint, 10);
  mac.AddNode (NodeRole::Station, 10);
  mac.SetSaturated (0, RawFrame (1500), 1);
  const double horizon = 20.0;
  ev.RunUntil (SecondsToNs (horizon));
  const MacStats &s = mac.Node (0).stats;
  CHECK (s.collisions == 0);
  CHECK (s.attempts - s.successes <= 1); // one exchange may straddle the horizon
  CHECK (l.delivered == s.successes);
  // Mean backoff of a fresh draw from [0, cw_min] plus the exchange itself.
  double expected = t.cwMin / 2.0 * t.slotTime + t.FrameAirtime (1500);
  double gap = horizon / static_cast<double> (s.successes);
  CHECK (std::abs (gap - expected) / expected < 0.01);
}

TEST_CASE ("injected frame errors occur at the configured rate")
{
  MacTiming t;
  for (double per : {0.01, 0.1})
    {
      EventQueue ev;
      DcfMac mac (ev, t, per, 7, nullptr);
      mac.AddNode (NodeRole::AccessPoint, 10);
      mac.AddNode (NodeRole::Station, 10);
      mac.SetSaturated (0, RawFrame (1500), 1);
      while (mac.Node (0).stats.attempts < 100000)
        {
          ev.Step (ev.Now () + SecondsToNs (1.0));
        }
      const MacStats &s = mac.Node (0).stats;
      double rate = static_cast<double> (s.corruptions) / static_cast<double> (s.attempts);
      CHECK (std::abs (rate - per) <= 0.005);
    }
}

TEST_CASE ("two saturated stations collide as the backoff chain predicts")
{
  MacTiming t;
  CycleTimeMeasurement m = MeasureCycleTime (1500, 1500, t, 100000, 3);
  double model = SolveTwoStationContention (t).collisionProbability;
  CHECK (std::abs (m.collisionProbability - model) / model < 0.10);
}

TEST_CASE ("cycle time measurement")
{
  MacTiming t;
  CycleTimeMeasurement big = MeasureCycleTime (1500, 1500, t, 20000, 1);
  CycleTimeMeasurement small = MeasureCycleTime (40, 40, t, 20000, 1);
  CHECK (big.mean > small.mean);
  CycleTimeMeasurement again = MeasureCycleTime (1500, 1500, t, 20000, 1);
  CHECK (again.mean == big.mean);
  CHECK (again.cycles == big.cycles);
  CHECK (again.collisionProbability == big.collisionProbability);
}

TEST_CASE ("queue overflow is counted")
{
  MacTiming t;
  EventQueue ev;
  DcfMac mac (ev, t, 0.0, 1, nullptr);
  mac.AddNode (NodeRole::AccessPoint, 2);
  mac.AddNode (NodeRole::Station, 2);
  Frame f = RawFrame (1500);
  CHECK (mac.Enqueue (0, f, 1));
  CHECK (mac.Enqueue (0, f, 1));
  CHECK_FALSE (mac.Enqueue (0, f, 1));
  CHECK (mac.Node (0).stats.queueDrops == 1);
  CHECK (mac.QueueLength (0) == 2);
  ev.RunUntil (SecondsToNs (1.0));
  CHECK (mac.QueueLength (0) == 0);
  CHECK (mac.Node (0).stats.successes == 2);
}

TEST_CASE ("retry limit drops a frame that always fails")
{
  MacTiming t;
  EventQueue ev;
  CountingListener l;
  DcfMac mac (ev, t, 1.0 - 1e-12, 1, &l);
  mac.AddNode (NodeRole::AccessPoint, 5);
  mac.AddNode (NodeRole::Station, 5);
  mac.Enqueue (0, RawFrame (1500), 1);
  ev.RunUntil (SecondsToNs (5.0));
  CHECK (l.retryDrops == 1);
  CHECK (mac.Node (0).stats.attempts == t.retryLimit + 1);
  CHECK (l.delivered == 0);
}

TEST_CASE ("raw saturation shares are roughly equal")
{
  MacTiming t;
  SaturationResult r = RunSaturation (5, 1500, t, 0.0, 300000, 1);
  REQUIRE (r.successes.size () == 6);
  for (std::uint64_t s : r.successes)
    {
      double share = static_cast<double> (s) / static_cast<double> (r.total);
      CHECK (std::abs (share - 1.0 / 6) / (1.0 / 6) < 0.05);
    }
}

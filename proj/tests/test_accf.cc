#include "wlantcp/accf.h"

#include <doctest.h>

#include <map>
#include <random>

using namespace wlantcp;

namespace {

Frame
UpAck (std::uint32_t flow, std::int64_t ackNo, std::uint8_t flags = kFlagNone)
{
  Frame f;
  f.flowId = flow;
  f.direction = Direction::Up;
  f.kind = FrameKind::TcpAck;
  f.ackNo = ackNo;
  f.flags = flags;
  return f;
}

} // namespace

TEST_CASE ("gamma")
{
  AccfParams p;
  CHECK (Gamma (15, p) == 1.0);
  CHECK (Gamma (3, p) == 0.5);
  p.numThresh = 1;
  for (std::uint32_t n = 1; n < 50; ++n)
    CHECK (Gamma (n, p) == 1.0);
}

TEST_CASE ("buffering rule examples")
{
  AccfParams p;
  BufferingDecision d = DecideBuffering (5, 0.010, 0.020, std::nullopt, p);
  CHECK (d.branch == AccfBranch::Buffer);
  CHECK (d.d == doctest::Approx (0.040).epsilon (1e-12));
  CHECK (d.delay == doctest::Approx (0.040).epsilon (1e-12));

  d = DecideBuffering (12, 0.500, 0.010, 0.005, p);
  CHECK (d.d == doctest::Approx (-0.380).epsilon (1e-12));
  CHECK (d.branch == AccfBranch::BurstBuffer);
  CHECK (d.delay == doctest::Approx (0.010).epsilon (1e-12));

  d = DecideBuffering (12, 0.500, 0.010, 0.300, p);
  CHECK (d.branch == AccfBranch::ReleaseNow);

  d = DecideBuffering (3, 0.1, std::nullopt, 0.01, p);
  CHECK (d.branch == AccfBranch::NoReference);
}

TEST_CASE ("arrival buffers for D, timer releases, t_buf restarts")
{
  Accf accf (AccfParams{});
  accf.EnableLog (true);
  const TimeNs t0 = SecondsToNs (1.0);
  accf.Rates ().Set (100, Direction::Down, 0.020, t0);

  // First ACK: one packet, gamma 0.5, t_buf 0 -> held for 10 ms.
  AccfAction a = accf.OnAckArrival (UpAck (1, 10), t0);
  CHECK (a.branch == AccfBranch::Buffer);
  REQUIRE (a.deadline);
  CHECK (*a.deadline == t0 + SecondsToNs (0.010));
  CHECK_FALSE (a.release);

  auto released = accf.OnTimerExpire (1, *a.deadline);
  REQUIRE (released);
  CHECK (released->ackNo == 10);
  CHECK_FALSE (accf.Slot (1)->buffered);

  // Five packets acknowledged 10 ms after the last release:
  // D = 0.5 * 5 * 20 ms - 10 ms = 40 ms.
  const TimeNs t1 = *a.deadline + SecondsToNs (0.010);
  a = accf.OnAckArrival (UpAck (1, 15), t1);
  CHECK (a.branch == AccfBranch::Buffer);
  REQUIRE (a.deadline);
  CHECK (*a.deadline == t1 + SecondsToNs (0.040));
  CHECK (accf.Slot (1)->numCum == 5);

  // A newer ACK replaces the held one.
  a = accf.OnAckArrival (UpAck (1, 16), t1 + 1000);
  CHECK (accf.Counters ().replaced == 1);
  CHECK (accf.Slot (1)->buffered->ackNo == 16);
  released = accf.OnTimerExpire (1, *a.deadline);
  REQUIRE (released);
  CHECK (released->ackNo == 16);

  // Arrival right after a release sees t_buf = 0.
  accf.OnAckArrival (UpAck (1, 17), *a.deadline);
  CHECK (accf.Log ().back ().tBuf == 0);

  CHECK_FALSE (accf.OnTimerExpire (7, *a.deadline));
  CHECK (accf.Counters ().spuriousTimers == 1);
}

TEST_CASE ("flagged ACKs bypass with no delay")
{
  Accf accf (AccfParams{});
  accf.Rates ().Set (100, Direction::Down, 0.020, 0);
  accf.OnAckArrival (UpAck (1, 10), 0);
  Frame dup = UpAck (1, 10, kFlagDupAck);
  AccfAction a = accf.OnAckArrival (dup, 1000);
  CHECK (a.branch == AccfBranch::Bypass);
  REQUIRE (a.release);
  CHECK (a.release->ackNo == 10);
  CHECK (a.release->flags == kFlagDupAck);
  // The held ACK was no newer, so it is gone with its timer.
  CHECK_FALSE (accf.Slot (1)->buffered);
  CHECK_FALSE (a.deadline);
}

TEST_CASE ("no downlink reference releases at once")
{
  Accf accf (AccfParams{});
  AccfAction a = accf.OnAckArrival (UpAck (1, 10), 0);
  CHECK (a.branch == AccfBranch::NoReference);
  REQUIRE (a.release);
  CHECK (a.release->ackNo == 10);
}

TEST_CASE ("AvgDataInt cutoff mean")
{
  AccfParams p;
  RateEstimator r (p);
  r.Set (1, Direction::Down, 0.010, 0);
  r.Set (2, Direction::Down, 0.011, 0);
  r.Set (3, Direction::Down, 0.040, 0);
  r.Set (4, Direction::Up, 0.001, 0);
  REQUIRE (r.AvgDataInt (0));
  CHECK (*r.AvgDataInt (0) == doctest::Approx (0.0105).epsilon (1e-12));

  RateEstimator single (p);
  single.Set (1, Direction::Down, 0.033, 0);
  CHECK (*single.AvgDataInt (0) == doctest::Approx (0.033).epsilon (1e-15));

  RateEstimator equal (p);
  for (std::uint32_t f = 0; f < 6; ++f)
    equal.Set (f, Direction::Down, 0.007, 0);
  CHECK (*equal.AvgDataInt (0) == doctest::Approx (0.007).epsilon (1e-12));

  // Estimators silent for longer than the timeout are ignored.
  CHECK_FALSE (single.AvgDataInt (SecondsToNs (31)));
}

TEST_CASE ("rate estimator EWMA")
{
  AccfParams p;
  RateEstimator r (p);
  r.Update (1, Direction::Down, 0);
  CHECK_FALSE (r.AvgInt (1));
  r.Update (1, Direction::Down, SecondsToNs (0.010));
  CHECK (*r.AvgInt (1) == doctest::Approx (0.010));
  r.Update (1, Direction::Down, SecondsToNs (0.030));
  CHECK (*r.AvgInt (1) == doctest::Approx (0.9 * 0.010 + 0.1 * 0.020));
}

TEST_CASE ("randomized trace: one slot per flow, zero delay for flags, ordered releases")
{
  AccfParams params;
  Accf accf (params);
  std::mt19937_64 rng (29);
  const double avgDataInt = 0.004;
  accf.Rates ().Set (1000, Direction::Down, avgDataInt, 0);

  const std::uint32_t flows = 8;
  std::map<std::uint32_t, std::int64_t> nextAck;
  std::map<std::uint32_t, std::int64_t> lastReleased;
  std::map<std::uint32_t, TimeNs> lastReleaseAt;
  std::map<std::uint32_t, bool> lastWasBypass;
  std::map<std::uint32_t, TimeNs> timers;
  std::uniform_int_distribution<std::uint32_t> pickFlow (0, flows - 1);
  std::uniform_int_distribution<int> step (0, 4);
  std::exponential_distribution<double> gap (1.0 / 0.0005);
  std::bernoulli_distribution flagged (0.02);

  TimeNs now = 0;
  std::uint64_t violations = 0;
  auto onRelease = [&] (std::uint32_t f, const Frame &ack, bool bypass) {
    if (lastReleased.count (f) && ack.ackNo < lastReleased[f] && !bypass)
      ++violations;
    if (!bypass && lastReleaseAt.count (f) && !lastWasBypass[f])
      {
        std::int64_t nc = std::max<std::int64_t> (ack.ackNo - lastReleased[f], 1);
        double bound = Gamma (static_cast<std::uint32_t> (nc), params) * static_cast<double> (nc) * avgDataInt;
        if (NsToSeconds (now - lastReleaseAt[f]) < bound - 1e-9)
          ++violations;
      }
    lastReleased[f] = std::max (lastReleased.count (f) ? lastReleased[f] : ack.ackNo, ack.ackNo);
    lastReleaseAt[f] = now;
    lastWasBypass[f] = bypass;
  };

  for (int ev = 0; ev < 1000000; ++ev)
    {
      TimeNs arrival = now + SecondsToNs (gap (rng));
      // Fire timers due before the next arrival, earliest first.
      while (true)
        {
          auto due = timers.end ();
          for (auto it = timers.begin (); it != timers.end (); ++it)
            if (it->second <= arrival && (due == timers.end () || it->second < due->second))
              due = it;
          if (due == timers.end ())
            break;
          now = due->second;
          std::uint32_t f = due->first;
          timers.erase (due);
          auto out = accf.OnTimerExpire (f, now);
          if (out)
            onRelease (f, *out, false);
        }
      now = arrival;
      accf.Rates ().Set (1000, Direction::Down, avgDataInt, now);
      std::uint32_t f = pickFlow (rng);
      bool flag = flagged (rng);
      std::int64_t no = nextAck[f] + (flag ? 0 : step (rng));
      nextAck[f] = no;
      Frame ack = UpAck (f, no, flag ? kFlagDupAck : kFlagNone);
      AccfAction a = accf.OnAckArrival (ack, now);
      if (flag)
        {
          CHECK (a.branch == AccfBranch::Bypass);
          if (!a.release || a.release->ackNo != ack.ackNo)
            ++violations;
        }
      if (a.release)
        onRelease (f, *a.release, flag);
      if (a.deadline)
        timers[f] = *a.deadline;
      else
        timers.erase (f);
      const AckSlot *slot = accf.Slot (f);
      if (slot->buffered && slot->buffered->flowId != f)
        ++violations;
      if (accf.BufferedCount () > flows)
        ++violations;
    }
  CHECK (violations == 0);
  CHECK (accf.Counters ().arrivals == 1000000);
}

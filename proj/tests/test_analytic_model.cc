#include "wlantcp/analytic_model.h"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace wlantcp;

namespace {

// Mean tagged-station inter-success gap measured in the simulator with two
// saturated stations, 2e5 cycles, seed 1, 802.11g defaults (microseconds).
constexpr double kMeasuredCt1500x1500 = 787.1253;
constexpr double kMeasuredCt1500x40 = 570.4076;
constexpr double kMeasuredCt40x1500 = 570.8283;
constexpr double kMeasuredCt40x40 = 327.3698;
// Per-attempt collision probability of the tagged station in the same runs.
constexpr double kMeasuredCollision = 0.11003;

TrafficMix
Mix (double nUp, double nDown, double b)
{
  TrafficMix m;
  m.nUp = nUp;
  m.nDown = nDown;
  m.b = b;
  return m;
}

} // namespace

TEST_CASE ("aimd step")
{
  CHECK (AimdStep (10, AimdEvent::AdditiveIncrease, 1, 0.5) == 11);
  CHECK (AimdStep (10, AimdEvent::MultiplicativeDecrease, 1, 0.5) == 5);
  CHECK (AimdStep (1, AimdEvent::MultiplicativeDecrease, 1, 0.5) == 0.5);
  CHECK_THROWS_AS (AimdStep (0, AimdEvent::AdditiveIncrease, 1, 0.5), Error);
  CHECK_THROWS_AS (AimdStep (10, AimdEvent::AdditiveIncrease, 1, 1.0), Error);
  CHECK_THROWS_AS (AimdStep (10, AimdEvent::AdditiveIncrease, 0, 0.5), Error);
}

TEST_CASE ("aimd converges to equal shares from any positive start")
{
  std::mt19937_64 rng (11);
  std::uniform_real_distribution<double> start (1e-3, 100.0);
  const double capacity = 100;
  for (int trial = 0; trial < 200; ++trial)
    {
      double r1 = start (rng);
      double r2 = start (rng);
      for (int round = 0; round < 200; ++round)
        {
          auto ev = r1 + r2 > capacity ? AimdEvent::MultiplicativeDecrease
                                       : AimdEvent::AdditiveIncrease;
          r1 = AimdStep (r1, ev, 1, 0.5);
          r2 = AimdStep (r2, ev, 1, 0.5);
        }
      CHECK (std::abs (r1 - r2) / (r1 + r2) < 0.05);
    }
}

TEST_CASE ("rtt")
{
  CHECK (Rtt (0, 0, 0, 0, 0) == 0);
  CHECK (Rtt (0.050, 0.099, 0, 0.001, 0) == doctest::Approx (0.200).epsilon (1e-12));
  CHECK_THROWS_AS (Rtt (-1, 0, 0, 0, 0), Error);
}

TEST_CASE ("rtt with a full AP queue equals w_lim times ct_flow")
{
  MacTiming t;
  TrafficMix mix = Mix (5, 5, 1);
  const double bs = 100;
  WindowLimitResult w = WindowLimit (0.050, mix, bs, t);
  double rtt = Rtt (0.050, (bs - 1) * w.ctAp, 0, w.ctAp, 0);
  CHECK (rtt == doctest::Approx (w.wLim * w.ctFlow).epsilon (1e-12));
}

TEST_CASE ("packet type probabilities")
{
  PacketTypeProbs p = ComputePacketTypeProbs (Mix (0, 5, 1));
  CHECK (p.apData == 1);
  CHECK (p.apAck == 0);
  CHECK (p.staData == 0);
  CHECK (p.staAck == 1);

  p = ComputePacketTypeProbs (Mix (5, 5, 1));
  CHECK (p.apData == 0.5);
  CHECK (p.apAck == 0.5);
  CHECK (p.staData == 0.5);
  CHECK (p.staAck == 0.5);

  // AP: 5 data + 10/2 ACKs; stations: 10 data + 5/2 ACKs.
  p = ComputePacketTypeProbs (Mix (10, 5, 2));
  CHECK (p.apData == 0.5);
  CHECK (p.apAck == 0.5);
  CHECK (p.staData == 0.8);
  CHECK (p.staAck == doctest::Approx (0.2).epsilon (1e-15));
}

TEST_CASE ("packet type probabilities close to one")
{
  std::mt19937_64 rng (3);
  std::uniform_real_distribution<double> n (0, 40);
  std::uniform_real_distribution<double> b (1, 4);
  for (int i = 0; i < 1000; ++i)
    {
      TrafficMix m = Mix (n (rng), n (rng) + 1, b (rng));
      PacketTypeProbs p = ComputePacketTypeProbs (m);
      CHECK (std::abs (p.apData + p.apAck - 1) <= 1e-12);
      CHECK (std::abs (p.staData + p.staAck - 1) <= 1e-12);
    }
}

TEST_CASE ("frame airtime anatomy")
{
  MacTiming t;
  double expect = 20e-6 + 8.0 * (1500 + 36) / 54e6 + 10e-6 + 44e-6 + 28e-6;
  CHECK (t.FrameAirtime (1500) == doctest::Approx (expect).epsilon (1e-12));
  CHECK (t.ContentionWindow (0) == 15);
  CHECK (t.ContentionWindow (1) == 31);
  CHECK (t.ContentionWindow (6) == 1023);
  CHECK (t.ContentionWindow (7) == 1023);
}

TEST_CASE ("cycle time pair against the simulator oracle")
{
  MacTiming t;
  auto within = [] (double model, double measured) {
    return std::abs (model - measured) / measured < 0.10;
  };
  CHECK (within (CycleTimePair (1500, 1500, t) * 1e6, kMeasuredCt1500x1500));
  CHECK (within (CycleTimePair (1500, 40, t) * 1e6, kMeasuredCt1500x40));
  CHECK (within (CycleTimePair (40, 1500, t) * 1e6, kMeasuredCt40x1500));
  CHECK (within (CycleTimePair (40, 40, t) * 1e6, kMeasuredCt40x40));
  CHECK (CycleTimePair (1500, 40, t) < CycleTimePair (1500, 1500, t));
  CHECK (std::abs (CycleTimePair (1500, 40, t) - CycleTimePair (40, 1500, t))
         / CycleTimePair (1500, 40, t) < 0.10);

  TwoStationContention c = SolveTwoStationContention (t);
  CHECK (std::abs (c.collisionProbability - kMeasuredCollision) / kMeasuredCollision < 0.10);
  CHECK (2 * c.successShare + c.collisionShare == doctest::Approx (1.0).epsilon (1e-9));
}

TEST_CASE ("cycle time table invariants")
{
  MacTiming t;
  CycleTimeTable table = ComputeCycleTimeTable (Mix (3, 4, 1), t);
  for (auto a : {PacketType::Data, PacketType::Ack})
    for (auto s : {PacketType::Data, PacketType::Ack})
      CHECK (table (a, s) > 0);
  CHECK (table (PacketType::Data, PacketType::Data) >= table (PacketType::Ack, PacketType::Ack));
}

TEST_CASE ("ct_ap")
{
  MacTiming t;
  CycleTimeTable table = ComputeCycleTimeTable (Mix (1, 1, 1), t);
  CHECK (CtAp (Mix (0, 5, 1), t) == doctest::Approx (table (PacketType::Data, PacketType::Ack)).epsilon (1e-12));

  double mean = (table (PacketType::Data, PacketType::Data) + table (PacketType::Data, PacketType::Ack)
                 + table (PacketType::Ack, PacketType::Data) + table (PacketType::Ack, PacketType::Ack))
                / 4;
  CHECK (CtAp (Mix (5, 5, 1), t) == doctest::Approx (mean).epsilon (1e-12));

  // (5, 5, b=2): AP and stations both send data with probability 2/3.
  double w[2] = {2.0 / 3, 1.0 / 3};
  double measured[2][2] = {{kMeasuredCt1500x1500, kMeasuredCt1500x40},
                           {kMeasuredCt40x1500, kMeasuredCt40x40}};
  double fromOracle = 0;
  double fromTable = 0;
  PacketType types[2] = {PacketType::Data, PacketType::Ack};
  for (int a = 0; a < 2; ++a)
    for (int s = 0; s < 2; ++s)
      {
        fromOracle += w[a] * w[s] * measured[a][s] * 1e-6;
        fromTable += w[a] * w[s] * table (types[a], types[s]);
      }
  double ct = CtAp (Mix (5, 5, 2), t);
  CHECK (ct == doctest::Approx (fromTable).epsilon (1e-12));
  CHECK (std::abs (ct - fromOracle) / fromOracle < 0.10);
}

TEST_CASE ("ct_flow")
{
  const double T = 500e-6;
  CHECK (CtFlow (Mix (5, 5, 1), T) == doctest::Approx (10 * T).epsilon (1e-15));
  CHECK (CtFlow (Mix (10, 5, 2), T) == doctest::Approx (10 * T).epsilon (1e-15));
  CHECK (CtFlow (Mix (0, 1, 1), T) == doctest::Approx (T).epsilon (1e-15));
}

TEST_CASE ("w_lim and buffer_size examples")
{
  MacTiming t;
  WindowLimitResult w = WindowLimit (0, Mix (5, 5, 1), 100, t);
  CHECK (w.wLim == 10);
  CHECK (w.wLimFloor == 10);
  CHECK (w.wiredFlightTerm == 0);
  w = WindowLimit (0, Mix (10, 5, 2), 100, t);
  CHECK (w.wLim == 10);

  CHECK (BufferSize (10, 0, Mix (5, 5, 1), t) == doctest::Approx (100).epsilon (1e-12));
  CHECK (BufferSize (10, 0, Mix (10, 5, 2), t) == doctest::Approx (100).epsilon (1e-12));

  w = WindowLimit (0.050, Mix (5, 5, 1), 100, t);
  CHECK (w.wLim == doctest::Approx (w.wiredFlightTerm + w.bufferTerm).epsilon (1e-15));
  CHECK (w.wLim > 10);
  CHECK (w.wLimFloor == static_cast<std::int64_t> (std::floor (w.wLim)));
}

TEST_CASE ("w_lim at zero delay is the buffer share, over random tuples")
{
  MacTiming t;
  std::mt19937_64 rng (5);
  std::uniform_int_distribution<int> n (0, 30);
  std::uniform_real_distribution<double> b (1, 3);
  std::uniform_real_distribution<double> bs (1, 500);
  std::uniform_real_distribution<double> ld (0, 0.2);
  for (int i = 0; i < 1000; ++i)
    {
      TrafficMix m = Mix (n (rng), n (rng) + 1, b (rng));
      double buffer = bs (rng);
      WindowLimitResult w = WindowLimit (0, m, buffer, t);
      CHECK (w.wLim == buffer / (m.nUp / m.b + m.nDown));

      double delay = ld (rng);
      WindowLimitResult wd = WindowLimit (delay, m, buffer, t);
      CHECK (std::abs (BufferSize (wd.wLim, delay, m, t) - buffer) <= 1e-9 * buffer);
    }
}

TEST_CASE ("w_lim monotonicity")
{
  MacTiming t;
  std::mt19937_64 rng (9);
  std::uniform_int_distribution<int> n (1, 20);
  std::uniform_real_distribution<double> u (0, 1);
  for (int i = 0; i < 300; ++i)
    {
      TrafficMix m = Mix (n (rng), n (rng), 1 + u (rng));
      double ld = 0.1 * u (rng);
      double bs = 10 + 200 * u (rng);
      double base = WindowLimit (ld, m, bs, t).wLim;
      CHECK (WindowLimit (ld + 0.001, m, bs, t).wLim > base);
      CHECK (WindowLimit (ld, m, bs + 1, t).wLim > base);

      double ctAp = 600e-6;
      TrafficMix more = m;
      more.nDown += 1;
      CHECK (WindowLimitWithCtAp (ld, more, bs, ctAp).wLim < WindowLimitWithCtAp (ld, m, bs, ctAp).wLim);
    }
}

TEST_CASE ("invalid model inputs")
{
  MacTiming t;
  CHECK_THROWS_AS (WindowLimit (-0.1, Mix (1, 1, 1), 100, t), Error);
  CHECK_THROWS_AS (WindowLimit (0, Mix (0, 0, 1), 100, t), Error);
  CHECK_THROWS_AS (WindowLimit (0, Mix (1, 1, 0.5), 100, t), Error);
  MacTiming bad;
  bad.cwMin = 64;
  bad.cwMax = 32;
  CHECK_THROWS_AS (CycleTimePair (1500, 40, bad), Error);
  try
    {
      ComputePacketTypeProbs (Mix (0, 0, 1));
      FAIL ("expected an error");
    }
  catch (const Error &e)
    {
      CHECK (e.Code () == ErrorCode::InvalidArgument);
    }
}

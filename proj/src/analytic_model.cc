#include "wlantcp/analytic_model.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>
#include <vector>

namespace wlantcp {

namespace {

void
Require (bool ok, const char *what)
{
  if (!ok)
    {
      throw Error (ErrorCode::InvalidArgument, what);
    }
}

} // namespace

void
MacTiming::Validate () const
{
  Require (slotTime > 0 && sifs > 0 && difs > 0, "MAC durations must be > 0");
  Require (macAckDuration > 0 && phyHeaderDuration > 0,
           "MAC durations must be > 0");
  Require (dataRate > 0 && basicRate > 0, "PHY rates must be > 0");
  Require (cwMin >= 1 && cwMin <= cwMax, "need 1 <= cw_min <= cw_max");
}

double
MacTiming::FrameAirtime (std::uint32_t transportBytes) const
{
  double payload = 8.0 * (transportBytes + macHeaderBytes) / dataRate;
  return phyHeaderDuration + payload + sifs + macAckDuration + difs;
}

std::uint32_t
MacTiming::ContentionWindow (std::uint32_t stage) const
{
  std::uint64_t cw = cwMin + 1;
  for (std::uint32_t i = 0; i < stage && cw <= cwMax; ++i)
    {
      cw *= 2;
    }
  return static_cast<std::uint32_t> (std::min<std::uint64_t> (cw - 1, cwMax));
}

void
TrafficMix::Validate () const
{
  Require (nUp >= 0 && nDown >= 0, "flow counts must be non-negative");
  Require (nUp + nDown >= 1, "need at least one flow");
  Require (b >= 1, "delayed-ACK factor b must be >= 1");
  Require (ackSize > 0 && dataSize > ackSize,
           "need data_size > ack_size > 0");
}

double
AimdStep (double window, AimdEvent event, double alpha, double beta)
{
  Require (window > 0, "window must be > 0");
  Require (alpha > 0, "alpha must be > 0");
  Require (beta > 0 && beta < 1, "beta must be in (0, 1)");
  return event == AimdEvent::AdditiveIncrease ? window + alpha : beta * window;
}

double
Rtt (double ld, double qdAp, double qdSta, double adAp, double adSta)
{
  Require (ld >= 0 && qdAp >= 0 && qdSta >= 0 && adAp >= 0 && adSta >= 0,
           "RTT components must be non-negative");
  return 2.0 * ld + qdAp + qdSta + adAp + adSta;
}

PacketTypeProbs
ComputePacketTypeProbs (const TrafficMix &mix)
{
  Require (mix.nUp >= 0 && mix.nDown >= 0 && mix.nUp + mix.nDown >= 1,
           "need at least one flow");
  Require (mix.b >= 1, "delayed-ACK factor b must be >= 1");
  PacketTypeProbs p;
  double apDen = mix.nUp / mix.b + mix.nDown;
  double staDen = mix.nDown / mix.b + mix.nUp;
  p.apData = mix.nDown / apDen;
  p.apAck = (mix.nUp / mix.b) / apDen;
  p.staData = mix.nUp / staDen;
  p.staAck = (mix.nDown / mix.b) / staDen;
  return p;
}

namespace {

TwoStationContention
SolveChain (std::uint32_t cwMin, std::uint32_t cwMax, std::uint32_t retryLimit)
{
  MacTiming t;
  t.cwMin = cwMin;
  t.cwMax = cwMax;
  const std::uint32_t stages = retryLimit + 1;
  std::vector<std::size_t> w (stages);
  std::vector<std::size_t> off (stages + 1, 0);
  for (std::uint32_t i = 0; i < stages; ++i)
    {
      w[i] = t.ContentionWindow (i);
      off[i + 1] = off[i] + w[i] + 1;
    }
  // State (a, b, r): one station has just drawn a counter at stage a, the
  // other is at stage b with r slots left.
  const std::size_t perStage = off[stages];
  const std::size_t n = stages * perStage;
  auto block = [&] (std::uint32_t a, std::uint32_t b) { return a * perStage + off[b]; };
  auto next = [&] (std::uint32_t stage) { return stage + 1 < stages ? stage + 1 : 0; };

  std::vector<double> pi (n, 0.0);
  std::vector<double> diff (n + 1);
  std::vector<double> collided (stages * stages);
  for (std::size_t r = 0; r <= w[0]; ++r)
    {
      pi[block (0, 0) + r] = 1.0 / static_cast<double> (w[0] + 1);
    }
  auto addRange = [&] (std::size_t from, std::size_t to, double q) {
    diff[from] += q;
    diff[to + 1] -= q;
  };

  TwoStationContention out;
  for (int iter = 0; iter < 100000; ++iter)
    {
      std::fill (diff.begin (), diff.end (), 0.0);
      std::fill (collided.begin (), collided.end (), 0.0);
      double successes = 0;
      double collisions = 0;
      double idle = 0;
      for (std::uint32_t a = 0; a < stages; ++a)
        {
          const double wa = static_cast<double> (w[a]);
          for (std::uint32_t b = 0; b < stages; ++b)
            {
              const std::size_t base = block (a, b);
              for (std::size_t r = 0; r <= w[b]; ++r)
                {
                  const double p = pi[base + r];
                  if (p == 0)
                    {
                      continue;
                    }
                  const double q = p / (wa + 1);
                  const double rd = static_cast<double> (r);
                  if (r > 0)
                    {
                      // Draw c < r: the fresh station wins, the other keeps r - c.
                      std::size_t m = std::min<std::size_t> (r - 1, w[a]);
                      addRange (block (0, b) + r - m, block (0, b) + r, q);
                      const double md = static_cast<double> (m);
                      successes += q * (md + 1);
                      idle += q * md * (md + 1) / 2;
                    }
                  if (r <= w[a])
                    {
                      collided[next (a) * stages + next (b)] += q;
                      collisions += q;
                      idle += q * rd;
                    }
                  if (w[a] > r)
                    {
                      // Draw c > r: the other station wins, this one keeps c - r.
                      std::size_t k = w[a] - r;
                      addRange (block (0, a) + 1, block (0, a) + k, q);
                      successes += q * static_cast<double> (k);
                      idle += q * rd * static_cast<double> (k);
                    }
                }
            }
        }
      for (std::uint32_t a = 0; a < stages; ++a)
        {
          for (std::uint32_t b = 0; b < stages; ++b)
            {
              double mass = collided[a * stages + b];
              if (mass > 0)
                {
                  addRange (block (a, b), block (a, b) + w[b],
                            mass / static_cast<double> (w[b] + 1));
                }
            }
        }
      double change = 0;
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i)
        {
          acc += diff[i];
          change += std::abs (acc - pi[i]);
          pi[i] = acc;
        }
      out.successShare = successes / 2;
      out.collisionShare = collisions;
      out.meanIdleSlots = idle;
      if (change < 1e-11)
        {
          break;
        }
    }
  // Each success is one attempt, each collision two (one per station).
  out.collisionProbability = 2 * out.collisionShare / (2 * out.successShare + 2 * out.collisionShare);
  return out;
}

} // namespace

TwoStationContention
SolveTwoStationContention (const MacTiming &timing)
{
  timing.Validate ();
  using Key = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>;
  static std::mutex mutex;
  static std::map<Key, TwoStationContention> cache;
  const Key key{timing.cwMin, timing.cwMax, timing.retryLimit};
  {
    std::lock_guard<std::mutex> lock (mutex);
    auto it = cache.find (key);
    if (it != cache.end ())
      {
        return it->second;
      }
  }
  TwoStationContention c = SolveChain (timing.cwMin, timing.cwMax, timing.retryLimit);
  std::lock_guard<std::mutex> lock (mutex);
  cache.emplace (key, c);
  return c;
}

double
CycleTimePair (std::uint32_t p1Size, std::uint32_t p2Size,
               const MacTiming &timing)
{
  Require (p1Size > 0 && p2Size > 0, "frame sizes must be > 0");
  TwoStationContention c = SolveTwoStationContention (timing);
  double t1 = timing.FrameAirtime (p1Size);
  double t2 = timing.FrameAirtime (p2Size);
  double perEvent = c.meanIdleSlots * timing.slotTime
                    + c.successShare * (t1 + t2)
                    + c.collisionShare * std::max (t1, t2);
  return perEvent / c.successShare;
}

CycleTimeTable
ComputeCycleTimeTable (const TrafficMix &mix, const MacTiming &timing)
{
  CycleTimeTable table;
  const std::uint32_t sizes[2] = {mix.dataSize, mix.ackSize};
  for (int a = 0; a < 2; ++a)
    {
      for (int s = 0; s < 2; ++s)
        {
          table.ct[a][s] = CycleTimePair (sizes[a], sizes[s], timing);
        }
    }
  return table;
}

double
CtAp (const TrafficMix &mix, const MacTiming &timing)
{
  mix.Validate ();
  return CtAp (mix, ComputeCycleTimeTable (mix, timing));
}

double
CtAp (const TrafficMix &mix, const CycleTimeTable &table)
{
  mix.Validate ();
  PacketTypeProbs pr = ComputePacketTypeProbs (mix);
  const double ap[2] = {pr.apData, pr.apAck};
  const double sta[2] = {pr.staData, pr.staAck};
  double sum = 0;
  for (int a = 0; a < 2; ++a)
    {
      for (int s = 0; s < 2; ++s)
        {
          sum += ap[a] * sta[s] * table.ct[a][s];
        }
    }
  return sum;
}

double
CtFlow (const TrafficMix &mix, double ctAp)
{
  Require (ctAp > 0, "ct_ap must be > 0");
  return mix.ApPacketsPerRound () * ctAp;
}

WindowLimitResult
WindowLimitWithCtAp (double ld, const TrafficMix &mix, double bsAp,
                     double ctAp)
{
  Require (ld >= 0, "ld must be >= 0");
  Require (bsAp >= 1, "bs_ap must be >= 1");
  mix.Validate ();
  WindowLimitResult r;
  r.ctAp = ctAp;
  r.ctFlow = CtFlow (mix, ctAp);
  r.wiredFlightTerm = 2.0 * ld / r.ctFlow;
  r.bufferTerm = bsAp / mix.ApPacketsPerRound ();
  r.wLim = r.wiredFlightTerm + r.bufferTerm;
  r.wLimFloor = static_cast<std::int64_t> (std::floor (r.wLim));
  return r;
}

WindowLimitResult
WindowLimit (double ld, const TrafficMix &mix, double bsAp,
             const MacTiming &timing)
{
  mix.Validate ();
  return WindowLimitWithCtAp (ld, mix, bsAp, CtAp (mix, timing));
}

double
BufferSizeWithCtAp (double wLim, double ld, const TrafficMix &mix,
                    double ctAp)
{
  Require (ld >= 0, "ld must be >= 0");
  mix.Validate ();
  double flight = 2.0 * ld / CtFlow (mix, ctAp);
  if (!(wLim > flight))
    {
      std::ostringstream os;
      os << "window limit " << wLim << " does not exceed the wired flight term "
         << flight << "; buffer would be negative";
      throw Error (ErrorCode::InvalidArgument, os.str ());
    }
  return (wLim - flight) * mix.ApPacketsPerRound ();
}

double
BufferSize (double wLim, double ld, const TrafficMix &mix,
            const MacTiming &timing)
{
  mix.Validate ();
  return BufferSizeWithCtAp (wLim, ld, mix, CtAp (mix, timing));
}

} // namespace wlantcp

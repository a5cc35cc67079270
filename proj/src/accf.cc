#include "wlantcp/accf.h"

#include <algorithm>
#include <limits>

namespace wlantcp {

void
AccfParams::Validate () const
{
  if (!(alpha > 1) || !(beta > 1))
    {
      throw Error (ErrorCode::InvalidArgument, "accf alpha and beta must be > 1");
    }
  if (!(gammaMin > 0 && gammaMin <= 1))
    {
      throw Error (ErrorCode::InvalidArgument, "accf gamma_min must be in (0, 1]");
    }
  if (numThresh < 1)
    {
      throw Error (ErrorCode::InvalidArgument, "accf num_thresh must be >= 1");
    }
  if (!(ewmaWeight > 0 && ewmaWeight <= 1) || !(estimatorTimeout > 0))
    {
      throw Error (ErrorCode::InvalidArgument,
                   "accf ewma weight must be in (0, 1] and timeout > 0");
    }
}

double
Gamma (std::uint32_t numCum, const AccfParams &params)
{
  if (numCum >= params.numThresh)
    {
      return 1.0;
    }
  if (params.gammaMode == GammaMode::Step || params.numThresh <= 1)
    {
      return params.gammaMin;
    }
  double x = static_cast<double> (std::max<std::uint32_t> (numCum, 1) - 1)
             / static_cast<double> (params.numThresh - 1);
  return params.gammaMin + (1.0 - params.gammaMin) * x;
}

const char *
ToString (AccfBranch b)
{
  switch (b)
    {
    case AccfBranch::Bypass:
      return "bypass";
    case AccfBranch::ReleaseNow:
      return "release";
    case AccfBranch::Buffer:
      return "buffer";
    case AccfBranch::BurstBuffer:
      return "burst-buffer";
    case AccfBranch::NoReference:
      return "no-reference";
    }
  return "?";
}

BufferingDecision
DecideBuffering (std::uint32_t numCum, double tBuf,
                 std::optional<double> avgDataInt,
                 std::optional<double> avgIntFlow, const AccfParams &params)
{
  BufferingDecision r;
  if (!avgDataInt)
    {
      r.branch = AccfBranch::NoReference;
      return r;
    }
  r.d = Gamma (numCum, params) * numCum * *avgDataInt - tBuf;
  if (r.d >= 0)
    {
      r.branch = AccfBranch::Buffer;
      r.delay = r.d;
    }
  else if (avgIntFlow && r.d + params.beta * *avgIntFlow < 0)
    {
      r.branch = AccfBranch::BurstBuffer;
      r.delay = params.beta * *avgIntFlow;
    }
  else
    {
      r.branch = AccfBranch::ReleaseNow;
    }
  return r;
}

void
RateEstimator::Update (std::uint32_t flowId, Direction direction, TimeNs now)
{
  auto [it, inserted] = m_entries.try_emplace (flowId);
  Entry &e = it->second;
  e.direction = direction;
  if (!inserted)
    {
      double gap = NsToSeconds (now - e.lastArrival);
      if (e.avgInt)
        {
          e.avgInt = (1 - m_params.ewmaWeight) * *e.avgInt + m_params.ewmaWeight * gap;
        }
      else
        {
          e.avgInt = gap;
        }
    }
  e.lastArrival = now;
}

void
RateEstimator::Set (std::uint32_t flowId, Direction direction, double avgInt,
                    TimeNs lastSeen)
{
  Entry &e = m_entries[flowId];
  e.direction = direction;
  e.avgInt = avgInt;
  e.lastArrival = lastSeen;
}

std::optional<double>
RateEstimator::AvgInt (std::uint32_t flowId) const
{
  auto it = m_entries.find (flowId);
  if (it == m_entries.end ())
    {
      return std::nullopt;
    }
  return it->second.avgInt;
}

std::optional<double>
RateEstimator::AvgDataInt (TimeNs now) const
{
  const TimeNs timeout = SecondsToNs (m_params.estimatorTimeout);
  double lowest = std::numeric_limits<double>::infinity ();
  for (const auto &[id, e] : m_entries)
    {
      if (e.direction == Direction::Down && e.avgInt
          && now - e.lastArrival <= timeout)
        {
          lowest = std::min (lowest, *e.avgInt);
        }
    }
  if (lowest == std::numeric_limits<double>::infinity ())
    {
      return std::nullopt;
    }
  double sum = 0;
  int n = 0;
  for (const auto &[id, e] : m_entries)
    {
      if (e.direction == Direction::Down && e.avgInt
          && now - e.lastArrival <= timeout && *e.avgInt < m_params.alpha * lowest)
        {
          sum += *e.avgInt;
          ++n;
        }
    }
  // lowest itself always qualifies unless it is zero
  return n == 0 ? lowest : sum / n;
}

Accf::Accf (const AccfParams &params) : m_params (params), m_rates (params)
{
  params.Validate ();
}

void
Accf::ObservePacket (const Frame &packet, TimeNs now)
{
  if (packet.kind == FrameKind::Raw)
    {
      return;
    }
  m_rates.Update (packet.flowId, packet.direction, now);
}

AckSlot &
Accf::SlotFor (std::uint32_t flowId, TimeNs now)
{
  auto [it, inserted] = m_slots.try_emplace (flowId);
  if (inserted)
    {
      it->second.flowId = flowId;
      it->second.lastRelease = now;
    }
  return it->second;
}

void
Accf::MarkReleased (AckSlot &s, std::int64_t ackNo, TimeNs now)
{
  s.buffered.reset ();
  s.numCum = 0;
  s.deadline.reset ();
  s.lastRelease = now;
  if (!s.lastReleasedAck || ackNo > *s.lastReleasedAck)
    {
      s.lastReleasedAck = ackNo;
    }
}

void
Accf::Record (TimeNs now, const AckSlot &s, double tBuf, double d, AccfBranch b)
{
  if (!m_logEnabled)
    {
      return;
    }
  AccfLogEntry e;
  e.time = NsToSeconds (now);
  e.flowId = s.flowId;
  e.numCum = s.numCum;
  e.tBuf = tBuf;
  e.d = d;
  e.branch = b;
  m_log.push_back (e);
}

AccfAction
Accf::OnAckArrival (const Frame &ack, TimeNs now)
{
  ++m_counters.arrivals;
  m_rates.Update (ack.flowId, ack.direction, now);
  AckSlot &s = SlotFor (ack.flowId, now);
  const double tBuf = NsToSeconds (now - s.lastRelease);
  AccfAction act;

  if (ack.HasFlags ())
    {
      ++m_counters.bypassed;
      if (s.buffered && s.buffered->ackNo <= ack.ackNo)
        {
          ++m_counters.discarded;
          s.buffered.reset ();
        }
      act.branch = AccfBranch::Bypass;
      act.release = ack;
      if (s.buffered)
        {
          // A newer ACK stays buffered; its timer remains valid.
          act.deadline = s.deadline;
          s.lastRelease = now;
        }
      else
        {
          s.numCum = static_cast<std::uint32_t> (
              s.lastReleasedAck ? std::max<std::int64_t> (ack.ackNo - *s.lastReleasedAck, 0) : 0);
          MarkReleased (s, ack.ackNo, now);
        }
      Record (now, s, tBuf, 0, AccfBranch::Bypass);
      return act;
    }

  if (s.buffered)
    {
      if (ack.ackNo < s.buffered->ackNo)
        {
          // Stale ACK: the newer buffered one already covers it.
          act.branch = AccfBranch::Buffer;
          act.deadline = s.deadline;
          return act;
        }
      ++m_counters.replaced;
    }
  s.buffered = ack;
  std::int64_t delta = s.lastReleasedAck ? ack.ackNo - *s.lastReleasedAck : 1;
  s.numCum = static_cast<std::uint32_t> (std::max<std::int64_t> (delta, 1));

  BufferingDecision dec = DecideBuffering (
      s.numCum, tBuf, m_rates.AvgDataInt (now), m_rates.AvgInt (ack.flowId),
      m_params);
  Record (now, s, tBuf, dec.d, dec.branch);
  act.branch = dec.branch;
  if (dec.branch == AccfBranch::Buffer || dec.branch == AccfBranch::BurstBuffer)
    {
      ++m_counters.buffered;
      s.deadline = now + SecondsToNs (dec.delay);
      act.deadline = s.deadline;
      return act;
    }
  ++m_counters.releasedNow;
  act.release = *s.buffered;
  MarkReleased (s, ack.ackNo, now);
  return act;
}

std::optional<Frame>
Accf::OnTimerExpire (std::uint32_t flowId, TimeNs now)
{
  auto it = m_slots.find (flowId);
  if (it == m_slots.end () || !it->second.buffered)
    {
      ++m_counters.spuriousTimers;
      return std::nullopt;
    }
  AckSlot &s = it->second;
  Frame out = *s.buffered;
  ++m_counters.timerReleases;
  MarkReleased (s, out.ackNo, now);
  return out;
}

const AckSlot *
Accf::Slot (std::uint32_t flowId) const
{
  auto it = m_slots.find (flowId);
  return it == m_slots.end () ? nullptr : &it->second;
}

std::size_t
Accf::BufferedCount () const
{
  return static_cast<std::size_t> (std::count_if (
      m_slots.begin (), m_slots.end (),
      [] (const auto &e) { return e.second.buffered.has_value (); }));
}

} // namespace wlantcp

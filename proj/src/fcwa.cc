#include "wlantcp/fcwa.h"

#include <algorithm>
#include <cmath>

namespace wlantcp {

Fcwa::Fcwa (const FcwaConfig &cfg) : m_cfg (cfg)
{
  if (cfg.bsAp < 1)
    {
      throw Error (ErrorCode::InvalidArgument, "bs_ap must be >= 1");
    }
  if (!(cfg.ewmaWeight > 0 && cfg.ewmaWeight <= 1))
    {
      throw Error (ErrorCode::InvalidArgument, "fcwa ewma weight must be in (0, 1]");
    }
  if (cfg.measureWindow < 1)
    {
      throw Error (ErrorCode::InvalidArgument, "measure window must be >= 1");
    }
  TrafficMix sizes;
  sizes.nDown = 1;
  sizes.dataSize = cfg.dataSize;
  sizes.ackSize = cfg.ackSize;
  m_table = ComputeCycleTimeTable (sizes, cfg.timing);
}

FlowProfile &
Fcwa::Touch (const Frame &packet, TimeNs now)
{
  auto [it, inserted] = m_flows.try_emplace (packet.flowId);
  FlowProfile &p = it->second;
  if (inserted)
    {
      p.flowId = packet.flowId;
      p.direction = packet.direction;
    }
  p.lastSeen = now;
  if ((packet.flags & kFlagFin) != 0)
    {
      p.finished = true;
    }
  return p;
}

void
Fcwa::AddLdSample (FlowProfile &p, double rtt)
{
  double ld = rtt / 2;
  if (!p.ldEstimate)
    {
      p.ldEstimate = ld;
    }
  else
    {
      p.ldEstimate = (1 - m_cfg.ewmaWeight) * *p.ldEstimate + m_cfg.ewmaWeight * ld;
    }
  ++p.ldSamples;
}

void
Fcwa::AddBSample (FlowProfile &p, const Frame &ack)
{
  if ((ack.flags & kFlagDupAck) != 0)
    {
      p.inRecovery = true;
      return;
    }
  // The ACK closing a loss episode covers the hole, not b packets.
  bool sample = !p.inRecovery;
  p.inRecovery = false;
  if (sample && p.lastAckNo && ack.ackNo > *p.lastAckNo)
    {
      double delta = static_cast<double> (ack.ackNo - *p.lastAckNo);
      if (p.bSamples == 0)
        {
          p.bEstimate = delta;
        }
      else
        {
          p.bEstimate = (1 - m_cfg.ewmaWeight) * p.bEstimate + m_cfg.ewmaWeight * delta;
        }
      p.bEstimate = std::max (p.bEstimate, 1.0);
      ++p.bSamples;
    }
  if (!p.lastAckNo || ack.ackNo > *p.lastAckNo)
    {
      p.lastAckNo = ack.ackNo;
    }
}

void
Fcwa::Expire (FlowProfile &p, TimeNs now)
{
  const TimeNs horizon = now - SecondsToNs (m_cfg.sampleTimeout);
  std::erase_if (p.dataDepartures, [&] (const auto &e) { return e.second < horizon; });
  std::erase_if (p.ackDepartures, [&] (const auto &e) { return e.second < horizon; });
}

void
Fcwa::Observe (const Frame &packet, ApHop hop, TimeNs now)
{
  if (packet.kind == FrameKind::Raw)
    {
      return;
    }
  FlowProfile &p = Touch (packet, now);
  const bool isAck = packet.kind == FrameKind::TcpAck;

  if (p.direction == Direction::Up)
    {
      if (!isAck && hop == ApHop::ToWired)
        {
          p.dataDepartures[packet.seq] = now;
        }
      else if (isAck && hop == ApHop::FromWired)
        {
          auto it = p.dataDepartures.find (packet.ackNo - 1);
          if (it != p.dataDepartures.end ())
            {
              AddLdSample (p, NsToSeconds (now - it->second));
            }
          // Older departures are covered by this cumulative ACK.
          p.dataDepartures.erase (p.dataDepartures.begin (),
                                  p.dataDepartures.lower_bound (packet.ackNo));
          AddBSample (p, packet);
        }
    }
  else
    {
      if (isAck && hop == ApHop::ToWired)
        {
          p.ackDepartures.emplace (packet.tsVal, now);
          AddBSample (p, packet);
        }
      else if (!isAck && hop == ApHop::FromWired)
        {
          auto it = p.ackDepartures.find (packet.tsEcr);
          if (it != p.ackDepartures.end ())
            {
              AddLdSample (p, NsToSeconds (now - it->second));
              p.ackDepartures.erase (p.ackDepartures.begin (), std::next (it));
            }
        }
    }
  if (p.dataDepartures.size () + p.ackDepartures.size () > 64)
    {
      Expire (p, now);
    }
}

bool
Fcwa::IsActive (const FlowProfile &p, TimeNs now) const
{
  return !p.finished && now - p.lastSeen <= SecondsToNs (m_cfg.flowTimeout);
}

std::uint32_t
Fcwa::ActiveFlows (Direction d, TimeNs now) const
{
  std::uint32_t n = 0;
  for (const auto &[id, p] : m_flows)
    {
      if (p.direction == d && IsActive (p, now))
        {
          ++n;
        }
    }
  return n;
}

double
Fcwa::MeanBEstimate (TimeNs now) const
{
  double sum = 0;
  std::uint32_t n = 0;
  for (const auto &[id, p] : m_flows)
    {
      if (IsActive (p, now) && p.bSamples > 0)
        {
          sum += p.bEstimate;
          ++n;
        }
    }
  return n == 0 ? 1.0 : std::max (1.0, sum / n);
}

void
Fcwa::ObserveApSuccess (TimeNs now, bool backlogged)
{
  if (m_lastApSuccess)
    {
      double gap = NsToSeconds (now - *m_lastApSuccess);
      m_apGaps.push_back (gap);
      m_apGapSum += gap;
      if (m_apGaps.size () > m_cfg.measureWindow)
        {
          m_apGapSum -= m_apGaps.front ();
          m_apGaps.pop_front ();
        }
    }
  // Only gaps spent contending with a backlog measure the cycle time.
  if (backlogged)
    {
      m_lastApSuccess = now;
    }
  else
    {
      m_lastApSuccess.reset ();
    }
}

std::optional<double>
Fcwa::MeasuredCtAp () const
{
  if (m_apGaps.empty ())
    {
      return std::nullopt;
    }
  return m_apGapSum / static_cast<double> (m_apGaps.size ());
}

std::optional<WindowLimitResult>
Fcwa::CurrentLimit (std::uint32_t flowId, TimeNs now) const
{
  auto it = m_flows.find (flowId);
  if (it == m_flows.end () || !it->second.ldEstimate)
    {
      return std::nullopt;
    }
  TrafficMix mix;
  mix.nUp = ActiveFlows (Direction::Up, now);
  mix.nDown = ActiveFlows (Direction::Down, now);
  if (mix.nUp + mix.nDown < 1)
    {
      (it->second.direction == Direction::Up ? mix.nUp : mix.nDown) = 1;
    }
  mix.b = MeanBEstimate (now);
  mix.dataSize = m_cfg.dataSize;
  mix.ackSize = m_cfg.ackSize;
  double ctAp = 0;
  if (m_cfg.ctMode == CtMode::Measured)
    {
      auto measured = MeasuredCtAp ();
      ctAp = measured ? *measured : CtAp (mix, m_table);
    }
  else
    {
      ctAp = CtAp (mix, m_table);
    }
  return WindowLimitWithCtAp (*it->second.ldEstimate, mix, m_cfg.bsAp, ctAp);
}

Frame
Fcwa::RewriteWindow (const Frame &ack, TimeNs now)
{
  Frame out = ack;
  if (ack.kind != FrameKind::TcpAck)
    {
      return out;
    }
  auto limit = CurrentLimit (ack.flowId, now);
  if (!limit)
    {
      return out;
    }
  FlowProfile &p = m_flows.at (ack.flowId);
  auto cap = static_cast<std::uint32_t> (std::max<std::int64_t> (limit->wLimFloor, 1));
  out.advertisedWindow = std::min (ack.advertisedWindow, cap);
  p.lastWLim = limit->wLim;
  p.wLimSum += limit->wLim;
  ++p.rewrites;
  if (p.lastLogged < 0 || now - p.lastLogged >= SecondsToNs (m_cfg.logInterval))
    {
      p.lastLogged = now;
      FcwaDecision d;
      d.time = NsToSeconds (now);
      d.flowId = ack.flowId;
      d.original = ack.advertisedWindow;
      d.advertised = out.advertisedWindow;
      d.wLim = limit->wLim;
      d.ld = *p.ldEstimate;
      d.b = MeanBEstimate (now);
      d.nUp = ActiveFlows (Direction::Up, now);
      d.nDown = ActiveFlows (Direction::Down, now);
      m_decisions.push_back (d);
    }
  return out;
}

const FlowProfile *
Fcwa::Profile (std::uint32_t flowId) const
{
  auto it = m_flows.find (flowId);
  return it == m_flows.end () ? nullptr : &it->second;
}

} // namespace wlantcp

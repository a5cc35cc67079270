#include "wlantcp/tcp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wlantcp {

TcpSender::TcpSender (std::uint32_t flowId, Direction direction,
                      const TcpConfig &cfg,
                      std::optional<std::int64_t> totalPackets, bool unlimited)
  : m_flowId (flowId), m_direction (direction), m_cfg (cfg),
    m_total (totalPackets), m_unlimited (unlimited),
    m_cwnd (cfg.initialCwnd), m_advWindow (cfg.advWindow),
    m_rto (cfg.initialRto)
{
  if (cfg.advWindow < 1 || cfg.initialCwnd < 1)
    {
      throw Error (ErrorCode::InvalidArgument,
                   "advertised window and initial cwnd must be >= 1");
    }
  m_ssthresh = cfg.initialSsthresh > 0 ? cfg.initialSsthresh
                                       : static_cast<double> (cfg.advWindow);
  m_ssthresh = std::max (m_ssthresh, 2.0);
}

void
TcpSender::SetCongestionState (double cwnd, double ssthresh, SenderPhase phase)
{
  m_cwnd = cwnd;
  m_ssthresh = ssthresh;
  m_phase = phase;
}

double
TcpSender::Window () const
{
  return std::min (std::floor (m_cwnd), static_cast<double> (m_advWindow));
}

std::int64_t
TcpSender::DataLimit () const
{
  if (m_total)
    {
      return *m_total;
    }
  if (m_unlimited)
    {
      return std::numeric_limits<std::int64_t>::max ();
    }
  return m_appAvailable;
}

Frame
TcpSender::MakeData (std::int64_t seq, TimeNs now, bool retransmission)
{
  Frame f;
  f.flowId = m_flowId;
  f.direction = m_direction;
  f.kind = FrameKind::TcpData;
  f.size = m_cfg.dataSize;
  f.seq = seq;
  f.ackNo = 0;
  f.advertisedWindow = 0;
  f.tsVal = now;
  f.tsEcr = m_lastPeerTs;
  f.retransmission = retransmission;
  if (seq == 0)
    {
      f.flags |= kFlagSyn;
    }
  if (m_total && seq == *m_total - 1)
    {
      f.flags |= kFlagFin;
    }
  ++m_stats.dataSent;
  if (retransmission)
    {
      ++m_stats.retransmissions;
    }
  return f;
}

void
TcpSender::ArmRto (TimeNs now)
{
  if (m_sndUna < m_sndMax)
    {
      m_rtoDeadline = now + SecondsToNs (m_rto);
    }
  else
    {
      m_rtoDeadline.reset ();
    }
}

void
TcpSender::SendNew (TimeNs now, std::vector<Frame> &out)
{
  const std::int64_t limit = DataLimit ();
  const double window = Window ();
  while (static_cast<double> (m_sndNxt - m_sndUna) < window && m_sndNxt < limit)
    {
      bool again = m_sndNxt < m_sndMax;
      out.push_back (MakeData (m_sndNxt, now, again));
      if (!again && !m_timedSeq)
        {
          m_timedSeq = m_sndNxt;
          m_timedAt = now;
        }
      ++m_sndNxt;
      m_sndMax = std::max (m_sndMax, m_sndNxt);
      if (!m_rtoDeadline)
        {
          ArmRto (now);
        }
    }
}

void
TcpSender::Retransmit (std::int64_t seq, TimeNs now, std::vector<Frame> &out)
{
  out.push_back (MakeData (seq, now, true));
  // Karn: a retransmitted segment yields no RTT sample.
  if (m_timedSeq && *m_timedSeq >= seq)
    {
      m_timedSeq.reset ();
    }
}

void
TcpSender::UpdateRtt (double sample)
{
  if (!m_haveRtt)
    {
      m_srtt = sample;
      m_rttvar = sample / 2;
      m_haveRtt = true;
    }
  else
    {
      m_rttvar = 0.75 * m_rttvar + 0.25 * std::abs (m_srtt - sample);
      m_srtt = 0.875 * m_srtt + 0.125 * sample;
    }
  m_rto = std::clamp (m_srtt + 4 * m_rttvar, m_cfg.minRto, m_cfg.maxRto);
}

std::vector<Frame>
TcpSender::OnSendOpportunity (TimeNs now)
{
  std::vector<Frame> out;
  SendNew (now, out);
  return out;
}

std::vector<Frame>
TcpSender::OnAck (const Frame &ack, TimeNs now)
{
  std::vector<Frame> out;
  if (ack.ackNo > m_sndMax)
    {
      std::ostringstream os;
      os << "flow " << m_flowId << ": ACK " << ack.ackNo
         << " acknowledges unsent data (highest sent " << m_sndMax << ")";
      throw Error (ErrorCode::Runtime, os.str ());
    }
  ++m_stats.acksReceived;
  if (ack.advertisedWindow > 0)
    {
      m_advWindow = ack.advertisedWindow;
    }
  m_lastPeerTs = ack.tsVal;

  if (ack.ackNo > m_sndUna)
    {
      const std::int64_t newly = ack.ackNo - m_sndUna;
      if (m_timedSeq && ack.ackNo > *m_timedSeq)
        {
          UpdateRtt (NsToSeconds (now - m_timedAt));
          m_timedSeq.reset ();
        }
      m_sndUna = ack.ackNo;
      m_sndNxt = std::max (m_sndNxt, m_sndUna);
      m_dupAcks = 0;

      switch (m_phase)
        {
        case SenderPhase::FastRecovery:
          if (ack.ackNo > m_recover)
            {
              m_cwnd = m_ssthresh;
              m_phase = SenderPhase::CongestionAvoidance;
            }
          else
            {
              Retransmit (m_sndUna, now, out);
            }
          break;
        case SenderPhase::SlowStart:
          {
            // Growth stops at ssthresh; the rest of the ACK counts toward
            // congestion avoidance.
            double room = std::max (m_ssthresh - m_cwnd, 0.0);
            double credit = static_cast<double> (newly);
            double limit = m_afterRto ? m_cfg.slowStartLimitAfterRto
                                      : m_cfg.slowStartLimit;
            if (limit > 0)
              {
                credit = std::min (credit, limit);
              }
            double ss = std::min (credit, room);
            m_cwnd += ss;
            if (m_cwnd >= m_ssthresh)
              {
                m_phase = SenderPhase::CongestionAvoidance;
                m_afterRto = false;
                m_cwnd += (credit - ss) / m_cwnd;
              }
          }
          break;
        case SenderPhase::CongestionAvoidance:
          m_cwnd += static_cast<double> (newly) / m_cwnd;
          break;
        }
      m_cwnd = std::clamp (m_cwnd, 1.0, static_cast<double> (m_advWindow));
      m_rtoDeadline.reset ();
      ArmRto (now);
      if (m_total && m_sndUna >= *m_total && !m_completedAt)
        {
          m_completedAt = now;
        }
    }
  else if (ack.ackNo == m_sndUna && m_sndUna < m_sndMax)
    {
      ++m_dupAcks;
      if (m_phase != SenderPhase::FastRecovery
          && m_dupAcks == m_cfg.dupAckThreshold && m_sndUna > m_recover)
        {
          ++m_stats.fastRetransmits;
          m_ssthresh = std::max (m_cwnd / 2, 2.0);
          m_cwnd = m_ssthresh;
          m_phase = SenderPhase::FastRecovery;
          m_recover = m_sndMax - 1;
          Retransmit (m_sndUna, now, out);
          m_rtoDeadline.reset ();
          ArmRto (now);
        }
      else if (m_phase == SenderPhase::FastRecovery)
        {
          m_cwnd = std::min (m_cwnd + 1, static_cast<double> (m_advWindow));
        }
    }
  SendNew (now, out);
  return out;
}

std::vector<Frame>
TcpSender::OnTimeout (TimeNs now)
{
  std::vector<Frame> out;
  m_rtoDeadline.reset ();
  if (m_sndUna >= m_sndMax)
    {
      return out;
    }
  ++m_stats.timeouts;
  m_ssthresh = std::max (m_cwnd / 2, 2.0);
  m_cwnd = 1;
  m_phase = SenderPhase::SlowStart;
  m_afterRto = true;
  m_rto = std::min (2 * m_rto, m_cfg.maxRto);
  m_dupAcks = 0;
  m_recover = m_sndMax - 1;
  m_timedSeq.reset ();
  m_sndNxt = m_sndUna;
  SendNew (now, out);
  if (!m_rtoDeadline)
    {
      ArmRto (now);
    }
  return out;
}

TcpReceiver::TcpReceiver (std::uint32_t flowId, Direction direction,
                          const TcpConfig &cfg,
                          std::optional<std::int64_t> finSeq)
  : m_flowId (flowId), m_direction (direction), m_cfg (cfg), m_finSeq (finSeq)
{
  if (cfg.delAckFactor < 1)
    {
      throw Error (ErrorCode::InvalidArgument, "delayed-ACK factor must be >= 1");
    }
}

Frame
TcpReceiver::MakeAck (TimeNs now, std::uint8_t flags)
{
  Frame a;
  a.flowId = m_flowId;
  a.direction = m_direction;
  a.kind = FrameKind::TcpAck;
  a.size = m_cfg.ackSize;
  a.ackNo = m_rcvNext;
  a.advertisedWindow = m_cfg.advWindow;
  a.tsVal = now;
  a.tsEcr = m_echo;
  a.flags = flags;
  if (!m_sentFirst)
    {
      a.flags |= kFlagSyn;
      m_sentFirst = true;
    }
  if (m_finSeq && m_rcvNext > *m_finSeq)
    {
      a.flags |= kFlagFin;
    }
  ++m_stats.acksSent;
  m_pending = 0;
  m_delAckDeadline.reset ();
  return a;
}

TcpReceiver::DataResult
TcpReceiver::OnData (const Frame &data, TimeNs now)
{
  DataResult r;
  ++m_stats.dataReceived;
  m_echo = data.tsVal;

  if (data.seq < m_rcvNext || m_outOfOrder.count (data.seq) > 0)
    {
      ++m_stats.duplicates;
      r.ack = MakeAck (now, kFlagDupAck);
      return r;
    }
  if (data.seq > m_rcvNext)
    {
      m_outOfOrder.insert (data.seq);
      r.ack = MakeAck (now, kFlagDupAck);
      return r;
    }

  bool filledHole = !m_outOfOrder.empty ();
  std::int64_t before = m_rcvNext;
  ++m_rcvNext;
  while (!m_outOfOrder.empty () && *m_outOfOrder.begin () == m_rcvNext)
    {
      m_outOfOrder.erase (m_outOfOrder.begin ());
      ++m_rcvNext;
    }
  r.newlyDelivered = m_rcvNext - before;
  ++m_pending;

  bool fin = m_finSeq && m_rcvNext > *m_finSeq;
  if (filledHole || fin || m_pending >= m_cfg.delAckFactor)
    {
      r.ack = MakeAck (now, kFlagNone);
    }
  else if (!m_delAckDeadline)
    {
      m_delAckDeadline = now + SecondsToNs (m_cfg.delAckTimeout);
    }
  return r;
}

std::optional<Frame>
TcpReceiver::OnDelAckTimer (TimeNs now)
{
  if (!m_delAckDeadline || *m_delAckDeadline > now)
    {
      return std::nullopt;
    }
  m_delAckDeadline.reset ();
  if (m_pending == 0)
    {
      return std::nullopt;
    }
  ++m_stats.timerAcks;
  return MakeAck (now, kFlagNone);
}

} // namespace wlantcp

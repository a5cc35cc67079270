#ifndef WLANTCP_TCP_H
#define WLANTCP_TCP_H

// Packet-granular TCP NewReno endpoints. Both classes are passive state
// machines: the owner feeds them packets and timer expiries and transmits the
// frames they return. Timers are exposed as deadlines the owner schedules.

#include "wlantcp/types.h"

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

namespace wlantcp {

struct TcpConfig
{
  double initialCwnd = 2;
  double initialSsthresh = 0; // 0: use the advertised window
  std::uint32_t advWindow = 42;
  double initialRto = 1.0;
  double minRto = 0.2;
  double maxRto = 64.0;
  std::uint32_t dupAckThreshold = 3;
  std::uint32_t dataSize = 1500;
  std::uint32_t ackSize = 40;
  std::uint32_t delAckFactor = 1; // b
  double delAckTimeout = 0.1;
  /// Most packets one ACK may add to cwnd in slow start; 0 disables the cap.
  double slowStartLimit = 2;
  double slowStartLimitAfterRto = 1; // same, during slow start after a timeout
};

enum class SenderPhase : std::uint8_t
{
  SlowStart,
  CongestionAvoidance,
  FastRecovery,
};

struct SenderStats
{
  std::uint64_t dataSent = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t fastRetransmits = 0;
  std::uint64_t acksReceived = 0;
};

class TcpSender
{
public:
  /// `totalPackets` bounds the transfer (short-lived flows); nullopt means
  /// the application supplies data via AddAppData, or without limit when
  /// `unlimited` is set.
  TcpSender (std::uint32_t flowId, Direction direction, const TcpConfig &cfg,
             std::optional<std::int64_t> totalPackets, bool unlimited);

  void AddAppData (std::int64_t packets) { m_appAvailable += packets; }

  std::vector<Frame> OnSendOpportunity (TimeNs now);
  std::vector<Frame> OnAck (const Frame &ack, TimeNs now);
  std::vector<Frame> OnTimeout (TimeNs now);

  std::optional<TimeNs> RtoDeadline () const { return m_rtoDeadline; }

  double Cwnd () const { return m_cwnd; }
  double Ssthresh () const { return m_ssthresh; }
  std::uint32_t AdvWindow () const { return m_advWindow; }
  std::int64_t InFlight () const { return m_sndNxt - m_sndUna; }
  std::int64_t NextSeq () const { return m_sndNxt; }
  std::int64_t HighestAcked () const { return m_sndUna; }
  std::int64_t HighestSent () const { return m_sndMax; }
  std::uint32_t DupAckCount () const { return m_dupAcks; }
  double Rto () const { return m_rto; }
  double Srtt () const { return m_srtt; }
  SenderPhase Phase () const { return m_phase; }
  const SenderStats &Stats () const { return m_stats; }
  bool Completed () const { return m_completedAt.has_value (); }
  std::optional<TimeNs> CompletedAt () const { return m_completedAt; }
  std::uint32_t FlowId () const { return m_flowId; }

  /// Test hook: force the congestion state.
  void SetCongestionState (double cwnd, double ssthresh, SenderPhase phase);

private:
  Frame MakeData (std::int64_t seq, TimeNs now, bool retransmission);
  void SendNew (TimeNs now, std::vector<Frame> &out);
  void Retransmit (std::int64_t seq, TimeNs now, std::vector<Frame> &out);
  void ArmRto (TimeNs now);
  void UpdateRtt (double sample);
  double Window () const;
  std::int64_t DataLimit () const;

  std::uint32_t m_flowId;
  Direction m_direction;
  TcpConfig m_cfg;
  std::optional<std::int64_t> m_total;
  bool m_unlimited;
  std::int64_t m_appAvailable = 0;

  double m_cwnd;
  double m_ssthresh;
  std::uint32_t m_advWindow;
  std::int64_t m_sndUna = 0;
  std::int64_t m_sndNxt = 0;
  std::int64_t m_sndMax = 0;
  std::int64_t m_recover = -1;
  std::uint32_t m_dupAcks = 0;
  SenderPhase m_phase = SenderPhase::SlowStart;
  bool m_afterRto = false;

  double m_rto;
  double m_srtt = 0;
  double m_rttvar = 0;
  bool m_haveRtt = false;
  std::optional<std::int64_t> m_timedSeq;
  TimeNs m_timedAt = 0;
  std::optional<TimeNs> m_rtoDeadline;
  TimeNs m_lastPeerTs = 0;

  std::optional<TimeNs> m_completedAt;
  SenderStats m_stats;
};

struct ReceiverStats
{
  std::uint64_t dataReceived = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t acksSent = 0;
  std::uint64_t timerAcks = 0;
};

class TcpReceiver
{
public:
  TcpReceiver (std::uint32_t flowId, Direction direction, const TcpConfig &cfg,
               std::optional<std::int64_t> finSeq);

  struct DataResult
  {
    std::optional<Frame> ack;
    std::int64_t newlyDelivered = 0; // in-order packets handed to the app
  };

  DataResult OnData (const Frame &data, TimeNs now);
  std::optional<Frame> OnDelAckTimer (TimeNs now);

  std::optional<TimeNs> DelAckDeadline () const { return m_delAckDeadline; }
  std::int64_t RcvNext () const { return m_rcvNext; }
  std::uint32_t PendingUnacked () const { return m_pending; }
  const ReceiverStats &Stats () const { return m_stats; }

private:
  Frame MakeAck (TimeNs now, std::uint8_t flags);

  std::uint32_t m_flowId;
  Direction m_direction;
  TcpConfig m_cfg;
  std::optional<std::int64_t> m_finSeq;
  std::int64_t m_rcvNext = 0;
  std::set<std::int64_t> m_outOfOrder;
  std::uint32_t m_pending = 0;
  std::optional<TimeNs> m_delAckDeadline;
  TimeNs m_echo = 0;
  bool m_sentFirst = false;
  ReceiverStats m_stats;
};

} // namespace wlantcp

#endif

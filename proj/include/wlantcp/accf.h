#ifndef WLANTCP_ACCF_H
#define WLANTCP_ACCF_H

// ACK Congestion Control and Filtering: an AP-side block that holds at most
// one TCP ACK per uplink flow and releases it to the MAC queue on a schedule
// paced by the measured downlink data interarrival time.

#include "wlantcp/types.h"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace wlantcp {

enum class GammaMode : std::uint8_t
{
  Step, // gamma_min below num_thresh, 1 otherwise
  Ramp, // linear from gamma_min at 1 to 1 at num_thresh
};

struct AccfParams
{
  double alpha = 1.5;
  double beta = 2.0;
  double gammaMin = 0.5;
  std::uint32_t numThresh = 10;
  GammaMode gammaMode = GammaMode::Step;
  double ewmaWeight = 0.1;
  double estimatorTimeout = 30.0;

  void Validate () const;
};

double Gamma (std::uint32_t numCum, const AccfParams &params);

enum class AccfBranch : std::uint8_t
{
  Bypass,
  ReleaseNow,
  Buffer,      // D >= 0
  BurstBuffer, // D < 0 but D + beta * AvgInt_i < 0
  NoReference, // no downlink rate estimate: released at once
};

const char *ToString (AccfBranch b);

struct BufferingDecision
{
  AccfBranch branch = AccfBranch::ReleaseNow;
  double d = 0;     // D in seconds
  double delay = 0; // buffering time in seconds for the buffer branches
};

/// The scheduling rule on its own. `avgDataInt` and `avgIntFlow` are absent
/// when no estimate exists.
BufferingDecision DecideBuffering (std::uint32_t numCum, double tBuf,
                                   std::optional<double> avgDataInt,
                                   std::optional<double> avgIntFlow,
                                   const AccfParams &params);

/// Per-flow EWMA of packet interarrival times at the AP.
class RateEstimator
{
public:
  explicit RateEstimator (const AccfParams &params) : m_params (params) {}

  void Update (std::uint32_t flowId, Direction direction, TimeNs now);

  std::optional<double> AvgInt (std::uint32_t flowId) const;

  /// Mean of the downlink avg_int values below alpha times their minimum,
  /// over estimators heard from within the timeout.
  std::optional<double> AvgDataInt (TimeNs now) const;

  /// Test hook: install an estimate directly.
  void Set (std::uint32_t flowId, Direction direction, double avgInt,
            TimeNs lastSeen);

private:
  struct Entry
  {
    Direction direction = Direction::Down;
    TimeNs lastArrival = 0;
    std::optional<double> avgInt;
  };
  AccfParams m_params;
  std::map<std::uint32_t, Entry> m_entries;
};

struct AckSlot
{
  std::uint32_t flowId = 0;
  std::optional<Frame> buffered;
  std::uint32_t numCum = 0;
  std::optional<std::int64_t> lastReleasedAck;
  TimeNs lastRelease = 0;
  std::optional<TimeNs> deadline;
};

struct AccfLogEntry
{
  double time = 0;
  std::uint32_t flowId = 0;
  std::uint32_t numCum = 0;
  double tBuf = 0;
  double d = 0;
  AccfBranch branch = AccfBranch::ReleaseNow;
};

struct AccfCounters
{
  std::uint64_t arrivals = 0;
  std::uint64_t bypassed = 0;
  std::uint64_t releasedNow = 0;
  std::uint64_t buffered = 0;
  std::uint64_t replaced = 0;  // buffered ACKs superseded by a newer one
  std::uint64_t discarded = 0; // buffered ACKs made obsolete by a bypass
  std::uint64_t timerReleases = 0;
  std::uint64_t spuriousTimers = 0;
};

struct AccfAction
{
  AccfBranch branch = AccfBranch::ReleaseNow;
  /// ACK to hand to the MAC queue now (bypass or immediate release).
  std::optional<Frame> release;
  /// When set, the owner arms the flow's timer for this instant, replacing
  /// any earlier one. When unset, any armed timer for the flow is void.
  std::optional<TimeNs> deadline;
};

class Accf
{
public:
  explicit Accf (const AccfParams &params);

  /// Rate bookkeeping for packets that are not uplink-flow ACKs.
  void ObservePacket (const Frame &packet, TimeNs now);

  /// Handles an ACK of an uplink flow arriving from the wired side.
  AccfAction OnAckArrival (const Frame &ack, TimeNs now);

  /// Releases the buffered ACK of `flowId`. Returns nothing (and counts a
  /// spurious expiry) if the slot is empty.
  std::optional<Frame> OnTimerExpire (std::uint32_t flowId, TimeNs now);

  void EnableLog (bool on) { m_logEnabled = on; }
  const std::vector<AccfLogEntry> &Log () const { return m_log; }
  const AccfCounters &Counters () const { return m_counters; }
  const AckSlot *Slot (std::uint32_t flowId) const;
  std::size_t BufferedCount () const;
  RateEstimator &Rates () { return m_rates; }
  const RateEstimator &Rates () const { return m_rates; }

private:
  AckSlot &SlotFor (std::uint32_t flowId, TimeNs now);
  void MarkReleased (AckSlot &s, std::int64_t ackNo, TimeNs now);
  void Record (TimeNs now, const AckSlot &s, double tBuf, double d,
               AccfBranch b);

  AccfParams m_params;
  RateEstimator m_rates;
  std::map<std::uint32_t, AckSlot> m_slots;
  bool m_logEnabled = false;
  std::vector<AccfLogEntry> m_log;
  AccfCounters m_counters;
};

} // namespace wlantcp

#endif

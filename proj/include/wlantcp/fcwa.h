#ifndef WLANTCP_FCWA_H
#define WLANTCP_FCWA_H

// Fair Congestion Window Assignment: an AP-side block that estimates each
// flow's wired delay and delayed-ACK factor from relayed headers and caps the
// advertised window of every relayed ACK at the flow's fair window limit.

#include "wlantcp/analytic_model.h"
#include "wlantcp/types.h"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

namespace wlantcp {

/// Where the AP sees a packet relative to its wired interface.
enum class ApHop : std::uint8_t
{
  FromWired, // arrived from the wired network, heading to a station
  ToWired,   // received over the air, being forwarded to the wired network
};

enum class CtMode : std::uint8_t
{
  Model,    // CT_AP from the cycle-time model
  Measured, // CT_AP from observed AP inter-success gaps
};

struct FcwaConfig
{
  double bsAp = 100;
  MacTiming timing;
  std::uint32_t dataSize = 1500;
  std::uint32_t ackSize = 40;
  double ewmaWeight = 0.1;
  double sampleTimeout = 10.0; // unmatched delay samples expire
  double flowTimeout = 10.0;   // silent flows stop counting toward n_up/n_down
  CtMode ctMode = CtMode::Model;
  std::size_t measureWindow = 500; // AP successes in the measured-mode window
  double logInterval = 1.0;        // per-flow spacing of decision log entries
};

struct FlowProfile
{
  std::uint32_t flowId = 0;
  Direction direction = Direction::Down;
  std::optional<double> ldEstimate;
  double bEstimate = 1.0;
  std::uint64_t ldSamples = 0;
  std::uint64_t bSamples = 0;
  std::optional<std::int64_t> lastAckNo;
  bool inRecovery = false; // duplicate ACKs seen since the last new ACK
  TimeNs lastSeen = 0;
  bool finished = false;
  std::optional<double> lastWLim;
  double wLimSum = 0;
  std::uint64_t rewrites = 0;
  TimeNs lastLogged = -1;
  // Uplink: departure time of data toward the wired receiver, by sequence.
  std::map<std::int64_t, TimeNs> dataDepartures;
  // Downlink: departure time of ACKs toward the wired sender, by TSval.
  std::map<TimeNs, TimeNs> ackDepartures;
};

struct FcwaDecision
{
  double time = 0;
  std::uint32_t flowId = 0;
  std::uint32_t original = 0;
  std::uint32_t advertised = 0;
  double wLim = 0;
  double ld = 0;
  double b = 0;
  std::uint32_t nUp = 0;
  std::uint32_t nDown = 0;
};

class Fcwa
{
public:
  explicit Fcwa (const FcwaConfig &cfg);

  /// Updates the flow's profile (delay and b samples, activity).
  void Observe (const Frame &packet, ApHop hop, TimeNs now);

  /// Caps the advertised window of a relayed ACK. Passes the ACK through
  /// unchanged until the flow has a delay estimate.
  Frame RewriteWindow (const Frame &ack, TimeNs now);

  /// Measured mode: called on every successful AP transmission with whether
  /// the AP still has a backlog afterwards.
  void ObserveApSuccess (TimeNs now, bool backlogged);

  /// Current fair-window computation for a flow, if estimable.
  std::optional<WindowLimitResult> CurrentLimit (std::uint32_t flowId,
                                                 TimeNs now) const;

  std::uint32_t ActiveFlows (Direction d, TimeNs now) const;
  double MeanBEstimate (TimeNs now) const;
  std::optional<double> MeasuredCtAp () const;

  const FlowProfile *Profile (std::uint32_t flowId) const;
  const std::vector<FcwaDecision> &Decisions () const { return m_decisions; }

private:
  FlowProfile &Touch (const Frame &packet, TimeNs now);
  void AddLdSample (FlowProfile &p, double rtt);
  void AddBSample (FlowProfile &p, const Frame &ack);
  void Expire (FlowProfile &p, TimeNs now);
  bool IsActive (const FlowProfile &p, TimeNs now) const;

  FcwaConfig m_cfg;
  CycleTimeTable m_table;
  std::map<std::uint32_t, FlowProfile> m_flows;
  std::deque<double> m_apGaps;
  double m_apGapSum = 0;
  std::optional<TimeNs> m_lastApSuccess;
  std::vector<FcwaDecision> m_decisions;
};

} // namespace wlantcp

#endif

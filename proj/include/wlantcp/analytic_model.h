#ifndef WLANTCP_ANALYTIC_MODEL_H
#define WLANTCP_ANALYTIC_MODEL_H

// Closed-form fair-window model: AIMD stepping, RTT decomposition, DCF cycle
// times for an AP contending with one station, the per-flow congestion window
// limit and its inverse (AP buffer sizing).
//
// All functions are pure and throw wlantcp::Error(InvalidArgument) on
// out-of-range inputs.

#include "wlantcp/types.h"

#include <cstdint>

namespace wlantcp {

/// 802.11 DCF timing. Defaults are the 802.11g (ERP-OFDM) values.
struct MacTiming
{
  double slotTime = 9e-6;
  double sifs = 10e-6;
  double difs = 28e-6;
  double dataRate = 54e6;
  double basicRate = 6e6;
  std::uint32_t cwMin = 15;
  std::uint32_t cwMax = 1023;
  std::uint32_t retryLimit = 7;
  double macAckDuration = 44e-6; // 14-byte ACK at basic rate incl. preamble
  double phyHeaderDuration = 20e-6;
  std::uint32_t macHeaderBytes = 36; // MAC header + FCS + LLC/SNAP

  void Validate () const;

  /// Busy time of one exchange: preamble, payload, SIFS, MAC ACK, DIFS.
  /// A failed attempt (collision or corruption) occupies the same time since
  /// the sender waits out the ACK timeout.
  double FrameAirtime (std::uint32_t transportBytes) const;

  /// Contention window after `stage` failed attempts.
  std::uint32_t ContentionWindow (std::uint32_t stage) const;
};

enum class PacketType : std::uint8_t
{
  Data = 0,
  Ack = 1,
};

struct TrafficMix
{
  double nUp = 0;
  double nDown = 0;
  double b = 1; // data packets per TCP ACK; real-valued
  std::uint32_t dataSize = 1500;
  std::uint32_t ackSize = 40;

  void Validate () const;
  /// n_up/b + n_down: packets the AP sends per round of fair service.
  double ApPacketsPerRound () const { return nUp / b + nDown; }
};

struct CycleTimeTable
{
  double ct[2][2] = {{0, 0}, {0, 0}};

  double operator() (PacketType ap, PacketType sta) const
  {
    return ct[static_cast<int> (ap)][static_cast<int> (sta)];
  }
};

struct PacketTypeProbs
{
  double apData = 0;
  double apAck = 0;
  double staData = 0;
  double staAck = 0;
};

struct WindowLimitResult
{
  double ctAp = 0;
  double ctFlow = 0;
  double wLim = 0;
  std::int64_t wLimFloor = 0;
  double wiredFlightTerm = 0;
  double bufferTerm = 0;
};

enum class AimdEvent
{
  AdditiveIncrease,
  MultiplicativeDecrease,
};

double AimdStep (double window, AimdEvent event, double alpha, double beta);

/// RTT = 2 LD + QD_AP + QD_STA + AD_AP + AD_STA.
double Rtt (double ld, double qdAp, double qdSta, double adAp, double adSta);

PacketTypeProbs ComputePacketTypeProbs (const TrafficMix &mix);

/// Long-run behaviour of two saturated stations running binary exponential
/// backoff truncated at the retry limit. Solved exactly on the backoff chain
/// embedded at transmission events; depends only on cw_min, cw_max and the
/// retry limit, and is cached per combination.
struct TwoStationContention
{
  double collisionProbability = 0; // per attempt
  double successShare = 0;         // events that are a success of one given station
  double collisionShare = 0;       // events that are collisions
  double meanIdleSlots = 0;        // idle slots before an event
};

TwoStationContention SolveTwoStationContention (const MacTiming &timing);

/// Mean interval between successes of a tagged station when it and one other
/// saturated station contend, holding frames of the given transport sizes.
double CycleTimePair (std::uint32_t p1Size, std::uint32_t p2Size,
                      const MacTiming &timing);

CycleTimeTable ComputeCycleTimeTable (const TrafficMix &mix,
                                      const MacTiming &timing);

double CtAp (const TrafficMix &mix, const MacTiming &timing);

/// CT_AP from a precomputed cycle-time table (the table depends only on the
/// MAC timing and the two frame sizes).
double CtAp (const TrafficMix &mix, const CycleTimeTable &table);

double CtFlow (const TrafficMix &mix, double ctAp);

/// Largest congestion window per flow that keeps the AP queue of `bsAp`
/// packets from overflowing. `ld` is the flow's one-way wired delay.
WindowLimitResult WindowLimit (double ld, const TrafficMix &mix, double bsAp,
                               const MacTiming &timing);

/// Same as WindowLimit with a caller-supplied CT_AP (measurement-based mode).
WindowLimitResult WindowLimitWithCtAp (double ld, const TrafficMix &mix,
                                       double bsAp, double ctAp);

/// AP buffer (packets) for which `wLim` is the fair window limit.
double BufferSize (double wLim, double ld, const TrafficMix &mix,
                   const MacTiming &timing);

double BufferSizeWithCtAp (double wLim, double ld, const TrafficMix &mix,
                           double ctAp);

} // namespace wlantcp

#endif

#ifndef WLANTCP_SIMULATION_H
#define WLANTCP_SIMULATION_H

// One BSS run: an AP (node 0) and one station per flow, TCP endpoints on
// either side, a fixed-delay wired segment per flow and an optional control
// block on the AP's packet path.

#include "wlantcp/accf.h"
#include "wlantcp/dcf_mac.h"
#include "wlantcp/fcwa.h"
#include "wlantcp/scenario.h"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wlantcp {

struct FlowReport
{
  FlowSpec spec;
  std::uint32_t station = 0;
  std::uint64_t deliveredPackets = 0; // in-order packets at the receiver
  std::uint64_t steadyPackets = 0;    // delivered after the warm-up
  double throughput = 0;              // goodput after warm-up, bits/s
  std::vector<std::uint64_t> binBytes; // delivered bytes per base bin

  std::uint64_t dataSent = 0;
  std::uint64_t retransmissions = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t fastRetransmits = 0;
  std::uint64_t acksSent = 0;

  std::uint64_t offered = 0;    // this flow's frames offered to MAC queues
  std::uint64_t apOffered = 0;  // of which to the AP queue
  std::uint64_t apDrops = 0;    // AP queue overflow
  std::uint64_t staDrops = 0;   // station queue overflow
  std::uint64_t retryDrops = 0; // retry limit exhausted
  std::uint64_t apOfferedSteady = 0;
  std::uint64_t apDropsSteady = 0;
  double plr = 0; // queue drops over offered frames

  std::uint64_t appPackets = 0; // telnet packets generated
  std::optional<double> completionTime; // short flows, seconds from start
  double finalCwnd = 0;
  std::optional<double> lastWLim;
  double meanWLim = 0;
  std::optional<double> ldEstimate;
  double bEstimate = 0;
};

struct RunReport
{
  std::string scenario;
  std::uint64_t seed = 0;
  double duration = 0;
  double warmup = 0;
  double bin = 1.0;
  ControlBlock controlBlock = ControlBlock::None;
  std::vector<FlowReport> flows;
  std::vector<MacStats> nodes; // node 0 is the AP

  std::uint64_t apOffered = 0;
  std::uint64_t apDrops = 0;
  std::uint64_t apOfferedSteady = 0;
  std::uint64_t apDropsSteady = 0;
  std::size_t apQueuePeak = 0;

  std::vector<FcwaDecision> fcwaLog;
  std::vector<AccfLogEntry> accfLog;
  AccfCounters accfCounters;
  std::uint64_t events = 0;

  double SteadyApDropRatio () const;
};

/// A single run with an explicitly attached control block.
class Simulation
{
public:
  Simulation (const ScenarioSpec &spec, std::uint64_t seed);
  ~Simulation ();
  Simulation (const Simulation &) = delete;
  Simulation &operator= (const Simulation &) = delete;

  /// Must precede Run; a second attachment throws Error(Runtime).
  void AttachControlBlock (ControlBlock block);

  RunReport Run ();

private:
  struct Impl;
  std::unique_ptr<Impl> m_impl;
};

/// Runs one seed of a scenario with the spec's control block. Validates the
/// spec first; throws Error(Runtime) if a protocol or conservation check
/// fails.
RunReport RunScenario (const ScenarioSpec &spec, std::uint64_t seed);

struct CycleTimeMeasurement
{
  double mean = 0;
  double stderrMean = 0;
  double collisionProbability = 0; // per attempt, tagged station
  std::uint64_t cycles = 0;
};

/// Two saturated nodes holding frames of `p1Size` (tagged) and `p2Size`
/// bytes; mean interval between successes of the tagged node.
CycleTimeMeasurement MeasureCycleTime (std::uint32_t p1Size,
                                       std::uint32_t p2Size,
                                       const MacTiming &timing,
                                       std::uint64_t nCycles,
                                       std::uint64_t seed);

struct SaturationResult
{
  std::vector<std::uint64_t> successes; // node 0 is the AP
  std::uint64_t total = 0;
};

/// Raw saturation: AP plus `stations` stations, all permanently backlogged
/// with `frameSize`-byte frames, until `totalSuccesses` exchanges succeed.
SaturationResult RunSaturation (std::uint32_t stations, std::uint32_t frameSize,
                                const MacTiming &timing, double per,
                                std::uint64_t totalSuccesses,
                                std::uint64_t seed);

/// Derives a stream seed from a run seed and a stream index.
std::uint64_t DeriveSeed (std::uint64_t seed, std::uint64_t stream);

} // namespace wlantcp

#endif

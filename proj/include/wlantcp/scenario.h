#ifndef WLANTCP_SCENARIO_H
#define WLANTCP_SCENARIO_H

// Declarative experiment description and its line-oriented text format:
//
//   key = value
//   flow {
//     key = value
//   }
//
// `#` starts a comment. Lists are comma separated.

#include "wlantcp/accf.h"
#include "wlantcp/analytic_model.h"
#include "wlantcp/fcwa.h"
#include "wlantcp/types.h"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wlantcp {

enum class FlowKind : std::uint8_t
{
  Ftp,    // long-lived bulk transfer
  Telnet, // Poisson packet arrivals at a fixed mean rate
  Short,  // fixed number of packets
};

enum class ControlBlock : std::uint8_t
{
  None,
  Fcwa,
  Accf,
};

enum class SimMode : std::uint8_t
{
  Tcp,
  Saturation, // raw saturated AP and stations, no transport
};

enum class LdSchedule : std::uint8_t
{
  Constant,   // every flow gets ld
  Arithmetic, // ld + i * ld_step
  Triangular, // each flow's increment grows by ld_step: ld, ld+2s, ld+5s, ...
};

/// A group of identical flows expanded at run time.
struct FlowGroup
{
  Direction direction = Direction::Down;
  std::uint32_t count = 1;
  FlowKind kind = FlowKind::Ftp;
  double ld = 0.05;
  double ldStep = 0;
  LdSchedule ldSchedule = LdSchedule::Constant;
  std::uint32_t ldIndexOffset = 0; // continue a schedule across groups
  std::vector<std::uint32_t> advWindows{42}; // cycled over the group
  double start = 0;
  double startStep = 0;
  std::vector<double> telnetRates{200e3}; // bits/s, cycled
  std::uint32_t shortPackets = 31;

  bool operator== (const FlowGroup &) const = default;
};

/// One expanded flow.
struct FlowSpec
{
  std::uint32_t id = 0;
  std::uint32_t group = 0;
  Direction direction = Direction::Down;
  FlowKind kind = FlowKind::Ftp;
  double ld = 0;
  std::uint32_t advWindow = 42;
  double start = 0;
  double telnetRate = 0;
  std::uint32_t shortPackets = 0;
};

struct ScenarioSpec
{
  std::string name = "scenario";
  SimMode mode = SimMode::Tcp;
  std::uint32_t saturationStations = 5;
  double duration = 350;
  double warmup = 20;
  double bin = 1.0;
  std::vector<std::uint64_t> seeds{1};
  std::uint32_t bsAp = 100;
  std::uint32_t staQueue = 100;
  std::uint32_t dataSize = 1500;
  std::uint32_t ackSize = 40;
  std::uint32_t b = 1;
  double per = 0;
  ControlBlock controlBlock = ControlBlock::None;
  AccfParams accf;
  bool accfLog = false;
  CtMode fcwaCtMode = CtMode::Model;
  double fcwaEwmaWeight = 0.1;
  double fcwaFlowTimeout = 10.0;
  MacTiming mac;
  double initialCwnd = 2;
  double initialRto = 1.0;
  double minRto = 0.2;
  double maxRto = 64.0;
  double delAckTimeout = 0.1;
  std::string trace; // MAC event trace path, empty for none
  std::vector<FlowGroup> flows;

  /// Expanded flows in group order.
  std::vector<FlowSpec> ExpandFlows () const;
  std::uint32_t CountFlows (Direction d) const;

  /// Throws Error(Validation) describing the first violated precondition.
  void Validate () const;

  /// Sets one key. Flow-group keys are addressed as `flow[i].key`. Throws
  /// Error(Parse) on unknown keys or malformed values.
  void Set (std::string_view key, std::string_view value);

  std::string Serialize () const;
  static ScenarioSpec Parse (std::string_view text);
  static ScenarioSpec ParseFile (const std::string &path);
};

const char *ToString (FlowKind k);
const char *ToString (ControlBlock c);

} // namespace wlantcp

#endif

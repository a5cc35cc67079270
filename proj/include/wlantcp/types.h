#ifndef WLANTCP_TYPES_H
#define WLANTCP_TYPES_H

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wlantcp {

/// Simulation time in integer nanoseconds.
using TimeNs = std::int64_t;

constexpr TimeNs kNsPerSecond = 1'000'000'000;

constexpr TimeNs
SecondsToNs (double s)
{
  return static_cast<TimeNs> (s * 1e9 + (s >= 0 ? 0.5 : -0.5));
}

constexpr double
NsToSeconds (TimeNs t)
{
  return static_cast<double> (t) / 1e9;
}

enum class Direction : std::uint8_t
{
  Up,   // station -> wired host
  Down, // wired host -> station
};

enum class FrameKind : std::uint8_t
{
  TcpData,
  TcpAck,
  Raw, // saturation traffic, no transport semantics
};

enum TcpFlag : std::uint8_t
{
  kFlagNone = 0,
  kFlagDupAck = 1 << 0,
  kFlagSyn = 1 << 1,
  kFlagFin = 1 << 2,
};

/// Unit traversing the MAC. Sequence numbers count packets, not bytes.
struct Frame
{
  std::uint32_t flowId = 0;
  Direction direction = Direction::Down;
  FrameKind kind = FrameKind::TcpData;
  std::uint32_t size = 0; // transport-layer bytes (IP datagram)
  std::int64_t seq = 0;
  std::int64_t ackNo = 0;
  std::uint32_t advertisedWindow = 0;
  std::uint8_t flags = kFlagNone;
  TimeNs enqueueTime = 0;
  // TCP timestamp option; tsEcr echoes the peer's most recent tsVal.
  TimeNs tsVal = 0;
  TimeNs tsEcr = 0;
  bool retransmission = false;

  bool HasFlags () const { return flags != kFlagNone; }
};

/// Error categories shared by the C++ core and the C API.
enum class ErrorCode : int
{
  InvalidArgument = 1,
  Parse = 2,
  Validation = 3,
  Runtime = 4,
  Io = 5,
};

class Error : public std::runtime_error
{
public:
  Error (ErrorCode code, const std::string &what)
    : std::runtime_error (what), m_code (code)
  {
  }
  ErrorCode Code () const { return m_code; }

private:
  ErrorCode m_code;
};

inline const char *
ToString (Direction d)
{
  return d == Direction::Up ? "up" : "down";
}

} // namespace wlantcp

#endif

#ifndef WLANTCP_DCF_MAC_H
#define WLANTCP_DCF_MAC_H

#include "wlantcp/analytic_model.h"
#include "wlantcp/event_queue.h"
#include "wlantcp/types.h"

#include <cstdint>
#include <deque>
#include <ostream>
#include <random>
#include <vector>

namespace wlantcp {

enum class NodeRole : std::uint8_t
{
  AccessPoint,
  Station,
};

struct MacStats
{
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
  std::uint64_t collisions = 0;   // attempts that overlapped another sender
  std::uint64_t corruptions = 0;  // attempts lost to the error channel
  std::uint64_t retryDrops = 0;   // frames discarded after the retry limit
  std::uint64_t queueDrops = 0;   // arrivals rejected by a full queue
  std::uint64_t enqueued = 0;
};

struct NodeState
{
  std::uint32_t id = 0;
  NodeRole role = NodeRole::Station;
  std::uint32_t backoffCounter = 0; // slots left as of the idle-period start
  std::uint32_t contentionWindow = 0;
  std::uint32_t retryCount = 0;
  std::size_t capacity = 100;
  struct Queued
  {
    Frame frame;
    std::uint32_t dst;
  };
  std::deque<Queued> queue;
  TimeNs busyUntil = 0;
  MacStats stats;

  // Raw saturation: the queue is refilled with `saturationFrame` whenever it
  // empties.
  bool saturated = false;
  Frame saturationFrame;
  std::uint32_t saturationDst = 0;

  // Scheduled transmission instant within the current idle period.
  TimeNs txAt = 0;
};

/// Receives MAC-level outcomes. Callbacks run inside the transmission-end
/// event and may enqueue new frames.
class MacListener
{
public:
  virtual ~MacListener () = default;
  virtual void OnDelivered (std::uint32_t from, std::uint32_t to,
                            const Frame &frame) = 0;
  virtual void OnRetryDrop (std::uint32_t node, const Frame &frame) = 0;
};

/// DCF CSMA/CA over a single collision domain with basic access (no RTS/CTS).
///
/// Idle time is counted in slots from the end of the last busy period (whose
/// duration already includes DIFS). A node whose counter reaches zero
/// transmits at that slot boundary; nodes reaching zero at the same boundary
/// collide. Counters keep running while the queue is empty (post-backoff); a
/// frame arriving to an empty queue while the medium is busy and the counter
/// is exhausted draws a fresh backoff.
class DcfMac
{
public:
  DcfMac (EventQueue &events, const MacTiming &timing, double per,
          std::uint64_t seed, MacListener *listener);

  std::uint32_t AddNode (NodeRole role, std::size_t capacity);

  /// Marks `node` as permanently backlogged with copies of `frame`.
  void SetSaturated (std::uint32_t node, const Frame &frame, std::uint32_t dst);

  /// Returns false (and counts a queue drop) if the queue is full.
  bool Enqueue (std::uint32_t node, const Frame &frame, std::uint32_t dst);

  std::size_t QueueLength (std::uint32_t node) const;
  const NodeState &Node (std::uint32_t node) const { return m_nodes.at (node); }
  std::size_t NodeCount () const { return m_nodes.size (); }
  const MacTiming &Timing () const { return m_timing; }

  /// One line per MAC event: time, node, event kind, flow, outcome.
  void SetTrace (std::ostream *trace) { m_trace = trace; }

  /// Successful exchanges observed on the medium, any sender.
  std::uint64_t TotalSuccesses () const { return m_totalSuccesses; }

private:
  void ScheduleAccess ();
  void OnAccess ();
  void OnTransmissionEnd ();
  std::uint32_t DrawBackoff (std::uint32_t cw);
  TimeNs SlotsToNs (std::uint64_t slots) const { return slots * m_slotNs; }
  void Trace (std::uint32_t node, const char *event, const Frame &f,
              const char *outcome);

  EventQueue &m_events;
  MacTiming m_timing;
  double m_per;
  std::mt19937_64 m_rng;
  MacListener *m_listener;
  std::ostream *m_trace = nullptr;

  std::vector<NodeState> m_nodes;
  TimeNs m_slotNs;

  bool m_busy = false;
  TimeNs m_idleStart = 0;
  EventId m_accessEvent = 0;
  TimeNs m_accessAt = -1;
  std::vector<std::uint32_t> m_transmitters;
  std::uint64_t m_totalSuccesses = 0;
};

} // namespace wlantcp

#endif

#include "wlantcp/dcf_mac.h"

#include <algorithm>
#include <limits>

namespace wlantcp {

DcfMac::DcfMac (EventQueue &events, const MacTiming &timing, double per,
                std::uint64_t seed, MacListener *listener)
  : m_events (events), m_timing (timing), m_per (per), m_rng (seed),
    m_listener (listener)
{
  m_timing.Validate ();
  if (per < 0 || per >= 1)
    {
      throw Error (ErrorCode::InvalidArgument, "PER must be in [0, 1)");
    }
  m_slotNs = SecondsToNs (m_timing.slotTime);
  m_idleStart = m_events.Now ();
}

std::uint32_t
DcfMac::AddNode (NodeRole role, std::size_t capacity)
{
  NodeState n;
  n.id = static_cast<std::uint32_t> (m_nodes.size ());
  n.role = role;
  n.capacity = capacity;
  n.contentionWindow = m_timing.cwMin;
  n.backoffCounter = DrawBackoff (n.contentionWindow);
  m_nodes.push_back (std::move (n));
  return m_nodes.back ().id;
}

void
DcfMac::SetSaturated (std::uint32_t node, const Frame &frame, std::uint32_t dst)
{
  NodeState &n = m_nodes.at (node);
  n.saturated = true;
  n.saturationFrame = frame;
  n.saturationDst = dst;
  if (n.queue.empty ())
    {
      Enqueue (node, frame, dst);
    }
}

std::uint32_t
DcfMac::DrawBackoff (std::uint32_t cw)
{
  return std::uniform_int_distribution<std::uint32_t> (0, cw) (m_rng);
}

std::size_t
DcfMac::QueueLength (std::uint32_t node) const
{
  return m_nodes.at (node).queue.size ();
}

void
DcfMac::Trace (std::uint32_t node, const char *event, const Frame &f,
               const char *outcome)
{
  if (m_trace == nullptr)
    {
      return;
    }
  *m_trace << NsToSeconds (m_events.Now ()) << ' ' << node << ' ' << event
           << ' ' << f.flowId << ' ' << outcome << '\n';
}

bool
DcfMac::Enqueue (std::uint32_t node, const Frame &frame, std::uint32_t dst)
{
  NodeState &n = m_nodes.at (node);
  if (n.queue.size () >= n.capacity)
    {
      ++n.stats.queueDrops;
      Trace (node, "enqueue", frame, "queue-full");
      return false;
    }
  Frame f = frame;
  f.enqueueTime = m_events.Now ();
  bool wasEmpty = n.queue.empty ();
  n.queue.push_back ({f, dst});
  ++n.stats.enqueued;
  if (!wasEmpty)
    {
      return true;
    }
  TimeNs now = m_events.Now ();
  if (m_busy)
    {
      if (n.backoffCounter == 0)
        {
          n.backoffCounter = DrawBackoff (n.contentionWindow);
        }
      return true;
    }
  // Idle medium: the counter has been running since m_idleStart.
  std::uint64_t elapsed = (now - m_idleStart + m_slotNs - 1) / m_slotNs;
  std::uint64_t slots = std::max<std::uint64_t> (n.backoffCounter, elapsed);
  n.txAt = m_idleStart + SlotsToNs (slots);
  ScheduleAccess ();
  return true;
}

void
DcfMac::ScheduleAccess ()
{
  if (m_busy)
    {
      return;
    }
  TimeNs earliest = std::numeric_limits<TimeNs>::max ();
  for (const NodeState &n : m_nodes)
    {
      if (!n.queue.empty ())
        {
          earliest = std::min (earliest, n.txAt);
        }
    }
  if (earliest == std::numeric_limits<TimeNs>::max ())
    {
      if (m_accessEvent != 0)
        {
          m_events.Cancel (m_accessEvent);
          m_accessEvent = 0;
          m_accessAt = -1;
        }
      return;
    }
  if (m_accessEvent != 0 && m_accessAt == earliest)
    {
      return;
    }
  if (m_accessEvent != 0)
    {
      m_events.Cancel (m_accessEvent);
    }
  m_accessAt = earliest;
  m_accessEvent = m_events.Schedule (earliest, EventPriority::Slot,
                                     [this] { OnAccess (); });
}

void
DcfMac::OnAccess ()
{
  m_accessEvent = 0;
  m_accessAt = -1;
  TimeNs now = m_events.Now ();
  std::uint64_t elapsed = (now - m_idleStart) / m_slotNs;

  m_transmitters.clear ();
  for (NodeState &n : m_nodes)
    {
      if (!n.queue.empty () && n.txAt == now)
        {
          m_transmitters.push_back (n.id);
          n.backoffCounter = 0;
        }
      else
        {
          n.backoffCounter = static_cast<std::uint32_t> (
              n.backoffCounter > elapsed ? n.backoffCounter - elapsed : 0);
        }
    }
  if (m_transmitters.empty ())
    {
      return;
    }

  TimeNs duration = 0;
  for (std::uint32_t id : m_transmitters)
    {
      NodeState &n = m_nodes[id];
      ++n.stats.attempts;
      duration = std::max (duration, SecondsToNs (m_timing.FrameAirtime (
                                         n.queue.front ().frame.size)));
    }
  m_busy = true;
  for (std::uint32_t id : m_transmitters)
    {
      m_nodes[id].busyUntil = now + duration;
    }
  m_events.Schedule (now + duration, EventPriority::TransmissionEnd,
                     [this] { OnTransmissionEnd (); });
}

void
DcfMac::OnTransmissionEnd ()
{
  const bool collision = m_transmitters.size () > 1;
  struct Outcome
  {
    std::uint32_t node;
    NodeState::Queued item;
    bool delivered;
  };
  std::vector<Outcome> outcomes;
  outcomes.reserve (m_transmitters.size ());

  for (std::uint32_t id : m_transmitters)
    {
      NodeState &n = m_nodes[id];
      bool corrupted = false;
      if (!collision && m_per > 0)
        {
          corrupted = std::bernoulli_distribution (m_per) (m_rng);
        }
      if (!collision && !corrupted)
        {
          ++n.stats.successes;
          ++m_totalSuccesses;
          Trace (id, "tx", n.queue.front ().frame, "success");
          outcomes.push_back ({id, n.queue.front (), true});
          n.queue.pop_front ();
          n.retryCount = 0;
          n.contentionWindow = m_timing.cwMin;
        }
      else
        {
          if (collision)
            {
              ++n.stats.collisions;
            }
          else
            {
              ++n.stats.corruptions;
            }
          Trace (id, "tx", n.queue.front ().frame,
                 collision ? "collision" : "corrupted");
          ++n.retryCount;
          if (n.retryCount > m_timing.retryLimit)
            {
              ++n.stats.retryDrops;
              Trace (id, "drop", n.queue.front ().frame, "retry-limit");
              outcomes.push_back ({id, n.queue.front (), false});
              n.queue.pop_front ();
              n.retryCount = 0;
              n.contentionWindow = m_timing.cwMin;
            }
          else
            {
              n.contentionWindow = m_timing.ContentionWindow (n.retryCount);
            }
        }
      n.backoffCounter = DrawBackoff (n.contentionWindow);
      if (n.saturated && n.queue.empty ())
        {
          Frame f = n.saturationFrame;
          f.enqueueTime = m_events.Now ();
          n.queue.push_back ({f, n.saturationDst});
        }
    }

  m_busy = false;
  m_idleStart = m_events.Now ();
  for (NodeState &n : m_nodes)
    {
      n.txAt = m_idleStart + SlotsToNs (n.backoffCounter);
    }
  m_transmitters.clear ();

  if (m_listener != nullptr)
    {
      for (const Outcome &o : outcomes)
        {
          if (o.delivered)
            {
              m_listener->OnDelivered (o.node, o.item.dst, o.item.frame);
            }
          else
            {
              m_listener->OnRetryDrop (o.node, o.item.frame);
            }
        }
    }
  ScheduleAccess ();
}

} // namespace wlantcp

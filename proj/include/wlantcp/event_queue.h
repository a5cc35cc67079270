#ifndef WLANTCP_EVENT_QUEUE_H
#define WLANTCP_EVENT_QUEUE_H

#include "wlantcp/types.h"

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

namespace wlantcp {

/// Ordering class for events scheduled at the same instant. Lower runs first.
enum class EventPriority : std::uint8_t
{
  TransmissionEnd = 0,
  Timer = 1,
  Slot = 2,
};

using EventId = std::uint64_t;

/// Time-ordered event dispatcher. Ties are broken by priority, then by
/// insertion order, which makes runs reproducible.
class EventQueue
{
public:
  using Callback = std::function<void ()>;

  EventId Schedule (TimeNs at, EventPriority prio, Callback cb);
  EventId ScheduleIn (TimeNs delay, EventPriority prio, Callback cb)
  {
    return Schedule (m_now + delay, prio, std::move (cb));
  }

  /// Cancelling an already-dispatched or unknown id is a no-op.
  void Cancel (EventId id);

  /// Dispatches the next event. Returns false when the queue is empty or the
  /// next event lies beyond `until`.
  bool Step (TimeNs until);

  /// Runs until no event at or before `until` remains; leaves Now() == until.
  void RunUntil (TimeNs until);

  TimeNs Now () const { return m_now; }
  bool Empty () const { return m_heap.empty (); }
  std::uint64_t Dispatched () const { return m_dispatched; }

private:
  struct Entry
  {
    TimeNs at;
    EventPriority prio;
    EventId id;
    mutable Callback cb;
  };
  struct Later
  {
    bool operator() (const Entry &a, const Entry &b) const
    {
      if (a.at != b.at)
        return a.at > b.at;
      if (a.prio != b.prio)
        return a.prio > b.prio;
      return a.id > b.id;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, Later> m_heap;
  std::unordered_set<EventId> m_cancelled;
  TimeNs m_now = 0;
  EventId m_nextId = 1;
  std::uint64_t m_dispatched = 0;
};

} // namespace wlantcp

#endif

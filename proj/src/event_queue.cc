#include "wlantcp/event_queue.h"

#include <string>

namespace wlantcp {

EventId
EventQueue::Schedule (TimeNs at, EventPriority prio, Callback cb)
{
  if (at < m_now)
    {
      throw Error (ErrorCode::Runtime,
                   "event scheduled in the past at t=" + std::to_string (at));
    }
  EventId id = m_nextId++;
  m_heap.push (Entry{at, prio, id, std::move (cb)});
  return id;
}

void
EventQueue::Cancel (EventId id)
{
  if (id != 0 && id < m_nextId)
    {
      m_cancelled.insert (id);
    }
}

bool
EventQueue::Step (TimeNs until)
{
  while (!m_heap.empty ())
    {
      const Entry &top = m_heap.top ();
      if (top.at > until)
        {
          return false;
        }
      Callback cb = std::move (top.cb);
      EventId id = top.id;
      m_now = top.at;
      m_heap.pop ();
      if (!m_cancelled.empty () && m_cancelled.erase (id) > 0)
        {
          continue;
        }
      ++m_dispatched;
      cb ();
      return true;
    }
  return false;
}

void
EventQueue::RunUntil (TimeNs until)
{
  while (Step (until))
    {
    }
  if (m_now < until)
    {
      m_now = until;
    }
}

} // namespace wlantcp

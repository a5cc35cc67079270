#include "wlantcp/event_queue.h"

#include <doctest.h>

#include <string>

using namespace wlantcp;

TEST_CASE ("events run in time, priority, then insertion order")
{
  EventQueue q;
  std::string order;
  q.Schedule (20, EventPriority::Timer, [&] { order += 'd'; });
  q.Schedule (10, EventPriority::Slot, [&] { order += 'c'; });
  q.Schedule (10, EventPriority::Timer, [&] { order += 'a'; });
  q.Schedule (10, EventPriority::Timer, [&] { order += 'b'; });
  q.Schedule (10, EventPriority::TransmissionEnd, [&] { order += '0'; });
  q.RunUntil (100);
  CHECK (order == "0abcd");
  CHECK (q.Now () == 100);
  CHECK (q.Dispatched () == 5);
  CHECK (q.Empty ());
}

TEST_CASE ("cancel")
{
  EventQueue q;
  int hits = 0;
  EventId id = q.Schedule (5, EventPriority::Timer, [&] { ++hits; });
  q.Schedule (6, EventPriority::Timer, [&] { ++hits; });
  q.Cancel (id);
  q.Cancel (id);
  q.Cancel (12345);
  q.RunUntil (10);
  CHECK (hits == 1);
}

TEST_CASE ("step stops at the horizon")
{
  EventQueue q;
  int hits = 0;
  q.Schedule (5, EventPriority::Timer, [&] {
    ++hits;
    q.ScheduleIn (10, EventPriority::Timer, [&] { ++hits; });
  });
  CHECK (q.Step (4) == false);
  CHECK (q.Step (5));
  CHECK (q.Now () == 5);
  CHECK (q.Step (14) == false);
  CHECK (hits == 1);
  q.RunUntil (15);
  CHECK (hits == 2);
}

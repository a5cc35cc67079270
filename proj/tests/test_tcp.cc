#include "wlantcp/tcp.h"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace wlantcp;

namespace {

Frame
Ack (std::int64_t ackNo, std::uint32_t adv = 42)
{
  Frame f;
  f.kind = FrameKind::TcpAck;
  f.ackNo = ackNo;
  f.advertisedWindow = adv;
  return f;
}

Frame
Data (std::int64_t seq)
{
  Frame f;
  f.kind = FrameKind::TcpData;
  f.seq = seq;
  return f;
}

TcpSender
Sender (std::uint32_t adv = 42)
{
  TcpConfig cfg;
  cfg.advWindow = adv;
  return TcpSender (1, Direction::Down, cfg, std::nullopt, true);
}

} // namespace

TEST_CASE ("send opportunity respects cwnd and the advertised window")
{
  TcpSender s = Sender ();
  s.SetCongestionState (1, 10, SenderPhase::CongestionAvoidance);
  CHECK (s.OnSendOpportunity (0).size () == 1);

  TcpSender big = Sender ();
  big.SetCongestionState (100, 200, SenderPhase::CongestionAvoidance);
  CHECK (big.OnSendOpportunity (0).size () == 42);
  CHECK (big.InFlight () == 42);

  TcpSender small = Sender (5);
  small.SetCongestionState (10, 20, SenderPhase::CongestionAvoidance);
  CHECK (small.OnSendOpportunity (0).size () == 5);
}

TEST_CASE ("congestion avoidance grows by acked over cwnd")
{
  TcpSender s = Sender ();
  s.SetCongestionState (10, 5, SenderPhase::CongestionAvoidance);
  s.OnSendOpportunity (0);
  s.OnAck (Ack (4), SecondsToNs (0.1));
  CHECK (s.Cwnd () == doctest::Approx (10.4).epsilon (1e-12));
}

TEST_CASE ("third duplicate ACK retransmits and halves cwnd")
{
  TcpSender s = Sender ();
  s.SetCongestionState (10, 64, SenderPhase::CongestionAvoidance);
  s.OnSendOpportunity (0);
  s.OnAck (Ack (1), SecondsToNs (0.1));
  double before = s.Cwnd ();
  Frame dup = Ack (1);
  dup.flags = kFlagDupAck;
  CHECK (s.OnAck (dup, SecondsToNs (0.11)).empty ());
  CHECK (s.OnAck (dup, SecondsToNs (0.12)).empty ());
  auto out = s.OnAck (dup, SecondsToNs (0.13));
  REQUIRE_FALSE (out.empty ());
  CHECK (out.front ().seq == 1);
  CHECK (out.front ().retransmission);
  CHECK (s.Cwnd () == doctest::Approx (before / 2).epsilon (1e-12));
  CHECK (s.Phase () == SenderPhase::FastRecovery);
  CHECK (s.Stats ().fastRetransmits == 1);
}

TEST_CASE ("lossless flow grows to the advertised window and stays")
{
  TcpSender s = Sender (42);
  TimeNs now = 0;
  auto flight = s.OnSendOpportunity (now);
  for (int round = 0; round < 200; ++round)
    {
      now += SecondsToNs (0.01);
      std::vector<Frame> next;
      for (const Frame &d : flight)
        {
          auto more = s.OnAck (Ack (d.seq + 1), now);
          next.insert (next.end (), more.begin (), more.end ());
        }
      flight = next;
    }
  CHECK (s.Cwnd () == 42);
  CHECK (s.InFlight () == 42);
}

TEST_CASE ("timeouts halve into ssthresh and back off the RTO")
{
  TcpSender s = Sender ();
  s.SetCongestionState (20, 64, SenderPhase::CongestionAvoidance);
  s.OnSendOpportunity (0);
  CHECK (s.Rto () == 1.0);
  s.OnTimeout (SecondsToNs (1));
  CHECK (s.Ssthresh () == 10);
  CHECK (s.Cwnd () == 1);
  CHECK (s.Rto () == 2.0);
  s.OnTimeout (SecondsToNs (3));
  CHECK (s.Rto () == 4.0);
  CHECK (s.Stats ().timeouts == 2);
}

TEST_CASE ("ACK beyond the highest sent packet is a protocol violation")
{
  TcpSender s = Sender ();
  s.OnSendOpportunity (0);
  try
    {
      s.OnAck (Ack (100), 1);
      FAIL ("expected an error");
    }
  catch (const Error &e)
    {
      CHECK (e.Code () == ErrorCode::Runtime);
    }
}

TEST_CASE ("receiver acknowledgement policy")
{
  TcpConfig cfg;
  TcpReceiver r1 (1, Direction::Down, cfg, std::nullopt);
  for (int i = 0; i < 3; ++i)
    {
      auto res = r1.OnData (Data (i), i);
      REQUIRE (res.ack);
      CHECK (res.ack->ackNo == i + 1);
      CHECK ((res.ack->flags & kFlagDupAck) == 0);
      // Only the first ACK carries the handshake flag.
      CHECK (((res.ack->flags & kFlagSyn) != 0) == (i == 0));
    }

  cfg.delAckFactor = 2;
  TcpReceiver r2 (1, Direction::Down, cfg, std::nullopt);
  CHECK_FALSE (r2.OnData (Data (0), 0).ack);
  auto second = r2.OnData (Data (1), 1);
  REQUIRE (second.ack);
  CHECK (second.ack->ackNo == 2);

  auto gap = r2.OnData (Data (3), 2);
  REQUIRE (gap.ack);
  CHECK ((gap.ack->flags & kFlagDupAck) != 0);
  CHECK (gap.ack->ackNo == 2);
  auto fill = r2.OnData (Data (2), 3);
  REQUIRE (fill.ack);
  CHECK (fill.ack->ackNo == 4);
  CHECK (fill.newlyDelivered == 2);
}

TEST_CASE ("delayed ACK timer flushes a lone packet")
{
  TcpConfig cfg;
  cfg.delAckFactor = 2;
  TcpReceiver r (1, Direction::Down, cfg, std::nullopt);
  CHECK_FALSE (r.OnData (Data (0), 0).ack);
  REQUIRE (r.DelAckDeadline ());
  CHECK (*r.DelAckDeadline () == SecondsToNs (0.1));
  CHECK_FALSE (r.OnDelAckTimer (SecondsToNs (0.05)));
  auto ack = r.OnDelAckTimer (SecondsToNs (0.1));
  REQUIRE (ack);
  CHECK (ack->ackNo == 1);
}

TEST_CASE ("receiver never sends more than ceil(data/b) plus timer ACKs")
{
  std::mt19937_64 rng (17);
  for (std::uint32_t b : {1u, 2u, 3u})
    {
      TcpConfig cfg;
      cfg.delAckFactor = b;
      TcpReceiver r (1, Direction::Down, cfg, std::nullopt);
      std::uniform_real_distribution<double> gap (0, 0.2);
      TimeNs now = 0;
      std::uint64_t acks = 0;
      const int n = 5000;
      for (int i = 0; i < n; ++i)
        {
          now += SecondsToNs (gap (rng));
          if (r.DelAckDeadline () && *r.DelAckDeadline () <= now)
            {
              acks += r.OnDelAckTimer (*r.DelAckDeadline ()) ? 1 : 0;
            }
          acks += r.OnData (Data (i), now).ack ? 1 : 0;
        }
      CHECK (acks <= (n + b - 1) / b + r.Stats ().timerAcks);
      CHECK (r.RcvNext () == n);
    }
}

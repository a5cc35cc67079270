#include "wlantcp/simulation.h"

#include "wlantcp/tcp.h"

#include <cmath>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

namespace wlantcp {

std::uint64_t
DeriveSeed (std::uint64_t seed, std::uint64_t stream)
{
  // splitmix64 over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double
RunReport::SteadyApDropRatio () const
{
  return apOfferedSteady == 0 ? 0.0
                              : static_cast<double> (apDropsSteady) / apOfferedSteady;
}

namespace {

constexpr std::uint32_t kAp = 0;

struct FlowRuntime
{
  FlowSpec spec;
  std::uint32_t station = 0;
  TimeNs ldNs = 0;
  std::unique_ptr<TcpSender> sender;
  std::unique_ptr<TcpReceiver> receiver;
  TimeNs rtoEventAt = -1;
  TimeNs delAckEventAt = -1;
  EventId accfEvent = 0;
  TimeNs accfEventAt = -1;
  std::mt19937_64 rng;
  FlowReport rep;
  // data-packet conservation audit
  std::uint64_t dataArrived = 0;
  std::uint64_t dataDropped = 0;
  std::uint64_t dataOnWire = 0;
};

} // namespace

struct Simulation::Impl : public MacListener
{
  Impl (const ScenarioSpec &s, std::uint64_t sd)
    : spec (s), seed (sd)
  {
  }

  ScenarioSpec spec;
  std::uint64_t seed;
  std::optional<ControlBlock> attached;
  bool ran = false;

  EventQueue events;
  std::unique_ptr<DcfMac> mac;
  std::unique_ptr<Fcwa> fcwa;
  std::unique_ptr<Accf> accf;
  std::vector<FlowRuntime> flows;
  std::ofstream trace;
  RunReport report;
  TimeNs warmupNs = 0;
  TimeNs binNs = 1;
  std::size_t bins = 0;

  RunReport Run ();
  void Setup ();
  void RunSaturationMode ();
  void Finish ();

  void StartFlow (FlowRuntime &f);
  void TelnetArrival (FlowRuntime &f);
  void EmitFromSender (FlowRuntime &f, const std::vector<Frame> &frames);
  void EmitFromReceiver (FlowRuntime &f, const Frame &ack);
  void OfferToMac (FlowRuntime &f, std::uint32_t node, const Frame &frame,
                   std::uint32_t dst);
  void ApFromWired (Frame frame);
  void HandleAccf (FlowRuntime &f, const AccfAction &act);
  void DeliverData (FlowRuntime &f, const Frame &frame);
  void DeliverAck (FlowRuntime &f, const Frame &frame);
  void SyncRto (FlowRuntime &f);
  void OnRtoEvent (std::uint32_t id, TimeNs at);
  void SyncDelAck (FlowRuntime &f);
  void OnDelAckEvent (std::uint32_t id, TimeNs at);
  void ToWired (FlowRuntime &f, const Frame &frame);

  void OnDelivered (std::uint32_t from, std::uint32_t to,
                    const Frame &frame) override;
  void OnRetryDrop (std::uint32_t node, const Frame &frame) override;

  bool Steady () const { return events.Now () >= warmupNs; }
};

void
Simulation::Impl::Setup ()
{
  mac = std::make_unique<DcfMac> (events, spec.mac, spec.per,
                                  DeriveSeed (seed, 0), this);
  if (!spec.trace.empty ())
    {
      trace.open (spec.trace);
      if (!trace)
        {
          throw Error (ErrorCode::Io, "cannot open trace file " + spec.trace);
        }
      mac->SetTrace (&trace);
    }
  warmupNs = SecondsToNs (spec.warmup);
  binNs = std::max<TimeNs> (SecondsToNs (spec.bin), 1);
  bins = static_cast<std::size_t> ((SecondsToNs (spec.duration) + binNs - 1) / binNs);

  ControlBlock block = attached.value_or (ControlBlock::None);
  if (block == ControlBlock::Fcwa)
    {
      FcwaConfig cfg;
      cfg.bsAp = spec.bsAp;
      cfg.timing = spec.mac;
      cfg.dataSize = spec.dataSize;
      cfg.ackSize = spec.ackSize;
      cfg.ewmaWeight = spec.fcwaEwmaWeight;
      cfg.flowTimeout = spec.fcwaFlowTimeout;
      cfg.ctMode = spec.fcwaCtMode;
      fcwa = std::make_unique<Fcwa> (cfg);
    }
  else if (block == ControlBlock::Accf)
    {
      accf = std::make_unique<Accf> (spec.accf);
      accf->EnableLog (spec.accfLog);
    }
  report.controlBlock = block;

  if (spec.mode == SimMode::Saturation)
    {
      return;
    }
  mac->AddNode (NodeRole::AccessPoint, spec.bsAp);
  for (const FlowSpec &fs : spec.ExpandFlows ())
    {
      FlowRuntime f;
      f.spec = fs;
      f.station = mac->AddNode (NodeRole::Station, spec.staQueue);
      f.ldNs = SecondsToNs (fs.ld);
      f.rng.seed (DeriveSeed (seed, 1 + fs.id));
      TcpConfig cfg;
      cfg.initialCwnd = spec.initialCwnd;
      cfg.advWindow = fs.advWindow;
      cfg.initialRto = spec.initialRto;
      cfg.minRto = spec.minRto;
      cfg.maxRto = spec.maxRto;
      cfg.dataSize = spec.dataSize;
      cfg.ackSize = spec.ackSize;
      cfg.delAckFactor = spec.b;
      cfg.delAckTimeout = spec.delAckTimeout;
      std::optional<std::int64_t> total;
      std::optional<std::int64_t> finSeq;
      if (fs.kind == FlowKind::Short)
        {
          total = fs.shortPackets;
          finSeq = fs.shortPackets - 1;
        }
      f.sender = std::make_unique<TcpSender> (fs.id, fs.direction, cfg, total,
                                              fs.kind == FlowKind::Ftp);
      f.receiver = std::make_unique<TcpReceiver> (fs.id, fs.direction, cfg, finSeq);
      f.rep.spec = fs;
      f.rep.station = f.station;
      f.rep.binBytes.assign (bins, 0);
      flows.push_back (std::move (f));
    }
  for (FlowRuntime &f : flows)
    {
      std::uint32_t id = f.spec.id;
      events.Schedule (SecondsToNs (f.spec.start), EventPriority::Timer,
                       [this, id] { StartFlow (flows[id]); });
    }
}

void
Simulation::Impl::StartFlow (FlowRuntime &f)
{
  if (f.spec.kind == FlowKind::Telnet)
    {
      TelnetArrival (f);
      return;
    }
  EmitFromSender (f, f.sender->OnSendOpportunity (events.Now ()));
  SyncRto (f);
}

void
Simulation::Impl::TelnetArrival (FlowRuntime &f)
{
  ++f.rep.appPackets;
  f.sender->AddAppData (1);
  EmitFromSender (f, f.sender->OnSendOpportunity (events.Now ()));
  SyncRto (f);
  double meanGap = 8.0 * spec.dataSize / f.spec.telnetRate;
  double gap = std::exponential_distribution<double> (1.0 / meanGap) (f.rng);
  std::uint32_t id = f.spec.id;
  events.Schedule (events.Now () + std::max<TimeNs> (SecondsToNs (gap), 1),
                   EventPriority::Timer, [this, id] { TelnetArrival (flows[id]); });
}

void
Simulation::Impl::OfferToMac (FlowRuntime &f, std::uint32_t node,
                              const Frame &frame, std::uint32_t dst)
{
  ++f.rep.offered;
  const bool steady = Steady ();
  if (node == kAp)
    {
      ++f.rep.apOffered;
      ++report.apOffered;
      if (steady)
        {
          ++f.rep.apOfferedSteady;
          ++report.apOfferedSteady;
        }
    }
  if (!mac->Enqueue (node, frame, dst))
    {
      if (frame.kind == FrameKind::TcpData)
        {
          ++f.dataDropped;
        }
      if (node == kAp)
        {
          ++f.rep.apDrops;
          ++report.apDrops;
          if (steady)
            {
              ++f.rep.apDropsSteady;
              ++report.apDropsSteady;
            }
        }
      else
        {
          ++f.rep.staDrops;
        }
    }
  else if (node == kAp)
    {
      report.apQueuePeak = std::max (report.apQueuePeak, mac->QueueLength (kAp));
    }
}

void
Simulation::Impl::EmitFromSender (FlowRuntime &f, const std::vector<Frame> &frames)
{
  for (const Frame &frame : frames)
    {
      if (f.spec.direction == Direction::Up)
        {
          OfferToMac (f, f.station, frame, kAp);
        }
      else
        {
          ++f.dataOnWire;
          events.Schedule (events.Now () + f.ldNs, EventPriority::Timer,
                           [this, frame] { ApFromWired (frame); });
        }
    }
}

void
Simulation::Impl::EmitFromReceiver (FlowRuntime &f, const Frame &ack)
{
  ++f.rep.acksSent;
  if (f.spec.direction == Direction::Down)
    {
      OfferToMac (f, f.station, ack, kAp);
    }
  else
    {
      events.Schedule (events.Now () + f.ldNs, EventPriority::Timer,
                       [this, ack] { ApFromWired (ack); });
    }
}

void
Simulation::Impl::ApFromWired (Frame frame)
{
  FlowRuntime &f = flows[frame.flowId];
  const TimeNs now = events.Now ();
  if (frame.kind == FrameKind::TcpData)
    {
      --f.dataOnWire;
    }
  if (fcwa)
    {
      fcwa->Observe (frame, ApHop::FromWired, now);
      if (frame.kind == FrameKind::TcpAck)
        {
          frame = fcwa->RewriteWindow (frame, now);
        }
    }
  if (accf)
    {
      if (frame.kind == FrameKind::TcpAck && frame.direction == Direction::Up)
        {
          HandleAccf (f, accf->OnAckArrival (frame, now));
          return;
        }
      accf->ObservePacket (frame, now);
    }
  OfferToMac (f, kAp, frame, f.station);
}

void
Simulation::Impl::HandleAccf (FlowRuntime &f, const AccfAction &act)
{
  if (act.release)
    {
      OfferToMac (f, kAp, *act.release, f.station);
    }
  if (act.deadline)
    {
      if (f.accfEvent != 0 && f.accfEventAt == *act.deadline)
        {
          return;
        }
      events.Cancel (f.accfEvent);
      f.accfEventAt = *act.deadline;
      std::uint32_t id = f.spec.id;
      f.accfEvent = events.Schedule (*act.deadline, EventPriority::Timer, [this, id] {
        FlowRuntime &g = flows[id];
        g.accfEvent = 0;
        g.accfEventAt = -1;
        if (auto ack = accf->OnTimerExpire (id, events.Now ()))
          {
            OfferToMac (g, kAp, *ack, g.station);
          }
      });
    }
  else if (f.accfEvent != 0)
    {
      events.Cancel (f.accfEvent);
      f.accfEvent = 0;
      f.accfEventAt = -1;
    }
}

void
Simulation::Impl::ToWired (FlowRuntime &f, const Frame &frame)
{
  const TimeNs now = events.Now ();
  Frame out = frame;
  if (fcwa)
    {
      fcwa->Observe (frame, ApHop::ToWired, now);
      if (frame.kind == FrameKind::TcpAck)
        {
          out = fcwa->RewriteWindow (frame, now);
        }
    }
  std::uint32_t id = f.spec.id;
  if (out.kind == FrameKind::TcpData)
    {
      ++f.dataOnWire;
      events.Schedule (now + f.ldNs, EventPriority::Timer, [this, id, out] {
        --flows[id].dataOnWire;
        DeliverData (flows[id], out);
      });
    }
  else
    {
      events.Schedule (now + f.ldNs, EventPriority::Timer,
                       [this, id, out] { DeliverAck (flows[id], out); });
    }
}

void
Simulation::Impl::OnDelivered (std::uint32_t from, std::uint32_t to,
                               const Frame &frame)
{
  if (frame.kind == FrameKind::Raw)
    {
      return;
    }
  FlowRuntime &f = flows[frame.flowId];
  if (from == kAp)
    {
      if (fcwa)
        {
          fcwa->ObserveApSuccess (events.Now (), mac->QueueLength (kAp) > 0);
        }
      if (frame.kind == FrameKind::TcpData)
        {
          DeliverData (f, frame);
        }
      else
        {
          DeliverAck (f, frame);
        }
      return;
    }
  (void) to;
  ToWired (f, frame);
}

void
Simulation::Impl::OnRetryDrop (std::uint32_t node, const Frame &frame)
{
  (void) node;
  if (frame.kind == FrameKind::Raw)
    {
      return;
    }
  FlowRuntime &f = flows[frame.flowId];
  ++f.rep.retryDrops;
  if (frame.kind == FrameKind::TcpData)
    {
      ++f.dataDropped;
    }
}

void
Simulation::Impl::DeliverData (FlowRuntime &f, const Frame &frame)
{
  const TimeNs now = events.Now ();
  ++f.dataArrived;
  TcpReceiver::DataResult r = f.receiver->OnData (frame, now);
  if (r.newlyDelivered > 0)
    {
      auto n = static_cast<std::uint64_t> (r.newlyDelivered);
      f.rep.deliveredPackets += n;
      if (now >= warmupNs)
        {
          f.rep.steadyPackets += n;
        }
      std::size_t bin = std::min<std::size_t> (static_cast<std::size_t> (now / binNs),
                                               bins - 1);
      f.rep.binBytes[bin] += n * spec.dataSize;
    }
  if (r.ack)
    {
      EmitFromReceiver (f, *r.ack);
    }
  SyncDelAck (f);
}

void
Simulation::Impl::DeliverAck (FlowRuntime &f, const Frame &frame)
{
  const TimeNs now = events.Now ();
  EmitFromSender (f, f.sender->OnAck (frame, now));
  SyncRto (f);
  if (f.spec.kind == FlowKind::Short && !f.rep.completionTime
      && f.sender->CompletedAt ())
    {
      f.rep.completionTime = NsToSeconds (*f.sender->CompletedAt ()) - f.spec.start;
    }
}

void
Simulation::Impl::SyncRto (FlowRuntime &f)
{
  auto deadline = f.sender->RtoDeadline ();
  if (!deadline)
    {
      return;
    }
  // Lazy timer: keep one pending event no later than the deadline and
  // re-check on expiry.
  if (f.rtoEventAt >= 0 && f.rtoEventAt <= *deadline)
    {
      return;
    }
  f.rtoEventAt = *deadline;
  std::uint32_t id = f.spec.id;
  TimeNs at = *deadline;
  events.Schedule (at, EventPriority::Timer, [this, id, at] { OnRtoEvent (id, at); });
}

void
Simulation::Impl::OnRtoEvent (std::uint32_t id, TimeNs at)
{
  FlowRuntime &f = flows[id];
  if (f.rtoEventAt != at)
    {
      return;
    }
  f.rtoEventAt = -1;
  auto deadline = f.sender->RtoDeadline ();
  if (deadline && *deadline <= events.Now ())
    {
      EmitFromSender (f, f.sender->OnTimeout (events.Now ()));
    }
  SyncRto (f);
}

void
Simulation::Impl::SyncDelAck (FlowRuntime &f)
{
  auto deadline = f.receiver->DelAckDeadline ();
  if (!deadline || *deadline == f.delAckEventAt)
    {
      return;
    }
  f.delAckEventAt = *deadline;
  std::uint32_t id = f.spec.id;
  TimeNs at = *deadline;
  events.Schedule (at, EventPriority::Timer, [this, id, at] { OnDelAckEvent (id, at); });
}

void
Simulation::Impl::OnDelAckEvent (std::uint32_t id, TimeNs at)
{
  FlowRuntime &f = flows[id];
  if (f.delAckEventAt != at)
    {
      return;
    }
  f.delAckEventAt = -1;
  if (auto ack = f.receiver->OnDelAckTimer (events.Now ()))
    {
      EmitFromReceiver (f, *ack);
    }
  SyncDelAck (f);
}

void
Simulation::Impl::RunSaturationMode ()
{
  std::uint32_t n = spec.saturationStations;
  mac->AddNode (NodeRole::AccessPoint, 1);
  for (std::uint32_t i = 0; i < n; ++i)
    {
      mac->AddNode (NodeRole::Station, 1);
    }
  Frame raw;
  raw.kind = FrameKind::Raw;
  raw.size = spec.dataSize;
  mac->SetSaturated (kAp, raw, 1);
  for (std::uint32_t i = 1; i <= n; ++i)
    {
      mac->SetSaturated (i, raw, kAp);
    }
  events.RunUntil (SecondsToNs (spec.duration));
}

void
Simulation::Impl::Finish ()
{
  const double window = spec.duration - spec.warmup;
  for (std::uint32_t i = 0; i < mac->NodeCount (); ++i)
    {
      report.nodes.push_back (mac->Node (i).stats);
    }
  // Data frames still sitting in MAC queues, per flow.
  std::vector<std::uint64_t> queued (flows.size (), 0);
  for (std::uint32_t i = 0; i < mac->NodeCount (); ++i)
    {
      for (const auto &q : mac->Node (i).queue)
        {
          if (q.frame.kind == FrameKind::TcpData)
            {
              ++queued[q.frame.flowId];
            }
        }
    }
  for (FlowRuntime &f : flows)
    {
      const SenderStats &ss = f.sender->Stats ();
      std::uint64_t accounted = f.dataArrived + f.dataOnWire
                                + queued[f.spec.id] + f.dataDropped;
      if (accounted != ss.dataSent)
        {
          std::ostringstream os;
          os << "conservation violated for flow " << f.spec.id << ": sent "
             << ss.dataSent << ", delivered " << f.dataArrived << " + on wire "
             << f.dataOnWire << " + queued " << queued[f.spec.id]
             << " + dropped " << f.dataDropped;
          throw Error (ErrorCode::Runtime, os.str ());
        }
      FlowReport &r = f.rep;
      r.dataSent = ss.dataSent;
      r.retransmissions = ss.retransmissions;
      r.timeouts = ss.timeouts;
      r.fastRetransmits = ss.fastRetransmits;
      r.throughput = window > 0 ? 8.0 * r.steadyPackets * spec.dataSize / window : 0;
      r.plr = r.offered == 0 ? 0.0
                             : static_cast<double> (r.apDrops + r.staDrops) / r.offered;
      r.finalCwnd = f.sender->Cwnd ();
      if (fcwa)
        {
          if (const FlowProfile *p = fcwa->Profile (f.spec.id))
            {
              r.lastWLim = p->lastWLim;
              r.meanWLim = p->rewrites > 0 ? p->wLimSum / p->rewrites : 0;
              r.ldEstimate = p->ldEstimate;
              r.bEstimate = p->bEstimate;
            }
        }
      report.flows.push_back (std::move (r));
    }
  if (fcwa)
    {
      report.fcwaLog = fcwa->Decisions ();
    }
  if (accf)
    {
      report.accfLog = accf->Log ();
      report.accfCounters = accf->Counters ();
    }
  report.events = events.Dispatched ();
}

RunReport
Simulation::Impl::Run ()
{
  if (ran)
    {
      throw Error (ErrorCode::Runtime, "simulation already ran");
    }
  ran = true;
  spec.Validate ();
  report.scenario = spec.name;
  report.seed = seed;
  report.duration = spec.duration;
  report.warmup = spec.warmup;
  report.bin = spec.bin;
  Setup ();
  if (spec.mode == SimMode::Saturation)
    {
      RunSaturationMode ();
    }
  else
    {
      events.RunUntil (SecondsToNs (spec.duration));
    }
  Finish ();
  if (trace.is_open ())
    {
      trace.close ();
    }
  return std::move (report);
}

Simulation::Simulation (const ScenarioSpec &spec, std::uint64_t seed)
  : m_impl (std::make_unique<Impl> (spec, seed))
{
}

Simulation::~Simulation () = default;

void
Simulation::AttachControlBlock (ControlBlock block)
{
  if (m_impl->ran)
    {
      throw Error (ErrorCode::Runtime, "control block attached after the run started");
    }
  if (m_impl->attached)
    {
      throw Error (ErrorCode::Runtime, "a control block is already attached");
    }
  m_impl->attached = block;
}

RunReport
Simulation::Run ()
{
  return m_impl->Run ();
}

RunReport
RunScenario (const ScenarioSpec &spec, std::uint64_t seed)
{
  Simulation sim (spec, seed);
  sim.AttachControlBlock (spec.controlBlock);
  return sim.Run ();
}

namespace {

class SuccessRecorder : public MacListener
{
public:
  explicit SuccessRecorder (EventQueue &ev) : m_events (ev) {}
  void OnDelivered (std::uint32_t from, std::uint32_t, const Frame &) override
  {
    if (from == 0)
      {
        times.push_back (m_events.Now ());
      }
  }
  void OnRetryDrop (std::uint32_t, const Frame &) override {}
  std::vector<TimeNs> times;

private:
  EventQueue &m_events;
};

} // namespace

CycleTimeMeasurement
MeasureCycleTime (std::uint32_t p1Size, std::uint32_t p2Size,
                  const MacTiming &timing, std::uint64_t nCycles,
                  std::uint64_t seed)
{
  if (p1Size == 0 || p2Size == 0 || nCycles < 1)
    {
      throw Error (ErrorCode::InvalidArgument,
                   "frame sizes and cycle count must be > 0");
    }
  EventQueue ev;
  SuccessRecorder rec (ev);
  rec.times.reserve (nCycles + 1);
  DcfMac mac (ev, timing, 0.0, DeriveSeed (seed, 0), &rec);
  mac.AddNode (NodeRole::Station, 1);
  mac.AddNode (NodeRole::Station, 1);
  Frame f1;
  f1.kind = FrameKind::Raw;
  f1.size = p1Size;
  Frame f2 = f1;
  f2.size = p2Size;
  mac.SetSaturated (0, f1, 1);
  mac.SetSaturated (1, f2, 0);
  while (rec.times.size () < nCycles + 1 && ev.Step (INT64_MAX))
    {
    }
  CycleTimeMeasurement m;
  m.cycles = nCycles;
  double sum = 0;
  double sumSq = 0;
  for (std::size_t i = 1; i < rec.times.size (); ++i)
    {
      double g = NsToSeconds (rec.times[i] - rec.times[i - 1]);
      sum += g;
      sumSq += g * g;
    }
  double n = static_cast<double> (rec.times.size () - 1);
  m.mean = sum / n;
  double var = std::max (0.0, sumSq / n - m.mean * m.mean);
  m.stderrMean = std::sqrt (var / n);
  const MacStats &st = mac.Node (0).stats;
  m.collisionProbability = st.attempts == 0 ? 0.0
                                            : static_cast<double> (st.collisions) / st.attempts;
  return m;
}

SaturationResult
RunSaturation (std::uint32_t stations, std::uint32_t frameSize,
               const MacTiming &timing, double per,
               std::uint64_t totalSuccesses, std::uint64_t seed)
{
  if (stations < 1 || frameSize == 0)
    {
      throw Error (ErrorCode::InvalidArgument, "need stations >= 1 and frame size > 0");
    }
  EventQueue ev;
  DcfMac mac (ev, timing, per, DeriveSeed (seed, 0), nullptr);
  mac.AddNode (NodeRole::AccessPoint, 1);
  for (std::uint32_t i = 0; i < stations; ++i)
    {
      mac.AddNode (NodeRole::Station, 1);
    }
  Frame raw;
  raw.kind = FrameKind::Raw;
  raw.size = frameSize;
  mac.SetSaturated (0, raw, 1);
  for (std::uint32_t i = 1; i <= stations; ++i)
    {
      mac.SetSaturated (i, raw, 0);
    }
  while (mac.TotalSuccesses () < totalSuccesses && ev.Step (INT64_MAX))
    {
    }
  SaturationResult r;
  for (std::uint32_t i = 0; i <= stations; ++i)
    {
      r.successes.push_back (mac.Node (i).stats.successes);
    }
  r.total = mac.TotalSuccesses ();
  return r;
}

} // namespace wlantcp

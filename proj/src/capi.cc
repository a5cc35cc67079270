#include "wlantcp/wlantcp.h"

#include "wlantcp/analytic_model.h"
#include "wlantcp/experiments.h"
#include "wlantcp/scenario.h"
#include "wlantcp/simulation.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct wlantcp_scenario
{
  wlantcp::ScenarioSpec spec;
};

struct wlantcp_report
{
  wlantcp::RunReport report;
};

namespace {

thread_local std::string g_lastError;

wlantcp_status
Fail (wlantcp_status code, const std::string &message)
{
  g_lastError = message;
  return code;
}

/// Runs `f`, mapping exceptions onto status codes.
template <typename F>
wlantcp_status
Guard (F &&f)
{
  try
    {
      f ();
      g_lastError.clear ();
      return WLANTCP_OK;
    }
  catch (const wlantcp::Error &e)
    {
      return Fail (static_cast<wlantcp_status> (e.Code ()), e.what ());
    }
  catch (const std::bad_alloc &)
    {
      return Fail (WLANTCP_ERR_RUNTIME, "out of memory");
    }
  catch (const std::exception &e)
    {
      return Fail (WLANTCP_ERR_RUNTIME, e.what ());
    }
}

char *
Duplicate (const std::string &s)
{
  char *p = static_cast<char *> (std::malloc (s.size () + 1));
  if (p == nullptr)
    {
      throw std::bad_alloc ();
    }
  std::memcpy (p, s.c_str (), s.size () + 1);
  return p;
}

void
Require (bool ok, const char *what)
{
  if (!ok)
    {
      throw wlantcp::Error (wlantcp::ErrorCode::InvalidArgument, what);
    }
}

std::string
JoinPaths (const std::vector<std::filesystem::path> &paths)
{
  std::string out;
  for (const auto &p : paths)
    {
      out += p.string ();
      out += '\n';
    }
  return out;
}

void
FillCalc (const wlantcp_calc_input &in, const wlantcp::MacTiming &timing,
          wlantcp_calc_result *out)
{
  using namespace wlantcp;
  TrafficMix mix;
  mix.nUp = in.n_up;
  mix.nDown = in.n_down;
  mix.b = in.b;
  mix.dataSize = in.data_size;
  mix.ackSize = in.ack_size;
  PacketTypeProbs p = ComputePacketTypeProbs (mix);
  CycleTimeTable t = ComputeCycleTimeTable (mix, timing);
  WindowLimitResult w = WindowLimit (in.ld, mix, in.bs_ap, timing);
  out->pr_ap_data = p.apData;
  out->pr_ap_ack = p.apAck;
  out->pr_sta_data = p.staData;
  out->pr_sta_ack = p.staAck;
  out->ct_data_data = t (PacketType::Data, PacketType::Data);
  out->ct_data_ack = t (PacketType::Data, PacketType::Ack);
  out->ct_ack_data = t (PacketType::Ack, PacketType::Data);
  out->ct_ack_ack = t (PacketType::Ack, PacketType::Ack);
  out->ct_ap = w.ctAp;
  out->ct_flow = w.ctFlow;
  out->wired_flight_term = w.wiredFlightTerm;
  out->buffer_term = w.bufferTerm;
  out->w_lim = w.wLim;
  out->w_lim_floor = w.wLimFloor;
  out->baseline_window = in.bs_ap / (in.n_up + in.n_down);
  out->buffer_roundtrip = BufferSize (w.wLim, in.ld, mix, timing);
}

} // namespace

extern "C" {

const char *
wlantcp_version (void)
{
  return "0.1.0";
}

const char *
wlantcp_last_error (void)
{
  return g_lastError.c_str ();
}

void
wlantcp_string_free (char *s)
{
  std::free (s);
}

wlantcp_status
wlantcp_scenario_parse (const char *text, wlantcp_scenario **out)
{
  return Guard ([&] {
    Require (text != nullptr && out != nullptr, "null argument");
    *out = new wlantcp_scenario{wlantcp::ScenarioSpec::Parse (text)};
  });
}

wlantcp_status
wlantcp_scenario_load (const char *path, wlantcp_scenario **out)
{
  return Guard ([&] {
    Require (path != nullptr && out != nullptr, "null argument");
    *out = new wlantcp_scenario{wlantcp::ScenarioSpec::ParseFile (path)};
  });
}

wlantcp_status
wlantcp_scenario_catalogue (const char *name, wlantcp_scenario **out)
{
  return Guard ([&] {
    Require (name != nullptr && out != nullptr, "null argument");
    *out = new wlantcp_scenario{wlantcp::CatalogueScenario (name)};
  });
}

wlantcp_status
wlantcp_scenario_set (wlantcp_scenario *s, const char *key, const char *value)
{
  return Guard ([&] {
    Require (s != nullptr && key != nullptr && value != nullptr, "null argument");
    s->spec.Set (key, value);
  });
}

wlantcp_status
wlantcp_scenario_validate (const wlantcp_scenario *s)
{
  return Guard ([&] {
    Require (s != nullptr, "null scenario");
    s->spec.Validate ();
  });
}

wlantcp_status
wlantcp_scenario_serialize (const wlantcp_scenario *s, char **out)
{
  return Guard ([&] {
    Require (s != nullptr && out != nullptr, "null argument");
    *out = Duplicate (s->spec.Serialize ());
  });
}

const char *
wlantcp_scenario_name (const wlantcp_scenario *s)
{
  return s == nullptr ? "" : s->spec.name.c_str ();
}

size_t
wlantcp_scenario_seed_count (const wlantcp_scenario *s)
{
  return s == nullptr ? 0 : s->spec.seeds.size ();
}

uint64_t
wlantcp_scenario_seed (const wlantcp_scenario *s, size_t i)
{
  return s == nullptr || i >= s->spec.seeds.size () ? 0 : s->spec.seeds[i];
}

void
wlantcp_scenario_free (wlantcp_scenario *s)
{
  delete s;
}

size_t
wlantcp_catalogue_count (void)
{
  return wlantcp::CatalogueScenarioNames ().size ();
}

const char *
wlantcp_catalogue_name (size_t i)
{
  const auto &names = wlantcp::CatalogueScenarioNames ();
  return i < names.size () ? names[i].c_str () : nullptr;
}

wlantcp_status
wlantcp_run (const wlantcp_scenario *s, uint64_t seed, wlantcp_report **out)
{
  return Guard ([&] {
    Require (s != nullptr && out != nullptr, "null argument");
    *out = new wlantcp_report{wlantcp::RunScenario (s->spec, seed)};
  });
}

wlantcp_status
wlantcp_run_batch (const wlantcp_scenario *s, const uint64_t *seeds,
                   size_t n_seeds, unsigned jobs, wlantcp_report **out)
{
  return Guard ([&] {
    Require (s != nullptr && out != nullptr && (seeds != nullptr || n_seeds == 0),
             "null argument");
    s->spec.Validate ();
    std::vector<wlantcp::Job> batch;
    for (size_t i = 0; i < n_seeds; ++i)
      {
        batch.push_back ({s->spec, seeds[i]});
      }
    auto reports = wlantcp::RunBatch (batch, jobs);
    for (size_t i = 0; i < n_seeds; ++i)
      {
        out[i] = new wlantcp_report{std::move (reports[i])};
      }
  });
}

wlantcp_status
wlantcp_report_summary (const wlantcp_report *r, wlantcp_summary *out)
{
  return Guard ([&] {
    Require (r != nullptr && out != nullptr, "null argument");
    wlantcp::RunSummary s = wlantcp::Summarize (r->report);
    out->jain = s.jain;
    out->max_plr = s.maxPlr;
    out->mean_plr = s.meanPlr;
    out->uplink_bps = s.uplinkBps;
    out->downlink_bps = s.downlinkBps;
    out->total_bps = s.totalBps;
    out->ap_drop_ratio = s.apDropRatio;
    out->short_flows = s.shortFlows;
    out->short_completed = s.shortCompleted;
    out->max_completion = s.maxCompletion;
  });
}

size_t
wlantcp_report_flow_count (const wlantcp_report *r)
{
  return r == nullptr ? 0 : r->report.flows.size ();
}

wlantcp_status
wlantcp_report_flow (const wlantcp_report *r, size_t i, wlantcp_flow_result *out)
{
  return Guard ([&] {
    Require (r != nullptr && out != nullptr, "null argument");
    Require (i < r->report.flows.size (), "flow index out of range");
    const wlantcp::FlowReport &f = r->report.flows[i];
    out->id = f.spec.id;
    out->uplink = f.spec.direction == wlantcp::Direction::Up ? 1 : 0;
    out->ld = f.spec.ld;
    out->throughput_bps = f.throughput;
    out->delivered_packets = f.deliveredPackets;
    out->ap_drops = f.apDrops;
    out->timeouts = f.timeouts;
    out->plr = f.plr;
    out->completion_time = f.completionTime ? *f.completionTime : -1.0;
  });
}

uint64_t
wlantcp_report_seed (const wlantcp_report *r)
{
  return r == nullptr ? 0 : r->report.seed;
}

wlantcp_status
wlantcp_report_write (const wlantcp_report *r, const char *dir, const char *stem)
{
  return Guard ([&] {
    Require (r != nullptr && dir != nullptr && stem != nullptr, "null argument");
    wlantcp::WriteRunArtifacts (r->report, dir, stem);
  });
}

void
wlantcp_report_free (wlantcp_report *r)
{
  delete r;
}

void
wlantcp_calc_defaults (wlantcp_calc_input *in)
{
  if (in == nullptr)
    {
      return;
    }
  in->n_up = 5;
  in->n_down = 5;
  in->b = 1;
  in->ld = 0;
  in->bs_ap = 100;
  in->data_size = 1500;
  in->ack_size = 40;
}

wlantcp_status
wlantcp_calc (const wlantcp_calc_input *in, wlantcp_calc_result *out)
{
  return Guard ([&] {
    Require (in != nullptr && out != nullptr, "null argument");
    FillCalc (*in, wlantcp::MacTiming{}, out);
  });
}

size_t
wlantcp_scenario_flow_count (const wlantcp_scenario *s)
{
  return s == nullptr ? 0 : s->spec.ExpandFlows ().size ();
}

wlantcp_status
wlantcp_scenario_calc (const wlantcp_scenario *s, size_t flow,
                       wlantcp_calc_input *in, wlantcp_calc_result *out)
{
  return Guard ([&] {
    Require (s != nullptr && out != nullptr, "null argument");
    const auto flows = s->spec.ExpandFlows ();
    Require (flow < flows.size (), "flow index out of range");
    wlantcp_calc_input mix;
    mix.n_up = s->spec.CountFlows (wlantcp::Direction::Up);
    mix.n_down = s->spec.CountFlows (wlantcp::Direction::Down);
    mix.b = s->spec.b;
    mix.ld = flows[flow].ld;
    mix.bs_ap = s->spec.bsAp;
    mix.data_size = s->spec.dataSize;
    mix.ack_size = s->spec.ackSize;
    FillCalc (mix, s->spec.mac, out);
    if (in != nullptr)
      {
        *in = mix;
      }
  });
}

size_t
wlantcp_figure_count (void)
{
  return wlantcp::FigureIds ().size ();
}

const char *
wlantcp_figure_id (size_t i)
{
  const auto &ids = wlantcp::FigureIds ();
  return i < ids.size () ? ids[i].c_str () : nullptr;
}

wlantcp_status
wlantcp_replicate (const char *figure_id, const char *out_dir, unsigned jobs,
                   uint64_t seed, double duration, char **written)
{
  return Guard ([&] {
    Require (figure_id != nullptr && out_dir != nullptr, "null argument");
    wlantcp::ReplicateOptions opt;
    opt.outDir = out_dir;
    opt.workers = jobs;
    opt.seed = seed;
    if (duration > 0)
      {
        opt.duration = duration;
      }
    auto paths = wlantcp::Replicate (figure_id, opt);
    if (written != nullptr)
      {
        *written = Duplicate (JoinPaths (paths));
      }
  });
}

wlantcp_status
wlantcp_sweep_file (const char *path, const uint64_t *seeds, size_t n_seeds,
                    unsigned jobs, double duration, const char *out_dir,
                    char **written)
{
  return Guard ([&] {
    Require (path != nullptr && out_dir != nullptr && (seeds != nullptr || n_seeds == 0),
             "null argument");
    wlantcp::SweepSpec sweep = wlantcp::SweepSpec::ParseFile (path);
    if (duration > 0)
      {
        sweep.base.duration = duration;
      }
    std::vector<std::uint64_t> s (seeds, seeds + n_seeds);
    auto paths = wlantcp::RunSweep (sweep, s, jobs, out_dir);
    if (written != nullptr)
      {
        *written = Duplicate (JoinPaths (paths));
      }
  });
}

} // extern "C"

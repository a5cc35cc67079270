#include "wlantcp/metrics.h"

#include "wlantcp/simulation.h"

#include <charconv>
#include <cmath>

namespace wlantcp {

std::string
FormatDouble (double v)
{
  char buf[64];
  auto [p, ec] = std::to_chars (buf, buf + sizeof buf, v);
  return std::string (buf, p);
}

double
JainIndex (const std::vector<double> &x)
{
  if (x.empty ())
    {
      throw Error (ErrorCode::InvalidArgument, "jain index of an empty list");
    }
  double sum = 0;
  double sumSq = 0;
  for (double v : x)
    {
      if (!(v >= 0))
        {
          throw Error (ErrorCode::InvalidArgument, "throughputs must be >= 0");
        }
      sum += v;
      sumSq += v * v;
    }
  if (sumSq == 0)
    {
      throw Error (ErrorCode::InvalidArgument, "jain index of all-zero throughputs");
    }
  return sum * sum / (static_cast<double> (x.size ()) * sumSq);
}

FairnessReport
MixedFairness (const RunReport &report, const std::vector<bool> &saturated,
               double threshold)
{
  if (saturated.size () != report.flows.size ())
    {
      throw Error (ErrorCode::InvalidArgument,
                   "saturation labels must cover every flow");
    }
  FairnessReport fr;
  for (std::size_t i = 0; i < report.flows.size (); ++i)
    {
      const FlowReport &f = report.flows[i];
      if (f.spec.kind == FlowKind::Short)
        {
          fr.completionTimes.push_back (f.completionTime);
        }
      if (saturated[i])
        {
          fr.saturatedFlowIds.push_back (f.spec.id);
          fr.perFlowThroughput.push_back (f.throughput);
        }
      else
        {
          fr.nonsaturatedFlowIds.push_back (f.spec.id);
          fr.nonsaturatedPlr.push_back (f.plr);
          fr.maxPlr = std::max (fr.maxPlr, f.plr);
        }
    }
  bool anyPositive = false;
  for (double t : fr.perFlowThroughput)
    {
      anyPositive = anyPositive || t > 0;
    }
  if (fr.perFlowThroughput.empty ())
    {
      fr.jainIndex = 1.0;
    }
  else
    {
      fr.jainIndex = anyPositive ? JainIndex (fr.perFlowThroughput)
                                 : 1.0 / fr.perFlowThroughput.size ();
    }
  fr.fairAccess = fr.jainIndex >= threshold && fr.maxPlr == 0;
  return fr;
}

FairnessReport
MixedFairness (const RunReport &report, double threshold)
{
  std::vector<bool> saturated;
  for (const FlowReport &f : report.flows)
    {
      saturated.push_back (f.spec.kind == FlowKind::Ftp);
    }
  return MixedFairness (report, saturated, threshold);
}

std::vector<std::vector<double>>
ThroughputSeries (const RunReport &report, double bin)
{
  double ratio = bin / report.bin;
  auto k = static_cast<std::size_t> (std::llround (ratio));
  if (!(bin > 0) || k < 1 || std::abs (ratio - static_cast<double> (k)) > 1e-9)
    {
      throw Error (ErrorCode::InvalidArgument,
                   "bin must be a positive multiple of the report bin");
    }
  std::vector<std::vector<double>> out;
  for (const FlowReport &f : report.flows)
    {
      std::vector<double> s ((f.binBytes.size () + k - 1) / k, 0.0);
      for (std::size_t i = 0; i < f.binBytes.size (); ++i)
        {
          s[i / k] += 8.0 * static_cast<double> (f.binBytes[i]);
        }
      out.push_back (std::move (s));
    }
  return out;
}

void
WriteFlowsCsv (std::ostream &os, const RunReport &report)
{
  os << "flow,direction,kind,ld,adv_window,start,station,delivered_packets,"
        "throughput_bps,data_sent,retransmissions,timeouts,fast_retransmits,"
        "offered,ap_offered,ap_drops,sta_drops,retry_drops,plr,"
        "completion_time,final_cwnd,mean_wlim,ld_estimate,b_estimate\n";
  for (const FlowReport &f : report.flows)
    {
      os << f.spec.id << ',' << ToString (f.spec.direction) << ','
         << ToString (f.spec.kind) << ',' << FormatDouble (f.spec.ld) << ','
         << f.spec.advWindow << ',' << FormatDouble (f.spec.start) << ','
         << f.station << ',' << f.deliveredPackets << ','
         << FormatDouble (f.throughput) << ',' << f.dataSent << ','
         << f.retransmissions << ',' << f.timeouts << ',' << f.fastRetransmits
         << ',' << f.offered << ',' << f.apOffered << ',' << f.apDrops << ','
         << f.staDrops << ',' << f.retryDrops << ',' << FormatDouble (f.plr)
         << ',' << (f.completionTime ? FormatDouble (*f.completionTime) : "")
         << ',' << FormatDouble (f.finalCwnd) << ','
         << FormatDouble (f.meanWLim) << ','
         << (f.ldEstimate ? FormatDouble (*f.ldEstimate) : "") << ','
         << FormatDouble (f.bEstimate) << '\n';
    }
}

void
WriteSeriesCsv (std::ostream &os, const RunReport &report)
{
  os << "time";
  for (const FlowReport &f : report.flows)
    {
      os << ",flow" << f.spec.id;
    }
  os << '\n';
  std::size_t bins = report.flows.empty () ? 0 : report.flows.front ().binBytes.size ();
  for (std::size_t i = 0; i < bins; ++i)
    {
      os << FormatDouble (static_cast<double> (i) * report.bin);
      for (const FlowReport &f : report.flows)
        {
          os << ',' << FormatDouble (8.0 * f.binBytes[i] / report.bin);
        }
      os << '\n';
    }
}

void
WriteFairnessCsv (std::ostream &os, const RunReport &report)
{
  FairnessReport fr = MixedFairness (report);
  double up = 0;
  double down = 0;
  for (const FlowReport &f : report.flows)
    {
      (f.spec.direction == Direction::Up ? up : down) += f.throughput;
    }
  std::size_t completed = 0;
  double maxCompletion = 0;
  for (const auto &c : fr.completionTimes)
    {
      if (c)
        {
          ++completed;
          maxCompletion = std::max (maxCompletion, *c);
        }
    }
  os << "scenario,seed,control_block,flows,jain_saturated,max_plr,fair_access,"
        "uplink_bps,downlink_bps,total_bps,ap_offered,ap_drops,"
        "steady_ap_drop_ratio,short_flows,short_completed,max_completion\n";
  os << report.scenario << ',' << report.seed << ','
     << ToString (report.controlBlock) << ',' << report.flows.size () << ','
     << FormatDouble (fr.jainIndex) << ',' << FormatDouble (fr.maxPlr) << ','
     << (fr.fairAccess ? 1 : 0) << ',' << FormatDouble (up) << ','
     << FormatDouble (down) << ',' << FormatDouble (up + down) << ','
     << report.apOffered << ',' << report.apDrops << ','
     << FormatDouble (report.SteadyApDropRatio ()) << ','
     << fr.completionTimes.size () << ',' << completed << ','
     << FormatDouble (maxCompletion) << '\n';
}

} // namespace wlantcp

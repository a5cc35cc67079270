#include "wlantcp/scenario.h"

#include "wlantcp/metrics.h"

#include <charconv>
#include <fstream>
#include <sstream>

namespace wlantcp {

namespace {

[[noreturn]] void
ParseFail (const std::string &msg)
{
  throw Error (ErrorCode::Parse, msg);
}

[[noreturn]] void
Invalid (const std::string &msg)
{
  throw Error (ErrorCode::Validation, msg);
}

std::string_view
Trim (std::string_view s)
{
  const char *ws = " \t\r\n";
  auto b = s.find_first_not_of (ws);
  if (b == std::string_view::npos)
    {
      return {};
    }
  auto e = s.find_last_not_of (ws);
  return s.substr (b, e - b + 1);
}

std::vector<std::string_view>
SplitList (std::string_view s)
{
  std::vector<std::string_view> out;
  while (true)
    {
      auto comma = s.find (',');
      out.push_back (Trim (s.substr (0, comma)));
      if (comma == std::string_view::npos)
        {
          break;
        }
      s.remove_prefix (comma + 1);
    }
  return out;
}

double
ToDouble (std::string_view key, std::string_view v)
{
  double x = 0;
  auto [p, ec] = std::from_chars (v.data (), v.data () + v.size (), x);
  if (ec != std::errc () || p != v.data () + v.size () || v.empty ())
    {
      ParseFail ("bad number for " + std::string (key) + ": '" + std::string (v) + "'");
    }
  return x;
}

std::uint64_t
ToUint (std::string_view key, std::string_view v)
{
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars (v.data (), v.data () + v.size (), x);
  if (ec != std::errc () || p != v.data () + v.size () || v.empty ())
    {
      ParseFail ("bad integer for " + std::string (key) + ": '" + std::string (v) + "'");
    }
  return x;
}

std::uint32_t
ToU32 (std::string_view key, std::string_view v)
{
  std::uint64_t x = ToUint (key, v);
  if (x > 0xffffffffULL)
    {
      ParseFail ("integer out of range for " + std::string (key));
    }
  return static_cast<std::uint32_t> (x);
}

bool
ToBool (std::string_view key, std::string_view v)
{
  if (v == "true" || v == "1" || v == "yes")
    {
      return true;
    }
  if (v == "false" || v == "0" || v == "no")
    {
      return false;
    }
  ParseFail ("bad boolean for " + std::string (key) + ": '" + std::string (v) + "'");
}

template <typename T, typename F>
std::vector<T>
ToList (std::string_view key, std::string_view v, F conv)
{
  std::vector<T> out;
  for (std::string_view item : SplitList (v))
    {
      out.push_back (conv (key, item));
    }
  return out;
}

template <typename T>
std::string
JoinList (const std::vector<T> &v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size (); ++i)
    {
      if (i > 0)
        {
          s += ',';
        }
      if constexpr (std::is_floating_point_v<T>)
        {
          s += FormatDouble (v[i]);
        }
      else
        {
          s += std::to_string (v[i]);
        }
    }
  return s;
}

const char *
ToString (LdSchedule s)
{
  switch (s)
    {
    case LdSchedule::Constant:
      return "constant";
    case LdSchedule::Arithmetic:
      return "arithmetic";
    case LdSchedule::Triangular:
      return "triangular";
    }
  return "?";
}

void
SetGroupKey (FlowGroup &g, std::string_view key, std::string_view v)
{
  if (key == "direction")
    {
      if (v == "up")
        g.direction = Direction::Up;
      else if (v == "down")
        g.direction = Direction::Down;
      else
        ParseFail ("direction must be up or down");
    }
  else if (key == "count")
    g.count = ToU32 (key, v);
  else if (key == "kind")
    {
      if (v == "ftp")
        g.kind = FlowKind::Ftp;
      else if (v == "telnet")
        g.kind = FlowKind::Telnet;
      else if (v == "short")
        g.kind = FlowKind::Short;
      else
        ParseFail ("kind must be ftp, telnet or short");
    }
  else if (key == "ld")
    g.ld = ToDouble (key, v);
  else if (key == "ld_step")
    g.ldStep = ToDouble (key, v);
  else if (key == "ld_schedule")
    {
      if (v == "constant")
        g.ldSchedule = LdSchedule::Constant;
      else if (v == "arithmetic")
        g.ldSchedule = LdSchedule::Arithmetic;
      else if (v == "triangular")
        g.ldSchedule = LdSchedule::Triangular;
      else
        ParseFail ("ld_schedule must be constant, arithmetic or triangular");
    }
  else if (key == "ld_index_offset")
    g.ldIndexOffset = ToU32 (key, v);
  else if (key == "adv_window")
    g.advWindows = ToList<std::uint32_t> (key, v, ToU32);
  else if (key == "start")
    g.start = ToDouble (key, v);
  else if (key == "start_step")
    g.startStep = ToDouble (key, v);
  else if (key == "telnet_rate")
    g.telnetRates = ToList<double> (key, v, ToDouble);
  else if (key == "short_packets")
    g.shortPackets = ToU32 (key, v);
  else
    ParseFail ("unknown flow key '" + std::string (key) + "'");
}

} // namespace

const char *
ToString (FlowKind k)
{
  switch (k)
    {
    case FlowKind::Ftp:
      return "ftp";
    case FlowKind::Telnet:
      return "telnet";
    case FlowKind::Short:
      return "short";
    }
  return "?";
}

const char *
ToString (ControlBlock c)
{
  switch (c)
    {
    case ControlBlock::None:
      return "none";
    case ControlBlock::Fcwa:
      return "fcwa";
    case ControlBlock::Accf:
      return "accf";
    }
  return "?";
}

std::vector<FlowSpec>
ScenarioSpec::ExpandFlows () const
{
  std::vector<FlowSpec> out;
  std::uint32_t id = 0;
  for (std::uint32_t gi = 0; gi < flows.size (); ++gi)
    {
      const FlowGroup &g = flows[gi];
      for (std::uint32_t i = 0; i < g.count; ++i)
        {
          FlowSpec f;
          f.id = id++;
          f.group = gi;
          f.direction = g.direction;
          f.kind = g.kind;
          double j = static_cast<double> (i + g.ldIndexOffset);
          switch (g.ldSchedule)
            {
            case LdSchedule::Constant:
              f.ld = g.ld;
              break;
            case LdSchedule::Arithmetic:
              f.ld = g.ld + j * g.ldStep;
              break;
            case LdSchedule::Triangular:
              f.ld = g.ld + g.ldStep * ((j + 1) * (j + 2) / 2 - 1);
              break;
            }
          f.advWindow = g.advWindows.empty () ? 42 : g.advWindows[i % g.advWindows.size ()];
          f.start = g.start + i * g.startStep;
          f.telnetRate = g.telnetRates.empty () ? 0 : g.telnetRates[i % g.telnetRates.size ()];
          f.shortPackets = g.shortPackets;
          out.push_back (f);
        }
    }
  return out;
}

std::uint32_t
ScenarioSpec::CountFlows (Direction d) const
{
  std::uint32_t n = 0;
  for (const FlowGroup &g : flows)
    {
      if (g.direction == d)
        {
          n += g.count;
        }
    }
  return n;
}

void
ScenarioSpec::Validate () const
{
  if (!(duration > 0))
    Invalid ("duration must be > 0");
  if (!(warmup >= 0 && warmup < duration))
    Invalid ("warmup must be in [0, duration)");
  if (!(bin > 0))
    Invalid ("bin must be > 0");
  if (seeds.empty ())
    Invalid ("at least one seed is required");
  if (bsAp < 1 || staQueue < 1)
    Invalid ("queue capacities must be >= 1");
  if (!(ackSize > 0 && dataSize > ackSize))
    Invalid ("need data_size > ack_size > 0");
  if (b < 1)
    Invalid ("b must be >= 1");
  if (!(per >= 0 && per < 1))
    Invalid ("per must be in [0, 1)");
  if (!(initialCwnd >= 1))
    Invalid ("tcp.initial_cwnd must be >= 1");
  if (!(minRto > 0 && initialRto > 0 && maxRto >= minRto))
    Invalid ("need rto values > 0 and max_rto >= min_rto");
  if (!(delAckTimeout > 0))
    Invalid ("tcp.delack_timeout must be > 0");
  if (!(fcwaEwmaWeight > 0 && fcwaEwmaWeight <= 1) || !(fcwaFlowTimeout > 0))
    Invalid ("fcwa.ewma_weight must be in (0, 1] and fcwa.flow_timeout > 0");
  try
    {
      mac.Validate ();
      accf.Validate ();
    }
  catch (const Error &e)
    {
      Invalid (e.what ());
    }
  if (mode == SimMode::Saturation)
    {
      if (saturationStations < 1)
        Invalid ("saturation_stations must be >= 1");
      return;
    }
  if (flows.empty ())
    Invalid ("a tcp scenario needs at least one flow block");
  for (std::size_t i = 0; i < flows.size (); ++i)
    {
      const FlowGroup &g = flows[i];
      std::string where = "flow[" + std::to_string (i) + "]: ";
      if (g.count < 1)
        Invalid (where + "count must be >= 1");
      if (!(g.ld >= 0) || !(g.ldStep >= 0))
        Invalid (where + "ld and ld_step must be >= 0");
      if (g.advWindows.empty ())
        Invalid (where + "adv_window list is empty");
      for (std::uint32_t w : g.advWindows)
        if (w < 1)
          Invalid (where + "adv_window must be >= 1");
      if (!(g.start >= 0) || !(g.startStep >= 0))
        Invalid (where + "start and start_step must be >= 0");
      if (g.start + (g.count - 1) * g.startStep >= duration)
        Invalid (where + "flows must start before the end of the run");
      if (g.kind == FlowKind::Telnet)
        {
          if (g.telnetRates.empty ())
            Invalid (where + "telnet_rate list is empty");
          for (double r : g.telnetRates)
            if (!(r > 0))
              Invalid (where + "telnet_rate must be > 0");
        }
      if (g.kind == FlowKind::Short && g.shortPackets < 1)
        Invalid (where + "short_packets must be >= 1");
    }
}

void
ScenarioSpec::Set (std::string_view key, std::string_view value)
{
  key = Trim (key);
  std::string_view v = Trim (value);
  if (key.starts_with ("flow["))
    {
      auto close = key.find ("].");
      if (close == std::string_view::npos)
        ParseFail ("malformed flow key '" + std::string (key) + "'");
      std::size_t idx = ToUint (key, key.substr (5, close - 5));
      if (idx >= flows.size ())
        ParseFail ("flow index out of range in '" + std::string (key) + "'");
      SetGroupKey (flows[idx], key.substr (close + 2), v);
      return;
    }
  if (key == "name")
    name = std::string (v);
  else if (key == "mode")
    {
      if (v == "tcp")
        mode = SimMode::Tcp;
      else if (v == "saturation")
        mode = SimMode::Saturation;
      else
        ParseFail ("mode must be tcp or saturation");
    }
  else if (key == "saturation_stations")
    saturationStations = ToU32 (key, v);
  else if (key == "duration")
    duration = ToDouble (key, v);
  else if (key == "warmup")
    warmup = ToDouble (key, v);
  else if (key == "bin")
    bin = ToDouble (key, v);
  else if (key == "seeds")
    seeds = ToList<std::uint64_t> (key, v, ToUint);
  else if (key == "bs_ap")
    bsAp = ToU32 (key, v);
  else if (key == "sta_queue")
    staQueue = ToU32 (key, v);
  else if (key == "data_size")
    dataSize = ToU32 (key, v);
  else if (key == "ack_size")
    ackSize = ToU32 (key, v);
  else if (key == "b")
    b = ToU32 (key, v);
  else if (key == "per")
    per = ToDouble (key, v);
  else if (key == "control_block")
    {
      if (v == "none")
        controlBlock = ControlBlock::None;
      else if (v == "fcwa")
        controlBlock = ControlBlock::Fcwa;
      else if (v == "accf")
        controlBlock = ControlBlock::Accf;
      else
        ParseFail ("control_block must be none, fcwa or accf");
    }
  else if (key == "accf.alpha")
    accf.alpha = ToDouble (key, v);
  else if (key == "accf.beta")
    accf.beta = ToDouble (key, v);
  else if (key == "accf.gamma_min")
    accf.gammaMin = ToDouble (key, v);
  else if (key == "accf.num_thresh")
    accf.numThresh = ToU32 (key, v);
  else if (key == "accf.gamma_mode")
    {
      if (v == "step")
        accf.gammaMode = GammaMode::Step;
      else if (v == "ramp")
        accf.gammaMode = GammaMode::Ramp;
      else
        ParseFail ("accf.gamma_mode must be step or ramp");
    }
  else if (key == "accf.ewma_weight")
    accf.ewmaWeight = ToDouble (key, v);
  else if (key == "accf.estimator_timeout")
    accf.estimatorTimeout = ToDouble (key, v);
  else if (key == "accf.log")
    accfLog = ToBool (key, v);
  else if (key == "fcwa.ct_mode")
    {
      if (v == "model")
        fcwaCtMode = CtMode::Model;
      else if (v == "measured")
        fcwaCtMode = CtMode::Measured;
      else
        ParseFail ("fcwa.ct_mode must be model or measured");
    }
  else if (key == "fcwa.ewma_weight")
    fcwaEwmaWeight = ToDouble (key, v);
  else if (key == "fcwa.flow_timeout")
    fcwaFlowTimeout = ToDouble (key, v);
  else if (key == "mac.slot_time")
    mac.slotTime = ToDouble (key, v);
  else if (key == "mac.sifs")
    mac.sifs = ToDouble (key, v);
  else if (key == "mac.difs")
    mac.difs = ToDouble (key, v);
  else if (key == "mac.data_rate")
    mac.dataRate = ToDouble (key, v);
  else if (key == "mac.basic_rate")
    mac.basicRate = ToDouble (key, v);
  else if (key == "mac.cw_min")
    mac.cwMin = ToU32 (key, v);
  else if (key == "mac.cw_max")
    mac.cwMax = ToU32 (key, v);
  else if (key == "mac.retry_limit")
    mac.retryLimit = ToU32 (key, v);
  else if (key == "mac.ack_duration")
    mac.macAckDuration = ToDouble (key, v);
  else if (key == "mac.phy_header")
    mac.phyHeaderDuration = ToDouble (key, v);
  else if (key == "mac.header_bytes")
    mac.macHeaderBytes = ToU32 (key, v);
  else if (key == "tcp.initial_cwnd")
    initialCwnd = ToDouble (key, v);
  else if (key == "tcp.initial_rto")
    initialRto = ToDouble (key, v);
  else if (key == "tcp.min_rto")
    minRto = ToDouble (key, v);
  else if (key == "tcp.max_rto")
    maxRto = ToDouble (key, v);
  else if (key == "tcp.delack_timeout")
    delAckTimeout = ToDouble (key, v);
  else if (key == "trace")
    trace = std::string (v);
  else
    ParseFail ("unknown key '" + std::string (key) + "'");
}

std::string
ScenarioSpec::Serialize () const
{
  std::ostringstream os;
  auto kv = [&os] (const char *k, const std::string &v) {
    os << k << " = " << v << '\n';
  };
  auto d = [] (double x) { return FormatDouble (x); };
  auto u = [] (std::uint64_t x) { return std::to_string (x); };
  kv ("name", name);
  kv ("mode", mode == SimMode::Tcp ? "tcp" : "saturation");
  kv ("saturation_stations", u (saturationStations));
  kv ("duration", d (duration));
  kv ("warmup", d (warmup));
  kv ("bin", d (bin));
  kv ("seeds", JoinList (seeds));
  kv ("bs_ap", u (bsAp));
  kv ("sta_queue", u (staQueue));
  kv ("data_size", u (dataSize));
  kv ("ack_size", u (ackSize));
  kv ("b", u (b));
  kv ("per", d (per));
  kv ("control_block", ToString (controlBlock));
  kv ("accf.alpha", d (accf.alpha));
  kv ("accf.beta", d (accf.beta));
  kv ("accf.gamma_min", d (accf.gammaMin));
  kv ("accf.num_thresh", u (accf.numThresh));
  kv ("accf.gamma_mode", accf.gammaMode == GammaMode::Step ? "step" : "ramp");
  kv ("accf.ewma_weight", d (accf.ewmaWeight));
  kv ("accf.estimator_timeout", d (accf.estimatorTimeout));
  kv ("accf.log", accfLog ? "true" : "false");
  kv ("fcwa.ct_mode", fcwaCtMode == CtMode::Model ? "model" : "measured");
  kv ("fcwa.ewma_weight", d (fcwaEwmaWeight));
  kv ("fcwa.flow_timeout", d (fcwaFlowTimeout));
  kv ("mac.slot_time", d (mac.slotTime));
  kv ("mac.sifs", d (mac.sifs));
  kv ("mac.difs", d (mac.difs));
  kv ("mac.data_rate", d (mac.dataRate));
  kv ("mac.basic_rate", d (mac.basicRate));
  kv ("mac.cw_min", u (mac.cwMin));
  kv ("mac.cw_max", u (mac.cwMax));
  kv ("mac.retry_limit", u (mac.retryLimit));
  kv ("mac.ack_duration", d (mac.macAckDuration));
  kv ("mac.phy_header", d (mac.phyHeaderDuration));
  kv ("mac.header_bytes", u (mac.macHeaderBytes));
  kv ("tcp.initial_cwnd", d (initialCwnd));
  kv ("tcp.initial_rto", d (initialRto));
  kv ("tcp.min_rto", d (minRto));
  kv ("tcp.max_rto", d (maxRto));
  kv ("tcp.delack_timeout", d (delAckTimeout));
  if (!trace.empty ())
    {
      kv ("trace", trace);
    }
  for (const FlowGroup &g : flows)
    {
      os << "flow {\n";
      auto fkv = [&os] (const char *k, const std::string &v) {
        os << "  " << k << " = " << v << '\n';
      };
      fkv ("direction", ToString (g.direction));
      fkv ("count", u (g.count));
      fkv ("kind", ToString (g.kind));
      fkv ("ld", d (g.ld));
      fkv ("ld_step", d (g.ldStep));
      fkv ("ld_schedule", ToString (g.ldSchedule));
      fkv ("ld_index_offset", u (g.ldIndexOffset));
      fkv ("adv_window", JoinList (g.advWindows));
      fkv ("start", d (g.start));
      fkv ("start_step", d (g.startStep));
      fkv ("telnet_rate", JoinList (g.telnetRates));
      fkv ("short_packets", u (g.shortPackets));
      os << "}\n";
    }
  return os.str ();
}

ScenarioSpec
ScenarioSpec::Parse (std::string_view text)
{
  ScenarioSpec spec;
  bool inFlow = false;
  int lineNo = 0;
  while (!text.empty ())
    {
      auto nl = text.find ('\n');
      std::string_view line = text.substr (0, nl);
      text.remove_prefix (nl == std::string_view::npos ? text.size () : nl + 1);
      ++lineNo;
      auto hash = line.find ('#');
      if (hash != std::string_view::npos)
        {
          line = line.substr (0, hash);
        }
      line = Trim (line);
      if (line.empty ())
        {
          continue;
        }
      std::string at = "line " + std::to_string (lineNo) + ": ";
      try
        {
          if (line == "flow {" || line == "flow{")
            {
              if (inFlow)
                ParseFail ("nested flow block");
              spec.flows.emplace_back ();
              inFlow = true;
              continue;
            }
          if (line == "}")
            {
              if (!inFlow)
                ParseFail ("unmatched '}'");
              inFlow = false;
              continue;
            }
          auto eq = line.find ('=');
          if (eq == std::string_view::npos)
            ParseFail ("expected 'key = value'");
          std::string_view key = Trim (line.substr (0, eq));
          std::string_view value = Trim (line.substr (eq + 1));
          if (inFlow)
            SetGroupKey (spec.flows.back (), key, value);
          else
            spec.Set (key, value);
        }
      catch (const Error &e)
        {
          throw Error (ErrorCode::Parse, at + e.what ());
        }
    }
  if (inFlow)
    {
      ParseFail ("unterminated flow block");
    }
  return spec;
}

ScenarioSpec
ScenarioSpec::ParseFile (const std::string &path)
{
  std::ifstream in (path);
  if (!in)
    {
      throw Error (ErrorCode::Io, "cannot read scenario file " + path);
    }
  std::ostringstream ss;
  ss << in.rdbuf ();
  try
    {
      return Parse (ss.str ());
    }
  catch (const Error &e)
    {
      throw Error (e.Code (), path + ": " + e.what ());
    }
}

} // namespace wlantcp

#ifndef WLANTCP_METRICS_H
#define WLANTCP_METRICS_H

// Fairness and throughput measures over run reports, plus the CSV emitters.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace wlantcp {

struct RunReport;

/// (sum x)^2 / (n sum x^2). Throws InvalidArgument on empty, negative or
/// all-zero input.
double JainIndex (const std::vector<double> &x);

struct FairnessReport
{
  double jainIndex = 1.0;
  std::vector<double> perFlowThroughput; // bits/s, saturated flows
  std::vector<std::uint32_t> saturatedFlowIds;
  std::vector<std::uint32_t> nonsaturatedFlowIds;
  std::vector<double> nonsaturatedPlr;
  std::vector<std::optional<double>> completionTimes; // short-lived flows
  double maxPlr = 0;
  bool fairAccess = false;
};

/// Jain index over saturated flows, PLR over nonsaturated ones. `saturated`
/// labels each flow of the report (same order); its size must match.
FairnessReport MixedFairness (const RunReport &report,
                              const std::vector<bool> &saturated,
                              double threshold = 0.99);

/// Same with the labels taken from the flow kinds in the report.
FairnessReport MixedFairness (const RunReport &report, double threshold = 0.99);

/// Delivered bits per bin for every flow, re-binned from the report's base
/// bins. `bin` must be a positive multiple of the report's bin width.
std::vector<std::vector<double>> ThroughputSeries (const RunReport &report,
                                                   double bin);

void WriteFlowsCsv (std::ostream &os, const RunReport &report);
void WriteSeriesCsv (std::ostream &os, const RunReport &report);
void WriteFairnessCsv (std::ostream &os, const RunReport &report);

/// Shortest decimal form that reads back to the same double.
std::string FormatDouble (double v);

} // namespace wlantcp

#endif

/* C interface to the wlantcp simulator.
 *
 * Every function that can fail returns a wlantcp_status; on failure
 * wlantcp_last_error() describes the problem (per calling thread). Handles
 * are opaque and owned by the caller, who releases them with the matching
 * *_free function. Strings returned through char** are released with
 * wlantcp_string_free.
 */
#ifndef WLANTCP_WLANTCP_H
#define WLANTCP_WLANTCP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define WLANTCP_API __declspec(dllexport)
#else
#define WLANTCP_API __attribute__ ((visibility ("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wlantcp_status
{
  WLANTCP_OK = 0,
  WLANTCP_ERR_INVALID_ARGUMENT = 1,
  WLANTCP_ERR_PARSE = 2,
  WLANTCP_ERR_VALIDATION = 3,
  WLANTCP_ERR_RUNTIME = 4,
  WLANTCP_ERR_IO = 5
} wlantcp_status;

typedef struct wlantcp_scenario wlantcp_scenario;
typedef struct wlantcp_report wlantcp_report;

WLANTCP_API const char *wlantcp_version (void);
WLANTCP_API const char *wlantcp_last_error (void);
WLANTCP_API void wlantcp_string_free (char *s);

/* Scenarios */
WLANTCP_API wlantcp_status wlantcp_scenario_parse (const char *text,
                                                   wlantcp_scenario **out);
WLANTCP_API wlantcp_status wlantcp_scenario_load (const char *path,
                                                  wlantcp_scenario **out);
/* A named scenario of the built-in catalogue (see wlantcp_catalogue_name). */
WLANTCP_API wlantcp_status wlantcp_scenario_catalogue (const char *name,
                                                       wlantcp_scenario **out);
WLANTCP_API wlantcp_status wlantcp_scenario_set (wlantcp_scenario *s,
                                                 const char *key,
                                                 const char *value);
WLANTCP_API wlantcp_status wlantcp_scenario_validate (const wlantcp_scenario *s);
WLANTCP_API wlantcp_status wlantcp_scenario_serialize (const wlantcp_scenario *s,
                                                       char **out);
WLANTCP_API const char *wlantcp_scenario_name (const wlantcp_scenario *s);
WLANTCP_API size_t wlantcp_scenario_seed_count (const wlantcp_scenario *s);
WLANTCP_API uint64_t wlantcp_scenario_seed (const wlantcp_scenario *s, size_t i);
WLANTCP_API void wlantcp_scenario_free (wlantcp_scenario *s);

WLANTCP_API size_t wlantcp_catalogue_count (void);
WLANTCP_API const char *wlantcp_catalogue_name (size_t i);

/* Runs */
WLANTCP_API wlantcp_status wlantcp_run (const wlantcp_scenario *s, uint64_t seed,
                                        wlantcp_report **out);
/* One report per seed, written to out[0..n_seeds); runs use `jobs` threads. */
WLANTCP_API wlantcp_status wlantcp_run_batch (const wlantcp_scenario *s,
                                              const uint64_t *seeds,
                                              size_t n_seeds, unsigned jobs,
                                              wlantcp_report **out);

typedef struct wlantcp_summary
{
  double jain;         /* over saturated (FTP) flows */
  double max_plr;      /* over nonsaturated flows */
  double mean_plr;
  double uplink_bps;
  double downlink_bps;
  double total_bps;
  double ap_drop_ratio; /* steady state */
  size_t short_flows;
  size_t short_completed;
  double max_completion; /* seconds, over completed short flows */
} wlantcp_summary;

typedef struct wlantcp_flow_result
{
  uint32_t id;
  int uplink; /* 1 for station-to-wired flows */
  double ld;
  double throughput_bps;
  uint64_t delivered_packets;
  uint64_t ap_drops;
  uint64_t timeouts;
  double plr;
  double completion_time; /* seconds, negative if the flow did not finish */
} wlantcp_flow_result;

WLANTCP_API wlantcp_status wlantcp_report_summary (const wlantcp_report *r,
                                                   wlantcp_summary *out);
WLANTCP_API size_t wlantcp_report_flow_count (const wlantcp_report *r);
WLANTCP_API wlantcp_status wlantcp_report_flow (const wlantcp_report *r, size_t i,
                                                wlantcp_flow_result *out);
WLANTCP_API uint64_t wlantcp_report_seed (const wlantcp_report *r);
/* Writes <stem>_flows.csv, _series.csv, _fairness.csv, gnuplot data and
 * script, and control-block logs when present. */
WLANTCP_API wlantcp_status wlantcp_report_write (const wlantcp_report *r,
                                                 const char *dir,
                                                 const char *stem);
WLANTCP_API void wlantcp_report_free (wlantcp_report *r);

/* Analytic model */
typedef struct wlantcp_calc_input
{
  double n_up;
  double n_down;
  double b;
  double ld;    /* seconds */
  double bs_ap; /* packets */
  uint32_t data_size;
  uint32_t ack_size;
} wlantcp_calc_input;

typedef struct wlantcp_calc_result
{
  double pr_ap_data, pr_ap_ack, pr_sta_data, pr_sta_ack;
  double ct_data_data, ct_data_ack, ct_ack_data, ct_ack_ack; /* AP type, STA type */
  double ct_ap;
  double ct_flow;
  double wired_flight_term;
  double buffer_term;
  double w_lim;
  int64_t w_lim_floor;
  double baseline_window; /* bs_ap / (n_up + n_down) */
  double buffer_roundtrip; /* buffer size for which w_lim is the limit */
} wlantcp_calc_result;

/* 802.11g defaults, n_up = n_down = 5, b = 1, ld = 0, bs_ap = 100. */
WLANTCP_API void wlantcp_calc_defaults (wlantcp_calc_input *in);
WLANTCP_API wlantcp_status wlantcp_calc (const wlantcp_calc_input *in,
                                         wlantcp_calc_result *out);
/* Model evaluated for flow i of a scenario: the mix (flow counts, b, buffer,
 * sizes) and MAC timing come from the scenario, ld from the flow. `in`
 * receives the inputs used and may be NULL. */
WLANTCP_API size_t wlantcp_scenario_flow_count (const wlantcp_scenario *s);
WLANTCP_API wlantcp_status wlantcp_scenario_calc (const wlantcp_scenario *s,
                                                  size_t flow,
                                                  wlantcp_calc_input *in,
                                                  wlantcp_calc_result *out);

/* Experiments */
WLANTCP_API size_t wlantcp_figure_count (void);
WLANTCP_API const char *wlantcp_figure_id (size_t i);
/* duration <= 0 keeps the catalogue durations. `written`, if not NULL,
 * receives the newline-separated list of files produced. */
WLANTCP_API wlantcp_status wlantcp_replicate (const char *figure_id,
                                              const char *out_dir, unsigned jobs,
                                              uint64_t seed, double duration,
                                              char **written);
/* Seeds override the file's `seeds` when n_seeds > 0; duration <= 0 keeps
 * the file's value. */
WLANTCP_API wlantcp_status wlantcp_sweep_file (const char *path,
                                               const uint64_t *seeds,
                                               size_t n_seeds, unsigned jobs,
                                               double duration,
                                               const char *out_dir,
                                               char **written);

#ifdef __cplusplus
}
#endif

#endif

#pragma once
// Monte Carlo trajectories of processes described by a MapSpec, running-
// maximum (ladder) extraction from those trajectories, and the empirical
// cross-check that a bonded process really climbs like its ascending factor:
// per-phase ladder jump-rate fits, switch-frequency balance, jump-marked
// phase-chain kernel, and overshoot shapes. All comparisons are invariant to
// the per-phase rescaling freedom of local time, which only speeds local
// clocks up: absolute intensities are not identifiable from paths, shapes and
// ratios are.
//
// Phase holding times, killing, finite-activity jumps and switch jumps are
// simulated exactly through competing exponential clocks; only the Gaussian
// part is discretized, at step h between events, so running maxima carry an
// O(sqrt(h)) resolution bias that the tolerances here budget for.

#include <cstdint>
#include <string>
#include <vector>

#include "mapwh/map_spec.hpp"

namespace mapwh {

// ------------------------------------------------------------- paths -------

enum class EventKind { phase_switch, levy_jump, kill };

struct PathEvent {
  double time = 0.0;
  EventKind kind = EventKind::levy_jump;
  int from = -1;      // phase before the event
  int to = -1;        // phase after (== from except for switches)
  double jump = 0.0;  // signed ordinate jump carried by the event
};

struct SimulateConfig {
  double T = 1.0;
  double h = 1e-4;
  std::uint64_t seed = 0;
  std::uint64_t path_id = 0;  // separate reproducible stream per path
  int start_phase = 0;
  // Dense (t, x, phase) samples at grid and event times. Required for maxima
  // extraction whenever a Gaussian part is present; Gaussian-free paths can
  // be extracted exactly from the events alone.
  bool record_trace = true;
};

struct SimulatedPath {
  int n = 0;
  double T = 0.0;
  double h = 0.0;
  double end_time = 0.0;  // T, or the killing time
  bool killed = false;
  bool has_gauss = false;
  bool has_trace = false;
  int start_phase = 0;
  std::vector<double> path_drift;  // realized linear slope per phase
  std::vector<PathEvent> events;   // strictly increasing times, kill last
  std::vector<double> t, x;        // trace samples (when recorded)
  std::vector<int> phase;
  double final_x = 0.0;
  int final_phase = 0;
};

// Exact event clocks + discretized Gaussian part; deterministic function of
// (spec, config) regardless of thread or call order. Jump densities must be
// component-wise nonnegative mixtures (they are for validated descriptions
// produced by this library).
SimulatedPath simulate_path(const MapSpec& spec, const SimulateConfig& cfg);

// ------------------------------------------------------------ ladders ------

enum class LadderSide { ascending, descending };

struct LadderEpoch {
  double increment = 0.0;  // > 0
  int phase_at_max = 0;    // phase when the record was set
  int phase_prev = 0;      // phase immediately before it was set
};

// Ascending: strict new maxima. Descending: new infima (ties do not produce
// epochs — increments are strictly positive either way). Traced paths are
// scanned at grid resolution; Gaussian-free paths are reconstructed exactly
// from events, with one epoch per continuous climbing stretch.
std::vector<LadderEpoch> extract_ladder(const SimulatedPath& path,
                                        LadderSide side);

// CSV rows `path_id, epoch, increment, phase_prev, phase_at_max` for one
// path's epochs; `header` gives the column line.
std::string ladder_csv_header();
std::string ladder_csv_rows(std::uint64_t path_id,
                            const std::vector<LadderEpoch>& epochs);

// ------------------------------------------------- empirical check ---------

struct LadderCheckConfig {
  int paths = 200;
  double T = 50.0;
  double h = 1e-4;
  std::uint64_t seed = 1;
  // increments above the cutoff are attributed to jumps. The effective
  // per-phase cutoff is max(jump_cutoff, 8 sigma_i sqrt(h)) so that single
  // grid steps of the Gaussian part can never masquerade as jump marks.
  double jump_cutoff = 0.05;
  // first-passage overshoot collection levels: start, spacing, count
  double level_start = 4.0;
  double level_step = 2.0;
  int levels = 6;
  double rate_tol = 0.05;    // per-phase fitted-rate gate
  double switch_tol = 0.10;  // switch-balance gate
  int threads = 0;           // 0: MAPWH_THREADS env, else hardware
};

struct PhaseLadderFit {
  long marked = 0;              // jump-attributed epochs in this phase
  bool has_expected = false;    // the ascending factor has jumps here
  double expected_rate = 0.0;   // slowest tail rate of the factor's measure
  double fitted_rate = 0.0;     // exponential fit on increments past cutoff
  double rel_error = 0.0;
};

struct LadderCheckReport {
  long total_epochs = 0;
  long marked_epochs = 0;
  std::vector<double> cutoffs;  // effective per-phase mark cutoffs
  std::vector<PhaseLadderFit> fits;
  // all-epoch phase transition counts (row-major n*n) and the worst relative
  // deviation of count ratios from the stationary switch balance of the
  // ascending factor's modulator
  std::vector<long> transitions;
  double balance_worst_rel = 0.0;
  // phase chain observed at jump-marked epochs vs its predicted kernel,
  // corrected for the marks whose overshoot hides below the cutoff
  std::vector<double> markchain_pred, markchain_emp;  // row-major n*n
  double markchain_max_diff = 0.0;
  // first-passage overshoots: creep fraction per phase and the pooled
  // distribution distance of the positive parts against the factor's
  // exponential overshoot law
  std::vector<double> creep_frac_emp, creep_frac_pred;
  long overshoot_samples = 0;
  double overshoot_ks = 0.0;
  bool rates_ok = false;
  bool switching_ok = false;
  std::vector<std::string> warnings;
};

// Simulates `paths` trajectories of the bonded description and checks the
// ascending ladder statistics against the plus factor. The bond must be
// unkilled with an irreducible modulator.
LadderCheckReport empirical_ladder_check(const MapSpec& bond,
                                         const MapSubordinatorSpec& plus,
                                         const std::vector<double>& pi,
                                         const LadderCheckConfig& cfg);

std::string to_json_text(const LadderCheckReport& r, int indent = 2);

// ------------------------------------------------------- statistics --------

// Kolmogorov-Smirnov distance of samples (consumed) against uniform(0, 1).
double ks_statistic_uniform(std::vector<double> u);
// Asymptotic two-sample Kolmogorov-Smirnov p-value (samples consumed).
double ks_two_sample_p(std::vector<double> a, std::vector<double> b);

}  // namespace mapwh

#pragma once

#include <cstdint>
#include <string>

namespace ada2ms {

enum class LrKind { WSDS, WSD };

const char* to_string(LrKind kind);
LrKind lr_kind_from_string(const std::string& text);

// Piecewise-linear warmup-steady-decay(-steady) learning-rate schedule.
// Warmup rises from eta_init to eta_peak over (0, t1], the rate holds at
// eta_peak through t2, decays linearly to eta_min at t3, and (WSDS only)
// holds eta_min afterwards. WSD requires t3 = T.
struct LrSchedule {
  LrKind kind = LrKind::WSDS;
  double eta_init = 1e-7;
  double eta_peak = 1e-3;
  double eta_min = 1e-5;
  std::int64_t t1 = 0;
  std::int64_t t2 = 0;
  std::int64_t t3 = 0;
  std::int64_t T = 0;
};

// Default breakpoints: t1 = 0.05T, t2 = 0.60T, t3 = 0.90T (WSDS) or
// t3 = T (WSD); eta_init = 1e-7 and eta_min = 0.01 * eta_peak.
LrSchedule make_wsds(double eta_peak, std::int64_t T);
LrSchedule make_wsd(double eta_peak, std::int64_t T);

void validate(const LrSchedule& schedule);

// Learning rate at step t in [1, T]. Breakpoints are exact:
// lr(t1) = lr(t2) = eta_peak and lr(t3) = eta_min.
double lr_at(const LrSchedule& schedule, std::int64_t t);

// Switching-exponent schedule: alpha = 1 until the switch step, then a
// linear ramp reaching exactly 0 at t = T. With switch_frac = 1 the ramp
// is empty and alpha stays 1 throughout.
struct AlphaSchedule {
  std::int64_t T = 0;
  double switch_frac = 0.6;
};

void validate(const AlphaSchedule& schedule);

// switch_frac * T rounded to the nearest integer step, ties rounding down.
std::int64_t switch_step(const AlphaSchedule& schedule);

double alpha_at(const AlphaSchedule& schedule, std::int64_t t);

}  // namespace ada2ms

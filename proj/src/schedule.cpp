#include "ada2ms/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace ada2ms {

namespace {

// Nearest integer, ties rounding down: ceil(x - 0.5).
std::int64_t round_half_down(double x) {
  return static_cast<std::int64_t>(std::ceil(x - 0.5));
}

std::int64_t frac_step(double frac, std::int64_t T, std::int64_t lo) {
  std::int64_t step = round_half_down(frac * static_cast<double>(T));
  if (step < lo) step = lo;
  if (step > T) step = T;
  return step;
}

[[noreturn]] void throw_step_range(std::int64_t t, std::int64_t T) {
  throw std::out_of_range("step " + std::to_string(t) + " outside [1, " + std::to_string(T) + "]");
}

}  // namespace

const char* to_string(LrKind kind) { return kind == LrKind::WSDS ? "wsds" : "wsd"; }

LrKind lr_kind_from_string(const std::string& text) {
  if (text == "wsds") return LrKind::WSDS;
  if (text == "wsd") return LrKind::WSD;
  throw std::invalid_argument("unknown lr schedule kind '" + text + "'");
}

LrSchedule make_wsds(double eta_peak, std::int64_t T) {
  LrSchedule s;
  s.kind = LrKind::WSDS;
  s.eta_peak = eta_peak;
  s.eta_init = 1e-7;
  s.eta_min = 0.01 * eta_peak;
  s.T = T;
  s.t1 = frac_step(0.05, T, 1);
  s.t2 = frac_step(0.60, T, s.t1);
  s.t3 = frac_step(0.90, T, s.t2);
  validate(s);
  return s;
}

LrSchedule make_wsd(double eta_peak, std::int64_t T) {
  LrSchedule s = make_wsds(eta_peak, T);
  s.kind = LrKind::WSD;
  s.t3 = T;
  validate(s);
  return s;
}

void validate(const LrSchedule& s) {
  if (s.T < 1) throw std::invalid_argument("lr schedule: T must be positive");
  if (!(s.eta_init >= 0.0 && s.eta_peak >= 0.0 && s.eta_min >= 0.0))
    throw std::invalid_argument("lr schedule: rates must be nonnegative");
  if (s.eta_init > s.eta_peak || s.eta_min > s.eta_peak)
    throw std::invalid_argument("lr schedule: eta_peak must dominate eta_init and eta_min");
  if (!(0 < s.t1 && s.t1 <= s.t2 && s.t2 <= s.t3 && s.t3 <= s.T))
    throw std::invalid_argument("lr schedule: need 0 < t1 <= t2 <= t3 <= T");
  if (s.kind == LrKind::WSD && s.t3 != s.T)
    throw std::invalid_argument("lr schedule: WSD requires t3 = T");
}

double lr_at(const LrSchedule& s, std::int64_t t) {
  if (t < 1 || t > s.T) throw_step_range(t, s.T);
  if (t < s.t1)
    return s.eta_init + (s.eta_peak - s.eta_init) *
                            (static_cast<double>(t) / static_cast<double>(s.t1));
  if (t <= s.t2) return s.eta_peak;
  if (t < s.t3)
    return s.eta_peak + (s.eta_min - s.eta_peak) * (static_cast<double>(t - s.t2) /
                                                    static_cast<double>(s.t3 - s.t2));
  return s.eta_min;
}

void validate(const AlphaSchedule& s) {
  if (s.T < 1) throw std::invalid_argument("alpha schedule: T must be positive");
  if (!(s.switch_frac > 0.0 && s.switch_frac <= 1.0))
    throw std::invalid_argument("alpha schedule: switch_frac must lie in (0,1]");
}

std::int64_t switch_step(const AlphaSchedule& s) {
  std::int64_t step = round_half_down(s.switch_frac * static_cast<double>(s.T));
  if (step < 0) step = 0;
  if (step > s.T) step = s.T;
  return step;
}

double alpha_at(const AlphaSchedule& s, std::int64_t t) {
  if (t < 1 || t > s.T) throw_step_range(t, s.T);
  const std::int64_t ts = switch_step(s);
  if (t <= ts) return 1.0;
  return 1.0 - static_cast<double>(t - ts) / static_cast<double>(s.T - ts);
}

}  // namespace ada2ms

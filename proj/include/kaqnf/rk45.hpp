// Adaptive Dormand-Prince 5(4) integrator with event localization by
// bisection on the accepted step.

#ifndef KAQNF_RK45_HPP_
#define KAQNF_RK45_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace kaqnf {

template <std::size_t N>
using StateVec = std::array<double, N>;

enum class StepStatus { Ok, Event, Failed, MaxTime };

template <std::size_t N>
struct Rk45Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double h_init = 1e-3;
  double h_min = 1e-14;
  double h_max = 1.0;
  double t_max = 1e3;
};

// Integrates y' = f(y) from t = 0 until an event function crosses from
// negative to nonnegative, t_max is reached, or the step size underflows.
// Events are localized to relative tolerance 1e-12 by bisection in t.
template <std::size_t N>
struct Rk45Result {
  StepStatus status = StepStatus::MaxTime;
  int event_index = -1;  // which event fired
  double t_end = 0.0;
  StateVec<N> y_end{};
  std::size_t n_steps = 0;
};

template <std::size_t N, typename Rhs>
Rk45Result<N> integrate_rk45(
    Rhs&& rhs, StateVec<N> y0, const Rk45Options<N>& opt,
    const std::vector<std::function<double(double, const StateVec<N>&)>>&
        events,
    std::vector<std::pair<double, StateVec<N>>>* trajectory = nullptr) {
  // Dormand-Prince coefficients (autonomous form: node abscissae unused).
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto axpy = [](StateVec<N>& y, double h, const StateVec<N>& base,
                 std::initializer_list<std::pair<double, const StateVec<N>*>>
                     terms) {
    for (std::size_t i = 0; i < N; ++i) {
      double acc = base[i];
      for (const auto& [coef, k] : terms) acc += h * coef * (*k)[i];
      y[i] = acc;
    }
  };

  Rk45Result<N> res;
  double t = 0.0;
  StateVec<N> y = y0;
  double h = opt.h_init;
  if (trajectory) trajectory->push_back({t, y});

  std::vector<double> ev_prev(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) ev_prev[e] = events[e](t, y);
  for (std::size_t e = 0; e < events.size(); ++e) {
    if (ev_prev[e] >= 0.0) {
      res.status = StepStatus::Event;
      res.event_index = static_cast<int>(e);
      res.t_end = t;
      res.y_end = y;
      return res;
    }
  }

  StateVec<N> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
  rhs(y, k1);
  while (t < opt.t_max) {
    h = std::min(h, opt.t_max - t);
    axpy(ytmp, h, y, {{a21, &k1}});
    rhs(ytmp, k2);
    axpy(ytmp, h, y, {{a31, &k1}, {a32, &k2}});
    rhs(ytmp, k3);
    axpy(ytmp, h, y, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
    rhs(ytmp, k4);
    axpy(ytmp, h, y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
    rhs(ytmp, k5);
    axpy(ytmp, h, y,
         {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
    rhs(ytmp, k6);
    axpy(ynew, h, y, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    rhs(ynew, k7);

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                             e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc =
          opt.abs_tol +
          opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(ei) / sc);
      if (!std::isfinite(ynew[i])) finite = false;
    }

    if (!finite || err > 1.0) {
      h *= std::max(0.1, 0.9 * std::pow(std::max(err, 1e-10), -0.2));
      if (h < opt.h_min) {
        res.status = StepStatus::Failed;
        res.t_end = t;
        res.y_end = y;
        return res;
      }
      continue;
    }

    // Accepted; check events on [t, t+h].
    const double t_new = t + h;
    int fired = -1;
    for (std::size_t e = 0; e < events.size(); ++e) {
      const double v = events[e](t_new, ynew);
      if (ev_prev[e] < 0.0 && v >= 0.0) {
        fired = static_cast<int>(e);
        break;
      }
      ev_prev[e] = v;
    }
    if (fired >= 0) {
      // Bisect within the step using dense re-integration from (t, y).
      double lo = 0.0, hi = h;
      StateVec<N> y_hi = ynew;
      for (int it = 0; it < 60 && (hi - lo) > 1e-12 * std::max(1.0, hi);
           ++it) {
        const double mid = 0.5 * (lo + hi);
        // One RK4 substep from t with step mid approximates y(t+mid)
        // well enough for event localization.
        StateVec<N> ka, kb, kc, kd, ym;
        rhs(y, ka);
        axpy(ym, 0.5 * mid, y, {{1.0, &ka}});
        rhs(ym, kb);
        axpy(ym, 0.5 * mid, y, {{1.0, &kb}});
        rhs(ym, kc);
        axpy(ym, mid, y, {{1.0, &kc}});
        rhs(ym, kd);
        for (std::size_t i = 0; i < N; ++i)
          ym[i] = y[i] + mid / 6.0 * (ka[i] + 2 * kb[i] + 2 * kc[i] + kd[i]);
        if (events[static_cast<std::size_t>(fired)](t + mid, ym) >= 0.0) {
          hi = mid;
          y_hi = ym;
        } else {
          lo = mid;
        }
      }
      res.status = StepStatus::Event;
      res.event_index = fired;
      res.t_end = t + hi;
      res.y_end = y_hi;
      res.n_steps += 1;
      if (trajectory) trajectory->push_back({res.t_end, res.y_end});
      return res;
    }

    t = t_new;
    y = ynew;
    k1 = k7;  // FSAL
    res.n_steps += 1;
    if (trajectory) trajectory->push_back({t, y});
    h = std::min(opt.h_max,
                 h * std::min(5.0, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
  }

  res.status = StepStatus::MaxTime;
  res.t_end = t;
  res.y_end = y;
  return res;
}

}  // namespace kaqnf

#endif  // KAQNF_RK45_HPP_

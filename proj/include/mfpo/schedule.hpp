#pragma once

#include <cmath>
#include <variant>

#include "mfpo/types.hpp"

namespace mfpo {

// Theory schedule: alpha_t = c_alpha / (c_t + sigma_g^2 t)^{1/3} with
//   c_t = max{ c_nu^3 c_alpha^3 / (2^12 K^3 L~^3),
//              2^12 K^3 D^2 N^2 sigma_g^2 - sigma_g^2 t,
//              2 sigma_g^2 },
// and nu_{t+1} = 1 - c_nu alpha_t^2. sigma_g and L~ are user-supplied
// estimates; c_alpha and c_nu default to
//   c_alpha = (D N sigma_g)^{2/3} / L~,
//   c_nu    = L~^2 / (24 K (D N)^2) + 64 L~^2 / (D N).
struct TheorySchedule {
  double c_alpha = 0.0;
  double c_nu = 0.0;
  double sigma_g = 1.0;
  double L_tilde = 1.0;
  int K = 1, D = 1, N = 1;

  static TheorySchedule with_defaults(double sigma_g, double L_tilde, int K,
                                      int D, int N) {
    TheorySchedule s;
    s.sigma_g = sigma_g;
    s.L_tilde = L_tilde;
    s.K = K;
    s.D = D;
    s.N = N;
    const double dn = static_cast<double>(D) * N;
    s.c_alpha = std::pow(dn * sigma_g, 2.0 / 3.0) / L_tilde;
    s.c_nu = L_tilde * L_tilde / (24.0 * K * dn * dn) +
             64.0 * L_tilde * L_tilde / dn;
    s.validate();
    return s;
  }

  void validate() const {
    if (c_alpha <= 0.0 || c_nu <= 0.0 || sigma_g <= 0.0 || L_tilde <= 0.0 ||
        K < 1 || D < 1 || N < 1)
      throw InvalidSchedule("theory schedule constants must be positive");
    // alpha_t is maximized when c_t + sigma_g^2 t is at its floor.
    const double floor = 4096.0 * K * K * K * static_cast<double>(D) * D *
                         N * N * sigma_g * sigma_g;
    const double alpha_max = c_alpha / std::cbrt(floor);
    if (alpha_max > 1.0 / (16.0 * L_tilde * K) + 1e-12)
      throw InvalidSchedule("alpha exceeds 1/(16 L~ K)");
  }

  double c_t(int t) const {
    const double s2 = sigma_g * sigma_g;
    const double a = std::pow(c_nu * c_alpha, 3.0) /
                     (4096.0 * std::pow(static_cast<double>(K) * L_tilde, 3.0));
    const double b = 4096.0 * std::pow(static_cast<double>(K), 3.0) *
                         static_cast<double>(D) * D * N * N * s2 -
                     s2 * t;
    return std::max({a, b, 2.0 * s2});
  }

  double alpha(int t) const {
    return c_alpha / std::cbrt(c_t(t) + sigma_g * sigma_g * t);
  }
};

// Practical schedule from the experimental setup: alpha_t = alpha0 *
// decay^floor(t / decay_interval), nu_t = 1 - momentum_coeff * alpha
// (clamped to [0, 1]). decay_interval = 1 decays every local step; setting
// it to K decays once per communication round, which keeps the stepsize
// alive over a multi-round benchmark instead of freezing after ~1/(1-decay)
// local steps.
struct PracticalSchedule {
  double alpha0 = 1e-4;
  double decay = 0.99;
  double momentum_coeff = 3.0;
  int decay_interval = 1;

  void validate() const {
    if (alpha0 <= 0.0 || decay <= 0.0 || decay > 1.0 ||
        momentum_coeff < 0.0 || decay_interval < 1)
      throw InvalidSchedule("practical schedule constants out of range");
  }

  double alpha(int t) const {
    return alpha0 * std::pow(decay, t / decay_interval);
  }
};

using Schedule = std::variant<TheorySchedule, PracticalSchedule>;

inline double stepsize(int t, const Schedule& sched) {
  return std::visit([t](const auto& s) { return s.alpha(t); }, sched);
}

// nu_t from the previous stepsize: theory 1 - c_nu alpha^2, practical
// 1 - momentum_coeff * alpha; clamped to [0, 1].
inline double momentum(int /*t*/, const Schedule& sched, double alpha_prev) {
  double nu;
  if (const auto* th = std::get_if<TheorySchedule>(&sched))
    nu = 1.0 - th->c_nu * alpha_prev * alpha_prev;
  else
    nu = 1.0 - std::get<PracticalSchedule>(sched).momentum_coeff * alpha_prev;
  return std::clamp(nu, 0.0, 1.0);
}

}  // namespace mfpo

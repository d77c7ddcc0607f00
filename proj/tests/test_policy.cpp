#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mfpo/policy.hpp"

using namespace mfpo;
using policy::PolicyArch;

namespace {

ParamVector random_params(const PolicyArch& arch, RngStream& rng,
                          double scale = 0.5) {
  const int d = policy::param_count(arch);
  ParamVector p(d);
  for (int i = 0; i < d; ++i) p[i] = rng.uniform(-scale, scale);
  return p;
}

Vec random_state(int dim, RngStream& rng) {
  Vec s(dim);
  for (int i = 0; i < dim; ++i) s[i] = rng.uniform(-1.0, 1.0);
  return s;
}

// The finite-difference oracle is invalid when a hidden pre-activation sits
// within the probe step of the ReLU kink; resample such states.
bool kink_free(const PolicyArch& arch, const ParamVector& p, const Vec& s,
               double margin = 1e-4) {
  const int h = arch.hidden_units, in = arch.input_dim;
  for (int i = 0; i < h; ++i) {
    double z = p[h * in + i];
    for (int j = 0; j < in; ++j) z += p[i * in + j] * s[j];
    if (std::abs(z) < margin) return false;
  }
  return true;
}

// Central finite differences of log_prob, the independent gradient oracle.
ParamVector fd_grad(const PolicyArch& arch, const ParamVector& params,
                    const Vec& state, const Action& action,
                    double step = 1e-5) {
  ParamVector g(params.size());
  ParamVector p = params;
  for (int i = 0; i < params.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + step;
    const double hi = policy::log_prob(arch, p, state, action);
    p[i] = orig - step;
    const double lo = policy::log_prob(arch, p, state, action);
    p[i] = orig;
    g[i] = (hi - lo) / (2.0 * step);
  }
  return g;
}

}  // namespace

TEST_CASE("param_count arithmetic from the documented layout") {
  CHECK(policy::param_count(PolicyArch::categorical(4, 16, 2)) == 114);
  CHECK(policy::param_count(PolicyArch::tanh_gaussian(3, 16, 1)) == 82);
  CHECK_THROWS_AS(policy::param_count(PolicyArch::categorical(4, 0, 2)),
                  DimensionMismatch);
  CHECK_THROWS_AS(policy::param_count(PolicyArch::categorical(4, 16, 1)),
                  DimensionMismatch);
}

TEST_CASE("categorical with all-zero params is uniform") {
  const auto arch = PolicyArch::categorical(4, 16, 2);
  const ParamVector zero = ParamVector::Zero(policy::param_count(arch));
  const Vec state = Vec::Ones(4);
  CHECK(policy::log_prob(arch, zero, state, Action::discrete(0)) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  CHECK(policy::log_prob(arch, zero, state, Action::discrete(1)) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  RngStream rng(4);
  const auto [a, lp] = policy::sample_action(arch, zero, state, rng);
  CHECK(lp == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("sampled logp equals log_prob of the stored action") {
  RngStream seed(11);
  for (const auto arch : {PolicyArch::categorical(4, 8, 3),
                          PolicyArch::tanh_gaussian(3, 8, 2)}) {
    for (int k = 0; k < 20; ++k) {
      const ParamVector p = random_params(arch, seed);
      const Vec s = random_state(arch.input_dim, seed);
      RngStream rng(k);
      const auto [a, lp] = policy::sample_action(arch, p, s, rng);
      CHECK(std::abs(lp - policy::log_prob(arch, p, s, a)) <= 1e-12);
    }
  }
}

TEST_CASE("same seed gives the same action") {
  const auto arch = PolicyArch::tanh_gaussian(3, 8, 2);
  RngStream seed(2);
  const ParamVector p = random_params(arch, seed);
  const Vec s = random_state(3, seed);
  RngStream a(99), b(99);
  const auto ra = policy::sample_action(arch, p, s, a);
  const auto rb = policy::sample_action(arch, p, s, b);
  CHECK(ra.first.value == rb.first.value);
  CHECK(ra.second == rb.second);
}

TEST_CASE("grad_log_prob matches central finite differences") {
  RngStream seed(21);
  for (const auto arch : {PolicyArch::categorical(4, 8, 3),
                          PolicyArch::tanh_gaussian(3, 8, 2)}) {
    for (int k = 0; k < 50; ++k) {
      const ParamVector p = random_params(arch, seed);
      Vec s = random_state(arch.input_dim, seed);
      while (!kink_free(arch, p, s)) s = random_state(arch.input_dim, seed);
      RngStream rng(1000 + k);
      const Action a = policy::sample_action(arch, p, s, rng).first;
      const ParamVector g = policy::grad_log_prob(arch, p, s, a);
      const ParamVector fd = fd_grad(arch, p, s, a);
      const double rel = (g - fd).lpNorm<Eigen::Infinity>() /
                         std::max(1.0, g.lpNorm<Eigen::Infinity>());
      CHECK(rel <= 1e-4);
    }
  }
}

TEST_CASE("output-layer bias score at zero params is (1/2, -1/2)") {
  const auto arch = PolicyArch::categorical(4, 16, 2);
  const int d = policy::param_count(arch);
  const ParamVector zero = ParamVector::Zero(d);
  const Vec state = Vec::Ones(4);
  const ParamVector g =
      policy::grad_log_prob(arch, zero, state, Action::discrete(0));
  // Output biases are the last two parameters in the layout.
  CHECK(g[d - 2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g[d - 1] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("categorical score identity: probability-weighted scores sum to 0") {
  const auto arch = PolicyArch::categorical(4, 8, 3);
  RngStream seed(31);
  for (int k = 0; k < 10; ++k) {
    const ParamVector p = random_params(arch, seed);
    const Vec s = random_state(4, seed);
    ParamVector sum = ParamVector::Zero(p.size());
    for (int a = 0; a < 3; ++a) {
      const double prob =
          std::exp(policy::log_prob(arch, p, s, Action::discrete(a)));
      sum += prob * policy::grad_log_prob(arch, p, s, Action::discrete(a));
    }
    CHECK(sum.lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("softmax monotonicity: raising the chosen logit raises log_prob") {
  const auto arch = PolicyArch::categorical(4, 8, 2);
  RngStream seed(41);
  const ParamVector p = random_params(arch, seed);
  const Vec s = random_state(4, seed);
  const int d = policy::param_count(arch);
  ParamVector up = p;
  up[d - 2] += 0.5;  // bias of action 0
  CHECK(policy::log_prob(arch, up, s, Action::discrete(0)) >
        policy::log_prob(arch, p, s, Action::discrete(0)));
}

TEST_CASE("tanh-gaussian density integrates to 1") {
  const auto arch = PolicyArch::tanh_gaussian(3, 8, 1);
  RngStream seed(51);
  for (int k = 0; k < 5; ++k) {
    const ParamVector p = random_params(arch, seed);
    const Vec s = random_state(3, seed);
    // Quadrature oracle in pre-squash space: with a = tanh(x),
    // integral p(a) da = integral p(tanh x) sech^2(x) dx.
    const int n = 40'001;
    const double lo = -25.0, hi = 25.0, h = (hi - lo) / (n - 1);
    double integral = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = lo + i * h;
      const double a = std::tanh(x);
      const double sech2 = 1.0 - a * a;
      if (sech2 == 0.0) continue;
      const double f =
          std::exp(policy::log_prob(arch, p, s,
                                    Action::continuous(Vec::Constant(1, a)))) *
          sech2;
      const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;  // trapezoid
      integral += w * f;
    }
    integral *= h;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("pre-squash sample mean sits in the Monte Carlo band") {
  const auto arch = PolicyArch::tanh_gaussian(3, 8, 1);
  RngStream seed(61);
  const ParamVector p = random_params(arch, seed);
  const Vec s = random_state(3, seed);

  // Network mean via a near-deterministic probe: the mode of x = atanh(a)
  // equals the mean output; estimate it by averaging pre-squash samples.
  const int n = 100'000;
  RngStream rng(7);
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const Action a = policy::sample_action(arch, p, s, rng).first;
    const double x = std::atanh(a.value[0]);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double sigma = std::sqrt(std::max(0.0, sum_sq / n - mean * mean));

  // Reference mean from finite differences of the density peak: evaluate
  // log-density of x directly through the unsquashed Gaussian identity
  // logp(a) + log(1-a^2) = Gaussian logpdf(x); its argmax is mu.
  // Scan for the maximizer.
  double best_x = 0.0, best = -1e300;
  for (double x = -3.0; x <= 3.0; x += 1e-3) {
    const double a = std::tanh(x);
    const double lp =
        policy::log_prob(arch, p, s, Action::continuous(Vec::Constant(1, a))) +
        std::log1p(-a * a);
    if (lp > best) {
      best = lp;
      best_x = x;
    }
  }
  CHECK(std::abs(mean - best_x) <= 3.0 * sigma / std::sqrt(n) + 1e-3);
}

TEST_CASE("sampled log-probs stay above -40 with the log-std clamp") {
  const auto arch = PolicyArch::tanh_gaussian(3, 8, 2);
  RngStream seed(71);
  for (int k = 0; k < 10; ++k) {
    const ParamVector p = random_params(arch, seed, 1.0);
    const Vec s = random_state(3, seed);
    RngStream rng(k);
    for (int i = 0; i < 100; ++i) {
      const double lp = policy::sample_action(arch, p, s, rng).second;
      CHECK(std::isfinite(lp));
      CHECK(lp >= -40.0);
    }
  }
}

TEST_CASE("traj_log_prob sums per-step log-probs") {
  const auto arch = PolicyArch::categorical(4, 8, 2);
  RngStream seed(81);
  const ParamVector p = random_params(arch, seed);

  Trajectory empty;
  CHECK(policy::traj_log_prob(arch, p, empty) == 0.0);

  Trajectory traj;
  RngStream rng(5);
  for (int h = 0; h < 6; ++h) {
    const Vec s = random_state(4, seed);
    const auto [a, lp] = policy::sample_action(arch, p, s, rng);
    traj.states.push_back(s);
    traj.actions.push_back(a);
    traj.rewards.push_back(1.0);
    traj.behavior_logps.push_back(lp);
  }
  double sum = 0.0;
  for (double lp : traj.behavior_logps) sum += lp;
  CHECK(std::abs(policy::traj_log_prob(arch, p, traj) - sum) <= 1e-10);

  Trajectory single;
  single.states.push_back(traj.states[0]);
  single.actions.push_back(traj.actions[0]);
  single.rewards.push_back(1.0);
  single.behavior_logps.push_back(traj.behavior_logps[0]);
  CHECK(policy::traj_log_prob(arch, p, single) ==
        doctest::Approx(traj.behavior_logps[0]).epsilon(1e-14));
}

#include "mfpo/policy.hpp"

#include <cmath>

namespace mfpo {
namespace policy {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;
using ConstVecMap = Eigen::Map<const Vec>;
using MutVecMap = Eigen::Map<Vec>;

struct Layout {
  int in, h, out, d;
  int w1, b1, w2, b2, ls;  // offsets
};

Layout layout_of(const PolicyArch& arch) {
  Layout l;
  l.in = arch.input_dim;
  l.h = arch.hidden_units;
  l.out = arch.out_dim();
  l.w1 = 0;
  l.b1 = l.h * l.in;
  l.w2 = l.b1 + l.h;
  l.b2 = l.w2 + l.out * l.h;
  l.ls = l.b2 + l.out;
  l.d = l.ls + (arch.head == PolicyArch::TanhGaussian ? arch.head_dim : 0);
  return l;
}

void check_arch(const PolicyArch& arch) {
  const bool head_ok = arch.head == PolicyArch::Categorical
                           ? arch.head_dim >= 2
                           : arch.head_dim >= 1;
  if (arch.input_dim < 1 || arch.hidden_units < 1 || !head_ok)
    throw DimensionMismatch("invalid policy architecture");
}

struct Forward {
  Vec z1, a1, z2;
};

Forward forward(const Layout& l, const ParamVector& p, const Vec& s) {
  Forward f;
  ConstMap w1(p.data() + l.w1, l.h, l.in);
  ConstVecMap b1(p.data() + l.b1, l.h);
  ConstMap w2(p.data() + l.w2, l.out, l.h);
  ConstVecMap b2(p.data() + l.b2, l.out);
  f.z1 = w1 * s + b1;
  f.a1 = f.z1.cwiseMax(0.0);
  f.z2 = w2 * f.a1 + b2;
  if (!f.z2.allFinite()) throw NonFiniteOutput("policy head outputs");
  return f;
}

// Backpropagate d(logp)/d(z2) through the trunk into the flat gradient.
void backprop_trunk(const Layout& l, const ParamVector& p, const Vec& s,
                    const Forward& f, const Vec& dz2, ParamVector& grad) {
  ConstMap w2(p.data() + l.w2, l.out, l.h);
  MutMap gw1(grad.data() + l.w1, l.h, l.in);
  MutVecMap gb1(grad.data() + l.b1, l.h);
  MutMap gw2(grad.data() + l.w2, l.out, l.h);
  MutVecMap gb2(grad.data() + l.b2, l.out);

  gw2 = dz2 * f.a1.transpose();
  gb2 = dz2;
  Vec dz1 = w2.transpose() * dz2;
  for (int i = 0; i < l.h; ++i)
    if (f.z1[i] <= 0.0) dz1[i] = 0.0;
  gw1 = dz1 * s.transpose();
  gb1 = dz1;
}

double log_sum_exp(const Vec& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// log(1 - tanh^2(x)) in the cancellation-free form.
double log1m_tanh_sq(double x) {
  return 2.0 * (std::log(2.0) - x - softplus(-2.0 * x));
}

constexpr double kAtanhClip = 1.0 - 1e-6;
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 log(2 pi)

double clamped_atanh(double a) {
  return std::atanh(std::clamp(a, -kAtanhClip, kAtanhClip));
}

// Pre-squash coordinate of a continuous action: the recorded Gaussian sample
// when available, otherwise reconstructed from the squashed value.
double pre_squash_of(const Action& action, int k) {
  if (action.pre_squash.size() > k) return action.pre_squash[k];
  return clamped_atanh(action.value[k]);
}

}  // namespace

int param_count(const PolicyArch& arch) {
  check_arch(arch);
  return layout_of(arch).d;
}

ParamVector init_params(const PolicyArch& arch, RngStream& rng) {
  const Layout l = layout_of(arch);
  ParamVector p(l.d);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(l.in));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(l.h));
  for (int i = l.w1; i < l.w2; ++i) p[i] = rng.uniform(-s1, s1);
  for (int i = l.w2; i < l.ls; ++i) p[i] = rng.uniform(-s2, s2);
  for (int i = l.ls; i < l.d; ++i) p[i] = -0.5;
  return p;
}

double log_prob(const PolicyArch& arch, const ParamVector& params,
                const Vec& state, const Action& action) {
  check_arch(arch);
  const Layout l = layout_of(arch);
  if (params.size() != l.d) throw DimensionMismatch("params size vs arch");
  const Forward f = forward(l, params, state);

  if (arch.head == PolicyArch::Categorical) {
    if (!action.is_discrete() || action.index < 0 || action.index >= l.out)
      throw InvalidAction("categorical action out of range");
    return f.z2[action.index] - log_sum_exp(f.z2);
  }

  if (action.is_discrete() || action.value.size() != l.out)
    throw InvalidAction("continuous action dimension mismatch");
  double lp = 0.0;
  for (int k = 0; k < l.out; ++k) {
    const double x = pre_squash_of(action, k);
    const double ls =
        std::clamp(params[l.ls + k], kLogStdMin, kLogStdMax);
    const double z = (x - f.z2[k]) * std::exp(-ls);
    lp += -0.5 * z * z - ls - kHalfLog2Pi - log1m_tanh_sq(x);
  }
  if (!std::isfinite(lp)) throw NonFiniteOutput("log probability");
  return lp;
}

ParamVector grad_log_prob(const PolicyArch& arch, const ParamVector& params,
                          const Vec& state, const Action& action) {
  check_arch(arch);
  const Layout l = layout_of(arch);
  if (params.size() != l.d) throw DimensionMismatch("params size vs arch");
  const Forward f = forward(l, params, state);
  ParamVector grad = ParamVector::Zero(l.d);
  Vec dz2(l.out);

  if (arch.head == PolicyArch::Categorical) {
    if (!action.is_discrete() || action.index < 0 || action.index >= l.out)
      throw InvalidAction("categorical action out of range");
    const Vec probs = (f.z2.array() - log_sum_exp(f.z2)).exp();
    dz2 = -probs;
    dz2[action.index] += 1.0;
  } else {
    if (action.is_discrete() || action.value.size() != l.out)
      throw InvalidAction("continuous action dimension mismatch");
    for (int k = 0; k < l.out; ++k) {
      const double x = pre_squash_of(action, k);
      const double raw_ls = params[l.ls + k];
      const double ls = std::clamp(raw_ls, kLogStdMin, kLogStdMax);
      const double inv_var = std::exp(-2.0 * ls);
      const double diff = x - f.z2[k];
      dz2[k] = diff * inv_var;
      // d/d(log_std): z^2 - 1, zero where the clamp is active.
      if (raw_ls > kLogStdMin && raw_ls < kLogStdMax)
        grad[l.ls + k] = diff * diff * inv_var - 1.0;
    }
  }

  backprop_trunk(l, params, state, f, dz2, grad);
  check_finite(grad, "grad_log_prob");
  return grad;
}

std::pair<Action, double> sample_action(const PolicyArch& arch,
                                        const ParamVector& params,
                                        const Vec& state, RngStream& rng) {
  check_arch(arch);
  const Layout l = layout_of(arch);
  if (params.size() != l.d) throw DimensionMismatch("params size vs arch");
  const Forward f = forward(l, params, state);

  Action a;
  if (arch.head == PolicyArch::Categorical) {
    const Vec probs = (f.z2.array() - log_sum_exp(f.z2)).exp();
    a = Action::discrete(rng.categorical(probs));
  } else {
    Vec v(l.out), u(l.out);
    for (int k = 0; k < l.out; ++k) {
      const double ls =
          std::clamp(params[l.ls + k], kLogStdMin, kLogStdMax);
      const double x = f.z2[k] + std::exp(ls) * rng.normal();
      u[k] = x;
      v[k] = std::clamp(std::tanh(x), -kAtanhClip, kAtanhClip);
    }
    a = Action::continuous(std::move(v));
    a.pre_squash = std::move(u);
  }
  // Recompute through log_prob so the returned value is exactly what any
  // later evaluation of the stored action yields.
  return {a, log_prob(arch, params, state, a)};
}

double traj_log_prob(const PolicyArch& arch, const ParamVector& params,
                     const Trajectory& traj) {
  double lp = 0.0;
  for (std::size_t h = 0; h < traj.length(); ++h)
    lp += log_prob(arch, params, traj.states[h], traj.actions[h]);
  return lp;
}

}  // namespace policy
}  // namespace mfpo

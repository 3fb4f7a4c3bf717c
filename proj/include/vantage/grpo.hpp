#pragma once

#include <functional>
#include <span>
#include <vector>

#include "vantage/errors.hpp"

namespace vantage::grpo {

struct GrpoConfig {
    int group_size = 16;
    double clip_eps = 0.2;
    double kl_beta = 1e-2;
    double std_floor = 1e-8;
    double learning_rate = 1e-6;  // 7B-scale default; the toy CLI overrides to 0.1
    int steps = 0;
};

/// One question's worth of rollouts. All lists are group-sized and aligned:
/// logprob_sample is fixed at draw time, logprob_current tracks the policy
/// being optimized, logprob_ref the frozen reference.
struct GrpoGroup {
    std::vector<double> rewards;
    std::vector<double> advantages;
    std::vector<double> logprob_sample;
    std::vector<double> logprob_current;
    std::vector<double> logprob_ref;
};

/// Group-relative advantages: (r - mean) / (population std + std_floor).
/// All-equal groups short-circuit to exact zeros before any division.
std::vector<double> group_advantages(std::span<const double> rewards, double std_floor);

/// Unbiased nonnegative KL estimator k = r - log r - 1 with
/// r = pi_ref / pi_theta, i.e. exp(d) - d - 1 for d = logprob_ref -
/// logprob_current. d is clamped to <= 60 before exponentiation; the clamp
/// is reported through `clamped` when given.
double kl_estimate(double logprob_ref, double logprob_current, bool* clamped = nullptr);

/// d kl_estimate / d logprob_current, consistent with the clamped value.
double kl_grad_logcur(double logprob_ref, double logprob_current);

/// PPO-style clipped surrogate: min(ratio*A, clamp(ratio, 1-eps, 1+eps)*A).
double clipped_term(double ratio, double advantage, double clip_eps);

/// d clipped_term / d logprob_current given ratio = exp(lc - ls); zero on
/// the flat side of the clip.
double clipped_term_grad_logcur(double ratio, double advantage, double clip_eps);

/// Loss to minimize:
///   -(1/G) * sum_i [ clipped_term(exp(lc_i - ls_i), A_i, eps)
///                    - beta * kl_estimate(lr_i, lc_i) ].
/// Throws NonFinite when any term is NaN or infinite.
double grpo_objective(const GrpoGroup& group, const GrpoConfig& cfg);

/// d loss / d logprob_current_i for every sample, including the -1/G factor.
std::vector<double> objective_grad_logcur(const GrpoGroup& group, const GrpoConfig& cfg);

/// Max relative error between `analytic_grad` and central differences of
/// `loss_fn` at `params`: max_i |g_i - fd_i| / max(1e-12, |g_i| + |fd_i|).
double finite_diff_gradcheck(const std::function<double(std::span<const double>)>& loss_fn,
                             std::span<const double> analytic_grad,
                             std::span<const double> params,
                             double h = 1e-5);

/// theta' = theta - lr * g. Throws LengthMismatch and NonFinite.
std::vector<double> sgd_step(std::span<const double> params,
                             std::span<const double> gradient,
                             double lr);

}  // namespace vantage::grpo

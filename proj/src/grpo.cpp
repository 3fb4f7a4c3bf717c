#include "vantage/grpo.hpp"

#include <algorithm>
#include <cmath>

namespace vantage::grpo {

namespace {
constexpr double kKlClampExponent = 60.0;
}

std::vector<double> group_advantages(std::span<const double> rewards, double std_floor) {
    if (rewards.size() < 2) throw LengthMismatch("advantage normalization needs >= 2 rewards");
    for (double r : rewards) {
        if (!std::isfinite(r)) throw NonFinite("non-finite reward in group");
    }

    const bool all_equal =
        std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; });
    if (all_equal) return std::vector<double>(rewards.size(), 0.0);

    const auto n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;

    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= n;  // population variance

    const double denom = std::sqrt(var) + std_floor;
    std::vector<double> out(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / denom;
    return out;
}

double kl_estimate(double logprob_ref, double logprob_current, bool* clamped) {
    const double d = logprob_ref - logprob_current;
    const double dc = std::min(d, kKlClampExponent);
    if (clamped != nullptr) *clamped = d > kKlClampExponent;
    return std::exp(dc) - d - 1.0;
}

double kl_grad_logcur(double logprob_ref, double logprob_current) {
    const double d = logprob_ref - logprob_current;
    if (d > kKlClampExponent) return 1.0;  // d(exp(60) - d - 1)/d lc
    return 1.0 - std::exp(d);
}

double clipped_term(double ratio, double advantage, double clip_eps) {
    const double clamped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    return std::min(ratio * advantage, clamped * advantage);
}

double clipped_term_grad_logcur(double ratio, double advantage, double clip_eps) {
    const double unclipped = ratio * advantage;
    const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantage;
    // d(ratio * A)/d lc = ratio * A since d ratio / d lc = ratio.
    if (unclipped <= clipped) return unclipped;
    return (ratio > 1.0 - clip_eps && ratio < 1.0 + clip_eps) ? unclipped : 0.0;
}

namespace {

void check_group(const GrpoGroup& g) {
    const std::size_t n = g.rewards.size();
    if (n < 2) throw LengthMismatch("group must have >= 2 samples");
    if (g.advantages.size() != n || g.logprob_sample.size() != n ||
        g.logprob_current.size() != n || g.logprob_ref.size() != n) {
        throw LengthMismatch("group lists have mismatched lengths");
    }
}

}  // namespace

double grpo_objective(const GrpoGroup& group, const GrpoConfig& cfg) {
    check_group(group);
    const std::size_t n = group.rewards.size();

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ratio = std::exp(group.logprob_current[i] - group.logprob_sample[i]);
        const double term = clipped_term(ratio, group.advantages[i], cfg.clip_eps) -
                            cfg.kl_beta * kl_estimate(group.logprob_ref[i], group.logprob_current[i]);
        if (!std::isfinite(term)) {
            throw NonFinite("non-finite objective term at sample " + std::to_string(i));
        }
        sum += term;
    }
    return -sum / static_cast<double>(n);
}

std::vector<double> objective_grad_logcur(const GrpoGroup& group, const GrpoConfig& cfg) {
    check_group(group);
    const std::size_t n = group.rewards.size();

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ratio = std::exp(group.logprob_current[i] - group.logprob_sample[i]);
        const double d_term = clipped_term_grad_logcur(ratio, group.advantages[i], cfg.clip_eps) -
                              cfg.kl_beta * kl_grad_logcur(group.logprob_ref[i], group.logprob_current[i]);
        if (!std::isfinite(d_term)) {
            throw NonFinite("non-finite gradient term at sample " + std::to_string(i));
        }
        out[i] = -d_term / static_cast<double>(n);
    }
    return out;
}

double finite_diff_gradcheck(const std::function<double(std::span<const double>)>& loss_fn,
                             std::span<const double> analytic_grad,
                             std::span<const double> params,
                             double h) {
    if (analytic_grad.size() != params.size()) {
        throw LengthMismatch("gradient and parameter vectors differ in length");
    }

    std::vector<double> probe(params.begin(), params.end());
    double max_rel = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + h;
        const double up = loss_fn(probe);
        probe[i] = saved - h;
        const double down = loss_fn(probe);
        probe[i] = saved;

        const double fd = (up - down) / (2.0 * h);
        const double g = analytic_grad[i];
        const double rel = std::abs(g - fd) / std::max(1e-12, std::abs(g) + std::abs(fd));
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

std::vector<double> sgd_step(std::span<const double> params,
                             std::span<const double> gradient,
                             double lr) {
    if (params.size() != gradient.size()) {
        throw LengthMismatch("parameter and gradient vectors differ in length");
    }
    std::vector<double> out(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!std::isfinite(gradient[i])) {
            throw NonFinite("non-finite gradient component at index " + std::to_string(i));
        }
        out[i] = params[i] - lr * gradient[i];
    }
    return out;
}

}  // namespace vantage::grpo

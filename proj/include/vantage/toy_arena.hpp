#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vantage/dataset.hpp"
#include "vantage/grpo.hpp"
#include "vantage/reward.hpp"

namespace vantage::toy {

inline constexpr int kContextCount = 6;
inline constexpr int kActionCount = 4;  // three canonical options + one malformed emission

/// Feature bucket of a record: (question type, direction bit). The direction
/// bit is the sign of rotation_deg for rotation questions and the correct
/// lateral word for translation questions.
struct QuestionContext {
    int index = 0;  // in [0, kContextCount)
};

QuestionContext context_of(const forge::ViewpointQA& qa);

/// Tabular softmax policy: one row of action logits per context.
struct ToyPolicy {
    std::array<double, kContextCount * kActionCount> theta{};

    double& at(int ctx, int action) { return theta[static_cast<std::size_t>(ctx * kActionCount + action)]; }
    double at(int ctx, int action) const { return theta[static_cast<std::size_t>(ctx * kActionCount + action)]; }

    static ToyPolicy uniform() { return ToyPolicy{}; }
};

/// Log-softmax of the context's logit row.
std::array<double, kActionCount> policy_logprobs(const ToyPolicy& policy, QuestionContext ctx);

/// Completion text for one action: actions 0..2 wrap the canonical option
/// text in think/answer tags, action 3 emits the bare correct option text.
std::string render_action(const forge::ViewpointQA& qa, int action);

/// Index of the action whose option text is the record's correct answer.
int correct_action(const forge::ViewpointQA& qa);

/// A GrpoGroup plus everything needed to re-evaluate log-probabilities as
/// the policy moves.
struct RolloutGroup {
    grpo::GrpoGroup group;
    std::vector<int> actions;
    std::vector<std::string> completions;
    QuestionContext ctx;
    forge::ViewpointQA qa;
};

/// Draw cfg.group_size completions. Per-sample RNG streams are derived from
/// (seed, sample index) so results are identical at any worker count.
/// logprob_sample/current/ref all start at the acting policy's values; the
/// training loop overwrites ref with the frozen reference policy.
RolloutGroup rollout_group(const ToyPolicy& policy,
                           const forge::ViewpointQA& qa,
                           const grpo::GrpoConfig& cfg,
                           std::uint64_t seed,
                           const reward::RewardSpec& spec = {},
                           int jobs = 1);

struct StepMetrics {
    int step = 0;
    double mean_reward = 0.0;
    double mean_kl = 0.0;
    double mean_tokens = 0.0;
    double accuracy = 0.0;
    double format_rate = 0.0;
};

struct TrainMetrics {
    std::vector<StepMetrics> steps;
};

struct TrainOptions {
    std::optional<ToyPolicy> initial;  // defaults to the uniform policy
    int questions_per_step = 1;
    int inner_epochs = 1;
    bool paranoid = false;
    int jobs = 1;
};

struct TrainResult {
    ToyPolicy policy;
    TrainMetrics metrics;
};

/// Full GRPO loop: sample question -> rollout -> advantages -> gradient ->
/// SGD step. The reference policy is the frozen initial policy. mean_reward,
/// mean_kl and mean_tokens are empirical over the step's rollouts (KL taken
/// at rollout time, so step 0 is exactly 0); accuracy and format rate come
/// from greedy evaluation of the post-update policy over the whole dataset,
/// mirroring a deterministic-decode answer check.
/// Throws NonFinite (with the step index) if the update produces NaN/inf,
/// and SelfTestFailed when --paranoid gradient verification fails.
TrainResult train_toy(std::span<const forge::ViewpointQA> dataset,
                      const grpo::GrpoConfig& cfg,
                      std::uint64_t seed,
                      const TrainOptions& opts = {});

/// Highest-logit action for a context; ties break toward the lower index.
int greedy_action(const ToyPolicy& policy, QuestionContext ctx);

/// Fraction of records whose greedy action answers correctly.
double policy_accuracy(const ToyPolicy& policy, std::span<const forge::ViewpointQA> dataset);

/// Fraction of records whose greedy action emits a well-formed completion.
double policy_format_rate(const ToyPolicy& policy, std::span<const forge::ViewpointQA> dataset);

/// Max over contexts of the true categorical KL(policy || reference).
double max_context_kl(const ToyPolicy& policy, const ToyPolicy& reference);

/// Loss of a frozen rollout group as a function of a flattened policy
/// parameter vector, plus its analytic gradient; the pair gradchecked by
/// `gradcheck` and the paranoid self-test.
double loss_at(const RolloutGroup& rollout, std::span<const double> theta, const grpo::GrpoConfig& cfg);
std::vector<double> loss_grad_at(const RolloutGroup& rollout,
                                 std::span<const double> theta,
                                 const grpo::GrpoConfig& cfg);

/// Max relative gradcheck error over `trials` random (policy, group) pairs.
double gradcheck_toy_loss(std::uint64_t seed, int trials);

/// Balanced dataset with `per_context` records in every context bucket,
/// generated from the synthetic ring through the regular pipeline.
std::vector<forge::ViewpointQA> make_balanced_toy_dataset(int per_context,
                                                          std::uint64_t seed,
                                                          const forge::TemplateSet& templates);

/// CSV with header step,mean_reward,mean_kl,mean_tokens,accuracy,format_rate.
std::size_t export_metrics(const TrainMetrics& metrics, const std::filesystem::path& path);
TrainMetrics read_metrics(const std::filesystem::path& path);

std::vector<double> moving_average(std::span<const double> values, std::size_t window);
bool is_nondecreasing(std::span<const double> values, double tol = 0.0);

}  // namespace vantage::toy

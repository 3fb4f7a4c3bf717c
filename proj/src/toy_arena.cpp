#include "vantage/toy_arena.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vantage/parallel.hpp"
#include "vantage/rng.hpp"
#include "vantage/scene_io.hpp"
#include "vantage/textutil.hpp"

namespace vantage::toy {

namespace {

constexpr const char* kThinkText =
    "Comparing the visible faces of the object in the two views to infer how the camera moved.";

std::array<double, kActionCount> softmax_row(std::span<const double> theta, int ctx) {
    std::array<double, kActionCount> logits{};
    for (int k = 0; k < kActionCount; ++k) {
        logits[static_cast<std::size_t>(k)] = theta[static_cast<std::size_t>(ctx * kActionCount + k)];
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    double norm = 0.0;
    std::array<double, kActionCount> probs{};
    for (int k = 0; k < kActionCount; ++k) {
        probs[static_cast<std::size_t>(k)] = std::exp(logits[static_cast<std::size_t>(k)] - peak);
        norm += probs[static_cast<std::size_t>(k)];
    }
    for (double& p : probs) p /= norm;
    return probs;
}

std::array<double, kActionCount> log_softmax_row(std::span<const double> theta, int ctx) {
    std::array<double, kActionCount> logits{};
    for (int k = 0; k < kActionCount; ++k) {
        logits[static_cast<std::size_t>(k)] = theta[static_cast<std::size_t>(ctx * kActionCount + k)];
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    double norm = 0.0;
    for (double v : logits) norm += std::exp(v - peak);
    const double log_norm = peak + std::log(norm);
    std::array<double, kActionCount> out{};
    for (int k = 0; k < kActionCount; ++k) {
        out[static_cast<std::size_t>(k)] = logits[static_cast<std::size_t>(k)] - log_norm;
    }
    return out;
}

int draw_action(Rng& rng, const std::array<double, kActionCount>& probs) {
    const double u = rng.next_unit();
    double cum = 0.0;
    for (int k = 0; k < kActionCount - 1; ++k) {
        cum += probs[static_cast<std::size_t>(k)];
        if (u < cum) return k;
    }
    return kActionCount - 1;
}

// d loss / d theta for one frozen rollout group, chained through the
// log-softmax of the group's context row. Accumulates into grad (length 24).
void accumulate_group_grad(const RolloutGroup& rollout,
                           std::span<const double> theta,
                           const grpo::GrpoConfig& cfg,
                           grpo::GrpoGroup& scratch,
                           std::span<double> grad) {
    const int ctx = rollout.ctx.index;
    const auto logprobs = log_softmax_row(theta, ctx);
    const auto probs = softmax_row(theta, ctx);

    scratch = rollout.group;
    for (std::size_t i = 0; i < rollout.actions.size(); ++i) {
        scratch.logprob_current[i] = logprobs[static_cast<std::size_t>(rollout.actions[i])];
    }
    const std::vector<double> coeffs = grpo::objective_grad_logcur(scratch, cfg);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const int action = rollout.actions[i];
        for (int k = 0; k < kActionCount; ++k) {
            const double indicator = k == action ? 1.0 : 0.0;
            grad[static_cast<std::size_t>(ctx * kActionCount + k)] +=
                coeffs[i] * (indicator - probs[static_cast<std::size_t>(k)]);
        }
    }
}

}  // namespace

QuestionContext context_of(const forge::ViewpointQA& qa) {
    const int type_index = static_cast<int>(qa.question_type);
    int direction_bit;
    if (qa.question_type == forge::QuestionType::EgoRotation) {
        direction_bit = qa.rotation_deg > 0.0 ? 1 : 0;
    } else {
        direction_bit = qa.options[static_cast<std::size_t>(qa.answer_index)] == "right" ? 1 : 0;
    }
    return QuestionContext{type_index * 2 + direction_bit};
}

std::array<double, kActionCount> policy_logprobs(const ToyPolicy& policy, QuestionContext ctx) {
    return log_softmax_row(policy.theta, ctx.index);
}

std::string render_action(const forge::ViewpointQA& qa, int action) {
    const auto canonical = forge::canonical_options(qa.question_type);
    if (action >= 0 && action < 3) {
        return std::string("<think>") + kThinkText + "</think> <answer>" +
               canonical[static_cast<std::size_t>(action)] + "</answer>";
    }
    // Malformed emission: the bare (correct) option text, no tags.
    return qa.options[static_cast<std::size_t>(qa.answer_index)];
}

int correct_action(const forge::ViewpointQA& qa) {
    const auto canonical = forge::canonical_options(qa.question_type);
    const std::string& correct = qa.options[static_cast<std::size_t>(qa.answer_index)];
    for (int k = 0; k < 3; ++k) {
        if (canonical[static_cast<std::size_t>(k)] == correct) return k;
    }
    throw SchemaError("record " + qa.record_id + " has no canonical correct option");
}

RolloutGroup rollout_group(const ToyPolicy& policy,
                           const forge::ViewpointQA& qa,
                           const grpo::GrpoConfig& cfg,
                           std::uint64_t seed,
                           const reward::RewardSpec& spec,
                           int jobs) {
    if (cfg.group_size < 2) throw LengthMismatch("group_size must be >= 2");

    RolloutGroup out;
    out.ctx = context_of(qa);
    out.qa = qa;
    const auto logprobs = policy_logprobs(policy, out.ctx);
    const auto probs = softmax_row(policy.theta, out.ctx.index);

    const auto n = static_cast<std::size_t>(cfg.group_size);
    out.actions.resize(n);
    out.completions.resize(n);
    out.group.rewards.resize(n);
    out.group.logprob_sample.resize(n);

    parallel_for(n, jobs, [&](std::size_t i) {
        Rng rng(mix_seed(seed, i));
        const int action = draw_action(rng, probs);
        out.actions[i] = action;
        out.completions[i] = render_action(qa, action);
        out.group.logprob_sample[i] = logprobs[static_cast<std::size_t>(action)];
        out.group.rewards[i] =
            reward::compute_reward(reward::parse_completion(out.completions[i]), qa, spec).total;
    });

    out.group.logprob_current = out.group.logprob_sample;
    out.group.logprob_ref = out.group.logprob_sample;
    out.group.advantages.assign(n, 0.0);
    return out;
}

double loss_at(const RolloutGroup& rollout, std::span<const double> theta, const grpo::GrpoConfig& cfg) {
    const auto logprobs = log_softmax_row(theta, rollout.ctx.index);
    grpo::GrpoGroup g = rollout.group;
    for (std::size_t i = 0; i < rollout.actions.size(); ++i) {
        g.logprob_current[i] = logprobs[static_cast<std::size_t>(rollout.actions[i])];
    }
    return grpo::grpo_objective(g, cfg);
}

std::vector<double> loss_grad_at(const RolloutGroup& rollout,
                                 std::span<const double> theta,
                                 const grpo::GrpoConfig& cfg) {
    std::vector<double> grad(theta.size(), 0.0);
    grpo::GrpoGroup scratch;
    accumulate_group_grad(rollout, theta, cfg, scratch, grad);
    return grad;
}

double gradcheck_toy_loss(std::uint64_t seed, int trials) {
    const forge::TemplateSet templates = forge::TemplateSet::load(forge::TemplateSet::default_dir());
    const auto dataset = make_balanced_toy_dataset(2, mix_seed(seed, 0xDA7A), templates);

    grpo::GrpoConfig cfg;
    Rng rng(mix_seed(seed, 0x6C));
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        ToyPolicy sampler;
        for (double& v : sampler.theta) v = rng.next_gaussian();
        const auto& qa = dataset[rng.next_below(dataset.size())];

        RolloutGroup rollout = rollout_group(sampler, qa, cfg, rng.next_u64());
        rollout.group.advantages = grpo::group_advantages(rollout.group.rewards, cfg.std_floor);
        // Reference policy: another random tabular policy.
        ToyPolicy ref;
        for (double& v : ref.theta) v = rng.next_gaussian();
        const auto ref_logprobs = policy_logprobs(ref, rollout.ctx);
        for (std::size_t i = 0; i < rollout.actions.size(); ++i) {
            rollout.group.logprob_ref[i] = ref_logprobs[static_cast<std::size_t>(rollout.actions[i])];
        }

        // Evaluate away from the sampling policy so the clip path is exercised.
        std::vector<double> eval_theta(sampler.theta.begin(), sampler.theta.end());
        for (double& v : eval_theta) v += 0.5 * rng.next_gaussian();

        const std::vector<double> analytic = loss_grad_at(rollout, eval_theta, cfg);
        const double err = grpo::finite_diff_gradcheck(
            [&](std::span<const double> params) { return loss_at(rollout, params, cfg); },
            analytic, eval_theta);
        worst = std::max(worst, err);
    }
    return worst;
}

TrainResult train_toy(std::span<const forge::ViewpointQA> dataset,
                      const grpo::GrpoConfig& cfg,
                      std::uint64_t seed,
                      const TrainOptions& opts) {
    if (dataset.empty()) throw EmptyDataset("train_toy needs a nonempty dataset");
    if (opts.questions_per_step < 1) throw std::invalid_argument("questions_per_step must be >= 1");
    if (opts.inner_epochs < 1) throw std::invalid_argument("inner_epochs must be >= 1");

    TrainResult result;
    result.policy = opts.initial.value_or(ToyPolicy::uniform());
    const ToyPolicy reference = result.policy;  // frozen

    if (opts.paranoid) {
        const double err = gradcheck_toy_loss(mix_seed(seed, 0xBAD), 10);
        if (err >= 1e-5) {
            throw SelfTestFailed("startup gradient check failed: max relative error " +
                                 std::to_string(err));
        }
    }

    Rng question_rng(mix_seed(seed, 0x9E57));
    std::vector<RolloutGroup> rollouts(static_cast<std::size_t>(opts.questions_per_step));
    grpo::GrpoGroup scratch;

    for (int step = 0; step < cfg.steps; ++step) {
        try {
            for (int q = 0; q < opts.questions_per_step; ++q) {
                const std::size_t pick = question_rng.next_below(dataset.size());
                RolloutGroup rollout =
                    rollout_group(result.policy, dataset[pick], cfg,
                                  mix_seed(seed, static_cast<std::uint64_t>(step),
                                           static_cast<std::uint64_t>(q)),
                                  reward::RewardSpec{}, opts.jobs);
                const auto ref_logprobs = policy_logprobs(reference, rollout.ctx);
                for (std::size_t i = 0; i < rollout.actions.size(); ++i) {
                    rollout.group.logprob_ref[i] =
                        ref_logprobs[static_cast<std::size_t>(rollout.actions[i])];
                }
                rollout.group.advantages = grpo::group_advantages(rollout.group.rewards, cfg.std_floor);
                rollouts[static_cast<std::size_t>(q)] = std::move(rollout);
            }

            StepMetrics m;
            m.step = step;
            std::size_t samples = 0;
            for (const RolloutGroup& rollout : rollouts) {
                for (std::size_t i = 0; i < rollout.actions.size(); ++i) {
                    m.mean_reward += rollout.group.rewards[i];
                    m.mean_kl += grpo::kl_estimate(rollout.group.logprob_ref[i],
                                                   rollout.group.logprob_sample[i]);
                    m.mean_tokens += reward::parse_completion(rollout.completions[i]).token_count;
                    ++samples;
                }
            }
            m.mean_reward /= static_cast<double>(samples);
            m.mean_kl /= static_cast<double>(samples);
            m.mean_tokens /= static_cast<double>(samples);

            for (int epoch = 0; epoch < opts.inner_epochs; ++epoch) {
                std::vector<double> grad(result.policy.theta.size(), 0.0);
                for (const RolloutGroup& rollout : rollouts) {
                    accumulate_group_grad(rollout, result.policy.theta, cfg, scratch, grad);
                }
                for (double& g : grad) g /= static_cast<double>(rollouts.size());

                const std::vector<double> updated =
                    grpo::sgd_step(result.policy.theta, grad, cfg.learning_rate);
                std::copy(updated.begin(), updated.end(), result.policy.theta.begin());
            }

            m.accuracy = policy_accuracy(result.policy, dataset);
            m.format_rate = policy_format_rate(result.policy, dataset);
            result.metrics.steps.push_back(m);
        } catch (const NonFinite& e) {
            throw NonFinite("step " + std::to_string(step) + ": " + e.what());
        }
    }
    return result;
}

int greedy_action(const ToyPolicy& policy, QuestionContext ctx) {
    int best = 0;
    for (int k = 1; k < kActionCount; ++k) {
        if (policy.at(ctx.index, k) > policy.at(ctx.index, best)) best = k;
    }
    return best;
}

double policy_accuracy(const ToyPolicy& policy, std::span<const forge::ViewpointQA> dataset) {
    if (dataset.empty()) throw EmptyDataset("policy_accuracy needs a nonempty dataset");
    double correct = 0.0;
    for (const auto& qa : dataset) {
        if (greedy_action(policy, context_of(qa)) == correct_action(qa)) correct += 1.0;
    }
    return correct / static_cast<double>(dataset.size());
}

double policy_format_rate(const ToyPolicy& policy, std::span<const forge::ViewpointQA> dataset) {
    if (dataset.empty()) throw EmptyDataset("policy_format_rate needs a nonempty dataset");
    double well_formed = 0.0;
    for (const auto& qa : dataset) {
        if (greedy_action(policy, context_of(qa)) != kActionCount - 1) well_formed += 1.0;
    }
    return well_formed / static_cast<double>(dataset.size());
}

double max_context_kl(const ToyPolicy& policy, const ToyPolicy& reference) {
    double worst = 0.0;
    for (int ctx = 0; ctx < kContextCount; ++ctx) {
        const auto p = softmax_row(policy.theta, ctx);
        const auto q = softmax_row(reference.theta, ctx);
        double kl = 0.0;
        for (int k = 0; k < kActionCount; ++k) {
            const auto i = static_cast<std::size_t>(k);
            if (p[i] > 0.0) kl += p[i] * std::log(p[i] / q[i]);
        }
        worst = std::max(worst, kl);
    }
    return worst;
}

std::vector<forge::ViewpointQA> make_balanced_toy_dataset(int per_context,
                                                          std::uint64_t seed,
                                                          const forge::TemplateSet& templates) {
    if (per_context < 1) throw std::invalid_argument("per_context must be >= 1");

    const geom::SceneModel ring = io::make_demo_ring(36);
    const forge::PairConstraint constraint;
    const auto pairs = forge::sample_pairs(ring, 324, constraint, mix_seed(seed, 1));

    std::array<int, kContextCount> want{};
    want.fill(per_context);
    std::vector<forge::ViewpointQA> out;
    out.reserve(static_cast<std::size_t>(per_context) * kContextCount);

    std::size_t pair_index = 0;
    for (const auto& pair : pairs) {
        for (const auto type : {forge::QuestionType::EgoTranslation,
                                forge::QuestionType::ObjectTranslation,
                                forge::QuestionType::EgoRotation}) {
            forge::ViewpointQA qa = forge::make_question(
                ring, pair, type, mix_seed(seed, pair_index, static_cast<std::uint64_t>(type)),
                templates, constraint);
            const int ctx = context_of(qa).index;
            if (want[static_cast<std::size_t>(ctx)] > 0) {
                want[static_cast<std::size_t>(ctx)] -= 1;
                out.push_back(std::move(qa));
            }
        }
        ++pair_index;
        if (std::all_of(want.begin(), want.end(), [](int w) { return w == 0; })) break;
    }
    if (!std::all_of(want.begin(), want.end(), [](int w) { return w == 0; })) {
        throw InsufficientPairs(out.size(), static_cast<std::size_t>(per_context) * kContextCount);
    }
    return out;
}

std::size_t export_metrics(const TrainMetrics& metrics, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "step,mean_reward,mean_kl,mean_tokens,accuracy,format_rate\n";
    for (const StepMetrics& m : metrics.steps) {
        out << m.step << ',' << fixed6(m.mean_reward) << ',' << fixed6(m.mean_kl) << ','
            << fixed6(m.mean_tokens) << ',' << fixed6(m.accuracy) << ',' << fixed6(m.format_rate)
            << '\n';
    }
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
    return metrics.steps.size();
}

TrainMetrics read_metrics(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    TrainMetrics metrics;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path.string() + ": missing header");
    if (line != "step,mean_reward,mean_kl,mean_tokens,accuracy,format_rate") {
        throw SchemaError(path.string() + ": unexpected header '" + line + "'");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        StepMetrics m;
        char c = 0;
        if (!(row >> m.step >> c >> m.mean_reward >> c >> m.mean_kl >> c >> m.mean_tokens >> c >>
              m.accuracy >> c >> m.format_rate)) {
            throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
        }
        metrics.steps.push_back(m);
    }
    return metrics;
}

std::vector<double> moving_average(std::span<const double> values, std::size_t window) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    std::vector<double> out(values.size());
    double running = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        running += values[i];
        if (i >= window) running -= values[i - window];
        const std::size_t span_len = i + 1 < window ? i + 1 : window;
        out[i] = running / static_cast<double>(span_len);
    }
    return out;
}

bool is_nondecreasing(std::span<const double> values, double tol) {
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[i - 1] - tol) return false;
    }
    return true;
}

}  // namespace vantage::toy

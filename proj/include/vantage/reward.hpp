#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vantage/dataset.hpp"

namespace vantage::reward {

/// Result of tag parsing. well_formed is true iff the completion is exactly
/// one <think>...</think> block followed by one <answer>...</answer> block
/// with nothing but whitespace outside them. think_text/answer_text carry
/// the first block's inner text whenever one exists, even in malformed
/// completions (score_accuracy relies on that).
struct ParsedCompletion {
    std::string think_text;
    std::string answer_text;
    bool well_formed = false;
    int token_count = 0;  // whitespace-delimited tokens of the full completion
};

ParsedCompletion parse_completion(std::string_view text);

/// Canonical re-wrap of a parsed completion with a single space between the
/// two blocks.
std::string render_completion(const ParsedCompletion& parsed);

struct RewardSpec {
    double format_weight = 0.5;
    double result_weight = 0.5;
};

struct RewardBreakdown {
    double format_reward = 0.0;
    double result_reward = 0.0;
    double total = 0.0;
};

/// True when `answer` names the correct option: the option letter A/B/C
/// (mapped by position) or the full option text, case-insensitive, trimmed.
bool answer_matches(std::string_view answer, const forge::ViewpointQA& qa);

/// Verifiable two-part reward: format_weight iff well-formed, plus
/// result_weight iff well-formed and the answer names the correct option.
RewardBreakdown compute_reward(const ParsedCompletion& parsed,
                               const forge::ViewpointQA& qa,
                               const RewardSpec& spec = {});

/// Fraction of aligned (completion, record) items whose extracted answer is
/// correct. Answers come from the <answer> block when present, else the
/// whole text. Throws LengthMismatch.
double score_accuracy(std::span<const std::string> completions,
                      std::span<const forge::ViewpointQA> qas);

}  // namespace vantage::reward

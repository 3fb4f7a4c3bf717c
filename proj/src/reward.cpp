#include "vantage/reward.hpp"

#include <algorithm>
#include <cctype>

namespace vantage::reward {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    std::size_t n = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string_view::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

bool is_blank(std::string_view text) {
    return std::all_of(text.begin(), text.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Inner text of the first open...close block, if any.
bool extract_block(std::string_view text, std::string_view open, std::string_view close,
                   std::string* out) {
    const std::size_t a = text.find(open);
    if (a == std::string_view::npos) return false;
    const std::size_t b = text.find(close, a + open.size());
    if (b == std::string_view::npos) return false;
    *out = std::string(text.substr(a + open.size(), b - a - open.size()));
    return true;
}

int count_tokens(std::string_view text) {
    int n = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        const bool ws = std::isspace(c) != 0;
        if (!ws && !in_token) ++n;
        in_token = !ws;
    }
    return n;
}

}  // namespace

ParsedCompletion parse_completion(std::string_view text) {
    ParsedCompletion parsed;
    parsed.token_count = count_tokens(text);
    extract_block(text, kThinkOpen, kThinkClose, &parsed.think_text);
    extract_block(text, kAnswerOpen, kAnswerClose, &parsed.answer_text);

    if (count_occurrences(text, kThinkOpen) != 1 || count_occurrences(text, kThinkClose) != 1 ||
        count_occurrences(text, kAnswerOpen) != 1 || count_occurrences(text, kAnswerClose) != 1) {
        return parsed;
    }

    const std::size_t think_open = text.find(kThinkOpen);
    const std::size_t think_close = text.find(kThinkClose);
    const std::size_t answer_open = text.find(kAnswerOpen);
    const std::size_t answer_close = text.find(kAnswerClose);
    if (!(think_open < think_close && think_close < answer_open && answer_open < answer_close)) {
        return parsed;
    }

    if (!is_blank(text.substr(0, think_open))) return parsed;
    if (!is_blank(text.substr(think_close + kThinkClose.size(),
                              answer_open - think_close - kThinkClose.size()))) {
        return parsed;
    }
    if (!is_blank(text.substr(answer_close + kAnswerClose.size()))) return parsed;

    parsed.well_formed = true;
    return parsed;
}

std::string render_completion(const ParsedCompletion& parsed) {
    std::string out;
    out.reserve(parsed.think_text.size() + parsed.answer_text.size() + 32);
    out += kThinkOpen;
    out += parsed.think_text;
    out += kThinkClose;
    out += ' ';
    out += kAnswerOpen;
    out += parsed.answer_text;
    out += kAnswerClose;
    return out;
}

bool answer_matches(std::string_view answer, const forge::ViewpointQA& qa) {
    const std::string normalized = to_lower(trim(answer));
    if (normalized.empty()) return false;
    if (normalized.size() == 1 && normalized[0] >= 'a' && normalized[0] <= 'c') {
        return normalized[0] - 'a' == qa.answer_index;
    }
    return normalized == to_lower(qa.options[static_cast<std::size_t>(qa.answer_index)]);
}

RewardBreakdown compute_reward(const ParsedCompletion& parsed,
                               const forge::ViewpointQA& qa,
                               const RewardSpec& spec) {
    RewardBreakdown out;
    if (parsed.well_formed) {
        out.format_reward = spec.format_weight;
        if (answer_matches(parsed.answer_text, qa)) {
            out.result_reward = spec.result_weight;
        }
    }
    out.total = out.format_reward + out.result_reward;
    return out;
}

double score_accuracy(std::span<const std::string> completions,
                      std::span<const forge::ViewpointQA> qas) {
    if (completions.size() != qas.size()) {
        throw LengthMismatch("got " + std::to_string(completions.size()) + " completions for " +
                             std::to_string(qas.size()) + " records");
    }
    if (completions.empty()) return 0.0;

    std::size_t correct = 0;
    for (std::size_t i = 0; i < completions.size(); ++i) {
        std::string answer;
        if (!extract_block(completions[i], kAnswerOpen, kAnswerClose, &answer)) {
            answer = completions[i];
        }
        if (answer_matches(answer, qas[i])) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(completions.size());
}

}  // namespace vantage::reward

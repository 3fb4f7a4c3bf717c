#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vantage/geometry.hpp"

namespace vantage::forge {

/// Horizontal separation window for sampled pairs, in degrees.
struct PairConstraint {
    double min_separation_deg = 20.0;
    double max_separation_deg = 100.0;
};

enum class QuestionType { EgoTranslation, ObjectTranslation, EgoRotation };

const char* to_string(QuestionType t);
QuestionType question_type_from_string(const std::string& s);

/// One multiple-choice record. Serialized as one JSONL line with exactly
/// these field names; floats are written with 6 decimal places.
struct ViewpointQA {
    std::string record_id;
    std::string object_id;
    std::string class_label;
    std::array<std::string, 2> frame_ids;
    std::array<std::string, 2> image_paths;
    QuestionType question_type = QuestionType::EgoTranslation;
    std::string prompt;
    std::array<std::string, 3> options;
    int answer_index = 0;
    double rotation_deg = 0.0;
    double separation_deg = 0.0;

    bool operator==(const ViewpointQA&) const = default;
};

/// Ordered sampled pair: the relative viewpoint is computed for
/// (frames[0] -> frames[1]) and camera indices refer to the scene list.
struct SampledPair {
    std::array<std::string, 2> frame_ids;
    std::array<std::size_t, 2> camera_indices;
    geom::RelativeViewpoint view;
};

/// Uniform sample of `count` valid unordered pairs, without replacement;
/// each selection is then oriented so that ego labels alternate, keeping
/// answer directions balanced. A pair is valid when the separation lies
/// within the constraint and both lateral labels are non-degenerate. Throws
/// InsufficientPairs when fewer valid pairs exist than requested.
std::vector<SampledPair> sample_pairs(const geom::SceneModel& scene,
                                      std::size_t count,
                                      const PairConstraint& constraint,
                                      std::uint64_t seed,
                                      double lateral_tol_deg = geom::kDefaultLateralTolDeg);

/// Prompt/template text loaded from the data directory.
struct TemplateSet {
    std::string system_prompt;
    std::string cot_template;
    std::string cot_generation;
    std::string question_ego_translation;
    std::string question_object_translation;
    std::string question_ego_rotation;

    static TemplateSet load(const std::filesystem::path& dir);
    static std::filesystem::path default_dir();
};

inline constexpr const char* kTranslationDistractor = "no horizontal movement";
inline constexpr const char* kRotationDistractor = "no rotation";

/// Canonical (unshuffled) option list for a question type:
/// {"left", "right", distractor}.
std::array<std::string, 3> canonical_options(QuestionType t);

/// Render one QA record for a sampled pair. Options are the canonical set
/// permuted by a seeded shuffle; answer_index points at the correct one.
/// Throws DegeneratePair when the pair cannot support the question type
/// (degenerate lateral, or |yaw| below the constraint minimum for rotation).
ViewpointQA make_question(const geom::SceneModel& scene,
                          const SampledPair& pair,
                          QuestionType type,
                          std::uint64_t seed,
                          const TemplateSet& templates,
                          const PairConstraint& constraint = {});

enum class ScheduleEntry { Primary, Cot };

/// Interleave weights for the hybrid cold-start schedule.
struct InterleaveSpec {
    double primary_weight = 0.9;
    double cot_weight = 0.1;
    std::uint64_t seed = 0;
};

/// Deterministic schedule: every aligned window of 10 items carries exactly
/// one Cot entry at a seeded position; a trailing partial window is all
/// Primary.
std::vector<ScheduleEntry> interleave_schedule(std::size_t n_total, const InterleaveSpec& spec);

/// Pseudo-CoT generation prompt for one record, with the ground-truth slots
/// filled in: (ego direction, object direction, rotation direction, degrees).
struct CotPromptBundle {
    std::string system_prompt;
    std::string template_text;
    std::string filled_prompt;
    std::array<std::string, 4> ground_truth_slots;
};

/// Throws DegeneratePair when the truth has a degenerate lateral.
CotPromptBundle build_cot_prompt(const ViewpointQA& qa,
                                 const geom::RelativeViewpoint& truth,
                                 const TemplateSet& templates);

/// Reconstruct the relative-viewpoint labels recorded in a QA record.
/// Relies on the loop-capture relation (ego = negation of object, rotation
/// sign tied to ego direction) that holds for all generated datasets.
geom::RelativeViewpoint truth_from_record(const ViewpointQA& qa);

std::size_t emit_dataset(std::span<const ViewpointQA> records, const std::filesystem::path& path);
std::vector<ViewpointQA> read_dataset(const std::filesystem::path& path);

/// One JSONL line (no trailing newline) for a record; used by emit_dataset.
std::string to_jsonl(const ViewpointQA& qa);
ViewpointQA from_jsonl(const std::string& line, std::size_t line_no = 0);

struct DatasetStats {
    std::size_t total = 0;
    std::array<std::size_t, 3> per_type{};  // indexed by QuestionType
    std::map<std::string, std::size_t> per_class;
    std::size_t left_answers = 0;
    std::size_t right_answers = 0;
    // 10-degree bins over [20, 100]; 100 falls in the last bin.
    std::array<std::size_t, 8> separation_hist{};
    std::size_t separation_out_of_range = 0;
};

DatasetStats dataset_stats(std::span<const ViewpointQA> records);
std::string to_json(const DatasetStats& stats);

}  // namespace vantage::forge

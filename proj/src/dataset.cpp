#include "vantage/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vantage/rng.hpp"
#include "vantage/textutil.hpp"

namespace vantage::forge {

namespace {

using geom::LateralDirection;

std::string json_escape(const std::string& s) { return nlohmann::json(s).dump(); }

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open template file " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

const char* direction_word(LateralDirection d) {
    return d == LateralDirection::Right ? "right" : "left";
}

constexpr int kPermutations[6][3] = {
    {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
};

// Inclusive bounds with a 1e-9 deg guard so exact-boundary pairs (a ring
// camera at precisely 100 deg of arc) are not dropped by rounding noise.
constexpr double kAngleEps = 1e-9;

bool pair_is_valid(const geom::RelativeViewpoint& rv, const PairConstraint& c) {
    return rv.separation_deg >= c.min_separation_deg - kAngleEps &&
           rv.separation_deg <= c.max_separation_deg + kAngleEps &&
           rv.ego_lateral != LateralDirection::Degenerate &&
           rv.object_lateral != LateralDirection::Degenerate;
}

}  // namespace

const char* to_string(QuestionType t) {
    switch (t) {
        case QuestionType::EgoTranslation: return "ego_translation";
        case QuestionType::ObjectTranslation: return "object_translation";
        case QuestionType::EgoRotation: return "ego_rotation";
    }
    return "ego_translation";
}

QuestionType question_type_from_string(const std::string& s) {
    if (s == "ego_translation") return QuestionType::EgoTranslation;
    if (s == "object_translation") return QuestionType::ObjectTranslation;
    if (s == "ego_rotation") return QuestionType::EgoRotation;
    throw SchemaError("unknown question_type '" + s + "'");
}

std::vector<SampledPair> sample_pairs(const geom::SceneModel& scene,
                                      std::size_t count,
                                      const PairConstraint& constraint,
                                      std::uint64_t seed,
                                      double lateral_tol_deg) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    if (constraint.min_separation_deg <= 0.0 ||
        constraint.min_separation_deg >= constraint.max_separation_deg ||
        constraint.max_separation_deg > 180.0) {
        throw std::invalid_argument("constraint must satisfy 0 < min < max <= 180");
    }

    std::vector<SampledPair> valid;
    const auto& cams = scene.cameras;
    for (std::size_t i = 0; i < cams.size(); ++i) {
        for (std::size_t j = i + 1; j < cams.size(); ++j) {
            geom::RelativeViewpoint rv;
            try {
                rv = geom::relative_viewpoint(cams[i], cams[j], scene, lateral_tol_deg);
            } catch (const DegenerateGeometry&) {
                continue;
            }
            if (!pair_is_valid(rv, constraint)) continue;
            valid.push_back(SampledPair{{cams[i].frame_id, cams[j].frame_id}, {i, j}, rv});
        }
    }

    if (count > valid.size()) throw InsufficientPairs(valid.size(), count);

    Rng rng(seed);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t pick = k + rng.next_below(valid.size() - k);
        std::swap(valid[k], valid[pick]);
    }
    valid.resize(count);

    // Orient consecutive selections toward alternating ego labels: which
    // pairs are drawn stays random, while left/right answers are balanced by
    // construction.
    for (std::size_t k = 0; k < valid.size(); ++k) {
        SampledPair& pair = valid[k];
        const LateralDirection wanted =
            k % 2 == 0 ? LateralDirection::Right : LateralDirection::Left;
        if (pair.view.ego_lateral == wanted) continue;
        const auto& a = cams[pair.camera_indices[1]];
        const auto& b = cams[pair.camera_indices[0]];
        const geom::RelativeViewpoint rv =
            geom::relative_viewpoint(a, b, scene, lateral_tol_deg);
        if (!pair_is_valid(rv, constraint)) continue;  // keep original orientation
        pair = SampledPair{{a.frame_id, b.frame_id},
                           {pair.camera_indices[1], pair.camera_indices[0]},
                           rv};
    }
    return valid;
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
    TemplateSet t;
    t.system_prompt = read_text_file(dir / "system_prompt.txt");
    t.cot_template = read_text_file(dir / "cot_template.txt");
    t.cot_generation = read_text_file(dir / "cot_generation_prompt.txt");
    t.question_ego_translation = read_text_file(dir / "question_ego_translation.txt");
    t.question_object_translation = read_text_file(dir / "question_object_translation.txt");
    t.question_ego_rotation = read_text_file(dir / "question_ego_rotation.txt");
    return t;
}

std::filesystem::path TemplateSet::default_dir() {
#ifdef VANTAGE_DEFAULT_TEMPLATE_DIR
    return VANTAGE_DEFAULT_TEMPLATE_DIR;
#else
    return "data/templates";
#endif
}

std::array<std::string, 3> canonical_options(QuestionType t) {
    const char* distractor =
        t == QuestionType::EgoRotation ? kRotationDistractor : kTranslationDistractor;
    return {"left", "right", distractor};
}

ViewpointQA make_question(const geom::SceneModel& scene,
                          const SampledPair& pair,
                          QuestionType type,
                          std::uint64_t seed,
                          const TemplateSet& templates,
                          const PairConstraint& constraint) {
    const geom::RelativeViewpoint& rv = pair.view;

    LateralDirection dir;
    switch (type) {
        case QuestionType::EgoTranslation: dir = rv.ego_lateral; break;
        case QuestionType::ObjectTranslation: dir = rv.object_lateral; break;
        case QuestionType::EgoRotation:
            if (std::abs(rv.yaw_deg) < constraint.min_separation_deg - kAngleEps) {
                throw DegeneratePair("rotation question needs |yaw| >= " +
                                     std::to_string(constraint.min_separation_deg) +
                                     " deg, got " + std::to_string(rv.yaw_deg));
            }
            dir = rv.yaw_deg > 0.0 ? LateralDirection::Right : LateralDirection::Left;
            break;
    }
    if (dir == LateralDirection::Degenerate) {
        throw DegeneratePair("pair (" + pair.frame_ids[0] + ", " + pair.frame_ids[1] +
                             ") has a degenerate lateral label");
    }

    const std::array<std::string, 3> canonical = canonical_options(type);
    const std::string correct = direction_word(dir);

    Rng rng(seed);
    const int* perm = kPermutations[rng.next_below(6)];

    ViewpointQA qa;
    qa.object_id = scene.object_id;
    qa.class_label = scene.class_label;
    qa.frame_ids = pair.frame_ids;
    qa.image_paths = {scene.cameras[pair.camera_indices[0]].image_path,
                      scene.cameras[pair.camera_indices[1]].image_path};
    qa.question_type = type;
    qa.rotation_deg = quantize6(rv.yaw_deg);
    qa.separation_deg = quantize6(rv.separation_deg);
    qa.record_id = scene.object_id + ":" + pair.frame_ids[0] + ":" + pair.frame_ids[1] +
                   ":" + to_string(type);

    for (int slot = 0; slot < 3; ++slot) {
        qa.options[slot] = canonical[perm[slot]];
        if (qa.options[slot] == correct) qa.answer_index = slot;
    }

    const std::string* question_template = nullptr;
    switch (type) {
        case QuestionType::EgoTranslation: question_template = &templates.question_ego_translation; break;
        case QuestionType::ObjectTranslation: question_template = &templates.question_object_translation; break;
        case QuestionType::EgoRotation: question_template = &templates.question_ego_rotation; break;
    }
    const std::string options_block = "A. " + qa.options[0] + "\nB. " + qa.options[1] +
                                      "\nC. " + qa.options[2];
    qa.prompt = replace_all(*question_template, "{options}", options_block);
    return qa;
}

std::vector<ScheduleEntry> interleave_schedule(std::size_t n_total, const InterleaveSpec& spec) {
    if (n_total < 1) throw std::invalid_argument("n_total must be >= 1");
    if (spec.primary_weight <= 0.0 || spec.cot_weight <= 0.0 ||
        std::abs(spec.primary_weight + spec.cot_weight - 1.0) > 1e-9) {
        throw std::invalid_argument("interleave weights must be positive and sum to 1");
    }

    const auto window = static_cast<std::size_t>(std::llround(1.0 / spec.cot_weight));
    std::vector<ScheduleEntry> out(n_total, ScheduleEntry::Primary);

    Rng rng(spec.seed);
    for (std::size_t base = 0; base + window <= n_total; base += window) {
        out[base + rng.next_below(window)] = ScheduleEntry::Cot;
    }
    return out;
}

CotPromptBundle build_cot_prompt(const ViewpointQA& qa,
                                 const geom::RelativeViewpoint& truth,
                                 const TemplateSet& templates) {
    if (truth.ego_lateral == LateralDirection::Degenerate ||
        truth.object_lateral == LateralDirection::Degenerate) {
        throw DegeneratePair("cannot build a CoT prompt from a degenerate pair (record " +
                             qa.record_id + ")");
    }

    CotPromptBundle bundle;
    bundle.system_prompt = templates.system_prompt;
    bundle.template_text = templates.cot_template;
    bundle.ground_truth_slots = {
        direction_word(truth.ego_lateral),
        direction_word(truth.object_lateral),
        truth.yaw_deg > 0.0 ? "right" : "left",
        std::to_string(static_cast<long long>(std::llround(std::abs(truth.yaw_deg)))),
    };

    std::string filled = templates.cot_generation;
    filled = replace_all(filled, "{template}", templates.cot_template);
    filled = replace_all(filled, "{gt0}", bundle.ground_truth_slots[0]);
    filled = replace_all(filled, "{gt1}", bundle.ground_truth_slots[1]);
    filled = replace_all(filled, "{gt2}", bundle.ground_truth_slots[2]);
    filled = replace_all(filled, "{gt3}", bundle.ground_truth_slots[3]);
    bundle.filled_prompt = std::move(filled);
    return bundle;
}

geom::RelativeViewpoint truth_from_record(const ViewpointQA& qa) {
    const std::string& correct = qa.options[static_cast<std::size_t>(qa.answer_index)];
    if (correct != "left" && correct != "right") {
        throw SchemaError("record " + qa.record_id + " has a distractor as correct answer");
    }
    const LateralDirection answer_dir =
        correct == "right" ? LateralDirection::Right : LateralDirection::Left;

    geom::RelativeViewpoint rv;
    rv.yaw_deg = qa.rotation_deg;
    rv.separation_deg = qa.separation_deg;
    switch (qa.question_type) {
        case QuestionType::EgoTranslation:
            rv.ego_lateral = answer_dir;
            rv.object_lateral = geom::flipped(answer_dir);
            break;
        case QuestionType::ObjectTranslation:
            rv.object_lateral = answer_dir;
            rv.ego_lateral = geom::flipped(answer_dir);
            break;
        case QuestionType::EgoRotation:
            // Loop capture: rotation to the right pairs with ego-left movement.
            rv.ego_lateral = qa.rotation_deg > 0.0 ? LateralDirection::Left
                                                   : LateralDirection::Right;
            rv.object_lateral = geom::flipped(rv.ego_lateral);
            break;
    }
    return rv;
}

std::string to_jsonl(const ViewpointQA& qa) {
    std::string out;
    out.reserve(512);
    out += "{\"record_id\":" + json_escape(qa.record_id);
    out += ",\"object_id\":" + json_escape(qa.object_id);
    out += ",\"class_label\":" + json_escape(qa.class_label);
    out += ",\"frame_ids\":[" + json_escape(qa.frame_ids[0]) + "," + json_escape(qa.frame_ids[1]) + "]";
    out += ",\"image_paths\":[" + json_escape(qa.image_paths[0]) + "," + json_escape(qa.image_paths[1]) + "]";
    out += ",\"question_type\":" + json_escape(to_string(qa.question_type));
    out += ",\"prompt\":" + json_escape(qa.prompt);
    out += ",\"options\":[" + json_escape(qa.options[0]) + "," + json_escape(qa.options[1]) + "," +
           json_escape(qa.options[2]) + "]";
    out += ",\"answer_index\":" + std::to_string(qa.answer_index);
    out += ",\"rotation_deg\":" + fixed6(qa.rotation_deg);
    out += ",\"separation_deg\":" + fixed6(qa.separation_deg);
    out += "}";
    return out;
}

ViewpointQA from_jsonl(const std::string& line, std::size_t line_no) {
    const std::string where = "line " + std::to_string(line_no) + ": ";
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(where + e.what());
    }

    try {
        ViewpointQA qa;
        qa.record_id = doc.at("record_id").get<std::string>();
        qa.object_id = doc.at("object_id").get<std::string>();
        qa.class_label = doc.at("class_label").get<std::string>();
        const auto& frames = doc.at("frame_ids");
        const auto& paths = doc.at("image_paths");
        const auto& options = doc.at("options");
        if (!frames.is_array() || frames.size() != 2) throw SchemaError(where + "frame_ids must have 2 entries");
        if (!paths.is_array() || paths.size() != 2) throw SchemaError(where + "image_paths must have 2 entries");
        if (!options.is_array() || options.size() != 3) throw SchemaError(where + "options must have 3 entries");
        qa.frame_ids = {frames[0].get<std::string>(), frames[1].get<std::string>()};
        qa.image_paths = {paths[0].get<std::string>(), paths[1].get<std::string>()};
        qa.question_type = question_type_from_string(doc.at("question_type").get<std::string>());
        qa.prompt = doc.at("prompt").get<std::string>();
        for (int i = 0; i < 3; ++i) qa.options[i] = options[i].get<std::string>();
        qa.answer_index = doc.at("answer_index").get<int>();
        qa.rotation_deg = doc.at("rotation_deg").get<double>();
        qa.separation_deg = doc.at("separation_deg").get<double>();

        if (qa.answer_index < 0 || qa.answer_index > 2) {
            throw SchemaError(where + "answer_index out of range");
        }
        if (qa.options[0] == qa.options[1] || qa.options[0] == qa.options[2] ||
            qa.options[1] == qa.options[2]) {
            throw SchemaError(where + "options are not pairwise distinct");
        }
        return qa;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(where + e.what());
    }
}

std::size_t emit_dataset(std::span<const ViewpointQA> records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (const ViewpointQA& qa : records) {
        out << to_jsonl(qa) << '\n';
    }
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
    return records.size();
}

std::vector<ViewpointQA> read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<ViewpointQA> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        records.push_back(from_jsonl(line, line_no));
    }
    return records;
}

DatasetStats dataset_stats(std::span<const ViewpointQA> records) {
    if (records.empty()) throw EmptyDataset("dataset_stats needs at least one record");

    DatasetStats stats;
    stats.total = records.size();
    for (const ViewpointQA& qa : records) {
        stats.per_type[static_cast<std::size_t>(qa.question_type)] += 1;
        stats.per_class[qa.class_label] += 1;
        const std::string& correct = qa.options[static_cast<std::size_t>(qa.answer_index)];
        if (correct == "left") stats.left_answers += 1;
        if (correct == "right") stats.right_answers += 1;
        const double sep = qa.separation_deg;
        if (sep < 20.0 || sep > 100.0) {
            stats.separation_out_of_range += 1;
        } else {
            auto bin = static_cast<std::size_t>((sep - 20.0) / 10.0);
            if (bin > 7) bin = 7;  // sep == 100 lands in the last bin
            stats.separation_hist[bin] += 1;
        }
    }
    return stats;
}

std::string to_json(const DatasetStats& stats) {
    nlohmann::ordered_json j;
    j["total"] = stats.total;
    j["per_type"] = {{"ego_translation", stats.per_type[0]},
                     {"object_translation", stats.per_type[1]},
                     {"ego_rotation", stats.per_type[2]}};
    j["per_class"] = stats.per_class;
    j["answer_balance"] = {{"left", stats.left_answers}, {"right", stats.right_answers}};
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (std::size_t b = 0; b < stats.separation_hist.size(); ++b) {
        const int lo = 20 + static_cast<int>(b) * 10;
        hist[std::to_string(lo) + "-" + std::to_string(lo + 10)] = stats.separation_hist[b];
    }
    j["separation_hist"] = hist;
    j["separation_out_of_range"] = stats.separation_out_of_range;
    return j.dump();
}

}  // namespace vantage::forge

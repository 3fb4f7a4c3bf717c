#include "vantage/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vantage/dataset.hpp"
#include "vantage/parallel.hpp"
#include "vantage/reward.hpp"
#include "vantage/rng.hpp"
#include "vantage/scene_io.hpp"
#include "vantage/textutil.hpp"
#include "vantage/toy_arena.hpp"

namespace vantage::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string error_line(const std::string& kind, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    return j.dump();
}

/// Binds subcommand flags so that values can also come from a --config JSON
/// file (command line wins) and the fully resolved set is echoed as one
/// JSON line before any work happens.
class FlagBinder {
public:
    explicit FlagBinder(std::string subcommand) { resolved_["subcommand"] = std::move(subcommand); }

    template <typename T>
    void option(CLI::App* cmd, const std::string& name, T& value, const std::string& desc) {
        CLI::Option* opt = cmd->add_option(name, value, desc);
        post_.emplace_back([this, opt, &value, key = name.substr(2)]() {
            if (opt->count() == 0 && file_.contains(key)) value = file_.at(key).get<T>();
            resolved_[key] = value;
        });
    }

    void flag(CLI::App* cmd, const std::string& name, bool& value, const std::string& desc) {
        CLI::Option* opt = cmd->add_flag(name, value, desc);
        post_.emplace_back([this, opt, &value, key = name.substr(2)]() {
            if (opt->count() == 0 && file_.contains(key)) value = file_.at(key).get<bool>();
            resolved_[key] = value;
        });
    }

    /// Apply config-file fallbacks and build the resolved echo line.
    void finalize(const std::string& config_path) {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw IoError("cannot open config file " + config_path);
            try {
                file_ = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(config_path + ": " + e.what());
            }
            if (file_.contains("subcommand") &&
                file_.at("subcommand").get<std::string>() != resolved_.at("subcommand")) {
                throw UsageError("config file is for subcommand '" +
                                 file_.at("subcommand").get<std::string>() + "'");
            }
        }
        for (auto& apply : post_) apply();
    }

    std::string echo() const { return resolved_.dump(); }

private:
    nlohmann::ordered_json resolved_;
    nlohmann::json file_ = nlohmann::json::object();
    std::vector<std::function<void()>> post_;
};

geom::Vec3 parse_up_axis(const std::string& text) {
    std::istringstream in(text);
    double x, y, z;
    char c1, c2;
    if (!(in >> x >> c1 >> y >> c2 >> z) || c1 != ',' || c2 != ',') {
        throw UsageError("--up-axis expects 'x,y,z'");
    }
    return geom::Vec3(x, y, z);
}

// ---------------------------------------------------------------------------
// gen

struct GenConfig {
    std::string scenes;
    std::string format = "json";
    std::uint64_t count = 100;
    double min_deg = 20.0;
    double max_deg = 100.0;
    std::uint64_t seed = 0;
    std::string out;
    int demo_ring = 0;
    bool all_types = false;
    std::string schedule_out;
    std::string up_axis;
    double lateral_tol_deg = geom::kDefaultLateralTolDeg;
    std::string templates;
    int jobs = 1;
    std::string log_level = "info";
    std::string config;
};

std::vector<fs::path> find_scene_files(const fs::path& dir, io::SceneFormat format) {
    if (!fs::is_directory(dir)) throw IoError("scene directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const fs::path& p = entry.path();
        if (format == io::SceneFormat::SceneJson && p.extension() == ".json") files.push_back(p);
        if (format == io::SceneFormat::ColmapText && p.filename() == "images.txt") files.push_back(p);
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no scene files found under " + dir.string());
    return files;
}

constexpr forge::QuestionType kTypeCycle[3] = {
    forge::QuestionType::EgoTranslation,
    forge::QuestionType::ObjectTranslation,
    forge::QuestionType::EgoRotation,
};

std::vector<forge::ViewpointQA> generate_scene_records(const geom::SceneModel& scene,
                                                       const GenConfig& cfg,
                                                       const forge::TemplateSet& templates,
                                                       std::uint64_t scene_seed) {
    const forge::PairConstraint constraint{cfg.min_deg, cfg.max_deg};
    const auto pairs =
        forge::sample_pairs(scene, cfg.count, constraint, scene_seed, cfg.lateral_tol_deg);

    const std::size_t per_pair = cfg.all_types ? 3 : 1;
    std::vector<forge::ViewpointQA> records(pairs.size() * per_pair);
    parallel_for(pairs.size(), cfg.jobs, [&](std::size_t k) {
        for (std::size_t t = 0; t < per_pair; ++t) {
            // Round-robin type by default; --all-types emits all three.
            const forge::QuestionType type = cfg.all_types ? kTypeCycle[t] : kTypeCycle[k % 3];
            const std::uint64_t record_seed =
                mix_seed(scene_seed, k, static_cast<std::uint64_t>(type) + 1);
            forge::ViewpointQA qa;
            try {
                qa = forge::make_question(scene, pairs[k], type, record_seed, templates, constraint);
            } catch (const DegeneratePair&) {
                // Rotation questions need |yaw| >= min; fall back to translation.
                qa = forge::make_question(scene, pairs[k], forge::QuestionType::EgoTranslation,
                                          record_seed, templates, constraint);
            }
            records[k * per_pair + t] = std::move(qa);
        }
    });
    return records;
}

int run_gen(GenConfig& cfg) {
    if (cfg.out.empty()) throw UsageError("gen requires --out");
    if (cfg.demo_ring == 0 && cfg.scenes.empty()) {
        throw UsageError("gen requires --scenes DIR or --demo-ring N");
    }
    if (cfg.demo_ring != 0 && !cfg.scenes.empty()) {
        throw UsageError("--scenes and --demo-ring are mutually exclusive");
    }
    if (cfg.format != "json" && cfg.format != "colmap") {
        throw UsageError("--format must be 'colmap' or 'json'");
    }
    if (cfg.count < 1) throw UsageError("--count must be >= 1");
    if (!(cfg.min_deg > 0.0 && cfg.min_deg < cfg.max_deg && cfg.max_deg <= 180.0)) {
        throw UsageError("--min-deg/--max-deg must satisfy 0 < min < max <= 180");
    }
    if (cfg.jobs < 1) throw UsageError("--jobs must be >= 1");

    io::SceneOverrides overrides;
    if (!cfg.up_axis.empty()) overrides.up_axis = parse_up_axis(cfg.up_axis);

    const forge::TemplateSet templates = forge::TemplateSet::load(
        cfg.templates.empty() ? forge::TemplateSet::default_dir() : fs::path(cfg.templates));

    std::vector<geom::SceneModel> scenes;
    if (cfg.demo_ring > 0) {
        scenes.push_back(io::make_demo_ring(cfg.demo_ring));
    } else {
        const auto format =
            cfg.format == "colmap" ? io::SceneFormat::ColmapText : io::SceneFormat::SceneJson;
        for (const fs::path& file : find_scene_files(cfg.scenes, format)) {
            scenes.push_back(io::load_scene(file, format, overrides));
        }
        std::sort(scenes.begin(), scenes.end(),
                  [](const auto& a, const auto& b) { return a.object_id < b.object_id; });
    }

    std::vector<forge::ViewpointQA> records;
    for (const geom::SceneModel& scene : scenes) {
        const std::uint64_t scene_seed = mix_seed(cfg.seed, fnv1a64(scene.object_id));
        auto batch = generate_scene_records(scene, cfg, templates, scene_seed);
        records.insert(records.end(), std::make_move_iterator(batch.begin()),
                       std::make_move_iterator(batch.end()));
    }

    const std::size_t written = forge::emit_dataset(records, cfg.out);

    if (!cfg.schedule_out.empty()) {
        const auto schedule =
            forge::interleave_schedule(records.size(), forge::InterleaveSpec{0.9, 0.1, cfg.seed});
        std::ofstream out(cfg.schedule_out, std::ios::binary);
        if (!out) throw IoError("cannot open " + cfg.schedule_out + " for writing");
        for (const auto entry : schedule) {
            out << (entry == forge::ScheduleEntry::Cot ? "cot" : "primary") << '\n';
        }
        if (!out) throw IoError("write failed: " + cfg.schedule_out);
    }

    if (cfg.log_level != "quiet") {
        std::cerr << "gen: wrote " << written << " records from " << scenes.size()
                  << " scene(s) to " << cfg.out << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// stats

int run_stats(const std::string& in) {
    if (in.empty()) throw UsageError("stats requires --in");
    const auto records = forge::read_dataset(in);
    std::cout << forge::to_json(forge::dataset_stats(records)) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// score

int run_score(const std::string& in, const std::string& dataset_path) {
    if (in.empty() || dataset_path.empty()) throw UsageError("score requires --in and --dataset");

    const auto dataset = forge::read_dataset(dataset_path);
    std::map<std::string, const forge::ViewpointQA*> by_id;
    for (const auto& qa : dataset) {
        if (!by_id.emplace(qa.record_id, &qa).second) {
            throw SchemaError("duplicate record_id '" + qa.record_id + "' in " + dataset_path);
        }
    }

    std::ifstream answers(in, std::ios::binary);
    if (!answers) throw IoError("cannot open " + in);

    std::vector<std::string> completions;
    std::vector<forge::ViewpointQA> matched;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(answers, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
            const auto record_id = doc.at("record_id").get<std::string>();
            const auto it = by_id.find(record_id);
            if (it == by_id.end()) {
                throw SchemaError(in + ":" + std::to_string(line_no) + ": unknown record_id '" +
                                  record_id + "'");
            }
            completions.push_back(doc.at("completion").get<std::string>());
            matched.push_back(*it->second);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(in + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }

    if (completions.size() != dataset.size()) {
        throw LengthMismatch("answers file has " + std::to_string(completions.size()) +
                             " entries for " + std::to_string(dataset.size()) + " records");
    }

    const double overall = reward::score_accuracy(completions, matched);

    std::array<std::vector<std::size_t>, 3> per_type_indices;
    for (std::size_t i = 0; i < matched.size(); ++i) {
        per_type_indices[static_cast<std::size_t>(matched[i].question_type)].push_back(i);
    }

    double reward_sum = 0.0;
    for (std::size_t i = 0; i < completions.size(); ++i) {
        reward_sum +=
            reward::compute_reward(reward::parse_completion(completions[i]), matched[i]).total;
    }

    nlohmann::ordered_json out;
    out["count"] = completions.size();
    out["overall_accuracy"] = overall;
    nlohmann::ordered_json per_type = nlohmann::ordered_json::object();
    for (std::size_t t = 0; t < 3; ++t) {
        const auto& indices = per_type_indices[t];
        const char* name = forge::to_string(static_cast<forge::QuestionType>(t));
        if (indices.empty()) {
            per_type[name] = nullptr;
            continue;
        }
        std::vector<std::string> sub_completions;
        std::vector<forge::ViewpointQA> sub_records;
        for (std::size_t i : indices) {
            sub_completions.push_back(completions[i]);
            sub_records.push_back(matched[i]);
        }
        per_type[name] = reward::score_accuracy(sub_completions, sub_records);
    }
    out["per_type_accuracy"] = per_type;
    out["mean_reward"] = reward_sum / static_cast<double>(completions.size());
    std::cout << out.dump() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// cotprompt

int run_cotprompt(const std::string& in, const std::string& out_dir,
                  const std::string& templates_dir, const std::string& log_level) {
    if (in.empty() || out_dir.empty()) throw UsageError("cotprompt requires --in and --out");

    const forge::TemplateSet templates = forge::TemplateSet::load(
        templates_dir.empty() ? forge::TemplateSet::default_dir() : fs::path(templates_dir));
    const auto records = forge::read_dataset(in);
    fs::create_directories(out_dir);

    std::size_t written = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto truth = forge::truth_from_record(records[i]);
        const auto bundle = forge::build_cot_prompt(records[i], truth, templates);

        nlohmann::ordered_json j;
        j["record_id"] = records[i].record_id;
        j["system_prompt"] = bundle.system_prompt;
        j["template_text"] = bundle.template_text;
        j["filled_prompt"] = bundle.filled_prompt;
        j["ground_truth_slots"] = bundle.ground_truth_slots;

        char name[32];
        std::snprintf(name, sizeof(name), "cot_%06zu.json", i);
        const fs::path path = fs::path(out_dir) / name;
        std::ofstream file(path, std::ios::binary);
        if (!file) throw IoError("cannot open " + path.string() + " for writing");
        file << j.dump(2) << "\n";
        if (!file) throw IoError("write failed: " + path.string());
        ++written;
    }

    if (log_level != "quiet") {
        std::cerr << "cotprompt: wrote " << written << " prompt bundles to " << out_dir << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

int run_gradcheck(std::uint64_t seed, int trials) {
    if (trials < 1) throw UsageError("--trials must be >= 1");
    const double err = toy::gradcheck_toy_loss(seed, trials);
    const bool pass = err < 1e-5;
    std::cout << "gradcheck: trials=" << trials << " max_rel_err=" << err
              << " threshold=1e-05 " << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// train-toy

struct TrainToyConfig {
    std::string dataset;
    int steps = 500;
    int group_size = 16;
    double clip_eps = 0.2;
    double kl_beta = 1e-2;
    double lr = 0.1;
    std::uint64_t seed = 0;
    std::string metrics_out;
    int inner_epochs = 1;
    int questions_per_step = 1;
    bool paranoid = false;
    int jobs = 1;
    std::string log_level = "info";
    std::string config;
};

int run_train_toy(TrainToyConfig& cfg) {
    if (cfg.dataset.empty()) throw UsageError("train-toy requires --dataset");
    if (cfg.metrics_out.empty()) throw UsageError("train-toy requires --metrics-out");
    if (cfg.steps < 0) throw UsageError("--steps must be >= 0");
    if (cfg.group_size < 2) throw UsageError("--group-size must be >= 2");
    if (!(cfg.clip_eps > 0.0 && cfg.clip_eps < 1.0)) throw UsageError("--clip-eps must be in (0, 1)");
    if (cfg.kl_beta < 0.0) throw UsageError("--kl-beta must be >= 0");
    if (cfg.inner_epochs < 1) throw UsageError("--inner-epochs must be >= 1");
    if (cfg.questions_per_step < 1) throw UsageError("--questions-per-step must be >= 1");
    if (cfg.jobs < 1) throw UsageError("--jobs must be >= 1");

    const auto dataset = forge::read_dataset(cfg.dataset);

    grpo::GrpoConfig grpo_cfg;
    grpo_cfg.group_size = cfg.group_size;
    grpo_cfg.clip_eps = cfg.clip_eps;
    grpo_cfg.kl_beta = cfg.kl_beta;
    grpo_cfg.learning_rate = cfg.lr;
    grpo_cfg.steps = cfg.steps;

    toy::TrainOptions opts;
    opts.inner_epochs = cfg.inner_epochs;
    opts.questions_per_step = cfg.questions_per_step;
    opts.paranoid = cfg.paranoid;
    opts.jobs = cfg.jobs;

    const toy::TrainResult result = toy::train_toy(dataset, grpo_cfg, cfg.seed, opts);
    toy::export_metrics(result.metrics, cfg.metrics_out);

    nlohmann::ordered_json summary;
    summary["steps"] = result.metrics.steps.size();
    if (!result.metrics.steps.empty()) {
        const auto& last = result.metrics.steps.back();
        summary["final_accuracy"] = last.accuracy;
        summary["final_format_rate"] = last.format_rate;
        summary["final_mean_reward"] = last.mean_reward;
        summary["final_mean_kl"] = last.mean_kl;
    }
    std::cout << summary.dump() << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"viewpoint QA dataset toolkit with a desk-scale GRPO arena"};
    app.require_subcommand(1);

    // gen
    GenConfig gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a viewpoint QA dataset");
    FlagBinder gen_bind("gen");
    gen_bind.option(gen_cmd, "--scenes", gen.scenes, "directory of calibration scenes");
    gen_bind.option(gen_cmd, "--format", gen.format, "scene format: colmap|json");
    gen_bind.option(gen_cmd, "--count", gen.count, "pairs sampled per scene");
    gen_bind.option(gen_cmd, "--min-deg", gen.min_deg, "minimum horizontal separation");
    gen_bind.option(gen_cmd, "--max-deg", gen.max_deg, "maximum horizontal separation");
    gen_bind.option(gen_cmd, "--seed", gen.seed, "master seed");
    gen_bind.option(gen_cmd, "--out", gen.out, "output JSONL file");
    gen_bind.option(gen_cmd, "--demo-ring", gen.demo_ring, "use a synthetic N-camera ring scene");
    gen_bind.flag(gen_cmd, "--all-types", gen.all_types, "emit all three question types per pair");
    gen_bind.option(gen_cmd, "--schedule-out", gen.schedule_out,
                    "also write the 0.9:0.1 interleave schedule");
    gen_bind.option(gen_cmd, "--up-axis", gen.up_axis, "override the estimated up axis (x,y,z)");
    gen_bind.option(gen_cmd, "--lateral-tol-deg", gen.lateral_tol_deg,
                    "degenerate dead zone for lateral labels");
    gen_bind.option(gen_cmd, "--templates", gen.templates, "prompt template directory");
    gen_bind.option(gen_cmd, "--jobs", gen.jobs, "worker threads");
    gen_bind.option(gen_cmd, "--log-level", gen.log_level, "info|debug|quiet");
    gen_cmd->add_option("--config", gen.config, "JSON config file (flags win)");

    // stats
    std::string stats_in;
    std::string stats_config;
    std::uint64_t stats_seed = 0;
    int stats_jobs = 1;
    std::string stats_log_level = "info";
    CLI::App* stats_cmd = app.add_subcommand("stats", "summarize a dataset file");
    FlagBinder stats_bind("stats");
    stats_bind.option(stats_cmd, "--in", stats_in, "dataset JSONL file");
    stats_bind.option(stats_cmd, "--seed", stats_seed, "master seed (unused)");
    stats_bind.option(stats_cmd, "--jobs", stats_jobs, "worker threads");
    stats_bind.option(stats_cmd, "--log-level", stats_log_level, "info|debug|quiet");
    stats_cmd->add_option("--config", stats_config, "JSON config file (flags win)");

    // score
    std::string score_in;
    std::string score_dataset;
    std::string score_config;
    std::uint64_t score_seed = 0;
    int score_jobs = 1;
    std::string score_log_level = "info";
    CLI::App* score_cmd = app.add_subcommand("score", "score an answers file against a dataset");
    FlagBinder score_bind("score");
    score_bind.option(score_cmd, "--in", score_in, "answers JSONL ({record_id, completion})");
    score_bind.option(score_cmd, "--dataset", score_dataset, "dataset JSONL file");
    score_bind.option(score_cmd, "--seed", score_seed, "master seed (unused)");
    score_bind.option(score_cmd, "--jobs", score_jobs, "worker threads");
    score_bind.option(score_cmd, "--log-level", score_log_level, "info|debug|quiet");
    score_cmd->add_option("--config", score_config, "JSON config file (flags win)");

    // cotprompt
    std::string cot_in;
    std::string cot_out;
    std::string cot_templates;
    std::string cot_log_level = "info";
    std::string cot_config;
    std::uint64_t cot_seed = 0;
    int cot_jobs = 1;
    CLI::App* cot_cmd = app.add_subcommand("cotprompt", "assemble pseudo-CoT generation prompts");
    FlagBinder cot_bind("cotprompt");
    cot_bind.option(cot_cmd, "--in", cot_in, "dataset JSONL file");
    cot_bind.option(cot_cmd, "--out", cot_out, "output directory for prompt bundles");
    cot_bind.option(cot_cmd, "--templates", cot_templates, "prompt template directory");
    cot_bind.option(cot_cmd, "--seed", cot_seed, "master seed (unused)");
    cot_bind.option(cot_cmd, "--jobs", cot_jobs, "worker threads");
    cot_bind.option(cot_cmd, "--log-level", cot_log_level, "info|debug|quiet");
    cot_cmd->add_option("--config", cot_config, "JSON config file (flags win)");

    // gradcheck
    std::uint64_t grad_seed = 0;
    int grad_trials = 100;
    std::string grad_config;
    int grad_jobs = 1;
    std::string grad_log_level = "info";
    CLI::App* grad_cmd = app.add_subcommand("gradcheck", "verify the GRPO gradient numerically");
    FlagBinder grad_bind("gradcheck");
    grad_bind.option(grad_cmd, "--seed", grad_seed, "random seed");
    grad_bind.option(grad_cmd, "--trials", grad_trials, "number of random parameter points");
    grad_bind.option(grad_cmd, "--jobs", grad_jobs, "worker threads");
    grad_bind.option(grad_cmd, "--log-level", grad_log_level, "info|debug|quiet");
    grad_cmd->add_option("--config", grad_config, "JSON config file (flags win)");

    // train-toy
    TrainToyConfig train;
    CLI::App* train_cmd = app.add_subcommand("train-toy", "run the toy GRPO training loop");
    FlagBinder train_bind("train-toy");
    train_bind.option(train_cmd, "--dataset", train.dataset, "dataset JSONL file");
    train_bind.option(train_cmd, "--steps", train.steps, "optimization steps");
    train_bind.option(train_cmd, "--group-size", train.group_size, "samples per question");
    train_bind.option(train_cmd, "--clip-eps", train.clip_eps, "clip range epsilon");
    train_bind.option(train_cmd, "--kl-beta", train.kl_beta, "KL penalty weight");
    train_bind.option(train_cmd, "--lr", train.lr, "learning rate");
    train_bind.option(train_cmd, "--seed", train.seed, "master seed");
    train_bind.option(train_cmd, "--metrics-out", train.metrics_out, "metrics CSV file");
    train_bind.option(train_cmd, "--inner-epochs", train.inner_epochs,
                      "policy updates per sampled batch");
    train_bind.option(train_cmd, "--questions-per-step", train.questions_per_step,
                      "questions sampled per step");
    train_bind.flag(train_cmd, "--paranoid", train.paranoid, "run a gradcheck self-test first");
    train_bind.option(train_cmd, "--jobs", train.jobs, "worker threads");
    train_bind.option(train_cmd, "--log-level", train.log_level, "info|debug|quiet");
    train_cmd->add_option("--config", train.config, "JSON config file (flags win)");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::CallForHelp& e) {
            std::cout << app.help() << "\n";
            return 0;
        } catch (const CLI::ParseError& e) {
            std::cerr << e.what() << "\n" << app.help() << "\n";
            return 2;
        }

        if (gen_cmd->parsed()) {
            gen_bind.finalize(gen.config);
            std::cout << gen_bind.echo() << "\n";
            return run_gen(gen);
        }
        if (stats_cmd->parsed()) {
            stats_bind.finalize(stats_config);
            std::cout << stats_bind.echo() << "\n";
            return run_stats(stats_in);
        }
        if (score_cmd->parsed()) {
            score_bind.finalize(score_config);
            std::cout << score_bind.echo() << "\n";
            return run_score(score_in, score_dataset);
        }
        if (cot_cmd->parsed()) {
            cot_bind.finalize(cot_config);
            std::cout << cot_bind.echo() << "\n";
            return run_cotprompt(cot_in, cot_out, cot_templates, cot_log_level);
        }
        if (grad_cmd->parsed()) {
            grad_bind.finalize(grad_config);
            std::cout << grad_bind.echo() << "\n";
            return run_gradcheck(grad_seed, grad_trials);
        }
        if (train_cmd->parsed()) {
            train_bind.finalize(train.config);
            std::cout << train_bind.echo() << "\n";
            return run_train_toy(train);
        }
        std::cerr << app.help() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << error_line("UsageError", e.what()) << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << error_line(e.kind(), e.what()) << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << error_line("InternalError", e.what()) << "\n";
        return 1;
    }
}

}  // namespace vantage::cli

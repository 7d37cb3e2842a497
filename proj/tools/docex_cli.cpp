// docex: batch front-end for evidence extraction, evaluation, reward scoring,
// and dataset curation. Every command reads structured JSON inputs, writes
// deterministic JSON artifacts, and reports failures as machine-readable
// error records on stderr.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "docex/curation.hpp"
#include "docex/pipeline.hpp"
#include "docex/reward.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InputUnreadable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInput = 2;
constexpr int kExitUpstream = 3;
constexpr int kExitFailure = 4;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw InputUnreadable("cannot read file: " + path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_text(const std::string& path, const std::string& text) {
    if (const fs::path parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out.good()) throw InputUnreadable("cannot write file: " + path);
    out << text;
}

// ${VAR} interpolation inside config string values; unset variables expand
// to the empty string so configs stay loadable without credentials.
std::string interpolate_env(const std::string& value) {
    std::string out;
    std::size_t pos = 0;
    while (pos < value.size()) {
        const std::size_t open = value.find("${", pos);
        if (open == std::string::npos) {
            out.append(value, pos, std::string::npos);
            break;
        }
        const std::size_t close = value.find('}', open + 2);
        if (close == std::string::npos) {
            out.append(value, pos, std::string::npos);
            break;
        }
        out.append(value, pos, open - pos);
        const std::string name = value.substr(open + 2, close - open - 2);
        if (const char* env = std::getenv(name.c_str())) out += env;
        pos = close + 1;
    }
    return out;
}

void interpolate_env(json& doc) {
    if (doc.is_string()) {
        doc = interpolate_env(doc.get<std::string>());
    } else if (doc.is_object() || doc.is_array()) {
        for (json& child : doc) interpolate_env(child);
    }
}

struct RunConfig {
    std::string model_endpoint;
    std::string backend_endpoint;
    std::string reranker_endpoint;
    std::string generator_endpoint;
    docex::MatchThresholds thresholds;
    docex::RewardConfig reward;
    docex::SessionConfig session;
    int fan_out = 1;
    docex::InputConfig input_config = docex::InputConfig::Evidence;
    std::string system_prompt_path;
    std::string generator_prompt_path;
    std::string output_dir = ".";
    // offline test doubles; when set they replace the HTTP clients
    std::string model_fixture;
    std::string ocr_fixture;
    std::string generator_fixture;
};

double require_number(const json& doc, const char* key, double fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc[key].is_number()) throw ConfigInvalid(std::string("config field '") +
                                                   key + "' must be a number");
    return doc[key].get<double>();
}

RunConfig load_config(const std::string& path) {
    RunConfig config;
    if (path.empty()) return config;
    json doc = json::parse(read_text(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw ConfigInvalid("config file is not a JSON object: " + path);
    interpolate_env(doc);

    config.model_endpoint = doc.value("model_endpoint", "");
    config.backend_endpoint = doc.value("backend_endpoint", "");
    config.reranker_endpoint = doc.value("reranker_endpoint", "");
    config.generator_endpoint = doc.value("generator_endpoint", "");
    config.output_dir = doc.value("output_dir", ".");
    config.model_fixture = doc.value("model_fixture", "");
    config.ocr_fixture = doc.value("ocr_fixture", "");
    config.generator_fixture = doc.value("generator_fixture", "");
    config.system_prompt_path = doc.value("system_prompt", "");
    config.generator_prompt_path = doc.value("generator_prompt", "");
    if (doc.contains("input_config"))
        config.input_config =
            docex::input_config_from_string(doc["input_config"].get<std::string>());
    if (doc.contains("fan_out")) {
        config.fan_out = doc["fan_out"].get<int>();
        if (config.fan_out < 1) throw ConfigInvalid("fan_out must be >= 1");
    }
    if (doc.contains("thresholds")) {
        const json& t = doc["thresholds"];
        config.thresholds.thres_em =
            require_number(t, "thres_em", config.thresholds.thres_em);
        config.thresholds.thres_min =
            require_number(t, "thres_min", config.thresholds.thres_min);
    }
    if (doc.contains("reward")) {
        const json& r = doc["reward"];
        config.reward.spurious_match_floor = require_number(
            r, "spurious_match_floor", config.reward.spurious_match_floor);
        config.reward.redundant_overlap_floor = require_number(
            r, "redundant_overlap_floor", config.reward.redundant_overlap_floor);
        config.reward.oversized_area_fraction = require_number(
            r, "oversized_area_fraction", config.reward.oversized_area_fraction);
        config.reward.oversized_penalty =
            require_number(r, "oversized_penalty", config.reward.oversized_penalty);
        config.reward.thresholds = config.thresholds;
    }
    if (doc.contains("session")) {
        const json& s = doc["session"];
        config.session.max_turns = static_cast<int>(
            require_number(s, "max_turns", config.session.max_turns));
        config.session.max_attempts = static_cast<int>(
            require_number(s, "max_attempts", config.session.max_attempts));
        config.session.temperature =
            require_number(s, "temperature", config.session.temperature);
        config.session.page_image_max_dim = static_cast<int>(require_number(
            s, "page_image_max_dim", config.session.page_image_max_dim));
    }
    if (config.session.max_turns < 1 || config.session.max_attempts < 1)
        throw ConfigInvalid("session budgets must be >= 1");
    for (const std::string* p : {&config.model_fixture, &config.ocr_fixture,
                                 &config.generator_fixture, &config.system_prompt_path,
                                 &config.generator_prompt_path}) {
        if (!p->empty() && !fs::exists(*p))
            throw ConfigInvalid("configured path does not exist: " + *p);
    }
    return config;
}

docex::NormBox parse_box(const json& value, const std::string& where) {
    if (!value.is_array() || value.size() != 4)
        throw InputUnreadable("bbox must be a 4-element array in " + where);
    for (const json& coord : value)
        if (!coord.is_number_integer())
            throw InputUnreadable("bbox coordinates must be integers in " + where);
    const docex::NormBox box{value[0].get<int>(), value[1].get<int>(),
                             value[2].get<int>(), value[3].get<int>()};
    if (!box.valid()) throw InputUnreadable("invalid bbox in " + where);
    return box;
}

std::vector<docex::NormBox> parse_boxes(const json& value, const std::string& where) {
    if (!value.is_array()) throw InputUnreadable("expected box array in " + where);
    std::vector<docex::NormBox> boxes;
    for (const json& item : value) boxes.push_back(parse_box(item, where));
    return boxes;
}

json load_json_input(const std::string& path, bool allow_empty = false) {
    const std::string text = read_text(path);
    if (allow_empty && text.find_first_not_of(" \t\r\n") == std::string::npos)
        return json::array();
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw InputUnreadable("invalid JSON in " + path);
    return doc;
}

std::vector<docex::RetrievedPage> parse_pages(const json& doc, const std::string& where) {
    if (!doc.is_array()) throw InputUnreadable("expected page array in " + where);
    std::vector<docex::RetrievedPage> pages;
    for (const json& item : doc) {
        docex::RetrievedPage page;
        page.doc_id = item.at("doc_id").get<std::string>();
        page.page_index = item.at("page_index").get<int>();
        page.score = item.value("score", 0.0);
        page.image_ref = item.at("image_ref").get<std::string>();
        pages.push_back(std::move(page));
    }
    return pages;
}

std::unique_ptr<docex::ModelClient> make_model_client(const RunConfig& config) {
    if (!config.model_fixture.empty())
        return std::make_unique<docex::ScriptedModelClient>(
            docex::ScriptedModelClient::from_file(config.model_fixture));
    if (config.model_endpoint.empty())
        throw ConfigInvalid("no model endpoint or fixture configured");
    const char* key = std::getenv("MODEL_API_KEY");
    return std::make_unique<docex::HttpModelClient>(config.model_endpoint,
                                                    key ? key : "");
}

std::unique_ptr<docex::OcrBackend> make_backend(const RunConfig& config) {
    if (!config.ocr_fixture.empty())
        return std::make_unique<docex::MockOcrBackend>(
            docex::MockOcrBackend::from_file(config.ocr_fixture));
    if (config.backend_endpoint.empty())
        throw ConfigInvalid("no recognition backend endpoint or fixture configured");
    return std::make_unique<docex::HttpOcrBackend>(
        docex::OcrBackendDescriptor{config.backend_endpoint});
}

std::unique_ptr<docex::GeneratorClient> make_generator(const RunConfig& config) {
    if (!config.generator_fixture.empty())
        return std::make_unique<docex::ScriptedGeneratorClient>(
            docex::ScriptedGeneratorClient::from_file(config.generator_fixture));
    if (config.generator_endpoint.empty())
        throw ConfigInvalid("no generator endpoint or fixture configured");
    const char* key = std::getenv("GENERATOR_API_KEY");
    return std::make_unique<docex::HttpGeneratorClient>(config.generator_endpoint,
                                                        key ? key : "");
}

void emit(const std::string& out_path, const json& doc) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
}

docex::EvidenceBundle run_extract(const RunConfig& config, const std::string& query,
                                  const std::vector<docex::RetrievedPage>& pages) {
    docex::SessionConfig session = config.session;
    if (session.system_prompt.empty() && !config.system_prompt_path.empty())
        session.system_prompt = read_text(config.system_prompt_path);
    const auto model = make_model_client(config);
    const auto backend = make_backend(config);
    const docex::EvidenceBundle bundle =
        docex::extract(query, pages, session, *backend, *model, config.fan_out);
    if (!pages.empty() && bundle.entries.empty() && bundle.irrelevant_pages.empty())
        throw docex::ModelUnavailable(bundle.failures.front().error);
    return bundle;
}

int cmd_extract(const RunConfig& config, const std::string& query,
                const std::string& pages_path, const std::string& out_dir) {
    const auto pages = parse_pages(load_json_input(pages_path), pages_path);
    const docex::EvidenceBundle bundle = run_extract(config, query, pages);
    docex::write_bundle(out_dir, bundle);
    return kExitOk;
}

int cmd_evaluate(const RunConfig& config, const std::string& annotations_path,
                 const std::string& out_path) {
    const json doc = load_json_input(annotations_path);
    if (!doc.is_array())
        throw InputUnreadable("expected instance array in " + annotations_path);

    json records = json::array();
    std::vector<docex::PageJudgment> judgments;
    for (const json& item : doc) {
        const std::string id = item.at("id").get<std::string>();
        const auto gt = parse_boxes(item.at("gt"), id);
        const auto pred = parse_boxes(item.at("pred"), id);
        const docex::BoxSetReport report =
            docex::box_set_report(gt, pred, config.thresholds);
        records.push_back({{"id", id},
                           {"recall_min", report.recall_min},
                           {"recall_em", report.recall_em},
                           {"precision_min", report.precision_min},
                           {"f1_min", report.f1_min}});
        judgments.push_back(
            docex::PageJudgment{item.value("relevant", !gt.empty()), !pred.empty()});
    }
    json out = {{"instances", std::move(records)}};
    if (!judgments.empty()) out["page_accuracy"] = docex::page_accuracy(judgments);
    emit(out_path, out);
    return kExitOk;
}

int cmd_reward(const RunConfig& config, const std::string& rollouts_path,
               const std::string& out_path) {
    const json doc = load_json_input(rollouts_path, /*allow_empty=*/true);
    if (!doc.is_array())
        throw InputUnreadable("expected rollout array in " + rollouts_path);
    if (doc.empty()) {
        if (!out_path.empty()) write_text(out_path, "");
        return kExitOk;
    }

    json records = json::array();
    for (const json& item : doc) {
        const std::string id = item.at("id").get<std::string>();
        const auto pred = parse_boxes(item.at("pred"), id);
        if (item.value("negative", false)) {
            records.push_back(
                {{"id", id}, {"negative", true}, {"total", docex::negative_reward(pred)}});
            continue;
        }
        const auto gt = parse_boxes(item.at("gt"), id);
        std::vector<docex::ToolCall> calls;
        for (const json& call : item.value("tool_calls", json::array())) {
            calls.push_back(docex::ToolCall{
                call.value("label", ""), parse_box(call.at("bbox"), id),
                docex::rotation_from_degrees(call.value("angle", 0)),
                docex::element_type_from_string(call.at("type").get<std::string>())});
        }
        const docex::RewardBreakdown r =
            docex::positive_reward(gt, pred, calls, config.reward);
        records.push_back({{"id", id},
                           {"negative", false},
                           {"accuracy", r.accuracy},
                           {"p_over_pred", r.p_over_pred},
                           {"p_overlap", r.p_overlap},
                           {"p_oversized", r.p_oversized},
                           {"total", r.total}});
    }
    emit(out_path, records);
    return kExitOk;
}

int cmd_curate(const RunConfig& config, const std::string& candidates_path,
               std::size_t keep, const std::string& out_path) {
    const json doc = load_json_input(candidates_path);
    if (!doc.is_array())
        throw InputUnreadable("expected candidate array in " + candidates_path);

    std::vector<docex::TrajectoryCandidate> candidates;
    std::size_t negatives = 0;
    for (const json& item : doc) {
        if (item.value("negative", false)) {
            ++negatives;
            continue;
        }
        docex::TrajectoryCandidate c;
        c.id = item.at("id").get<std::string>();
        c.gt_boxes = parse_boxes(item.at("gt"), c.id);
        c.pred_boxes = parse_boxes(item.at("pred"), c.id);
        candidates.push_back(std::move(c));
    }
    const auto kept =
        docex::filter_trajectories(std::move(candidates), keep, config.thresholds);

    json records = json::array();
    for (const docex::TrajectoryCandidate& c : kept)
        records.push_back({{"id", c.id},
                           {"sum_score", c.score.sum_score},
                           {"mean_score", c.score.mean_score}});
    const docex::DatasetManifest m = docex::manifest(kept.size(), negatives);
    emit(out_path, json{{"kept", std::move(records)},
                        {"manifest",
                         {{"positive_count", m.positive_count},
                          {"negative_count", m.negative_count},
                          {"ratio", {m.ratio_positive, m.ratio_negative}},
                          {"negative_share", m.negative_share},
                          {"share_warning", m.share_warning}}}});
    return kExitOk;
}

int cmd_mine_negatives(const std::string& scores_path, const std::string& query_id,
                       double low, double high, const std::string& out_path) {
    const json doc = load_json_input(scores_path);
    if (!doc.is_array())
        throw InputUnreadable("expected score array in " + scores_path);
    std::vector<docex::ScoredPage> scored;
    for (const json& item : doc)
        scored.push_back(docex::ScoredPage{item.at("page_ref").get<std::string>(),
                                           item.at("score").get<double>()});
    docex::ScriptedVerifier verifier;  // external judge wiring is out of band
    const auto negatives = docex::mine_negatives(query_id, scored, verifier,
                                                 docex::ScoreBand{low, high});
    json records = json::array();
    for (const docex::NegativeCandidate& n : negatives)
        records.push_back({{"query_id", n.query_id},
                           {"page_ref", n.page_ref},
                           {"relevance_score", n.relevance_score},
                           {"verified_negative", n.verified_negative}});
    emit(out_path, records);
    return kExitOk;
}

int cmd_pipeline(const RunConfig& config, const std::string& queries_path,
                 const std::string& out_dir) {
    const json doc = load_json_input(queries_path);
    if (!doc.is_array())
        throw InputUnreadable("expected query array in " + queries_path);

    const auto generator = make_generator(config);
    const std::string generator_prompt =
        config.generator_prompt_path.empty()
            ? std::string{}
            : read_text(config.generator_prompt_path);

    json report = json::array();
    for (const json& item : doc) {
        const std::string id = item.at("id").get<std::string>();
        const std::string question = item.at("question").get<std::string>();
        auto pages = parse_pages(item.at("pages"), id);
        if (item.contains("doc_page_counts")) {
            std::map<std::string, int> counts;
            for (const auto& [doc_id, count] : item["doc_page_counts"].items())
                counts[doc_id] = count.get<int>();
            pages = docex::expand_adjacent(pages, counts);
        }
        const docex::EvidenceBundle bundle = run_extract(config, question, pages);
        docex::write_bundle((fs::path(out_dir) / id).string(), bundle);

        const docex::GeneratorInput input =
            docex::build_generator_input(bundle, config.input_config);
        const docex::GeneratorRun run =
            docex::invoke_generator(input, question, *generator, generator_prompt);
        report.push_back({{"id", id},
                          {"answer", run.answer},
                          {"relevant_pages", bundle.entries.size()},
                          {"irrelevant_pages", bundle.irrelevant_pages.size()},
                          {"failed_pages", bundle.failures.size()},
                          {"tokens",
                           {{"input", run.tokens.input_tokens},
                            {"output", run.tokens.output_tokens},
                            {"counter", run.tokens.counter}}}});
    }
    emit((fs::path(out_dir) / "report.json").string(), report);
    return kExitOk;
}

int error_record(const std::string& type, const std::string& message, int code) {
    std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump()
              << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"query-driven document evidence extraction toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "run configuration file (JSON)");

    std::string query, pages_path, out_dir;
    CLI::App* extract = app.add_subcommand("extract", "run agent extraction over pages");
    extract->add_option("--query", query, "natural-language query")->required();
    extract->add_option("--pages", pages_path, "retrieved pages (JSON)")->required();
    extract->add_option("--out", out_dir, "bundle output directory")->required();
    std::string model_endpoint_flag, model_fixture_flag, ocr_fixture_flag;
    extract->add_option("--model-endpoint", model_endpoint_flag,
                        "override the configured model endpoint");
    extract->add_option("--model-fixture", model_fixture_flag,
                        "scripted model fixture (offline runs)");
    extract->add_option("--ocr-fixture", ocr_fixture_flag,
                        "recognition fixture (offline runs)");

    std::string annotations_path, eval_out;
    CLI::App* evaluate = app.add_subcommand("evaluate", "score predictions against annotations");
    evaluate->add_option("--annotations", annotations_path, "instance file (JSON)")
        ->required();
    evaluate->add_option("--out", eval_out, "report path (default stdout)");

    std::string rollouts_path, reward_out;
    CLI::App* reward = app.add_subcommand("reward", "score rollouts");
    reward->add_option("--rollouts", rollouts_path, "rollout file (JSON)")->required();
    reward->add_option("--out", reward_out, "record path (default stdout)");

    std::string candidates_path, curate_out;
    std::size_t keep = 1;
    CLI::App* curate = app.add_subcommand("curate", "filter trajectories for training");
    curate->add_option("--candidates", candidates_path, "candidate file (JSON)")
        ->required();
    curate->add_option("--keep", keep, "candidates to keep per query")->required();
    curate->add_option("--out", curate_out, "export path (default stdout)");

    std::string scores_path, mine_query_id, mine_out;
    double band_low = 0.05, band_high = 0.30;
    CLI::App* mine = app.add_subcommand("mine-negatives", "mine hard-negative pages");
    mine->add_option("--scores", scores_path, "reranker scores (JSON)")->required();
    mine->add_option("--query-id", mine_query_id, "query identifier")->required();
    mine->add_option("--band-low", band_low, "inclusive lower score bound");
    mine->add_option("--band-high", band_high, "inclusive upper score bound");
    mine->add_option("--out", mine_out, "record path (default stdout)");

    std::string queries_path, pipeline_out;
    CLI::App* pipeline = app.add_subcommand("pipeline", "extract then generate per query");
    pipeline->add_option("--queries", queries_path, "query file (JSON)")->required();
    pipeline->add_option("--out", pipeline_out, "run output directory")->required();
    std::string input_config_flag;
    pipeline->add_option("--input-config", input_config_flag,
                         "generator input configuration "
                         "(page|page_ocr|evidence|evidence_ocr)");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig config = load_config(config_path);
        if (!model_endpoint_flag.empty()) config.model_endpoint = model_endpoint_flag;
        if (!model_fixture_flag.empty()) config.model_fixture = model_fixture_flag;
        if (!ocr_fixture_flag.empty()) config.ocr_fixture = ocr_fixture_flag;
        if (!input_config_flag.empty())
            config.input_config = docex::input_config_from_string(input_config_flag);

        if (extract->parsed())
            return cmd_extract(config, query, pages_path, out_dir);
        if (evaluate->parsed())
            return cmd_evaluate(config, annotations_path, eval_out);
        if (reward->parsed()) return cmd_reward(config, rollouts_path, reward_out);
        if (curate->parsed())
            return cmd_curate(config, candidates_path, keep, curate_out);
        if (mine->parsed())
            return cmd_mine_negatives(scores_path, mine_query_id, band_low, band_high,
                                      mine_out);
        if (pipeline->parsed())
            return cmd_pipeline(config, queries_path, pipeline_out);
        return error_record("ConfigInvalid", "no command", kExitConfig);
    } catch (const ConfigInvalid& e) {
        return error_record("ConfigInvalid", e.what(), kExitConfig);
    } catch (const InputUnreadable& e) {
        return error_record("InputUnreadable", e.what(), kExitInput);
    } catch (const docex::ModelUnavailable& e) {
        return error_record("ModelUnavailable", e.what(), kExitUpstream);
    } catch (const docex::BackendUnavailable& e) {
        return error_record("BackendUnavailable", e.what(), kExitUpstream);
    } catch (const docex::GeneratorUnavailable& e) {
        return error_record("GeneratorUnavailable", e.what(), kExitUpstream);
    } catch (const json::exception& e) {
        return error_record("InputUnreadable", e.what(), kExitInput);
    } catch (const std::exception& e) {
        return error_record("RunFailed", e.what(), kExitFailure);
    }
}

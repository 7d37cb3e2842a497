#include "docex/agent.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <httplib.h>

namespace docex {

using nlohmann::json;

std::string to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
        case Role::Tool: return "tool";
    }
    throw std::invalid_argument("bad role");
}

Role role_from_string(const std::string& s) {
    if (s == "system") return Role::System;
    if (s == "user") return Role::User;
    if (s == "assistant") return Role::Assistant;
    if (s == "tool") return Role::Tool;
    throw std::invalid_argument("unknown role: " + s);
}

namespace {

constexpr const char* kToolName = "image_zoom_and_ocr_tool";
constexpr const char* kToolOpen = "<tool_call>";
constexpr const char* kToolClose = "</tool_call>";

NormBox bbox_from_json(const json& arr, const char* error_prefix, auto make_error) {
    if (!arr.is_array() || arr.size() != 4)
        throw make_error(std::string(error_prefix) + ": bbox must have 4 elements");
    int v[4];
    for (int i = 0; i < 4; ++i) {
        if (!arr[i].is_number_integer())
            throw make_error(std::string(error_prefix) + ": bbox values must be integers");
        v[i] = arr[i].get<int>();
    }
    NormBox box{v[0], v[1], v[2], v[3]};
    if (!box.valid())
        throw make_error(std::string(error_prefix) + ": bbox violates the 0-1000 grid");
    return box;
}

}  // namespace

std::optional<ToolCall> parse_tool_call(const std::string& model_text) {
    const auto open = model_text.find(kToolOpen);
    if (open == std::string::npos) return std::nullopt;
    const auto start = open + std::string(kToolOpen).size();
    const auto close = model_text.find(kToolClose, start);
    if (close == std::string::npos)
        throw MalformedToolCall("tool call block is not closed");

    auto fail = [](const std::string& msg) { return MalformedToolCall(msg); };
    const std::string body = model_text.substr(start, close - start);
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded()) throw fail("tool call block is not valid JSON");
    if (!parsed.is_object() || parsed.value("name", "") != kToolName)
        throw fail("tool call name must be " + std::string(kToolName));
    if (!parsed.contains("arguments") || !parsed["arguments"].is_object())
        throw fail("tool call arguments missing");
    const json& args = parsed["arguments"];

    ToolCall call;
    if (!args.contains("label") || !args["label"].is_string() ||
        args["label"].get<std::string>().empty())
        throw fail("tool call label must be a non-empty string");
    call.label = args["label"].get<std::string>();
    call.box = bbox_from_json(args.value("bbox", json()), "tool call", fail);
    if (!args.contains("angle") || !args["angle"].is_number_integer())
        throw fail("tool call angle must be an integer");
    try {
        call.rotation = rotation_from_degrees(args["angle"].get<int>());
    } catch (const std::invalid_argument& e) {
        throw fail(e.what());
    }
    if (!args.contains("type") || !args["type"].is_string())
        throw fail("tool call type must be a string");
    try {
        call.element_type = element_type_from_string(args["type"].get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw fail(e.what());
    }
    return call;
}

std::optional<std::vector<EvidenceItem>> parse_evidence(const std::string& model_text) {
    const std::string fence = "```json";
    const auto open = model_text.find(fence);
    if (open == std::string::npos) return std::nullopt;
    const auto start = open + fence.size();
    const auto close = model_text.find("```", start);
    if (close == std::string::npos)
        throw MalformedEvidence("evidence fence is not closed");

    const std::string body = model_text.substr(start, close - start);
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded())
        throw MalformedEvidence("evidence block is not valid JSON");
    if (!parsed.is_array()) throw MalformedEvidence("evidence block must be a list");

    auto fail = [](const std::string& msg) { return MalformedEvidence(msg); };
    std::vector<EvidenceItem> items;
    for (const json& entry : parsed) {
        if (!entry.is_object() || !entry.contains("evidence") ||
            !entry["evidence"].is_string() ||
            entry["evidence"].get<std::string>().empty())
            throw fail("evidence item needs a non-empty evidence string");
        EvidenceItem item;
        item.evidence = entry["evidence"].get<std::string>();
        item.box = bbox_from_json(entry.value("bbox", json()), "evidence item", fail);
        items.push_back(std::move(item));
    }
    return items;
}

ScriptedModelClient ScriptedModelClient::from_file(const std::string& path) {
    return from_json(json::parse(load_text_file(path)));
}

ScriptedModelClient ScriptedModelClient::from_json(const json& doc) {
    ScriptedModelClient client;
    for (const auto& [key, texts] : doc.items())
        client.scripts_[key] = texts.get<std::vector<std::string>>();
    return client;
}

void ScriptedModelClient::script(const std::string& query, const std::string& page_id,
                                 std::vector<std::string> texts) {
    scripts_[query + "|" + page_id] = std::move(texts);
}

std::string ScriptedModelClient::complete(const SessionKey& key, const SessionConfig&,
                                          const std::vector<AgentTurn>&) {
    const std::lock_guard<std::mutex> lock(*mutex_);
    ++call_count_;
    const std::string script_key = key.query + "|" + key.page_id;
    const auto it = scripts_.find(script_key);
    if (it == scripts_.end() || it->second.empty())
        throw ModelUnavailable("no script for " + script_key);
    std::size_t& cursor = cursors_[script_key];
    const std::string& text = it->second[std::min(cursor, it->second.size() - 1)];
    ++cursor;
    return text;
}

int ScriptedModelClient::call_count() const {
    const std::lock_guard<std::mutex> lock(*mutex_);
    return call_count_;
}

void ScriptedModelClient::reset_cursors() {
    const std::lock_guard<std::mutex> lock(*mutex_);
    cursors_.clear();
    call_count_ = 0;
}

struct HttpModelClient::Impl {
    std::string endpoint;
    std::string api_key;
    std::string model_name;
    httplib::Client client;

    Impl(std::string ep, std::string key, std::string name)
        : endpoint(std::move(ep)), api_key(std::move(key)),
          model_name(std::move(name)), client(endpoint) {
        client.set_read_timeout(120, 0);
    }
};

HttpModelClient::HttpModelClient(std::string endpoint, std::string api_key,
                                 std::string model_name)
    : impl_(std::make_unique<Impl>(std::move(endpoint), std::move(api_key),
                                   std::move(model_name))) {}

HttpModelClient::~HttpModelClient() = default;

std::string HttpModelClient::complete(const SessionKey&, const SessionConfig& config,
                                      const std::vector<AgentTurn>& transcript) {
    json messages = json::array();
    for (const AgentTurn& turn : transcript) {
        json content = json::array();
        if (!turn.text.empty()) content.push_back({{"type", "text"}, {"text", turn.text}});
        for (const cv::Mat& image : turn.image_parts) {
            content.push_back(
                {{"type", "image_url"},
                 {"image_url",
                  {{"url", "data:image/png;base64," +
                               base64_encode(encode_png(image))}}}});
        }
        // Tool observations travel as user messages for endpoint compatibility.
        const Role role = turn.role == Role::Tool ? Role::User : turn.role;
        messages.push_back({{"role", to_string(role)}, {"content", std::move(content)}});
    }
    json request = {{"messages", std::move(messages)},
                    {"temperature", config.temperature}};
    if (!impl_->model_name.empty()) request["model"] = impl_->model_name;

    httplib::Headers headers;
    if (!impl_->api_key.empty())
        headers.emplace("Authorization", "Bearer " + impl_->api_key);
    auto res = impl_->client.Post("/v1/chat/completions", headers, request.dump(),
                                  "application/json");
    if (!res)
        throw ModelUnavailable("model endpoint unreachable: " + impl_->endpoint);
    if (res->status != 200)
        throw ModelUnavailable("model endpoint returned status " +
                               std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") ||
        parsed["choices"].empty())
        throw ModelUnavailable("model response malformed");
    return parsed["choices"][0]["message"]["content"].get<std::string>();
}

namespace {

PageExtraction finish_extraction(const std::string& page_id,
                                 std::vector<EvidenceItem> items,
                                 std::vector<ToolResult> tool_results,
                                 std::vector<AgentTurn> transcript) {
    PageExtraction out;
    out.page_id = page_id;
    out.items = std::move(items);
    out.relevant = !out.items.empty();
    out.tool_results = std::move(tool_results);
    out.transcript = std::move(transcript);
    out.attempts_used = 1;
    return out;
}

constexpr const char* kCorrectiveObservation =
    "Your previous message was not parseable. Emit either a valid "
    "<tool_call>...</tool_call> block or the final evidence list as a fenced "
    "```json code block.";

}  // namespace

PageExtraction run_session(const std::string& query, const cv::Mat& page_image,
                           const std::string& page_id, const SessionConfig& config,
                           OcrBackend& backend, ModelClient& model) {
    const SessionKey key{query, page_id};
    std::vector<AgentTurn> transcript;
    transcript.push_back(AgentTurn{Role::System, config.system_prompt, {}, {}, {}});

    AgentTurn user;
    user.role = Role::User;
    user.text = query;
    user.image_parts.push_back(resize_max_dim(page_image, config.page_image_max_dim));
    transcript.push_back(std::move(user));

    std::vector<ToolResult> tool_results;
    bool repaired = false;
    for (int turn = 0; turn < config.max_turns; ++turn) {
        AgentTurn assistant;
        assistant.role = Role::Assistant;
        assistant.text = model.complete(key, config, transcript);

        std::optional<ToolCall> call;
        try {
            if (auto evidence = parse_evidence(assistant.text)) {
                assistant.parsed_evidence = evidence;
                transcript.push_back(std::move(assistant));
                return finish_extraction(page_id, std::move(*evidence),
                                         std::move(tool_results),
                                         std::move(transcript));
            }
            call = parse_tool_call(assistant.text);
        } catch (const MalformedToolCall& e) {
            if (repaired) throw SessionFailed(e.what());
            repaired = true;
            transcript.push_back(std::move(assistant));
            transcript.push_back(
                AgentTurn{Role::User, kCorrectiveObservation, {}, {}, {}});
            continue;
        } catch (const MalformedEvidence& e) {
            if (repaired) throw SessionFailed(e.what());
            repaired = true;
            transcript.push_back(std::move(assistant));
            transcript.push_back(
                AgentTurn{Role::User, kCorrectiveObservation, {}, {}, {}});
            continue;
        }

        if (call) {
            assistant.parsed_tool_call = call;
            transcript.push_back(std::move(assistant));
            ToolResult result = execute(page_image, *call, backend);
            AgentTurn observation;
            observation.role = Role::Tool;
            observation.text = result.recognition_text();
            observation.image_parts.push_back(result.crop);
            transcript.push_back(std::move(observation));
            tool_results.push_back(std::move(result));
        } else {
            // Plain prose turn; let the model keep reasoning.
            transcript.push_back(std::move(assistant));
        }
    }
    throw TurnBudgetExhausted("no evidence verdict within " +
                              std::to_string(config.max_turns) + " turns");
}

PageExtraction run_with_retries(const std::string& query, const cv::Mat& page_image,
                                const std::string& page_id, const SessionConfig& config,
                                OcrBackend& backend, ModelClient& model) {
    std::optional<PageExtraction> last_empty;
    int transport_failures = 0;
    std::string transport_error;

    for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
        try {
            PageExtraction extraction =
                run_session(query, page_image, page_id, config, backend, model);
            extraction.attempts_used = attempt;
            if (extraction.relevant) return extraction;
            last_empty = std::move(extraction);
        } catch (const ModelUnavailable& e) {
            ++transport_failures;
            transport_error = e.what();
        } catch (const SessionFailed&) {
            // Failed attempt; retry.
        }
    }
    if (transport_failures == config.max_attempts)
        throw ModelUnavailable(transport_error);

    if (last_empty) {
        last_empty->attempts_used = config.max_attempts;
        return *last_empty;
    }
    PageExtraction out;
    out.page_id = page_id;
    out.relevant = false;
    out.attempts_used = config.max_attempts;
    return out;
}

json turn_to_json(const AgentTurn& turn) {
    json out = {{"role", to_string(turn.role)}, {"text", turn.text}};
    json hashes = json::array();
    for (const cv::Mat& image : turn.image_parts) hashes.push_back(content_hash(image));
    out["image_hashes"] = std::move(hashes);
    if (turn.parsed_tool_call) {
        const ToolCall& c = *turn.parsed_tool_call;
        out["tool_call"] = {{"label", c.label},
                            {"bbox", {c.box.x_min, c.box.y_min, c.box.x_max, c.box.y_max}},
                            {"angle", degrees(c.rotation)},
                            {"type", to_string(c.element_type)}};
    }
    if (turn.parsed_evidence) {
        json items = json::array();
        for (const EvidenceItem& item : *turn.parsed_evidence)
            items.push_back({{"evidence", item.evidence},
                             {"bbox",
                              {item.box.x_min, item.box.y_min, item.box.x_max,
                               item.box.y_max}}});
        out["evidence"] = std::move(items);
    }
    return out;
}

json extraction_to_json(const PageExtraction& extraction) {
    json turns = json::array();
    for (const AgentTurn& turn : extraction.transcript)
        turns.push_back(turn_to_json(turn));
    json items = json::array();
    for (const EvidenceItem& item : extraction.items)
        items.push_back({{"evidence", item.evidence},
                         {"bbox",
                          {item.box.x_min, item.box.y_min, item.box.x_max,
                           item.box.y_max}}});
    return json{{"page_id", extraction.page_id},
                {"relevant", extraction.relevant},
                {"attempts_used", extraction.attempts_used},
                {"items", std::move(items)},
                {"turns", std::move(turns)}};
}

std::string load_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace docex

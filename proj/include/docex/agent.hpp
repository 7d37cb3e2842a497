#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "docex/toolkit.hpp"

namespace docex {

struct ModelUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedToolCall : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedEvidence : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// An attempt that produced no usable evidence verdict.
struct SessionFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TurnBudgetExhausted : SessionFailed {
    using SessionFailed::SessionFailed;
};

enum class Role { System, User, Assistant, Tool };

std::string to_string(Role role);
Role role_from_string(const std::string& s);

struct EvidenceItem {
    std::string evidence;  // self-contained content
    NormBox box;
};

struct AgentTurn {
    Role role = Role::User;
    std::string text;
    std::vector<cv::Mat> image_parts;
    std::optional<ToolCall> parsed_tool_call;                  // assistant turns only
    std::optional<std::vector<EvidenceItem>> parsed_evidence;  // assistant turns only
};

struct PageExtraction {
    std::string page_id;
    bool relevant = false;  // always equals !items.empty()
    std::vector<EvidenceItem> items;
    std::vector<ToolResult> tool_results;
    std::vector<AgentTurn> transcript;
    int attempts_used = 1;
};

struct SessionConfig {
    int max_turns = 8;     // assistant turns per attempt
    int max_attempts = 3;  // re-extraction attempts per page
    std::string model_endpoint;
    double temperature = 1.0;
    int page_image_max_dim = 1024;
    std::string system_prompt;  // loaded from the versioned template file
};

/// Extract the delimited tool-call block. Absence of delimiters yields
/// nullopt; a present but invalid block throws MalformedToolCall.
std::optional<ToolCall> parse_tool_call(const std::string& model_text);

/// Extract the fenced json evidence block. An empty list is a valid parse
/// meaning the page is irrelevant; absence of a fence yields nullopt.
std::optional<std::vector<EvidenceItem>> parse_evidence(const std::string& model_text);

struct SessionKey {
    std::string query;
    std::string page_id;
};

class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual std::string complete(const SessionKey& key, const SessionConfig& config,
                                 const std::vector<AgentTurn>& transcript) = 0;
};

/// Test double replaying canned assistant texts per (query, page) key.
/// The cursor advances across calls; an exhausted script repeats its last
/// entry, so a single-entry script behaves as a fixed responder.
class ScriptedModelClient : public ModelClient {
public:
    ScriptedModelClient() = default;
    /// Fixture document: {"<query>|<page_id>": ["assistant text", ...]}.
    static ScriptedModelClient from_file(const std::string& path);
    static ScriptedModelClient from_json(const nlohmann::json& doc);

    void script(const std::string& query, const std::string& page_id,
                std::vector<std::string> texts);
    std::string complete(const SessionKey& key, const SessionConfig& config,
                         const std::vector<AgentTurn>& transcript) override;

    int call_count() const;
    void reset_cursors();

private:
    // extract() may share one client across workers; pointer keeps the class movable
    std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
    std::map<std::string, std::vector<std::string>> scripts_;
    std::map<std::string, std::size_t> cursors_;
    int call_count_ = 0;
};

/// Chat-completions style client: role-tagged messages with interleaved text
/// and base64 image parts.
class HttpModelClient : public ModelClient {
public:
    HttpModelClient(std::string endpoint, std::string api_key = {},
                    std::string model_name = {});
    ~HttpModelClient() override;
    std::string complete(const SessionKey& key, const SessionConfig& config,
                         const std::vector<AgentTurn>& transcript) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One extraction attempt: drive the model over the page until it commits an
/// evidence verdict or the turn budget runs out.
PageExtraction run_session(const std::string& query, const cv::Mat& page_image,
                           const std::string& page_id, const SessionConfig& config,
                           OcrBackend& backend, ModelClient& model);

/// Repeat run_session up to max_attempts; the page is deemed irrelevant only
/// if every attempt yields no evidence.
PageExtraction run_with_retries(const std::string& query, const cv::Mat& page_image,
                                const std::string& page_id, const SessionConfig& config,
                                OcrBackend& backend, ModelClient& model);

nlohmann::json turn_to_json(const AgentTurn& turn);
nlohmann::json extraction_to_json(const PageExtraction& extraction);

std::string load_text_file(const std::string& path);

}  // namespace docex

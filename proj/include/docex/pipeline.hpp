#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "docex/agent.hpp"

namespace docex {

struct GeneratorUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingOcrText : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RetrievedPage {
    std::string doc_id;
    int page_index = 0;  // 0-based physical index
    double score = 0.0;
    std::string image_ref;  // path to the page image
    bool expansion = false; // added by adjacent-page expansion

    std::string key() const { return doc_id + "#" + std::to_string(page_index); }
};

/// Add the immediately preceding and following page of every retrieved page
/// when absent and within document bounds. Original order is preserved;
/// insertions append in discovery order. Idempotent.
std::vector<RetrievedPage> expand_adjacent(
    const std::vector<RetrievedPage>& pages,
    const std::map<std::string, int>& doc_page_counts);

struct BundleEntry {
    RetrievedPage page;
    PageExtraction extraction;  // relevant == true
};

struct FailedPage {
    RetrievedPage page;
    std::string error;
};

struct EvidenceBundle {
    std::string query;
    std::vector<BundleEntry> entries;            // relevant pages, input order
    std::vector<RetrievedPage> irrelevant_pages; // judged irrelevant, input order
    std::vector<FailedPage> failures;            // transport-failed pages
};

/// Run the per-page agent sessions with at most fan_out in flight; the bundle
/// order follows input order regardless of completion order.
EvidenceBundle extract(const std::string& query,
                       const std::vector<RetrievedPage>& pages,
                       const SessionConfig& config, OcrBackend& backend,
                       ModelClient& model, int fan_out = 1);

enum class InputConfig { Page, PageOcr, Evidence, EvidenceOcr };

InputConfig input_config_from_string(const std::string& s);
std::string to_string(InputConfig config);

struct GeneratorPart {
    enum class Kind { Text, Image };
    Kind kind = Kind::Text;
    std::string text;
    cv::Mat image;
    std::string provenance;  // page key or crop reference
};

struct GeneratorInput {
    InputConfig config = InputConfig::Page;
    std::vector<GeneratorPart> parts;
};

struct GeneratorInputOptions {
    int page_max_dim = 1024;      // Page / PageOcr configurations
    int low_res_page_max_dim = 512;
    int crop_max_dim = 512;
};

/// Assemble the generator payload: per page, the page image at the
/// configuration-dependent resolution, then crops in extraction order for the
/// Evidence configurations, then recognition text and model comments for the
/// OCR-augmented ones. PageOcr requires full-page OCR text keyed by page.
GeneratorInput build_generator_input(
    const EvidenceBundle& bundle, InputConfig config,
    const std::optional<std::map<std::string, std::string>>& page_ocr_texts =
        std::nullopt,
    const GeneratorInputOptions& options = {});

struct TokenReport {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::string counter;  // which tokenizer/estimator produced the counts
};

/// Deterministic additive estimator: ceil(bytes/4) per text part,
/// ceil(w/28)*ceil(h/28) per image part.
std::int64_t estimate_tokens(const std::string& text);
std::int64_t estimate_tokens(const cv::Mat& image);
std::int64_t estimate_tokens(const GeneratorInput& input);

struct GeneratorResult {
    std::string answer;
    std::optional<std::int64_t> input_tokens;  // provider-reported when present
    std::optional<std::int64_t> output_tokens;
};

class GeneratorClient {
public:
    virtual ~GeneratorClient() = default;
    virtual GeneratorResult generate(const std::string& system_prompt,
                                     const GeneratorInput& input,
                                     const std::string& question) = 0;
};

/// Test double: canned answer (and optional token usage) per question.
class ScriptedGeneratorClient : public GeneratorClient {
public:
    ScriptedGeneratorClient() = default;
    /// Fixture: {"<question>": {"answer": "...", "input_tokens": n?, "output_tokens": n?}}.
    static ScriptedGeneratorClient from_file(const std::string& path);
    static ScriptedGeneratorClient from_json(const nlohmann::json& doc);

    void script(const std::string& question, GeneratorResult result);
    GeneratorResult generate(const std::string& system_prompt,
                             const GeneratorInput& input,
                             const std::string& question) override;

private:
    std::map<std::string, GeneratorResult> scripts_;
};

class HttpGeneratorClient : public GeneratorClient {
public:
    HttpGeneratorClient(std::string endpoint, std::string api_key = {},
                        std::string model_name = {});
    ~HttpGeneratorClient() override;
    GeneratorResult generate(const std::string& system_prompt,
                             const GeneratorInput& input,
                             const std::string& question) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct GeneratorRun {
    std::string answer;
    TokenReport tokens;
};

/// Send the generator prompt, parts, and question; prefer provider-reported
/// usage, falling back to the estimator (flagged in the counter descriptor).
GeneratorRun invoke_generator(const GeneratorInput& input, const std::string& question,
                              GeneratorClient& client,
                              const std::string& system_prompt);

/// Persist one bundle directory: bundle.json, crops/, transcripts/.
/// Re-running on identical inputs reproduces identical bytes.
void write_bundle(const std::string& directory, const EvidenceBundle& bundle);

nlohmann::json bundle_to_json(const EvidenceBundle& bundle);

}  // namespace docex

#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <opencv2/core.hpp>

#include "docex/image.hpp"
#include "docex/tool_call.hpp"

namespace docex {

// Transport/timeout fault; retrying may succeed.
struct BackendUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Response violates the wire schema; retrying will not help.
struct BackendMalformed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Mock backend has no fixture for this input.
struct UnscriptedInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LayoutBlock {
    NormBox box;  // page coordinates in a ToolResult; crop-local on the wire
    std::string kind;
    std::string content;
};

struct LayoutPayload {
    std::vector<LayoutBlock> blocks;
};
struct TextPayload {
    std::string text;
};
struct TablePayload {
    std::string markup;
};
struct EquationPayload {
    std::string markup;
};
struct ImagePayload {};  // crop only, no recognition

using ToolPayload =
    std::variant<LayoutPayload, TextPayload, TablePayload, EquationPayload, ImagePayload>;

struct ToolResult {
    ToolCall call;
    cv::Mat crop;  // cropped and rotated, independent of the page image
    ToolPayload payload;

    /// Recognition text for transcript/bundle assembly; empty for image mode.
    std::string recognition_text() const;
};

/// Raw backend response before coordinate remapping.
struct BackendResponse {
    std::vector<LayoutBlock> blocks;  // region mode, boxes crop-local
    std::string text;                 // element modes
};

class OcrBackend {
public:
    virtual ~OcrBackend() = default;
    virtual BackendResponse recognize(ElementType mode, const cv::Mat& image) = 0;
};

/// Crop, rotate, recognize, and project block coordinates back to the page.
ToolResult execute(const cv::Mat& page_image, const ToolCall& call, OcrBackend& backend);

struct OcrBackendDescriptor {
    std::string endpoint;  // host:port or URL prefix
    double timeout_seconds = 30.0;
};

/// Backend speaking the JSON-over-HTTP contract:
/// request {mode, image_b64, options}, response {blocks[{bbox,kind,content}], text}.
/// One automatic retry on transport faults.
class HttpOcrBackend : public OcrBackend {
public:
    explicit HttpOcrBackend(OcrBackendDescriptor descriptor);
    ~HttpOcrBackend() override;
    BackendResponse recognize(ElementType mode, const cv::Mat& image) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Deterministic test double: payloads scripted per (content hash, mode).
class MockOcrBackend : public OcrBackend {
public:
    MockOcrBackend() = default;
    /// Fixture document: {"<hash>": {"<mode>": {"blocks": [...], "text": "..."}}}.
    static MockOcrBackend from_file(const std::string& path);
    static MockOcrBackend from_json_text(const std::string& text);

    void script(const std::string& hash, ElementType mode, BackendResponse response);
    BackendResponse recognize(ElementType mode, const cv::Mat& image) override;

private:
    struct Entry {
        std::string key;
        BackendResponse response;
    };
    std::vector<Entry> entries_;
};

}  // namespace docex

#include "docex/toolkit.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace docex {

using nlohmann::json;

ElementType element_type_from_string(const std::string& s) {
    if (s == "region") return ElementType::Region;
    if (s == "text") return ElementType::Text;
    if (s == "table") return ElementType::Table;
    if (s == "image") return ElementType::Image;
    if (s == "equation") return ElementType::Equation;
    throw std::invalid_argument("unknown element type: " + s);
}

std::string to_string(ElementType type) {
    switch (type) {
        case ElementType::Region: return "region";
        case ElementType::Text: return "text";
        case ElementType::Table: return "table";
        case ElementType::Image: return "image";
        case ElementType::Equation: return "equation";
    }
    throw std::invalid_argument("bad element type");
}

std::string ToolResult::recognition_text() const {
    struct Visitor {
        std::string operator()(const LayoutPayload& p) const {
            std::ostringstream os;
            for (const LayoutBlock& b : p.blocks) {
                os << "[" << b.kind << " @ " << b.box.x_min << "," << b.box.y_min << ","
                   << b.box.x_max << "," << b.box.y_max << "] " << b.content << "\n";
            }
            return os.str();
        }
        std::string operator()(const TextPayload& p) const { return p.text; }
        std::string operator()(const TablePayload& p) const { return p.markup; }
        std::string operator()(const EquationPayload& p) const { return p.markup; }
        std::string operator()(const ImagePayload&) const { return {}; }
    };
    return std::visit(Visitor{}, payload);
}

ToolResult execute(const cv::Mat& page_image, const ToolCall& call, OcrBackend& backend) {
    const PixelRect rect = to_pixels(call.box, page_image.cols, page_image.rows);
    const cv::Mat crop = crop_image(page_image, rect);
    const cv::Mat rotated = rotate_ccw(crop, call.rotation);

    ToolResult result;
    result.call = call;
    result.crop = rotated;

    switch (call.element_type) {
        case ElementType::Image:
            result.payload = ImagePayload{};
            break;
        case ElementType::Region: {
            BackendResponse response = backend.recognize(ElementType::Region, rotated);
            LayoutPayload payload;
            payload.blocks.reserve(response.blocks.size());
            for (LayoutBlock& block : response.blocks) {
                block.box = remap_to_page(block.box, rect, call.rotation,
                                          page_image.cols, page_image.rows);
                payload.blocks.push_back(std::move(block));
            }
            result.payload = std::move(payload);
            break;
        }
        case ElementType::Text:
            result.payload =
                TextPayload{backend.recognize(ElementType::Text, rotated).text};
            break;
        case ElementType::Table:
            result.payload =
                TablePayload{backend.recognize(ElementType::Table, rotated).text};
            break;
        case ElementType::Equation:
            result.payload =
                EquationPayload{backend.recognize(ElementType::Equation, rotated).text};
            break;
    }
    return result;
}

namespace {

NormBox parse_bbox(const json& arr, const char* what) {
    if (!arr.is_array() || arr.size() != 4 ||
        !std::all_of(arr.begin(), arr.end(),
                     [](const json& v) { return v.is_number_integer(); }))
        throw BackendMalformed(std::string(what) + ": bbox must be 4 integers");
    NormBox box{arr[0].get<int>(), arr[1].get<int>(), arr[2].get<int>(),
                arr[3].get<int>()};
    if (!box.valid())
        throw BackendMalformed(std::string(what) + ": bbox violates grid invariants");
    return box;
}

BackendResponse response_from_json(const json& body) {
    BackendResponse out;
    if (body.contains("blocks")) {
        if (!body["blocks"].is_array())
            throw BackendMalformed("blocks must be an array");
        for (const json& b : body["blocks"]) {
            LayoutBlock block;
            block.box = parse_bbox(b.at("bbox"), "block");
            block.kind = b.value("kind", "");
            block.content = b.value("content", "");
            out.blocks.push_back(std::move(block));
        }
    }
    if (body.contains("text")) {
        if (!body["text"].is_string()) throw BackendMalformed("text must be a string");
        out.text = body["text"].get<std::string>();
    }
    return out;
}

}  // namespace

struct HttpOcrBackend::Impl {
    OcrBackendDescriptor descriptor;
    httplib::Client client;

    explicit Impl(OcrBackendDescriptor d)
        : descriptor(std::move(d)), client(descriptor.endpoint) {
        const auto secs = static_cast<time_t>(descriptor.timeout_seconds);
        const auto usecs = static_cast<time_t>(
            (descriptor.timeout_seconds - static_cast<double>(secs)) * 1e6);
        client.set_read_timeout(secs, usecs);
        client.set_connection_timeout(secs, usecs);
    }
};

HttpOcrBackend::HttpOcrBackend(OcrBackendDescriptor descriptor)
    : impl_(std::make_unique<Impl>(std::move(descriptor))) {}

HttpOcrBackend::~HttpOcrBackend() = default;

BackendResponse HttpOcrBackend::recognize(ElementType mode, const cv::Mat& image) {
    json request = {
        {"mode", to_string(mode)},
        {"image_b64", base64_encode(encode_png(image))},
        {"options", json::object()},
    };
    const std::string body = request.dump();

    httplib::Result res;
    for (int attempt = 0; attempt < 2; ++attempt) {
        res = impl_->client.Post("/ocr", body, "application/json");
        if (res) break;  // transport ok; retry only on transport faults
    }
    if (!res)
        throw BackendUnavailable("ocr backend unreachable: " +
                                 impl_->descriptor.endpoint);
    if (res->status != 200)
        throw BackendMalformed("ocr backend returned status " +
                               std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded())
        throw BackendMalformed("ocr backend response is not valid JSON");
    return response_from_json(parsed);
}

MockOcrBackend MockOcrBackend::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open fixture file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

MockOcrBackend MockOcrBackend::from_json_text(const std::string& text) {
    json doc = json::parse(text);
    MockOcrBackend backend;
    for (const auto& [hash, modes] : doc.items())
        for (const auto& [mode, payload] : modes.items())
            backend.script(hash, element_type_from_string(mode),
                           response_from_json(payload));
    return backend;
}

void MockOcrBackend::script(const std::string& hash, ElementType mode,
                            BackendResponse response) {
    entries_.push_back(Entry{hash + "|" + to_string(mode), std::move(response)});
}

BackendResponse MockOcrBackend::recognize(ElementType mode, const cv::Mat& image) {
    const std::string key = content_hash(image) + "|" + to_string(mode);
    for (const Entry& e : entries_)
        if (e.key == key) return e.response;
    throw UnscriptedInput("no fixture for " + key);
}

}  // namespace docex

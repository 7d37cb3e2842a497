#include "docex/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>

namespace docex {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<RetrievedPage> expand_adjacent(
    const std::vector<RetrievedPage>& pages,
    const std::map<std::string, int>& doc_page_counts) {
    std::vector<RetrievedPage> out = pages;
    auto present = [&out](const std::string& doc, int index) {
        return std::any_of(out.begin(), out.end(), [&](const RetrievedPage& p) {
            return p.doc_id == doc && p.page_index == index;
        });
    };
    for (const RetrievedPage& page : pages) {
        if (page.expansion) continue;  // expanding expansions is not idempotent
        const auto count_it = doc_page_counts.find(page.doc_id);
        const int page_count =
            count_it != doc_page_counts.end() ? count_it->second : page.page_index + 1;
        for (const int neighbor : {page.page_index - 1, page.page_index + 1}) {
            if (neighbor < 0 || neighbor >= page_count) continue;
            if (present(page.doc_id, neighbor)) continue;
            RetrievedPage added;
            added.doc_id = page.doc_id;
            added.page_index = neighbor;
            added.score = 0.0;
            added.expansion = true;
            out.push_back(std::move(added));
        }
    }
    return out;
}

EvidenceBundle extract(const std::string& query,
                       const std::vector<RetrievedPage>& pages,
                       const SessionConfig& config, OcrBackend& backend,
                       ModelClient& model, int fan_out) {
    if (fan_out < 1) throw std::invalid_argument("fan_out must be >= 1");

    struct Slot {
        std::optional<PageExtraction> extraction;
        std::string error;
    };
    std::vector<Slot> slots(pages.size());

    auto work = [&](std::size_t index) {
        const RetrievedPage& page = pages[index];
        try {
            const cv::Mat image = load_image(page.image_ref);
            slots[index].extraction =
                run_with_retries(query, image, page.key(), config, backend, model);
        } catch (const std::exception& e) {
            slots[index].error = e.what();
        }
    };

    if (fan_out == 1 || pages.size() <= 1) {
        for (std::size_t i = 0; i < pages.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        const std::size_t n_workers =
            std::min<std::size_t>(static_cast<std::size_t>(fan_out), pages.size());
        for (std::size_t w = 0; w < n_workers; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < pages.size();
                     i = next.fetch_add(1))
                    work(i);
            });
        }
        for (std::thread& t : workers) t.join();
    }

    EvidenceBundle bundle;
    bundle.query = query;
    for (std::size_t i = 0; i < pages.size(); ++i) {
        if (!slots[i].extraction) {
            bundle.failures.push_back(FailedPage{pages[i], slots[i].error});
        } else if (slots[i].extraction->relevant) {
            bundle.entries.push_back(
                BundleEntry{pages[i], std::move(*slots[i].extraction)});
        } else {
            bundle.irrelevant_pages.push_back(pages[i]);
        }
    }
    return bundle;
}

InputConfig input_config_from_string(const std::string& s) {
    if (s == "page") return InputConfig::Page;
    if (s == "page_ocr") return InputConfig::PageOcr;
    if (s == "evidence") return InputConfig::Evidence;
    if (s == "evidence_ocr") return InputConfig::EvidenceOcr;
    throw std::invalid_argument("unknown input config: " + s);
}

std::string to_string(InputConfig config) {
    switch (config) {
        case InputConfig::Page: return "page";
        case InputConfig::PageOcr: return "page_ocr";
        case InputConfig::Evidence: return "evidence";
        case InputConfig::EvidenceOcr: return "evidence_ocr";
    }
    throw std::invalid_argument("bad input config");
}

GeneratorInput build_generator_input(
    const EvidenceBundle& bundle, InputConfig config,
    const std::optional<std::map<std::string, std::string>>& page_ocr_texts,
    const GeneratorInputOptions& options) {
    const bool with_crops =
        config == InputConfig::Evidence || config == InputConfig::EvidenceOcr;
    const bool with_evidence_text = config == InputConfig::EvidenceOcr;
    const bool with_page_ocr = config == InputConfig::PageOcr;

    if (with_page_ocr && !page_ocr_texts)
        throw MissingOcrText("PageOcr configuration requires full-page OCR text");

    GeneratorInput input;
    input.config = config;
    const int page_dim = with_crops ? options.low_res_page_max_dim : options.page_max_dim;

    for (const BundleEntry& entry : bundle.entries) {
        const std::string page_key = entry.page.key();
        const cv::Mat page = load_image(entry.page.image_ref);

        GeneratorPart page_part;
        page_part.kind = GeneratorPart::Kind::Image;
        page_part.image = resize_max_dim(page, page_dim);
        page_part.provenance = page_key;
        input.parts.push_back(std::move(page_part));

        if (with_page_ocr) {
            const auto it = page_ocr_texts->find(page_key);
            if (it == page_ocr_texts->end())
                throw MissingOcrText("no OCR text for page " + page_key);
            GeneratorPart text_part;
            text_part.kind = GeneratorPart::Kind::Text;
            text_part.text = it->second;
            text_part.provenance = page_key;
            input.parts.push_back(std::move(text_part));
        }

        if (with_crops) {
            for (std::size_t i = 0; i < entry.extraction.tool_results.size(); ++i) {
                const ToolResult& result = entry.extraction.tool_results[i];
                GeneratorPart crop_part;
                crop_part.kind = GeneratorPart::Kind::Image;
                crop_part.image = resize_max_dim(result.crop, options.crop_max_dim);
                crop_part.provenance = page_key + "/crop_" + std::to_string(i);
                input.parts.push_back(std::move(crop_part));
            }
        }

        if (with_evidence_text) {
            for (std::size_t i = 0; i < entry.extraction.tool_results.size(); ++i) {
                const std::string text =
                    entry.extraction.tool_results[i].recognition_text();
                if (text.empty()) continue;
                GeneratorPart part;
                part.kind = GeneratorPart::Kind::Text;
                part.text = text;
                part.provenance = page_key + "/crop_" + std::to_string(i);
                input.parts.push_back(std::move(part));
            }
            for (const EvidenceItem& item : entry.extraction.items) {
                GeneratorPart part;
                part.kind = GeneratorPart::Kind::Text;
                part.text = item.evidence;  // model-generated comment
                part.provenance = page_key;
                input.parts.push_back(std::move(part));
            }
        }
    }
    return input;
}

std::int64_t estimate_tokens(const std::string& text) {
    return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::int64_t estimate_tokens(const cv::Mat& image) {
    const std::int64_t tiles_x = (image.cols + 27) / 28;
    const std::int64_t tiles_y = (image.rows + 27) / 28;
    return tiles_x * tiles_y;
}

std::int64_t estimate_tokens(const GeneratorInput& input) {
    std::int64_t total = 0;
    for (const GeneratorPart& part : input.parts)
        total += part.kind == GeneratorPart::Kind::Text ? estimate_tokens(part.text)
                                                        : estimate_tokens(part.image);
    return total;
}

ScriptedGeneratorClient ScriptedGeneratorClient::from_file(const std::string& path) {
    return from_json(json::parse(load_text_file(path)));
}

ScriptedGeneratorClient ScriptedGeneratorClient::from_json(const json& doc) {
    ScriptedGeneratorClient client;
    for (const auto& [question, entry] : doc.items()) {
        GeneratorResult result;
        result.answer = entry.at("answer").get<std::string>();
        if (entry.contains("input_tokens"))
            result.input_tokens = entry["input_tokens"].get<std::int64_t>();
        if (entry.contains("output_tokens"))
            result.output_tokens = entry["output_tokens"].get<std::int64_t>();
        client.script(question, std::move(result));
    }
    return client;
}

void ScriptedGeneratorClient::script(const std::string& question,
                                     GeneratorResult result) {
    scripts_[question] = std::move(result);
}

GeneratorResult ScriptedGeneratorClient::generate(const std::string&,
                                                  const GeneratorInput&,
                                                  const std::string& question) {
    const auto it = scripts_.find(question);
    if (it == scripts_.end())
        throw GeneratorUnavailable("no script for question: " + question);
    return it->second;
}

struct HttpGeneratorClient::Impl {
    std::string endpoint;
    std::string api_key;
    std::string model_name;
    httplib::Client client;

    Impl(std::string ep, std::string key, std::string name)
        : endpoint(std::move(ep)), api_key(std::move(key)),
          model_name(std::move(name)), client(endpoint) {
        client.set_read_timeout(300, 0);
    }
};

HttpGeneratorClient::HttpGeneratorClient(std::string endpoint, std::string api_key,
                                         std::string model_name)
    : impl_(std::make_unique<Impl>(std::move(endpoint), std::move(api_key),
                                   std::move(model_name))) {}

HttpGeneratorClient::~HttpGeneratorClient() = default;

GeneratorResult HttpGeneratorClient::generate(const std::string& system_prompt,
                                              const GeneratorInput& input,
                                              const std::string& question) {
    json content = json::array();
    for (const GeneratorPart& part : input.parts) {
        if (part.kind == GeneratorPart::Kind::Text) {
            content.push_back({{"type", "text"}, {"text", part.text}});
        } else {
            content.push_back(
                {{"type", "image_url"},
                 {"image_url",
                  {{"url", "data:image/png;base64," +
                               base64_encode(encode_png(part.image))}}}});
        }
    }
    content.push_back({{"type", "text"}, {"text", question}});

    json request = {
        {"messages",
         json::array({{{"role", "system"},
                       {"content", json::array({{{"type", "text"},
                                                 {"text", system_prompt}}})}},
                      {{"role", "user"}, {"content", std::move(content)}}})}};
    if (!impl_->model_name.empty()) request["model"] = impl_->model_name;

    httplib::Headers headers;
    if (!impl_->api_key.empty())
        headers.emplace("Authorization", "Bearer " + impl_->api_key);
    auto res = impl_->client.Post("/v1/chat/completions", headers, request.dump(),
                                  "application/json");
    if (!res)
        throw GeneratorUnavailable("generator endpoint unreachable: " +
                                   impl_->endpoint);
    if (res->status != 200)
        throw GeneratorUnavailable("generator returned status " +
                                   std::to_string(res->status));
    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") ||
        parsed["choices"].empty())
        throw GeneratorUnavailable("generator response malformed");

    GeneratorResult result;
    result.answer = parsed["choices"][0]["message"]["content"].get<std::string>();
    if (parsed.contains("usage")) {
        const json& usage = parsed["usage"];
        if (usage.contains("prompt_tokens"))
            result.input_tokens = usage["prompt_tokens"].get<std::int64_t>();
        if (usage.contains("completion_tokens"))
            result.output_tokens = usage["completion_tokens"].get<std::int64_t>();
    }
    return result;
}

GeneratorRun invoke_generator(const GeneratorInput& input, const std::string& question,
                              GeneratorClient& client,
                              const std::string& system_prompt) {
    const GeneratorResult result = client.generate(system_prompt, input, question);
    GeneratorRun run;
    run.answer = result.answer;
    if (result.input_tokens && result.output_tokens) {
        run.tokens.input_tokens = *result.input_tokens;
        run.tokens.output_tokens = *result.output_tokens;
        run.tokens.counter = "provider";
    } else {
        run.tokens.input_tokens = estimate_tokens(input) + estimate_tokens(question) +
                                  estimate_tokens(system_prompt);
        run.tokens.output_tokens = estimate_tokens(result.answer);
        run.tokens.counter = "estimated:bytes4-tiles28";
    }
    return run;
}

namespace {

std::string page_tag(const RetrievedPage& page) {
    std::string tag = page.key();
    for (char& c : tag)
        if (c == '/' || c == '#' || c == '\\') c = '_';
    return tag;
}

json page_to_json(const RetrievedPage& page) {
    return json{{"doc_id", page.doc_id},
                {"page_index", page.page_index},
                {"score", page.score},
                {"image_ref", page.image_ref},
                {"expansion", page.expansion}};
}

}  // namespace

json bundle_to_json(const EvidenceBundle& bundle) {
    json entries = json::array();
    for (const BundleEntry& entry : bundle.entries) {
        json crops = json::array();
        for (std::size_t i = 0; i < entry.extraction.tool_results.size(); ++i) {
            const ToolResult& result = entry.extraction.tool_results[i];
            crops.push_back(
                {{"file", page_tag(entry.page) + "_crop" + std::to_string(i) + ".png"},
                 {"label", result.call.label},
                 {"bbox",
                  {result.call.box.x_min, result.call.box.y_min, result.call.box.x_max,
                   result.call.box.y_max}},
                 {"angle", degrees(result.call.rotation)},
                 {"type", to_string(result.call.element_type)},
                 {"recognition_text", result.recognition_text()}});
        }
        entries.push_back({{"page", page_to_json(entry.page)},
                           {"extraction", extraction_to_json(entry.extraction)},
                           {"crops", std::move(crops)}});
    }
    json irrelevant = json::array();
    for (const RetrievedPage& page : bundle.irrelevant_pages)
        irrelevant.push_back(page_to_json(page));
    json failures = json::array();
    for (const FailedPage& failure : bundle.failures)
        failures.push_back(
            {{"page", page_to_json(failure.page)}, {"error", failure.error}});
    return json{{"query", bundle.query},
                {"entries", std::move(entries)},
                {"irrelevant_pages", std::move(irrelevant)},
                {"failures", std::move(failures)}};
}

void write_bundle(const std::string& directory, const EvidenceBundle& bundle) {
    fs::create_directories(fs::path(directory) / "crops");
    fs::create_directories(fs::path(directory) / "transcripts");

    {
        std::ofstream out(fs::path(directory) / "bundle.json", std::ios::binary);
        out << bundle_to_json(bundle).dump(2) << "\n";
    }
    for (const BundleEntry& entry : bundle.entries) {
        const std::string tag = page_tag(entry.page);
        for (std::size_t i = 0; i < entry.extraction.tool_results.size(); ++i) {
            const auto png = encode_png(entry.extraction.tool_results[i].crop);
            std::ofstream out(fs::path(directory) / "crops" /
                                  (tag + "_crop" + std::to_string(i) + ".png"),
                              std::ios::binary);
            out.write(reinterpret_cast<const char*>(png.data()),
                      static_cast<std::streamsize>(png.size()));
        }
        std::ofstream out(fs::path(directory) / "transcripts" / (tag + ".json"),
                          std::ios::binary);
        out << extraction_to_json(entry.extraction).dump(2) << "\n";
    }
}

}  // namespace docex

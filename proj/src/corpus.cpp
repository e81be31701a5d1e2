#include "hyrag/corpus.hpp"

#include <algorithm>

#include "hyrag/jsonl.hpp"
#include "hyrag/text.hpp"

namespace hyrag {

const Chunk* CorpusIndex::find_chunk(const std::string& chunk_id) const {
    for (const auto& c : chunks) {
        if (c.id == chunk_id) return &c;
    }
    return nullptr;
}

std::vector<TokenSpan> tokenize_spans(std::string_view txt) {
    std::vector<TokenSpan> spans;
    size_t pos = 0;
    while (pos < txt.size()) {
        size_t start = pos;
        char32_t cp = text::decode_utf8(txt, pos);
        if (text::is_space(cp)) continue;
        bool punct = text::is_punct(cp);
        size_t end = pos;
        char32_t last_cp = cp;
        // extend over the maximal run of the same class
        while (end < txt.size()) {
            size_t next = end;
            char32_t c2 = text::decode_utf8(txt, next);
            if (text::is_space(c2) || text::is_punct(c2) != punct) break;
            last_cp = c2;
            end = next;
        }
        TokenSpan span;
        span.begin = start;
        span.end = end;
        if (punct && (last_cp == U'.' || last_cp == U'!' || last_cp == U'?')) {
            size_t next = end;
            span.sentence_end =
                next >= txt.size() || text::is_space(text::decode_utf8(txt, next));
        }
        spans.push_back(span);
        pos = end;
    }
    return spans;
}

uint32_t count_tokens(std::string_view txt) {
    return static_cast<uint32_t>(tokenize_spans(txt).size());
}

CorpusIndex ingest(const std::vector<Document>& records) {
    CorpusIndex index;
    for (const auto& rec : records) {
        if (rec.id.empty()) throw config_error("document with empty id");
        if (index.doc_by_id.count(rec.id)) throw config_error("duplicate id " + rec.id);
        index.doc_by_id[rec.id] = index.documents.size();
        index.documents.push_back(rec);
    }
    return index;
}

std::vector<Chunk> chunk_document(const Document& doc, uint32_t max_tokens, uint32_t overlap) {
    if (max_tokens == 0) throw config_error("max_tokens must be positive");
    if (overlap >= max_tokens) throw config_error("chunk overlap must be smaller than max_tokens");

    auto spans = tokenize_spans(doc.text);
    std::vector<Chunk> chunks;
    if (spans.empty()) return chunks;

    size_t start = 0;  // index into spans
    uint32_t ordinal = 0;
    while (start < spans.size()) {
        size_t window_end = std::min(start + max_tokens, spans.size());
        size_t cut = window_end;
        if (window_end < spans.size()) {
            // last sentence boundary inside the budget window, if any
            size_t boundary = start;
            for (size_t i = start; i < window_end; ++i) {
                if (spans[i].sentence_end) boundary = i + 1;
            }
            if (boundary > start) cut = boundary;
        }
        Chunk chunk;
        chunk.doc_id = doc.id;
        chunk.ordinal = ordinal;
        chunk.id = doc.id + "#" + std::to_string(ordinal);
        chunk.text = std::string(
            doc.text.substr(spans[start].begin, spans[cut - 1].end - spans[start].begin));
        chunk.token_count = static_cast<uint32_t>(cut - start);
        chunks.push_back(std::move(chunk));
        ++ordinal;
        if (cut >= spans.size()) break;
        // overlap never swallows a whole chunk; the next window must advance
        size_t effective_overlap = std::min<size_t>(overlap, (cut - start) - 1);
        start = cut - effective_overlap;
    }
    return chunks;
}

void chunk_corpus(CorpusIndex& index, uint32_t max_tokens, uint32_t overlap) {
    index.chunks.clear();
    for (const auto& doc : index.documents) {
        auto chunks = chunk_document(doc, max_tokens, overlap);
        for (auto& c : chunks) index.chunks.push_back(std::move(c));
    }
}

std::vector<Document> load_corpus_file(const std::string& path) {
    std::vector<Document> docs;
    for (const auto& rec : jsonl::read_file(path)) {
        Document d;
        d.id = rec.at("id").get<std::string>();
        d.title = rec.value("title", "");
        d.text = rec.value("text", "");
        d.group = rec.value("group", "");
        docs.push_back(std::move(d));
    }
    return docs;
}

void save_chunks(const CorpusIndex& index, const std::string& path) {
    std::vector<Chunk> sorted = index.chunks;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Chunk& a, const Chunk& b) {
        return a.doc_id != b.doc_id ? a.doc_id < b.doc_id : a.ordinal < b.ordinal;
    });
    std::vector<jsonl::json> records;
    records.reserve(sorted.size());
    for (const auto& c : sorted) {
        records.push_back({{"id", c.id},
                           {"doc_id", c.doc_id},
                           {"ordinal", c.ordinal},
                           {"text", c.text},
                           {"token_count", c.token_count}});
    }
    jsonl::write_file(path, records);
}

std::vector<Chunk> load_chunks(const std::string& path) {
    std::vector<Chunk> chunks;
    for (const auto& rec : jsonl::read_file(path)) {
        Chunk c;
        c.id = rec.at("id").get<std::string>();
        c.doc_id = rec.at("doc_id").get<std::string>();
        c.ordinal = rec.at("ordinal").get<uint32_t>();
        c.text = rec.at("text").get<std::string>();
        c.token_count = rec.at("token_count").get<uint32_t>();
        chunks.push_back(std::move(c));
    }
    return chunks;
}

} // namespace hyrag

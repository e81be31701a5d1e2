#pragma once
// Corpus ingestion and chunking.
//
// Documents arrive as line-delimited JSON records {id, title, text, group}
// and are split into token-budgeted chunks with stable ids "<doc>#<ordinal>".
// Tokenization is a deterministic rule tokenizer: maximal runs of word
// characters, with each maximal run of punctuation emitted as one token and
// whitespace discarded. Joining a document's chunks in ordinal order and
// collapsing whitespace reproduces the collapsed source text (overlap 0).

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hyrag/errors.hpp"

namespace hyrag {

struct Document {
    std::string id;
    std::string title;
    std::string text;
    std::string group;
};

struct Chunk {
    std::string id;      // doc_id + "#" + ordinal
    std::string doc_id;
    uint32_t ordinal = 0;
    std::string text;
    uint32_t token_count = 0;
};

enum class CorpusMode { shared, per_document };

struct CorpusIndex {
    std::vector<Document> documents;   // insertion order
    std::map<std::string, size_t> doc_by_id;
    std::vector<Chunk> chunks;         // sorted by (doc insertion order, ordinal)
    CorpusMode mode = CorpusMode::shared;

    const Document* find_document(const std::string& id) const {
        auto it = doc_by_id.find(id);
        return it == doc_by_id.end() ? nullptr : &documents[it->second];
    }
    const Chunk* find_chunk(const std::string& chunk_id) const;
};

// Byte span of one token within the source text.
struct TokenSpan {
    size_t begin = 0;
    size_t end = 0;
    bool sentence_end = false;  // punctuation run ending ./!/? followed by space or EOF
};

std::vector<TokenSpan> tokenize_spans(std::string_view txt);
uint32_t count_tokens(std::string_view txt);

// Registers documents; no chunks yet. Duplicate ids are rejected by name.
CorpusIndex ingest(const std::vector<Document>& records);

// Splits one document. Split points prefer the last sentence boundary inside
// the token budget window; a window with no boundary is cut hard at
// max_tokens. overlap repeats that many trailing tokens at the head of the
// next chunk (and breaks the reconstruction property, hence the default 0).
std::vector<Chunk> chunk_document(const Document& doc, uint32_t max_tokens = 256,
                                  uint32_t overlap = 0);

// Chunks every registered document in place.
void chunk_corpus(CorpusIndex& index, uint32_t max_tokens = 256, uint32_t overlap = 0);

// External interfaces ------------------------------------------------------

std::vector<Document> load_corpus_file(const std::string& path);
void save_chunks(const CorpusIndex& index, const std::string& path);
std::vector<Chunk> load_chunks(const std::string& path);

} // namespace hyrag

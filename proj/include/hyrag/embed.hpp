#pragma once
// Text embedding behind a pluggable provider, plus exact top-k cosine
// retrieval. Search is a full scan sort — no approximation — so rankings are
// reproducible and directly checkable against a brute-force oracle.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hyrag/errors.hpp"
#include "hyrag/http.hpp"

namespace hyrag {

struct EmbeddingVector {
    std::vector<double> values;

    size_t dims() const { return values.size(); }
    double norm() const;
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class Embedder {
public:
    virtual ~Embedder() = default;
    // One vector per input, order-preserving.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
    virtual size_t dims() const = 0;
    virtual std::string model_name() const = 0;
};

// Offline embedder: a seeded hash of character 3-grams bucketed into a
// fixed-width vector, then L2-normalized. Lexically similar texts share
// 3-grams and therefore score higher — enough similarity structure for
// offline pipelines and tests.
class MockEmbedder : public Embedder {
public:
    explicit MockEmbedder(size_t dims = 64, uint64_t seed = 0x9e3779b97f4a7c15ULL)
        : dims_(dims), seed_(seed) {}

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    size_t dims() const override { return dims_; }
    std::string model_name() const override { return "mock-3gram-" + std::to_string(dims_); }

    EmbeddingVector embed_one(const std::string& text) const;

private:
    size_t dims_;
    uint64_t seed_;
};

// OpenAI-compatible embeddings endpoint. HYG_EMBED_BASE / HYG_EMBED_KEY /
// HYG_EMBED_MODEL configure it unless values are passed explicitly.
class RemoteEmbedder : public Embedder {
public:
    RemoteEmbedder();
    RemoteEmbedder(std::string base_url, std::string api_key, std::string model, size_t dims);

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    size_t dims() const override { return dims_; }
    std::string model_name() const override { return model_; }

    void set_retry_policy(http::RetryPolicy policy) { policy_ = policy; }

private:
    std::string base_url_;
    std::string api_key_;
    std::string model_;
    size_t dims_ = 1536;
    http::RetryPolicy policy_;
};

// Wraps any embedder with an on-disk cache keyed by text digest. With a warm
// cache no provider calls happen at all.
class CachingEmbedder : public Embedder {
public:
    CachingEmbedder(std::shared_ptr<Embedder> inner, std::filesystem::path cache_dir);

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    size_t dims() const override { return inner_->dims(); }
    std::string model_name() const override { return inner_->model_name(); }

    uint64_t provider_texts() const { return provider_texts_; }

private:
    std::shared_ptr<Embedder> inner_;
    std::filesystem::path cache_dir_;
    uint64_t provider_texts_ = 0;
};

// ---------------------------------------------------------------------------
// Vector index
// ---------------------------------------------------------------------------

enum class ItemKind { chunk, report };

std::string to_string(ItemKind kind);
ItemKind item_kind_from_string(const std::string& s);

struct IndexEntry {
    std::string item_id;
    ItemKind kind = ItemKind::chunk;
    EmbeddingVector vector;
};

struct ScoredItem {
    std::string item_id;
    double score = 0.0;
};

class VectorIndex {
public:
    void add(std::string item_id, ItemKind kind, EmbeddingVector vector);

    // Exactly min(k, n) results for the kind, scores non-increasing, ties
    // broken by ascending item_id. An empty index for the kind yields an
    // empty result (callers check via has_kind()).
    std::vector<ScoredItem> top_k(
        const EmbeddingVector& query, size_t k, ItemKind kind,
        const std::function<bool(const std::string&)>& id_filter = {}) const;

    bool has_kind(ItemKind kind) const;
    size_t size() const { return entries_.size(); }
    size_t dims() const { return dims_; }
    const std::vector<IndexEntry>& entries() const { return entries_; }

    void save(const std::string& path) const;
    static VectorIndex load(const std::string& path);

private:
    std::vector<IndexEntry> entries_;
    std::set<std::pair<int, std::string>> seen_;  // (kind, id) uniqueness
    size_t dims_ = 0;
};

} // namespace hyrag

#include "hyrag/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

#include <json.hpp>

#include "hyrag/jsonl.hpp"
#include "hyrag/sha256.hpp"

namespace hyrag {

using json = nlohmann::json;

double EmbeddingVector::norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dims() != b.dims()) {
        throw config_error("cosine over mismatched dimensions: " + std::to_string(a.dims()) +
                           " vs " + std::to_string(b.dims()));
    }
    double dot = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw domain_error("cosine of zero-norm vector");
    return dot / (na * nb);
}

// ---------------------------------------------------------------------------
// Mock embedder
// ---------------------------------------------------------------------------

namespace {

inline uint64_t fnv1a(std::string_view bytes, uint64_t seed) {
    uint64_t h = 1469598103934665603ULL ^ seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

EmbeddingVector MockEmbedder::embed_one(const std::string& input) const {
    EmbeddingVector v;
    v.values.assign(dims_, 0.0);
    auto add_feature = [&](std::string_view gram) {
        uint64_t h = fnv1a(gram, seed_);
        size_t bucket = static_cast<size_t>(h % dims_);
        double sign = (h >> 63) ? -1.0 : 1.0;
        v.values[bucket] += sign;
    };
    if (input.size() >= 3) {
        for (size_t i = 0; i + 3 <= input.size(); ++i) {
            add_feature(std::string_view(input).substr(i, 3));
        }
    } else {
        add_feature(input);  // short and empty inputs hash as one feature
    }
    double n = v.norm();
    if (n == 0.0) {
        // buckets cancelled out; fall back to a single deterministic spike
        v.values[fnv1a(input, seed_ + 1) % dims_] = 1.0;
        n = 1.0;
    }
    for (double& x : v.values) x /= n;
    return v;
}

std::vector<EmbeddingVector> MockEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

// ---------------------------------------------------------------------------
// Remote embedder
// ---------------------------------------------------------------------------

namespace {
std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}
} // namespace

RemoteEmbedder::RemoteEmbedder()
    : base_url_(env_or("HYG_EMBED_BASE", "")), api_key_(env_or("HYG_EMBED_KEY", "")),
      model_(env_or("HYG_EMBED_MODEL", "text-embedding-ada-002")) {}

RemoteEmbedder::RemoteEmbedder(std::string base_url, std::string api_key, std::string model,
                               size_t dims)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), model_(std::move(model)),
      dims_(dims) {}

std::vector<EmbeddingVector> RemoteEmbedder::embed(const std::vector<std::string>& texts) {
    if (base_url_.empty()) {
        throw config_error("remote embedder has no base URL (set HYG_EMBED_BASE)");
    }
    if (texts.empty()) return {};
    json body = {{"model", model_}, {"input", texts}};
    auto res = http::post_json_with_retry(base_url_, "/embeddings", api_key_, body.dump(), policy_);
    if (res.status == 0) throw runtime_failure("embedding transport failure: " + res.error);
    if (res.status != 200) {
        throw runtime_failure("embedding HTTP " + std::to_string(res.status) + ": " + res.body);
    }
    std::vector<EmbeddingVector> out(texts.size());
    try {
        json parsed = json::parse(res.body);
        for (const auto& item : parsed.at("data")) {
            size_t idx = item.at("index").get<size_t>();
            if (idx >= out.size()) throw runtime_failure("embedding response index out of range");
            out[idx].values = item.at("embedding").get<std::vector<double>>();
        }
    } catch (const json::exception& e) {
        throw runtime_failure(std::string("malformed embedding response: ") + e.what());
    }
    for (const auto& v : out) {
        if (v.dims() != dims_) {
            throw config_error("embedding dims mismatch: expected " + std::to_string(dims_) +
                               ", got " + std::to_string(v.dims()));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Caching wrapper
// ---------------------------------------------------------------------------

CachingEmbedder::CachingEmbedder(std::shared_ptr<Embedder> inner, std::filesystem::path cache_dir)
    : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {
    std::filesystem::create_directories(cache_dir_);
}

std::vector<EmbeddingVector> CachingEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<size_t> missing;
    std::vector<std::string> missing_texts;
    for (size_t i = 0; i < texts.size(); ++i) {
        std::string key = sha256_hex("embed;" + inner_->model_name() + ";" + texts[i]);
        auto path = cache_dir_ / (key + ".json");
        std::error_code ec;
        if (std::filesystem::exists(path, ec)) {
            json entry = json::parse(jsonl::read_text_file(path));
            out[i].values = entry.at("values").get<std::vector<double>>();
        } else {
            missing.push_back(i);
            missing_texts.push_back(texts[i]);
        }
    }
    if (!missing.empty()) {
        auto fresh = inner_->embed(missing_texts);
        provider_texts_ += missing_texts.size();
        for (size_t j = 0; j < missing.size(); ++j) {
            out[missing[j]] = fresh[j];
            std::string key = sha256_hex("embed;" + inner_->model_name() + ";" + texts[missing[j]]);
            json entry = {{"model", inner_->model_name()}, {"values", fresh[j].values}};
            jsonl::write_file_atomic(cache_dir_ / (key + ".json"), entry.dump() + "\n");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Vector index
// ---------------------------------------------------------------------------

std::string to_string(ItemKind kind) {
    return kind == ItemKind::chunk ? "chunk" : "report";
}

ItemKind item_kind_from_string(const std::string& s) {
    if (s == "chunk") return ItemKind::chunk;
    if (s == "report") return ItemKind::report;
    throw config_error("unknown index item kind '" + s + "'");
}

void VectorIndex::add(std::string item_id, ItemKind kind, EmbeddingVector vector) {
    if (dims_ == 0) {
        dims_ = vector.dims();
    } else if (vector.dims() != dims_) {
        throw config_error("vector dims mismatch: index has " + std::to_string(dims_) +
                           ", new entry has " + std::to_string(vector.dims()));
    }
    if (!seen_.emplace(static_cast<int>(kind), item_id).second) {
        throw config_error("duplicate index item '" + item_id + "'");
    }
    entries_.push_back({std::move(item_id), kind, std::move(vector)});
}

bool VectorIndex::has_kind(ItemKind kind) const {
    for (const auto& e : entries_) {
        if (e.kind == kind) return true;
    }
    return false;
}

std::vector<ScoredItem> VectorIndex::top_k(
    const EmbeddingVector& query, size_t k, ItemKind kind,
    const std::function<bool(const std::string&)>& id_filter) const {
    std::vector<ScoredItem> scored;
    for (const auto& e : entries_) {
        if (e.kind != kind) continue;
        if (id_filter && !id_filter(e.item_id)) continue;
        scored.push_back({e.item_id, cosine(query, e.vector)});
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredItem& a, const ScoredItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item_id < b.item_id;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

void VectorIndex::save(const std::string& path) const {
    // values carry 9 significant digits; lines sorted by (kind, item_id)
    std::vector<const IndexEntry*> sorted;
    for (const auto& e : entries_) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](const IndexEntry* a, const IndexEntry* b) {
        if (a->kind != b->kind) return to_string(a->kind) < to_string(b->kind);
        return a->item_id < b->item_id;
    });
    std::string out;
    for (const IndexEntry* e : sorted) {
        json head = {{"item_id", e->item_id}, {"kind", to_string(e->kind)},
                     {"dims", e->vector.dims()}};
        std::string line = head.dump();
        line.pop_back();  // strip '}' to splice the formatted values array in
        line += ",\"values\":[";
        char buf[40];
        for (size_t i = 0; i < e->vector.values.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.9g", e->vector.values[i]);
            if (i) line += ',';
            line += buf;
        }
        line += "]}\n";
        out += line;
    }
    jsonl::write_file_atomic(path, out);
}

VectorIndex VectorIndex::load(const std::string& path) {
    VectorIndex index;
    for (const auto& rec : jsonl::read_file(path)) {
        EmbeddingVector v;
        v.values = rec.at("values").get<std::vector<double>>();
        if (v.dims() != rec.at("dims").get<size_t>()) {
            throw config_error("corrupt vector record in " + path);
        }
        index.add(rec.at("item_id").get<std::string>(),
                  item_kind_from_string(rec.at("kind").get<std::string>()), std::move(v));
    }
    return index;
}

} // namespace hyrag

#include "hyrag/dataset.hpp"

#include "hyrag/jsonl.hpp"

namespace hyrag {

std::vector<QueryRecord> load_queries(const std::string& path) {
    std::vector<QueryRecord> out;
    for (const auto& rec : jsonl::read_file(path)) {
        QueryRecord q;
        q.id = rec.at("id").get<std::string>();
        q.text = rec.at("text").get<std::string>();
        q.qtype = rec.value("qtype", "");
        if (rec.contains("golds")) q.golds = rec.at("golds").get<std::vector<std::string>>();
        q.scope = rec.value("scope", "");
        out.push_back(std::move(q));
    }
    return out;
}

void save_queries(const std::vector<QueryRecord>& queries, const std::string& path) {
    std::vector<jsonl::json> records;
    for (const auto& q : queries) {
        records.push_back({{"id", q.id},
                           {"text", q.text},
                           {"qtype", q.qtype},
                           {"golds", q.golds},
                           {"scope", q.scope}});
    }
    jsonl::write_file(path, records);
}

std::vector<Prediction> load_predictions(const std::string& path) {
    std::vector<Prediction> out;
    for (const auto& rec : jsonl::read_file(path)) {
        Prediction p;
        p.query_id = rec.at("query_id").get<std::string>();
        p.strategy = rec.at("strategy").get<std::string>();
        p.text = rec.at("text").get<std::string>();
        out.push_back(std::move(p));
    }
    return out;
}

void save_predictions(const std::vector<Prediction>& predictions, const std::string& path) {
    std::vector<jsonl::json> records;
    for (const auto& p : predictions) {
        records.push_back({{"query_id", p.query_id}, {"strategy", p.strategy}, {"text", p.text}});
    }
    jsonl::write_file(path, records);
}

} // namespace hyrag

#pragma once
// Neutral record formats for query datasets and predictions:
//   queries.jsonl      {id, text, qtype, golds, scope}
//   predictions.jsonl  {query_id, strategy, text}

#include <string>
#include <vector>

namespace hyrag {

struct QueryRecord {
    std::string id;
    std::string text;
    std::string qtype;               // open vocabulary; may be empty
    std::vector<std::string> golds;  // answers or reference summaries
    std::string scope;               // optional document id
};

struct Prediction {
    std::string query_id;
    std::string strategy;
    std::string text;
};

std::vector<QueryRecord> load_queries(const std::string& path);
void save_queries(const std::vector<QueryRecord>& queries, const std::string& path);

std::vector<Prediction> load_predictions(const std::string& path);
void save_predictions(const std::vector<Prediction>& predictions, const std::string& path);

} // namespace hyrag

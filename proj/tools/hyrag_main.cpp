// hyrag CLI: index building, single-question answering, batch evaluation,
// dual-order judging, and classify-only routing, all driven by one config
// file. Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "hyrag/engine.hpp"

namespace {

int run_index(hyrag::Engine& engine) {
    hyrag::BuildCounters counters = engine.build_index();
    std::printf("documents   %zu\n", counters.documents);
    std::printf("chunks      %zu\n", counters.chunks);
    std::printf("vectors     %zu\n", counters.vectors);
    std::printf("entities    %zu\n", counters.entities);
    std::printf("triplets    %zu\n", counters.triplets);
    std::printf("communities %zu\n", counters.communities);
    std::printf("llm calls   %llu (cache hits %llu)\n",
                static_cast<unsigned long long>(counters.provider_calls),
                static_cast<unsigned long long>(counters.cache_hits));
    return 0;
}

int run_ask(hyrag::Engine& engine, const std::string& query, const std::string& strategy,
            const std::string& doc, const std::string& trace) {
    hyrag::Strategy s = hyrag::strategy_from_string(strategy);
    hyrag::GeneratedAnswer answer = engine.ask(query, s, doc, trace);
    std::cout << answer.text << "\n";
    return 0;
}

int run_eval(hyrag::Engine& engine, const std::vector<std::string>& strategy_names,
             const std::string& trace) {
    std::vector<hyrag::Strategy> strategies;
    for (const auto& name : strategy_names) {
        strategies.push_back(hyrag::strategy_from_string(name));
    }
    hyrag::EvalOutcome outcome = engine.run_eval(strategies, trace);
    std::cout << hyrag::render_report_table(outcome.report);
    if (outcome.report.contains("answer_entity_coverage")) {
        std::printf("answer entity coverage: %.4f\n",
                    outcome.report.at("answer_entity_coverage").get<double>());
    }
    if (!outcome.failures.empty()) {
        std::fprintf(stderr, "%zu queries failed:\n", outcome.failures.size());
        for (const auto& f : outcome.failures) {
            std::fprintf(stderr, "  %s [%s]: %s\n", f.query_id.c_str(), f.strategy.c_str(),
                         f.error.c_str());
        }
        return 1;
    }
    return 0;
}

int run_judge(hyrag::Engine& engine, const std::string& preds_a, const std::string& preds_b) {
    auto verdicts = engine.run_judge(preds_a, preds_b);
    auto summary = hyrag::summarize_verdicts(verdicts);
    for (const auto& [aspect, orders] : summary.fractions) {
        for (const auto& [order, winners] : orders) {
            std::printf("%s %s:", aspect.c_str(), order.c_str());
            for (const auto& [winner, fraction] : winners) {
                std::printf("  %s=%.3f", winner.c_str(), fraction);
            }
            std::printf("\n");
        }
    }
    std::printf("bias flag rate: %.3f over %zu verdicts\n", summary.bias_flag_rate,
                summary.verdicts);
    return 0;
}

int run_route(hyrag::Engine& engine) {
    auto decisions = engine.run_route();
    size_t fact = 0, reasoning = 0, fallback = 0;
    for (const auto& d : decisions) {
        if (d.klass == hyrag::QueryClass::fact) ++fact;
        else ++reasoning;
        if (d.fallback_used) ++fallback;
    }
    std::printf("routed %zu queries: fact=%zu reasoning=%zu fallback_used=%zu\n", decisions.size(),
                fact, reasoning, fallback);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyrag — hybrid retrieval-augmented generation engine"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("-c,--config", config_path, "run configuration file")->required();

    auto* cmd_index = app.add_subcommand("index", "build chunk/vector/graph/community indexes");

    std::string ask_query, ask_strategy = "rag", ask_doc, ask_trace;
    auto* cmd_ask = app.add_subcommand("ask", "answer one query with a chosen strategy");
    cmd_ask->add_option("query", ask_query, "the question")->required();
    cmd_ask->add_option("--strategy", ask_strategy,
                        "rag | kg-triplets | kg-triplets-text | community-local | "
                        "community-global | selection | integration");
    cmd_ask->add_option("--doc", ask_doc, "document scope (per-document mode)");
    cmd_ask->add_option("--trace", ask_trace, "write a retrieval trace to this path");

    std::vector<std::string> eval_strategies;
    std::string eval_trace;
    auto* cmd_eval = app.add_subcommand("eval", "run strategies over the dataset and score them");
    cmd_eval->add_option("--strategies", eval_strategies, "strategies to evaluate")
        ->required()
        ->delimiter(',');
    cmd_eval->add_option("--trace", eval_trace, "write retrieval traces to this path");

    std::string judge_a, judge_b;
    auto* cmd_judge = app.add_subcommand("judge", "dual-order pairwise LLM judgement");
    cmd_judge->add_option("predictions_a", judge_a, "predictions file for method A")->required();
    cmd_judge->add_option("predictions_b", judge_b, "predictions file for method B")->required();

    auto* cmd_route = app.add_subcommand("route", "classify-only batch routing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        hyrag::RunConfig config = hyrag::RunConfig::load(config_path);
        hyrag::Engine engine(config);
        if (cmd_index->parsed()) return run_index(engine);
        if (cmd_ask->parsed()) return run_ask(engine, ask_query, ask_strategy, ask_doc, ask_trace);
        if (cmd_eval->parsed()) return run_eval(engine, eval_strategies, eval_trace);
        if (cmd_judge->parsed()) return run_judge(engine, judge_a, judge_b);
        if (cmd_route->parsed()) return run_route(engine);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const hyrag::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

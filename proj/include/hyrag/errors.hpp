#pragma once

#include <stdexcept>
#include <string>

namespace hyrag {

// Configuration / usage problems. The CLI maps these to exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime failures (exit code 1 from the CLI).
class runtime_failure : public std::runtime_error {
public:
    explicit runtime_failure(const std::string& msg) : std::runtime_error(msg) {}
};

// A provider call failed after retries. Carries the pipeline stage tag so
// operators can see which stage broke.
class provider_error : public runtime_failure {
public:
    provider_error(const std::string& stage, const std::string& msg)
        : runtime_failure("provider error [" + stage + "]: " + msg), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// The mock provider saw a request it has no fixture and no stage template for.
class mock_miss_error : public provider_error {
public:
    mock_miss_error(const std::string& stage, const std::string& msg)
        : provider_error(stage, "mock miss: " + msg) {}
};

// Violated mathematical precondition (zero-norm cosine, bad partition, ...).
class domain_error : public runtime_failure {
public:
    explicit domain_error(const std::string& msg) : runtime_failure(msg) {}
};

// Retrieval requested against an index that was never built or loaded.
class index_not_built_error : public runtime_failure {
public:
    explicit index_not_built_error(const std::string& what_index)
        : runtime_failure("index not built: " + what_index) {}
};

} // namespace hyrag

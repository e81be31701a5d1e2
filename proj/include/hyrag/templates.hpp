#pragma once
// Versioned prompt templates. Each pipeline stage reads
// <template_dir>/<name>.<version>.txt and substitutes {{placeholder}}
// variables; the resolved version string is echoed into run configs so any
// experiment can be traced back to the exact prompt wording.

#include <map>
#include <string>

namespace hyrag {

class PromptLibrary {
public:
    PromptLibrary() = default;
    PromptLibrary(std::string dir, std::string version)
        : dir_(std::move(dir)), version_(std::move(version)) {}

    std::string render(const std::string& name,
                       const std::map<std::string, std::string>& vars) const;

    std::string raw(const std::string& name) const;
    const std::string& version() const { return version_; }

private:
    std::string dir_;
    std::string version_ = "v1";
    mutable std::map<std::string, std::string> cache_;
};

} // namespace hyrag

#include "hyrag/templates.hpp"

#include <filesystem>

#include "hyrag/errors.hpp"
#include "hyrag/jsonl.hpp"

namespace hyrag {

std::string PromptLibrary::raw(const std::string& name) const {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    if (dir_.empty()) throw config_error("template directory not configured");
    std::filesystem::path path = std::filesystem::path(dir_) / (name + "." + version_ + ".txt");
    if (!std::filesystem::exists(path)) {
        throw config_error("template not found: " + path.string());
    }
    std::string content = jsonl::read_text_file(path);
    cache_[name] = content;
    return content;
}

std::string PromptLibrary::render(const std::string& name,
                                  const std::map<std::string, std::string>& vars) const {
    std::string out = raw(name);
    for (const auto& [key, value] : vars) {
        std::string needle = "{{" + key + "}}";
        size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return out;
}

} // namespace hyrag

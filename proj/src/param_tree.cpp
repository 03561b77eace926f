#include "entsac/param_tree.hpp"

#include <fstream>

#include <json.hpp>

#include "entsac/errors.hpp"

namespace entsac {

void ParamTree::insert(const std::string& path, Tensor value) {
    if (path.empty()) throw ContractError("ParamTree: empty parameter path");
    auto [it, inserted] = entries_.emplace(path, std::move(value));
    if (!inserted) throw ContractError("ParamTree: duplicate path '" + path + "'");
    (void)it;
}

Tensor& ParamTree::at(const std::string& path) {
    auto it = entries_.find(path);
    if (it == entries_.end()) throw ContractError("ParamTree: unknown path '" + path + "'");
    return it->second;
}

const Tensor& ParamTree::at(const std::string& path) const {
    auto it = entries_.find(path);
    if (it == entries_.end()) throw ContractError("ParamTree: unknown path '" + path + "'");
    return it->second;
}

std::vector<std::string> ParamTree::paths_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    std::string key = prefix.empty() || prefix.back() == '/' ? prefix : prefix + "/";
    for (auto it = entries_.lower_bound(key); it != entries_.end(); ++it) {
        if (it->first.compare(0, key.size(), key) != 0) break;
        out.push_back(it->first);
    }
    return out;
}

std::string ParamTree::to_json_string() const {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [path, tensor] : entries_) {
        params[path] = {{"shape", tensor.shape()}, {"data", tensor.data()}};
    }
    nlohmann::json doc = {{"version", kFormatVersion}, {"params", params}};
    return doc.dump();
}

ParamTree ParamTree::from_json_string(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("checkpoint parse error: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("version") || !doc.contains("params"))
        throw IoError("checkpoint: missing 'version' or 'params'");
    if (doc["version"].get<int>() != kFormatVersion)
        throw IoError("checkpoint: unsupported format version");

    ParamTree tree;
    for (const auto& [path, entry] : doc["params"].items()) {
        if (!entry.contains("shape") || !entry.contains("data"))
            throw IoError("checkpoint: parameter '" + path + "' missing shape or data");
        auto shape = entry["shape"].get<std::vector<std::size_t>>();
        auto data = entry["data"].get<std::vector<double>>();
        try {
            tree.insert(path, Tensor(std::move(shape), std::move(data)));
        } catch (const ContractError& e) {
            throw IoError("checkpoint: parameter '" + path + "': " + e.what());
        }
    }
    return tree;
}

void ParamTree::save(const std::filesystem::path& file) const {
    std::ofstream out(file);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    out << to_json_string() << '\n';
    if (!out) throw IoError("failed writing '" + file.string() + "'");
}

ParamTree ParamTree::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open '" + file.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

}  // namespace entsac

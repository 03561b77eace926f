#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "entsac/tensor.hpp"

namespace entsac {

// Flat named collection of parameter tensors. std::map keeps iteration
// lexicographic, which keeps checkpoints byte-stable.
class ParamTree {
public:
    static constexpr int kFormatVersion = 1;

    void insert(const std::string& path, Tensor value);
    bool has(const std::string& path) const { return entries_.count(path) != 0; }
    Tensor& at(const std::string& path);
    const Tensor& at(const std::string& path) const;

    std::size_t size() const { return entries_.size(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }
    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }

    // Paths under "prefix/" in lexicographic order.
    std::vector<std::string> paths_with_prefix(const std::string& prefix) const;

    std::string to_json_string() const;
    static ParamTree from_json_string(const std::string& text);

    void save(const std::filesystem::path& file) const;
    static ParamTree load(const std::filesystem::path& file);

private:
    std::map<std::string, Tensor> entries_;
};

}  // namespace entsac

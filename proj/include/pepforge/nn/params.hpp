#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "pepforge/nn/tensor.hpp"

namespace pepforge::nn {

// Named parameter tree with matching gradient slots.
class ParamStore {
public:
    struct Entry {
        std::string name;
        Tensor value;
        Tensor grad;
    };

    void add(const std::string& name, Tensor init);

    bool has(const std::string& name) const { return index_.count(name) > 0; }
    int index_of(const std::string& name) const;

    Tensor& value(const std::string& name);
    const Tensor& value(const std::string& name) const;
    Tensor& grad(const std::string& name);

    Entry& entry(int idx) { return entries_[static_cast<size_t>(idx)]; }
    const Entry& entry(int idx) const { return entries_[static_cast<size_t>(idx)]; }
    int count() const { return static_cast<int>(entries_.size()); }
    size_t total_params() const;

    void zero_grads();

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, int> index_;
};

} // namespace pepforge::nn

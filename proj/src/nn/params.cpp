#include "pepforge/nn/params.hpp"

namespace pepforge::nn {

void ParamStore::add(const std::string& name, Tensor init) {
    if (index_.count(name)) throw StateError("ParamStore: duplicate parameter " + name);
    Entry e;
    e.name = name;
    e.grad = Tensor(init.rows(), init.cols(), 0.0);
    e.value = std::move(init);
    index_[name] = static_cast<int>(entries_.size());
    entries_.push_back(std::move(e));
}

int ParamStore::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw StateError("ParamStore: unknown parameter " + name);
    return it->second;
}

Tensor& ParamStore::value(const std::string& name) {
    return entries_[static_cast<size_t>(index_of(name))].value;
}

const Tensor& ParamStore::value(const std::string& name) const {
    return entries_[static_cast<size_t>(index_of(name))].value;
}

Tensor& ParamStore::grad(const std::string& name) {
    return entries_[static_cast<size_t>(index_of(name))].grad;
}

size_t ParamStore::total_params() const {
    size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
}

void ParamStore::zero_grads() {
    for (auto& e : entries_) {
        std::fill(e.grad.data(), e.grad.data() + e.grad.size(), 0.0);
    }
}

} // namespace pepforge::nn

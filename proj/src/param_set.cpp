#include "metagrad/param_set.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "metagrad/error.hpp"
#include "metagrad/ops.hpp"

namespace metagrad::nn {

void ParamSet::insert(std::string path, ad::Tensor value) {
    if (contains(path)) {
        throw ContractError("duplicate parameter path " + path);
    }
    entries_.emplace_back(std::move(path), std::move(value));
}

const ad::Tensor* ParamSet::find(std::string_view path) const {
    for (const auto& [p, t] : entries_) {
        if (p == path) return &t;
    }
    return nullptr;
}

const ad::Tensor& ParamSet::at(std::string_view path) const {
    const ad::Tensor* t = find(path);
    if (!t) throw ContractError("missing parameter " + std::string(path));
    return *t;
}

std::vector<std::string> ParamSet::paths() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [p, t] : entries_) out.push_back(p);
    return out;
}

std::vector<ad::Tensor> ParamSet::tensors() const {
    std::vector<ad::Tensor> out;
    out.reserve(entries_.size());
    for (const auto& [p, t] : entries_) out.push_back(t);
    return out;
}

ParamSet ParamSet::attached_to(ad::Graph& g) const {
    ParamSet out;
    for (const auto& [p, t] : entries_) out.insert(p, g.leaf(t));
    return out;
}

ParamSet ParamSet::detached() const {
    ParamSet out;
    for (const auto& [p, t] : entries_) out.insert(p, t.detached());
    return out;
}

ParamSet sgd_step(const ParamSet& params, const ParamSet& grads, double lr, bool create_graph) {
    std::set<std::string> param_paths, grad_paths;
    for (const auto& [p, t] : params.entries()) param_paths.insert(p);
    for (const auto& [p, t] : grads.entries()) grad_paths.insert(p);
    if (param_paths != grad_paths) {
        std::vector<std::string> diff;
        std::set_symmetric_difference(param_paths.begin(), param_paths.end(), grad_paths.begin(),
                                      grad_paths.end(), std::back_inserter(diff));
        std::ostringstream oss;
        oss << "sgd_step: parameter/gradient path sets differ:";
        for (const auto& p : diff) oss << " " << p;
        throw ContractError(oss.str());
    }

    ParamSet out;
    for (const auto& [path, value] : params.entries()) {
        const ad::Tensor& g = grads.at(path);
        if (!g.same_shape(value)) {
            std::ostringstream oss;
            oss << "sgd_step: parameter " << path << ": shape "
                << ad::format_shape(value.shape()) << " but gradient shape "
                << ad::format_shape(g.shape());
            throw ContractError(oss.str());
        }
        ad::Tensor step = ad::scale(create_graph ? g : g.detached(), lr);
        out.insert(path, ad::sub(value, step));
    }
    return out;
}

}  // namespace metagrad::nn

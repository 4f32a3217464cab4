#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metagrad/param_set.hpp"
#include "metagrad/rng.hpp"
#include "metagrad/tensor.hpp"

namespace metagrad::nn {

// Prefix-aware lookup into an optional substituted ParamSet. An absent view
// means "use the module's stored parameters"; a present view must contain
// every path the module consumes (no silent fallback).
class ParamView {
public:
    ParamView() = default;
    explicit ParamView(const ParamSet& set) : set_(&set) {}

    bool present() const { return set_ != nullptr; }
    ad::Tensor get(std::string_view name) const;
    ParamView child(std::string_view segment) const;
    std::string full_path(std::string_view name) const;

private:
    const ParamSet* set_ = nullptr;
    std::string prefix_;
};

// Network building block whose forward pass accepts an optional external
// parameter set; without one it behaves exactly like the plain layer.
class MetaModule {
public:
    virtual ~MetaModule() = default;

    ParamSet named_parameters() const;
    ad::Tensor forward(const ad::Tensor& input) const;
    ad::Tensor forward(const ad::Tensor& input, const ParamSet& params) const;
    void load_parameters(const ParamSet& params);

    virtual void collect_parameters(const std::string& prefix, ParamSet& out) const = 0;
    virtual ad::Tensor forward_with(const ad::Tensor& input, const ParamView& params) const = 0;
    virtual void load_with(const ParamView& params) = 0;
};

class MetaLinear : public MetaModule {
public:
    MetaLinear(std::size_t in_features, std::size_t out_features, bool with_bias, Rng& rng);
    MetaLinear(ad::Tensor weight, std::optional<ad::Tensor> bias);

    std::size_t in_features() const { return weight_.extent(1); }
    std::size_t out_features() const { return weight_.extent(0); }
    bool has_bias() const { return bias_.has_value(); }

    void collect_parameters(const std::string& prefix, ParamSet& out) const override;
    ad::Tensor forward_with(const ad::Tensor& input, const ParamView& params) const override;
    void load_with(const ParamView& params) override;

private:
    ad::Tensor weight_;                 // [out, in]
    std::optional<ad::Tensor> bias_;    // [out]
};

enum class Activation { Tanh, Relu };

class MetaActivation : public MetaModule {
public:
    explicit MetaActivation(Activation kind) : kind_(kind) {}

    void collect_parameters(const std::string& prefix, ParamSet& out) const override;
    ad::Tensor forward_with(const ad::Tensor& input, const ParamView& params) const override;
    void load_with(const ParamView& params) override;

private:
    Activation kind_;
};

// Ordered composition; child i contributes parameter paths under prefix "i.".
class MetaSequential : public MetaModule {
public:
    MetaSequential() = default;

    void add(std::unique_ptr<MetaModule> child) { children_.push_back(std::move(child)); }
    std::size_t num_children() const { return children_.size(); }

    void collect_parameters(const std::string& prefix, ParamSet& out) const override;
    ad::Tensor forward_with(const ad::Tensor& input, const ParamView& params) const override;
    void load_with(const ParamView& params) override;

private:
    std::vector<std::unique_ptr<MetaModule>> children_;
};

// input -> hidden... -> output MLP with the given activation between linears.
std::unique_ptr<MetaSequential> make_mlp(std::size_t in_features,
                                         const std::vector<std::size_t>& hidden,
                                         std::size_t out_features, Activation activation,
                                         Rng& rng);

}  // namespace metagrad::nn

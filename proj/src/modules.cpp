#include "metagrad/modules.hpp"

#include <cmath>
#include <sstream>

#include "metagrad/error.hpp"
#include "metagrad/ops.hpp"

namespace metagrad::nn {

std::string ParamView::full_path(std::string_view name) const {
    return prefix_ + std::string(name);
}

ad::Tensor ParamView::get(std::string_view name) const {
    const ad::Tensor* t = set_->find(full_path(name));
    if (!t) throw ContractError("missing parameter " + full_path(name));
    return *t;
}

ParamView ParamView::child(std::string_view segment) const {
    ParamView v;
    v.set_ = set_;
    v.prefix_ = prefix_ + std::string(segment) + ".";
    return v;
}

ParamSet MetaModule::named_parameters() const {
    ParamSet out;
    collect_parameters("", out);
    return out;
}

ad::Tensor MetaModule::forward(const ad::Tensor& input) const {
    return forward_with(input, ParamView());
}

ad::Tensor MetaModule::forward(const ad::Tensor& input, const ParamSet& params) const {
    return forward_with(input, ParamView(params));
}

void MetaModule::load_parameters(const ParamSet& params) { load_with(ParamView(params)); }

// ---------------------------------------------------------------------------
// MetaLinear
// ---------------------------------------------------------------------------

MetaLinear::MetaLinear(std::size_t in_features, std::size_t out_features, bool with_bias,
                       Rng& rng) {
    // Fan-in uniform init, bias zero.
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_features));
    std::vector<double> w(out_features * in_features);
    for (double& v : w) v = rng.uniform(-bound, bound);
    weight_ = ad::Tensor({out_features, in_features}, std::move(w));
    if (with_bias) bias_ = ad::Tensor::zeros({out_features});
}

MetaLinear::MetaLinear(ad::Tensor weight, std::optional<ad::Tensor> bias)
    : weight_(std::move(weight)), bias_(std::move(bias)) {
    if (weight_.rank() != 2) {
        throw ShapeError("MetaLinear: weight must be rank-2, got shape " +
                         ad::format_shape(weight_.shape()));
    }
    if (bias_ && (bias_->rank() != 1 || bias_->extent(0) != weight_.extent(0))) {
        throw ShapeError("MetaLinear: bias shape " + ad::format_shape(bias_->shape()) +
                         " does not match weight shape " + ad::format_shape(weight_.shape()));
    }
}

void MetaLinear::collect_parameters(const std::string& prefix, ParamSet& out) const {
    out.insert(prefix + "weight", weight_);
    if (bias_) out.insert(prefix + "bias", *bias_);
}

namespace {

void check_param_shape(const ad::Tensor& supplied, const ad::Tensor& stored,
                       const std::string& path) {
    if (!supplied.same_shape(stored)) {
        std::ostringstream oss;
        oss << "parameter " << path << ": expected shape " << ad::format_shape(stored.shape())
            << ", got " << ad::format_shape(supplied.shape());
        throw ShapeError(oss.str());
    }
}

}  // namespace

ad::Tensor MetaLinear::forward_with(const ad::Tensor& input, const ParamView& params) const {
    if (input.rank() != 2 || input.extent(1) != in_features()) {
        std::ostringstream oss;
        oss << "MetaLinear: input shape " << ad::format_shape(input.shape())
            << " incompatible with weight " << ad::format_shape(weight_.shape());
        throw ShapeError(oss.str());
    }
    ad::Tensor w = weight_;
    std::optional<ad::Tensor> b = bias_;
    if (params.present()) {
        w = params.get("weight");
        check_param_shape(w, weight_, params.full_path("weight"));
        if (bias_) {
            b = params.get("bias");
            check_param_shape(*b, *bias_, params.full_path("bias"));
        }
    }
    ad::Tensor y = ad::matmul(input, ad::transpose(w));
    if (b) y = ad::add(y, *b);
    return y;
}

void MetaLinear::load_with(const ParamView& params) {
    ad::Tensor w = params.get("weight");
    check_param_shape(w, weight_, params.full_path("weight"));
    weight_ = w.detached();
    if (bias_) {
        ad::Tensor b = params.get("bias");
        check_param_shape(b, *bias_, params.full_path("bias"));
        bias_ = b.detached();
    }
}

// ---------------------------------------------------------------------------
// MetaActivation
// ---------------------------------------------------------------------------

void MetaActivation::collect_parameters(const std::string&, ParamSet&) const {}

ad::Tensor MetaActivation::forward_with(const ad::Tensor& input, const ParamView&) const {
    switch (kind_) {
        case Activation::Tanh: return ad::tanh(input);
        case Activation::Relu: return ad::relu(input);
    }
    throw ContractError("MetaActivation: unknown kind");
}

void MetaActivation::load_with(const ParamView&) {}

// ---------------------------------------------------------------------------
// MetaSequential
// ---------------------------------------------------------------------------

void MetaSequential::collect_parameters(const std::string& prefix, ParamSet& out) const {
    for (std::size_t i = 0; i < children_.size(); ++i) {
        children_[i]->collect_parameters(prefix + std::to_string(i) + ".", out);
    }
}

ad::Tensor MetaSequential::forward_with(const ad::Tensor& input, const ParamView& params) const {
    ad::Tensor x = input;
    for (std::size_t i = 0; i < children_.size(); ++i) {
        x = children_[i]->forward_with(x, params.present() ? params.child(std::to_string(i))
                                                           : ParamView());
    }
    return x;
}

void MetaSequential::load_with(const ParamView& params) {
    for (std::size_t i = 0; i < children_.size(); ++i) {
        children_[i]->load_with(params.child(std::to_string(i)));
    }
}

std::unique_ptr<MetaSequential> make_mlp(std::size_t in_features,
                                         const std::vector<std::size_t>& hidden,
                                         std::size_t out_features, Activation activation,
                                         Rng& rng) {
    auto seq = std::make_unique<MetaSequential>();
    std::size_t prev = in_features;
    for (std::size_t width : hidden) {
        seq->add(std::make_unique<MetaLinear>(prev, width, true, rng));
        seq->add(std::make_unique<MetaActivation>(activation));
        prev = width;
    }
    seq->add(std::make_unique<MetaLinear>(prev, out_features, true, rng));
    return seq;
}

}  // namespace metagrad::nn

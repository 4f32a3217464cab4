#include "metagrad/class_store.hpp"

#include <sstream>

#include "metagrad/error.hpp"

namespace metagrad::data {

namespace {

std::size_t split_index(MetaSplit split) { return static_cast<std::size_t>(split); }

void check_class_id(std::size_t id, std::size_t count) {
    if (id >= count) {
        std::ostringstream oss;
        oss << "class id " << id << " out of range [0, " << count << ")";
        throw ContractError(oss.str());
    }
}

}  // namespace

MemoryClassStore::MemoryClassStore(std::vector<ClassData> classes,
                                   std::array<std::vector<std::size_t>, 3> split_pools,
                                   std::vector<std::size_t> example_shape)
    : classes_(std::move(classes)),
      split_pools_(std::move(split_pools)),
      example_shape_(std::move(example_shape)) {}

const std::string& MemoryClassStore::class_name(std::size_t class_id) const {
    check_class_id(class_id, classes_.size());
    return classes_[class_id].name;
}

std::size_t MemoryClassStore::num_examples(std::size_t class_id) const {
    check_class_id(class_id, classes_.size());
    return classes_[class_id].examples.size();
}

ad::Tensor MemoryClassStore::example(std::size_t class_id, std::size_t index) const {
    check_class_id(class_id, classes_.size());
    return classes_[class_id].examples.at(index);
}

std::span<const std::size_t> MemoryClassStore::split_pool(MetaSplit split) const {
    return split_pools_[split_index(split)];
}

// ---------------------------------------------------------------------------
// Rotation
// ---------------------------------------------------------------------------

ad::Tensor rotate_image(const ad::Tensor& image, int quarter_turns) {
    if (image.rank() != 3) {
        throw ShapeError("rotate_image: expected [C,H,W], got shape " +
                         ad::format_shape(image.shape()));
    }
    const int q = ((quarter_turns % 4) + 4) % 4;
    const std::size_t c = image.extent(0), h = image.extent(1), w = image.extent(2);
    if ((q == 1 || q == 3) && h != w) {
        std::ostringstream oss;
        oss << "rotate_image: 90-degree rotation requires a square image, got " << h << "x" << w;
        throw ShapeError(oss.str());
    }
    if (q == 0) return image.detached();

    std::vector<double> out(image.numel());
    const auto& in = image.values();
    for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t base = ch * h * w;
        for (std::size_t i = 0; i < h; ++i) {
            for (std::size_t j = 0; j < w; ++j) {
                const double v = in[base + i * w + j];
                switch (q) {
                    case 1: out[base + (w - 1 - j) * h + i] = v; break;        // 90 ccw
                    case 2: out[base + (h - 1 - i) * w + (w - 1 - j)] = v; break;
                    case 3: out[base + j * h + (h - 1 - i)] = v; break;        // 270 ccw
                }
            }
        }
    }
    std::vector<std::size_t> shape = image.shape();
    if (q == 1 || q == 3) std::swap(shape[1], shape[2]);
    return ad::Tensor(std::move(shape), std::move(out));
}

ClassTransform rotation_transform(int quarter_turns) {
    const int q = ((quarter_turns % 4) + 4) % 4;
    return ClassTransform{"rot" + std::to_string(q * 90),
                          [q](const ad::Tensor& t) { return rotate_image(t, q); }};
}

// ---------------------------------------------------------------------------
// Augmented store
// ---------------------------------------------------------------------------

namespace {

class AugmentedClassStore : public ClassStore {
public:
    AugmentedClassStore(std::shared_ptr<const ClassStore> base,
                        std::vector<ClassTransform> transforms)
        : base_(std::move(base)), transforms_(std::move(transforms)) {
        const std::size_t variants = transforms_.size() + 1;
        const std::size_t base_count = base_->num_classes();
        names_.reserve(base_count * variants);
        for (std::size_t v = 0; v < variants; ++v) {
            for (std::size_t c = 0; c < base_count; ++c) {
                names_.push_back(v == 0 ? base_->class_name(c)
                                        : base_->class_name(c) + "@" + transforms_[v - 1].name);
            }
        }
        for (MetaSplit s : {MetaSplit::Train, MetaSplit::Val, MetaSplit::Test}) {
            auto& pool = pools_[static_cast<std::size_t>(s)];
            for (std::size_t v = 0; v < variants; ++v) {
                for (std::size_t c : base_->split_pool(s)) pool.push_back(v * base_count + c);
            }
        }
    }

    std::size_t num_classes() const override {
        return base_->num_classes() * (transforms_.size() + 1);
    }

    const std::string& class_name(std::size_t class_id) const override {
        return names_.at(class_id);
    }

    std::size_t num_examples(std::size_t class_id) const override {
        return base_->num_examples(class_id % base_->num_classes());
    }

    ad::Tensor example(std::size_t class_id, std::size_t index) const override {
        const std::size_t variant = class_id / base_->num_classes();
        ad::Tensor raw = base_->example(class_id % base_->num_classes(), index);
        return variant == 0 ? raw : transforms_[variant - 1].apply(raw);
    }

    const std::vector<std::size_t>& example_shape() const override {
        return base_->example_shape();
    }

    std::span<const std::size_t> split_pool(MetaSplit split) const override {
        return pools_[static_cast<std::size_t>(split)];
    }

private:
    std::shared_ptr<const ClassStore> base_;
    std::vector<ClassTransform> transforms_;
    std::vector<std::string> names_;
    std::array<std::vector<std::size_t>, 3> pools_;
};

class ReshapedClassStore : public ClassStore {
public:
    ReshapedClassStore(std::shared_ptr<const ClassStore> base, std::size_t channels,
                       std::size_t height, std::size_t width)
        : base_(std::move(base)), shape_{channels, height, width} {
        const auto& src = base_->example_shape();
        if (src.size() != 3 || src[0] != 1) {
            throw ConfigError("reshape_store: source must be single-channel [1,H,W], got " +
                              ad::format_shape(src));
        }
        if (channels != 1 && channels != 3) {
            throw ConfigError("reshape_store: channels must be 1 or 3");
        }
    }

    std::size_t num_classes() const override { return base_->num_classes(); }
    const std::string& class_name(std::size_t id) const override { return base_->class_name(id); }
    std::size_t num_examples(std::size_t id) const override { return base_->num_examples(id); }

    ad::Tensor example(std::size_t class_id, std::size_t index) const override {
        ad::Tensor src = base_->example(class_id, index);
        const std::size_t sh = src.extent(1), sw = src.extent(2);
        const std::size_t c = shape_[0], h = shape_[1], w = shape_[2];
        std::vector<double> out(c * h * w);
        for (std::size_t i = 0; i < h; ++i) {
            const std::size_t si = i * sh / h;
            for (std::size_t j = 0; j < w; ++j) {
                const std::size_t sj = j * sw / w;
                out[i * w + j] = src.at(si * sw + sj);
            }
        }
        for (std::size_t ch = 1; ch < c; ++ch) {
            std::copy(out.begin(), out.begin() + h * w,
                      out.begin() + static_cast<std::ptrdiff_t>(ch * h * w));
        }
        return ad::Tensor({c, h, w}, std::move(out));
    }

    const std::vector<std::size_t>& example_shape() const override { return shape_; }

    std::span<const std::size_t> split_pool(MetaSplit split) const override {
        return base_->split_pool(split);
    }

private:
    std::shared_ptr<const ClassStore> base_;
    std::vector<std::size_t> shape_;
};

}  // namespace

std::shared_ptr<ClassStore> augment_classes(std::shared_ptr<const ClassStore> base,
                                            std::vector<ClassTransform> transforms) {
    return std::make_shared<AugmentedClassStore>(std::move(base), std::move(transforms));
}

std::shared_ptr<ClassStore> reshape_store(std::shared_ptr<const ClassStore> base,
                                          std::size_t channels, std::size_t height,
                                          std::size_t width) {
    return std::make_shared<ReshapedClassStore>(std::move(base), channels, height, width);
}

}  // namespace metagrad::data

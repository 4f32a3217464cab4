#include "metagrad/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "metagrad/error.hpp"
#include "metagrad/image_io.hpp"
#include "metagrad/rng.hpp"

namespace metagrad::data {

namespace {

constexpr std::uint64_t kTemplateStream = 0x7e3a;
constexpr std::uint64_t kExampleStream = 0x9c51;

std::string zero_pad(std::size_t value, std::size_t width) {
    std::ostringstream oss;
    oss << std::setw(static_cast<int>(width)) << std::setfill('0') << value;
    return oss.str();
}

// Binary stroke pattern on an S x S canvas: a few seeded random walks with a
// thick pen.
std::vector<double> render_template(std::size_t s, Rng& rng) {
    std::vector<double> canvas(s * s, 0.0);
    const std::ptrdiff_t size = static_cast<std::ptrdiff_t>(s);
    const std::ptrdiff_t pen = std::max<std::ptrdiff_t>(1, size / 14);

    auto stamp = [&](std::ptrdiff_t cy, std::ptrdiff_t cx) {
        for (std::ptrdiff_t dy = -pen; dy <= pen; ++dy) {
            for (std::ptrdiff_t dx = -pen; dx <= pen; ++dx) {
                const std::ptrdiff_t y = cy + dy, x = cx + dx;
                if (y >= 0 && y < size && x >= 0 && x < size && dy * dy + dx * dx <= pen * pen) {
                    canvas[static_cast<std::size_t>(y) * s + static_cast<std::size_t>(x)] = 1.0;
                }
            }
        }
    };

    static constexpr int kDirs[8][2] = {{1, 0},  {1, 1},   {0, 1},  {-1, 1},
                                        {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
    const std::size_t strokes = 3 + rng.next_below(3);
    for (std::size_t k = 0; k < strokes; ++k) {
        std::ptrdiff_t y = 1 + static_cast<std::ptrdiff_t>(rng.next_below(s - 2));
        std::ptrdiff_t x = 1 + static_cast<std::ptrdiff_t>(rng.next_below(s - 2));
        std::size_t dir = rng.next_below(8);
        const std::size_t steps = s;
        for (std::size_t t = 0; t < steps; ++t) {
            stamp(y, x);
            if (rng.next_double() < 0.25) {
                dir = (dir + (rng.next_double() < 0.5 ? 1 : 7)) % 8;
            }
            y = std::clamp<std::ptrdiff_t>(y + kDirs[dir][0], 1, size - 2);
            x = std::clamp<std::ptrdiff_t>(x + kDirs[dir][1], 1, size - 2);
        }
    }
    return canvas;
}

std::vector<std::uint8_t> render_example(const std::vector<double>& tmpl, std::size_t s,
                                         Rng& rng) {
    const std::ptrdiff_t size = static_cast<std::ptrdiff_t>(s);
    const std::ptrdiff_t max_shift = s >= 16 ? 2 : 1;
    const std::ptrdiff_t dy =
        static_cast<std::ptrdiff_t>(rng.next_below(2 * max_shift + 1)) - max_shift;
    const std::ptrdiff_t dx =
        static_cast<std::ptrdiff_t>(rng.next_below(2 * max_shift + 1)) - max_shift;

    std::vector<std::uint8_t> out(s * s);
    for (std::ptrdiff_t y = 0; y < size; ++y) {
        for (std::ptrdiff_t x = 0; x < size; ++x) {
            const std::ptrdiff_t sy = y - dy, sx = x - dx;
            double v = 0.0;
            if (sy >= 0 && sy < size && sx >= 0 && sx < size) {
                v = tmpl[static_cast<std::size_t>(sy) * s + static_cast<std::size_t>(sx)];
            }
            v = v * 255.0 + rng.normal(0.0, 25.0);
            out[static_cast<std::size_t>(y) * s + static_cast<std::size_t>(x)] =
                static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
    }
    return out;
}

}  // namespace

DatasetManifest generate_synthetic_corpus(const std::filesystem::path& root,
                                          const SyntheticSpec& spec) {
    if (spec.image_size < 8) throw ConfigError("generate_synthetic_corpus: image_size must be >= 8");
    if (spec.num_classes == 0 || spec.examples_per_class == 0) {
        throw ConfigError("generate_synthetic_corpus: counts must be positive");
    }
    if (spec.train_fraction < 0 || spec.val_fraction < 0 ||
        spec.train_fraction + spec.val_fraction > 1.0) {
        throw ConfigError("generate_synthetic_corpus: bad split fractions");
    }

    const std::size_t s = spec.image_size;
    const std::size_t train_count =
        static_cast<std::size_t>(spec.train_fraction * double(spec.num_classes));
    const std::size_t val_count =
        static_cast<std::size_t>(spec.val_fraction * double(spec.num_classes));

    const std::size_t class_width = std::max<std::size_t>(3, std::to_string(spec.num_classes).size());
    const std::size_t ex_width =
        std::max<std::size_t>(3, std::to_string(spec.examples_per_class).size());

    DatasetManifest manifest;
    manifest.image_shape = {1, s, s};

    std::filesystem::create_directories(root);
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
        const std::string name = "glyph_" + zero_pad(c, class_width);
        std::filesystem::create_directories(root / name);

        Rng template_rng(mix64(mix64(spec.seed, c), kTemplateStream));
        const std::vector<double> tmpl = render_template(s, template_rng);

        ManifestClass cls;
        cls.name = name;
        cls.split = c < train_count            ? MetaSplit::Train
                    : c < train_count + val_count ? MetaSplit::Val
                                                  : MetaSplit::Test;
        for (std::size_t e = 0; e < spec.examples_per_class; ++e) {
            Rng example_rng(mix64(mix64(mix64(spec.seed, c), e), kExampleStream));
            const std::vector<std::uint8_t> pixels = render_example(tmpl, s, example_rng);
            const std::string rel = name + "/ex_" + zero_pad(e, ex_width) + ".png";
            write_png_gray(root / rel, s, s, pixels.data());
            cls.files.push_back({rel, crc32_of(root / rel)});
        }
        manifest.classes.push_back(std::move(cls));
    }

    manifest.save(root / "manifest.txt");
    return manifest;
}

}  // namespace metagrad::data

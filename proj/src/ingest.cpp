#include "metagrad/ingest.hpp"

#include <sstream>

#include "metagrad/error.hpp"
#include "metagrad/image_io.hpp"

namespace metagrad::data {

namespace {

// PNG interleaved u8 -> channel-first float in [0,1].
ad::Tensor to_tensor(const Image& img) {
    std::vector<double> values(img.channels * img.height * img.width);
    const std::size_t plane = img.height * img.width;
    for (std::size_t i = 0; i < plane; ++i) {
        for (std::size_t c = 0; c < img.channels; ++c) {
            values[c * plane + i] = double(img.pixels[i * img.channels + c]) / 255.0;
        }
    }
    return ad::Tensor({img.channels, img.height, img.width}, std::move(values));
}

}  // namespace

std::shared_ptr<ClassStore> ingest_directory(const std::filesystem::path& root,
                                             const DatasetManifest& manifest) {
    manifest.validate();

    std::vector<MemoryClassStore::ClassData> classes;
    std::array<std::vector<std::size_t>, 3> pools;
    classes.reserve(manifest.classes.size());

    for (std::size_t id = 0; id < manifest.classes.size(); ++id) {
        const ManifestClass& cls = manifest.classes[id];
        const std::filesystem::path class_dir = root / cls.name;
        if (!std::filesystem::is_directory(class_dir)) {
            throw IngestError("missing class directory " + class_dir.string());
        }

        MemoryClassStore::ClassData data;
        data.name = cls.name;
        data.examples.reserve(cls.files.size());
        for (const ManifestFile& f : cls.files) {
            const std::filesystem::path file = root / f.relpath;
            if (!std::filesystem::is_regular_file(file)) {
                throw IngestError("missing example file " + file.string());
            }
            const std::uint32_t crc = crc32_of(file);
            if (crc != f.crc32) {
                std::ostringstream oss;
                oss << "checksum mismatch for " << file.string() << ": manifest says " << std::hex
                    << f.crc32 << ", file has " << crc;
                throw IngestError(oss.str());
            }
            const Image img = read_png(file);
            if (img.channels != manifest.image_shape[0] || img.height != manifest.image_shape[1] ||
                img.width != manifest.image_shape[2]) {
                std::ostringstream oss;
                oss << "image " << file.string() << ": shape [" << img.channels << ", "
                    << img.height << ", " << img.width << "] does not match manifest "
                    << ad::format_shape(manifest.image_shape);
                throw IngestError(oss.str());
            }
            data.examples.push_back(to_tensor(img));
        }
        pools[static_cast<std::size_t>(cls.split)].push_back(id);
        classes.push_back(std::move(data));
    }

    return std::make_shared<MemoryClassStore>(std::move(classes), std::move(pools),
                                              manifest.image_shape);
}

std::shared_ptr<ClassStore> ingest_directory(const std::filesystem::path& root,
                                             const std::filesystem::path& manifest_file) {
    return ingest_directory(root, DatasetManifest::load(manifest_file));
}

}  // namespace metagrad::data

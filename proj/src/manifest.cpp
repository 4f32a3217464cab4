#include "metagrad/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "metagrad/error.hpp"

namespace metagrad::data {

namespace {

MetaSplit parse_split(const std::string& word, const std::filesystem::path& file) {
    if (word == "train") return MetaSplit::Train;
    if (word == "val") return MetaSplit::Val;
    if (word == "test") return MetaSplit::Test;
    throw IngestError("manifest " + file.string() + ": unknown split '" + word + "'");
}

bool has_whitespace(const std::string& s) {
    return s.find_first_of(" \t\r\n") != std::string::npos;
}

}  // namespace

void DatasetManifest::validate() const {
    if (version != 1) throw IngestError("manifest: unsupported version " + std::to_string(version));
    if (image_shape.size() != 3 || (image_shape[0] != 1 && image_shape[0] != 3) ||
        image_shape[1] == 0 || image_shape[2] == 0) {
        throw IngestError("manifest: image shape must be [1|3, H, W]");
    }
    // A class name appearing twice would put it in two splits (or duplicate
    // it within one); both are rejected.
    std::set<std::string> seen;
    for (const ManifestClass& c : classes) {
        if (c.name.empty() || has_whitespace(c.name)) {
            throw IngestError("manifest: bad class name '" + c.name + "'");
        }
        if (!seen.insert(c.name).second) {
            throw IngestError("manifest: class '" + c.name + "' listed more than once");
        }
        if (c.files.empty()) {
            throw IngestError("manifest: class '" + c.name + "' has no files");
        }
        for (const ManifestFile& f : c.files) {
            if (f.relpath.empty() || has_whitespace(f.relpath)) {
                throw IngestError("manifest: bad file path '" + f.relpath + "'");
            }
        }
    }
}

std::size_t DatasetManifest::split_size(MetaSplit split) const {
    std::size_t n = 0;
    for (const ManifestClass& c : classes) n += c.split == split ? 1 : 0;
    return n;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw IngestError("cannot open manifest " + file.string());

    DatasetManifest m;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;

    auto fail = [&](const std::string& what) {
        std::ostringstream oss;
        oss << "manifest " << file.string() << ":" << lineno << ": " << what;
        throw IngestError(oss.str());
    };

    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (!have_header) {
            std::uint32_t v = 0;
            if (tag != "metagrad-manifest" || !(ls >> v)) fail("expected 'metagrad-manifest <version>'");
            m.version = v;
            have_header = true;
        } else if (tag == "image") {
            std::size_t c = 0, h = 0, w = 0;
            if (!(ls >> c >> h >> w)) fail("expected 'image <channels> <height> <width>'");
            m.image_shape = {c, h, w};
        } else if (tag == "class") {
            std::string name, split;
            if (!(ls >> name >> split)) fail("expected 'class <name> <split>'");
            m.classes.push_back({name, parse_split(split, file), {}});
        } else if (tag == "file") {
            if (m.classes.empty()) fail("'file' before any 'class'");
            std::string rel, hex;
            if (!(ls >> rel >> hex)) fail("expected 'file <relpath> <crc32 hex>'");
            std::uint32_t crc = 0;
            std::istringstream hs(hex);
            if (!(hs >> std::hex >> crc)) fail("bad crc32 '" + hex + "'");
            m.classes.back().files.push_back({rel, crc});
        } else {
            fail("unknown directive '" + tag + "'");
        }
    }
    if (!have_header) throw IngestError("manifest " + file.string() + ": missing header");
    m.validate();
    return m;
}

void DatasetManifest::save(const std::filesystem::path& file) const {
    validate();
    std::ofstream os(file, std::ios::trunc);
    if (!os) throw Error("cannot write manifest " + file.string());
    os << "metagrad-manifest " << version << "\n";
    os << "image " << image_shape[0] << " " << image_shape[1] << " " << image_shape[2] << "\n";
    for (const ManifestClass& c : classes) {
        os << "class " << c.name << " " << to_string(c.split) << "\n";
        for (const ManifestFile& f : c.files) {
            os << "file " << f.relpath << " " << std::hex << f.crc32 << std::dec << "\n";
        }
    }
    if (!os) throw Error("manifest write failed: " + file.string());
}

}  // namespace metagrad::data

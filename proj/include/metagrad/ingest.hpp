#pragma once

#include <filesystem>
#include <memory>

#include "metagrad/class_store.hpp"
#include "metagrad/manifest.hpp"

namespace metagrad::data {

// Loads a class-indexed image tree (root/<class>/<files>) described by a
// manifest into an in-memory store. Every file is checksum-verified and
// decoded to a [C,H,W] float tensor in [0,1]; class ids follow manifest order
// and the per-split pools follow the manifest's split assignment.
std::shared_ptr<ClassStore> ingest_directory(const std::filesystem::path& root,
                                             const DatasetManifest& manifest);

std::shared_ptr<ClassStore> ingest_directory(const std::filesystem::path& root,
                                             const std::filesystem::path& manifest_file);

}  // namespace metagrad::data

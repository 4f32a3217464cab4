#pragma once

#include <stdexcept>
#include <string>

namespace metagrad {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shape or extent violations (mismatched operands, bad construction).
struct ShapeError : Error {
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// API contract violations (non-scalar grad output, empty batch, path-set mismatch).
struct ContractError : Error {
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

// Invalid user-supplied configuration (bad ranges, pool smaller than n_way).
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Dataset ingestion failures (missing files, checksum mismatch, undecodable image).
struct IngestError : Error {
    explicit IngestError(const std::string& msg) : Error(msg) {}
};

}  // namespace metagrad

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace vantage {

/// Base class for all domain errors. `kind()` is a stable machine-readable
/// tag used by the CLI when reporting failures on stderr.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

struct DegenerateGeometry : Error {
    explicit DegenerateGeometry(const std::string& m) : Error("DegenerateGeometry", m) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("ParseError", m) {}
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& m) : Error("SchemaError", m) {}
};

struct IoError : Error {
    explicit IoError(const std::string& m) : Error("IoError", m) {}
};

struct InsufficientPairs : Error {
    InsufficientPairs(std::size_t available, std::size_t requested)
        : Error("InsufficientPairs",
                "only " + std::to_string(available) + " valid pairs exist, " +
                    std::to_string(requested) + " requested"),
          available(available),
          requested(requested) {}

    std::size_t available;
    std::size_t requested;
};

struct DegeneratePair : Error {
    explicit DegeneratePair(const std::string& m) : Error("DegeneratePair", m) {}
};

struct EmptyDataset : Error {
    explicit EmptyDataset(const std::string& m) : Error("EmptyDataset", m) {}
};

struct LengthMismatch : Error {
    explicit LengthMismatch(const std::string& m) : Error("LengthMismatch", m) {}
};

struct NonFinite : Error {
    explicit NonFinite(const std::string& m) : Error("NonFinite", m) {}
};

struct SelfTestFailed : Error {
    explicit SelfTestFailed(const std::string& m) : Error("SelfTestFailed", m) {}
};

}  // namespace vantage

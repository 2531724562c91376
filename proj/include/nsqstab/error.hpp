#pragma once

#include <stdexcept>
#include <string>

namespace nsqstab {

enum class ErrorKind {
    Malformed,
    DimensionMismatch,
    NonPositivePartition,
    OutOfRange,
    NegativeEntry,
    NonPositiveEntry,
    NonSquare,
    NotFinite,
    NotHurwitz,
    MissingCertificate,
    InactiveBlock,
    Precondition,
};

const char* to_string(ErrorKind kind);

/// Exception carrying a machine-checkable error category.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace nsqstab

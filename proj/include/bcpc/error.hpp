#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bcpc {

enum class Errc {
    EmptyInput,
    MalformedRow,
    NonNumericCell,
    TooFewAxes,
    KTooLarge,
    LabelOutOfRange,
    DegenerateCanvas,
    XOutOfRange,
    MixedClusters,
    NonPositiveNorm,
    DimensionMismatch,
    InvalidArgument,
    NoDataset,
    BindFailure,
    Io,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library carries one of the Errc codes so
/// callers (CLI exit codes, HTTP status mapping) can dispatch on it.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace bcpc

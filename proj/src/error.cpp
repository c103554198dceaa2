#include "bcpc/error.hpp"

namespace bcpc {

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::MalformedRow: return "MalformedRow";
        case Errc::NonNumericCell: return "NonNumericCell";
        case Errc::TooFewAxes: return "TooFewAxes";
        case Errc::KTooLarge: return "KTooLarge";
        case Errc::LabelOutOfRange: return "LabelOutOfRange";
        case Errc::DegenerateCanvas: return "DegenerateCanvas";
        case Errc::XOutOfRange: return "XOutOfRange";
        case Errc::MixedClusters: return "MixedClusters";
        case Errc::NonPositiveNorm: return "NonPositiveNorm";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::NoDataset: return "NoDataset";
        case Errc::BindFailure: return "BindFailure";
        case Errc::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace bcpc

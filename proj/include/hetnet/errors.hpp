#pragma once

#include <stdexcept>
#include <string>

namespace hetnet {

enum class ErrorKind {
    InvalidParameters,
    DomainStableManifold,
    DomainUnstableManifold,
    DomainRange,
    ImageRange,
    OutsideDomain,
    SectionMismatch,
    OffSection,
    NonFinite,
    NTooSmall,
    CoincidentManifolds,
    EmptyIntersection,
    RefinementFailure,
    StepUnderflow,
    BlowUp,
    NoCrossing,
    NonConvergence,
    Precondition,
    Config,
};

const char* to_string(ErrorKind k);

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidParameters: return "InvalidParameters";
    case ErrorKind::DomainStableManifold: return "DomainStableManifold";
    case ErrorKind::DomainUnstableManifold: return "DomainUnstableManifold";
    case ErrorKind::DomainRange: return "DomainRange";
    case ErrorKind::ImageRange: return "ImageRange";
    case ErrorKind::OutsideDomain: return "OutsideDomain";
    case ErrorKind::SectionMismatch: return "SectionMismatch";
    case ErrorKind::OffSection: return "OffSection";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NTooSmall: return "NTooSmall";
    case ErrorKind::CoincidentManifolds: return "CoincidentManifolds";
    case ErrorKind::EmptyIntersection: return "EmptyIntersection";
    case ErrorKind::RefinementFailure: return "RefinementFailure";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::NoCrossing: return "NoCrossing";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::Precondition: return "Precondition";
    case ErrorKind::Config: return "Config";
    }
    return "Unknown";
}

} // namespace hetnet

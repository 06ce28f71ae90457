#pragma once

#include <stdexcept>
#include <string>

namespace dro {

enum class ErrorCode {
    NonPositiveStep,
    NonDivisibleSpan,
    GridTooSmall,
    InvalidMoments,
    EmptyAmbiguity,
    DegenerateQuadratic,
    UnboundedHeight,
    InvalidModel,
    NumericalFailure,
    SandwichViolation,
    VerificationFailed,
    ParseError,
    SchemaError,
    IoError,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::NonPositiveStep: return "NonPositiveStep";
    case ErrorCode::NonDivisibleSpan: return "NonDivisibleSpan";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::InvalidMoments: return "InvalidMoments";
    case ErrorCode::EmptyAmbiguity: return "EmptyAmbiguity";
    case ErrorCode::DegenerateQuadratic: return "DegenerateQuadratic";
    case ErrorCode::UnboundedHeight: return "UnboundedHeight";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::SandwichViolation: return "SandwichViolation";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace dro

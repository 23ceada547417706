#pragma once

#include <stdexcept>
#include <string>

namespace ntl {

enum class ErrorCode {
    malformed_name,
    file_unreadable,
    file_unwritable,
    header_mismatch,
    schema_mismatch,
    empty_result,
    series_too_short,
    zero_day_gap,
    single_class_target,
    degenerate_margins,
    empty_sample,
    too_few_samples,
    empty_slice,
    undefined_class_rate,
    invalid_config,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::malformed_name: return "MalformedName";
        case ErrorCode::file_unreadable: return "FileUnreadable";
        case ErrorCode::file_unwritable: return "FileUnwritable";
        case ErrorCode::header_mismatch: return "HeaderMismatch";
        case ErrorCode::schema_mismatch: return "SchemaMismatch";
        case ErrorCode::empty_result: return "EmptyResult";
        case ErrorCode::series_too_short: return "SeriesTooShort";
        case ErrorCode::zero_day_gap: return "ZeroDayGap";
        case ErrorCode::single_class_target: return "SingleClassTarget";
        case ErrorCode::degenerate_margins: return "DegenerateMargins";
        case ErrorCode::empty_sample: return "EmptySample";
        case ErrorCode::too_few_samples: return "TooFewSamples";
        case ErrorCode::empty_slice: return "EmptySlice";
        case ErrorCode::undefined_class_rate: return "UndefinedClassRate";
        case ErrorCode::invalid_config: return "InvalidConfig";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ntl

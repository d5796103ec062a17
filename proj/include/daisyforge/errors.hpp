#pragma once

#include <stdexcept>
#include <string>

namespace daisyforge {

// Stable error codes. Code names appear verbatim in CLI diagnostics, so
// renaming one is a breaking change.
enum class errc {
    not_prime_power,
    mixed_dimensions,
    zero_vector,
    out_of_range,
    layer_too_large,
    target_too_small,
    budget_exceeded,
    bad_residue,
    pattern_mismatch,
    bad_layer_index,
    scale_exceeded,
    oracle_scale_exceeded,
    bound_too_loose,
    corrupt_certificate,
    invalid_file,
    usage
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::not_prime_power:       return "NotPrimePower";
        case errc::mixed_dimensions:      return "MixedDimensions";
        case errc::zero_vector:           return "ZeroVector";
        case errc::out_of_range:          return "OutOfRange";
        case errc::layer_too_large:       return "LayerTooLarge";
        case errc::target_too_small:      return "TargetTooSmall";
        case errc::budget_exceeded:       return "BudgetExceeded";
        case errc::bad_residue:           return "BadResidue";
        case errc::pattern_mismatch:      return "PatternMismatch";
        case errc::bad_layer_index:       return "BadLayerIndex";
        case errc::scale_exceeded:        return "ScaleExceeded";
        case errc::oracle_scale_exceeded: return "OracleScaleExceeded";
        case errc::bound_too_loose:       return "BoundTooLoose";
        case errc::corrupt_certificate:   return "CorruptCertificate";
        case errc::invalid_file:          return "InvalidFile";
        case errc::usage:                 return "Usage";
    }
    return "Unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
    throw error(code, what);
}

inline void require(bool ok, errc code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace daisyforge

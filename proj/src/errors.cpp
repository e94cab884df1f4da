#include "biqm/errors.hpp"

namespace biqm {

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::invalid_size: return "invalid-size";
    case Errc::invalid_shift: return "invalid-shift";
    case Errc::invalid_weight: return "invalid-weight";
    case Errc::invalid_range: return "invalid-range";
    case Errc::invalid_partition: return "invalid-partition";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::invalid_potential: return "invalid-potential";
    case Errc::invalid_density: return "invalid-density";
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::not_psd: return "not-psd";
    case Errc::singular: return "singular";
    case Errc::numerical_failure: return "numerical-failure";
    case Errc::degenerate_spectrum: return "degenerate-spectrum";
    case Errc::stalled_step: return "stalled-step";
    case Errc::empty_samples: return "empty-samples";
    case Errc::config: return "config";
    case Errc::io: return "io";
    case Errc::unknown_preset: return "unknown-preset";
    }
    return "unknown";
}

bool is_config_error(Errc code) {
    switch (code) {
    case Errc::config:
    case Errc::io:
    case Errc::unknown_preset:
    case Errc::invalid_size:
    case Errc::invalid_shift:
    case Errc::invalid_weight:
    case Errc::invalid_range:
    case Errc::invalid_partition:
    case Errc::invalid_parameter:
        return true;
    default:
        return false;
    }
}

}  // namespace biqm

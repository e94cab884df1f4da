#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace biqm {

enum class Errc {
    invalid_size,
    invalid_shift,
    invalid_weight,
    invalid_range,
    invalid_partition,
    shape_mismatch,
    invalid_potential,
    invalid_density,
    invalid_parameter,
    not_psd,
    singular,
    numerical_failure,
    degenerate_spectrum,
    stalled_step,
    empty_samples,
    config,
    io,
    unknown_preset,
};

const char* errc_name(Errc code);

// Config-like failures map to exit code 1, everything numerical to 2.
bool is_config_error(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

class DegenerateSpectrumError : public Error {
public:
    DegenerateSpectrumError(const std::string& message, std::vector<std::pair<int, int>> pairs)
        : Error(Errc::degenerate_spectrum, message), pairs_(std::move(pairs)) {}

    const std::vector<std::pair<int, int>>& pairs() const noexcept { return pairs_; }

private:
    std::vector<std::pair<int, int>> pairs_;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& message, int line = 0, std::string key = {})
        : Error(Errc::config, message), line_(line), key_(std::move(key)) {}

    int line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    int line_;
    std::string key_;
};

}  // namespace biqm

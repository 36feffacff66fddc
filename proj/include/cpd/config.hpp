#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "cpd/detector.hpp"
#include "cpd/synth.hpp"

namespace cpd {

/// Flat `section.key = value` config file. Unknown keys are rejected.
struct Config {
    DetectorParams detector;
    synth::GenParams generator;
    int eval_theta = 15;
    int eval_theta_min = 1;
    int eval_theta_max = 20;

    /// Parses path and overlays the values on *this. Throws
    /// std::invalid_argument on syntax errors or unknown keys.
    void load(const std::filesystem::path& path);

    /// Effective values as ordered key/value text, for provenance.
    std::map<std::string, std::string> detector_entries() const;
};

} // namespace cpd

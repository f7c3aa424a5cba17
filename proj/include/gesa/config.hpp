#pragma once

#include <string>

#include "gesa/model.hpp"
#include "gesa/train.hpp"

namespace gesa {

// Flat key=value configuration. Unknown keys are rejected; the effective
// configuration is echoed into every output artifact.
struct RunConfig {
    ModelConfig model;
    TrainConfig train;

    void apply_file(const std::string& path);
    void apply_override(const std::string& key_eq_value);
    void set(const std::string& key, const std::string& value);
    std::string serialize() const;  // one key=value per line, fixed order
    uint64_t hash() const;          // FNV-1a of serialize()
};

}  // namespace gesa

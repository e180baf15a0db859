#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mdiqkd/channel.hpp"
#include "mdiqkd/optics.hpp"
#include "mdiqkd/table.hpp"

namespace mdiqkd {

// Externally published secret key rate for a setup, used by the reproduce
// command to grade its own output.
struct PublishedReference {
    double secret_key_rate = 0.0;
    double sigma = 0.0;
};

// Everything needed to simulate and analyze one experimental configuration.
struct SetupConfig {
    std::string name;
    std::string fiber_kind = "spool";  // "spool" or "deployed"
    FiberLink link_alice;
    FiberLink link_bob;
    IntensitySet intensities;
    DetectorModel detector;
    DriftParams drift;
    StabilizerConfig stabilizer;
    double f_ec = 1.14;              // error-correction efficiency
    double source_extinction = 0.0;  // optional modulator leakage, see encode_qubit
    double drift_update_interval_s = 0.5;
    int phase_nodes = 64;
    std::uint64_t seed = 1;
    std::optional<PublishedReference> reference;

    double total_loss_db() const { return link_alice.loss_db + link_bob.loss_db; }
    void validate() const;
};

}  // namespace mdiqkd

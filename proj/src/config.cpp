#include "mdiqkd/config.hpp"

#include "mdiqkd/common.hpp"

namespace mdiqkd {

void SetupConfig::validate() const {
    auto fail = [&](const std::string& msg) {
        throw config_error("setup '" + name + "': " + msg);
    };
    if (name.empty()) throw config_error("setup name must not be empty");
    if (fiber_kind != "spool" && fiber_kind != "deployed")
        fail("fiber_kind must be 'spool' or 'deployed'");
    try {
        link_alice.validate();
        link_bob.validate();
        intensities.validate();
        detector.validate();
        drift.validate();
        stabilizer.validate();
    } catch (const config_error& e) {
        fail(e.what());
    }
    if (!(f_ec >= 1.0)) fail("f_ec must be >= 1");
    if (!(source_extinction >= 0.0 && source_extinction <= 1.0))
        fail("source_extinction must lie in [0, 1]");
    if (!(drift_update_interval_s > 0.0)) fail("drift_update_interval_s must be > 0");
    if (phase_nodes < 8) fail("phase_nodes must be >= 8");
    if (reference && !(reference->sigma >= 0.0)) fail("reference sigma must be >= 0");
}

}  // namespace mdiqkd

#pragma once

namespace ponsim {

/// Routes spdlog to stderr at the level named by PONSIM_LOG (info, debug);
/// warnings only when unset. Safe to call more than once.
void configure_logging();

}  // namespace ponsim

#pragma once

namespace rlcsim {

/// Physical constants used throughout the library. Defaults are SI (CODATA);
/// natural() sets k_b = hbar = 1 so paper-style parameter ratios can be
/// entered directly.
struct PhysicalConstants {
    double kb = 1.380649e-23;        // J/K
    double hbar = 1.054571817e-34;   // J*s

    static PhysicalConstants si() { return {}; }
    static PhysicalConstants natural() { return {1.0, 1.0}; }
};

}  // namespace rlcsim

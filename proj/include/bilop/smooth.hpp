#pragma once

namespace bilop {

/// Smooth step: 0 for u <= 0, 1 for u >= 1, the normalized primitive of the
/// bump exp(-1/(1-t^2)) in between. S(u) + S(1-u) = 1.
double smooth_step(double u);
double smooth_step_deriv(double u);

/// Cutoff profile: 1 on |t| <= 1, 0 for |t| >= 2.
double cutoff_profile(double t);

/// Packet window g(t) = S(1 - 2|t|) on |t| < 1/2. Translates by 1/2 sum to one.
double packet_window(double t);

}  // namespace bilop

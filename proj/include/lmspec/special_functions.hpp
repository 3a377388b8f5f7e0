#pragma once

namespace lmspec {

/// log G(z) for the Barnes G-function, z > 0.
///
/// The argument is shifted up with G(z + 1) = Gamma(z) G(z) until the
/// large-argument expansion of log G(w + 1) converges to double precision,
/// then shifted back by subtracting the accumulated log-Gamma terms.
double log_barnes_g(double z);

}  // namespace lmspec

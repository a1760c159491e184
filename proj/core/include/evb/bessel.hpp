#pragma once

namespace evb {

// Exponentially scaled modified Bessel function of the first kind,
// I_nu(z) exp(-z), for integer nu >= 0 and z >= 0. Throws DomainError on z < 0.
double bessel_i_scaled(int nu, double z);

// log(I_nu(z) exp(-z)); finite wherever the true value is positive, even when
// the value itself would underflow.
double log_bessel_i_scaled(int nu, double z);

// I_{nu-1}(z) / I_nu(z) for nu >= 1, z > 0, by continued fraction.
double bessel_i_ratio(int nu, double z);

}  // namespace evb

#pragma once

#include <cmath>
#include <limits>

namespace hcfsim {

inline constexpr double kSpeedOfLight = 299792458.0;       // m/s
inline constexpr double kPlanck = 6.62607015e-34;          // J*s
inline constexpr double kInfDb = std::numeric_limits<double>::infinity();

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_watt(double dbm) { return 1e-3 * db_to_lin(dbm); }
inline double watt_to_dbm(double w) { return lin_to_db(w / 1e-3); }

inline double wavelength_nm_from_hz(double f_hz) { return kSpeedOfLight / f_hz * 1e9; }
inline double frequency_hz_from_nm(double wl_nm) { return kSpeedOfLight / (wl_nm * 1e-9); }

inline double photon_energy_j(double f_hz) { return kPlanck * f_hz; }

/// dB/km to natural (1/km) attenuation coefficient.
inline double db_per_km_to_nat(double a_db) { return a_db * std::log(10.0) / 10.0; }

} // namespace hcfsim

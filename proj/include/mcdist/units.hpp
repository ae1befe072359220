#pragma once

// Internal math is strict SI (m, s). Config files and CSV outputs use
// micrometres, milliseconds and mm/s; conversion happens at the boundary.

namespace mcdist::units {

inline constexpr double um_to_m(double um) { return um * 1e-6; }
inline constexpr double m_to_um(double m) { return m * 1e6; }

inline constexpr double ms_to_s(double ms) { return ms * 1e-3; }
inline constexpr double s_to_ms(double s) { return s * 1e3; }

inline constexpr double mm_s_to_m_s(double v) { return v * 1e-3; }
inline constexpr double m_s_to_mm_s(double v) { return v * 1e3; }

// Diffusion coefficients: 1 um^2/ms == 1e-9 m^2/s.
inline constexpr double um2_ms_to_m2_s(double d) { return d * 1e-9; }
inline constexpr double m2_s_to_um2_ms(double d) { return d * 1e9; }

inline constexpr double m2_to_um2(double a) { return a * 1e12; }
inline constexpr double um2_to_m2(double a) { return a * 1e-12; }

}  // namespace mcdist::units

//! Physical constants in SI units.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of a rubidium-87 atom, kg.
pub const RB87_MASS: f64 = 86.909 * ATOMIC_MASS_UNIT;

/// Differential Zeeman shift of the |g> = |F=1, mF=1> to |s> = |F=2, mF=1>
/// spin transition, Hz per gauss (+0.7 MHz/G minus -0.7 MHz/G).
pub const RB87_SPIN_WAVE_ZEEMAN: f64 = 1.4e6;

/// Signal velocity in standard telecom fiber, m/s (c / 1.5).
pub const FIBER_SIGNAL_VELOCITY: f64 = 2.0e8;

/// D2 line wavelength of rubidium-87, m.
pub const RB87_D2_WAVELENGTH: f64 = 780.241e-9;

//! CODATA values in SI units.

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Converts a loss in dB/cm into a power attenuation coefficient in 1/m.
pub fn db_per_cm_to_per_m(db_per_cm: f64) -> f64 {
    db_per_cm * std::f64::consts::LN_10 / 10.0 * 100.0
}

//! Physical constants (CODATA 2018, exact SI values where defined).

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Boltzmann constant, eV/K.
pub const BOLTZMANN_EV: f64 = BOLTZMANN / ELEMENTARY_CHARGE;
/// Avogadro constant, 1/mol.
pub const AVOGADRO: f64 = 6.022_140_76e23;

/// Thermal voltage k_B·T/e in volts.
pub fn thermal_voltage(temperature: f64) -> f64 {
    BOLTZMANN * temperature / ELEMENTARY_CHARGE
}

/// Converts a molar concentration (mol/l) to a number density (1/m³).
pub fn molar_to_number_density(molar: f64) -> f64 {
    molar * 1.0e3 * AVOGADRO
}

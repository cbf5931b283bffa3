//! Spectroscopic unit bookkeeping.
//!
//! Energies and frequencies are stored in wavenumbers (cm⁻¹) and times in
//! femtoseconds, with ħ = 1. Conversion to angular frequency happens only where a
//! phase or a rate is accumulated over time.

use core::f64::consts::PI;

/// Speed of light in cm/fs.
pub const SPEED_OF_LIGHT_CM_PER_FS: f64 = 2.997_924_58e-5;

/// Boltzmann constant in cm⁻¹/K.
pub const BOLTZMANN_WAVENUMBERS: f64 = 0.695_034_800;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnitSystem {
    /// rad/fs per cm⁻¹, i.e. 2πc.
    pub wavenumber_to_angular_freq: f64,
    /// k_B in cm⁻¹/K.
    pub kb_in_wavenumbers: f64,
}

impl UnitSystem {
    pub const STANDARD: UnitSystem = UnitSystem {
        wavenumber_to_angular_freq: 2.0 * PI * SPEED_OF_LIGHT_CM_PER_FS,
        kb_in_wavenumbers: BOLTZMANN_WAVENUMBERS,
    };

    /// Converts a wavenumber (cm⁻¹) to an angular frequency or rate (rad/fs).
    #[inline]
    pub fn angular(&self, wavenumber: f64) -> f64 {
        wavenumber * self.wavenumber_to_angular_freq
    }

    /// k_B·T in cm⁻¹.
    #[inline]
    pub fn thermal_energy(&self, temperature: f64) -> f64 {
        self.kb_in_wavenumbers * temperature
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::STANDARD
    }
}

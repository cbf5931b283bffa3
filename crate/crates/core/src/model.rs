//! The excitonic dimer and its exciton basis.

use alloc::format;
use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;

use crate::levels::{Exciton, Level, Transition};
use crate::{Error, Result};

/// Site-basis description of the dimer. Energies in cm⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DimerParams {
    pub site_energy_1: f64,
    pub site_energy_2: f64,
    pub coupling_j: f64,
    pub dipole_d1: f64,
    pub dipole_ratio_d2_over_d1: f64,
    /// Angle between the two site dipoles, radians.
    pub dipole_angle_phi: f64,
    /// Fluorescence weight of the biexciton, in [0, 2].
    pub quantum_yield_gamma: f64,
}

impl DimerParams {
    /// The light-harvesting example dimer: 12881/12719 cm⁻¹ sites, J = 120 cm⁻¹,
    /// d₂/d₁ = 2, φ = 0.3, ideal two-photon cascade Γ = 2.
    pub const fn reference() -> Self {
        DimerParams {
            site_energy_1: 12881.0,
            site_energy_2: 12719.0,
            coupling_j: 120.0,
            dipole_d1: 1.0,
            dipole_ratio_d2_over_d1: 2.0,
            dipole_angle_phi: 0.3,
            quantum_yield_gamma: 2.0,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.quantum_yield_gamma = gamma;
        self
    }

    pub fn dipole_d2(&self) -> f64 {
        self.dipole_d1 * self.dipole_ratio_d2_over_d1
    }

    /// Checks the full set of invariants, including the strict nondegeneracy
    /// ϖ₁ ≠ ϖ₂ and J ≠ 0.
    pub fn validate(&self) -> Result<()> {
        self.validate_basic()?;
        if self.site_energy_1 == self.site_energy_2 {
            return Err(Error::invalid("site_energy_2", "site energies must differ"));
        }
        if self.coupling_j == 0.0 {
            return Err(Error::invalid("coupling_j", "coupling must be nonzero"));
        }
        Ok(())
    }

    fn validate_basic(&self) -> Result<()> {
        let finite = [
            ("site_energy_1", self.site_energy_1),
            ("site_energy_2", self.site_energy_2),
            ("coupling_j", self.coupling_j),
            ("dipole_d1", self.dipole_d1),
            ("dipole_ratio_d2_over_d1", self.dipole_ratio_d2_over_d1),
            ("dipole_angle_phi", self.dipole_angle_phi),
            ("quantum_yield_gamma", self.quantum_yield_gamma),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        if !(0.0..=2.0).contains(&self.quantum_yield_gamma) {
            return Err(Error::invalid(
                "quantum_yield_gamma",
                format!("must lie in [0, 2], got {}", self.quantum_yield_gamma),
            ));
        }
        if self.dipole_d1 < 0.0 || self.dipole_ratio_d2_over_d1 < 0.0 {
            return Err(Error::invalid("dipole_d1", "dipole magnitudes must be nonnegative"));
        }
        Ok(())
    }

    /// Site dipoles: d₁ along ẑ, d₂ rotated by φ towards x̂.
    pub fn site_dipoles(&self) -> [Vector3<f64>; 2] {
        let d2 = self.dipole_d2();
        let (s, c) = self.dipole_angle_phi.sin_cos();
        [
            Vector3::new(0.0, 0.0, self.dipole_d1),
            Vector3::new(d2 * s, 0.0, d2 * c),
        ]
    }
}

impl Default for DimerParams {
    fn default() -> Self {
        Self::reference()
    }
}

/// Exciton energies (cm⁻¹), mixing angle and transition dipoles.
///
/// `e` is always the upper exciton. Dipoles are stored in the site frame, where
/// every vector has zero y component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitonBasis {
    pub mixing_angle_theta: f64,
    pub average_freq: f64,
    pub half_difference_delta: f64,
    pub coupling_j: f64,
    pub energy_e: f64,
    pub energy_e_prime: f64,
    pub energy_f: f64,
    pub mu_eg: Vector3<f64>,
    pub mu_epg: Vector3<f64>,
    pub mu_fe: Vector3<f64>,
    pub mu_fep: Vector3<f64>,
    pub angle_epg: f64,
    pub angle_fe: f64,
    pub angle_fep: f64,
}

/// Diagonalizes the one-exciton block and computes the transition dipoles.
pub fn build_exciton_basis(dimer: &DimerParams) -> Result<ExcitonBasis> {
    dimer.validate_basic()?;
    let delta = 0.5 * (dimer.site_energy_1 - dimer.site_energy_2);
    let j = dimer.coupling_j;
    if delta == 0.0 && j == 0.0 {
        return Err(Error::DegenerateModel);
    }
    let avg = 0.5 * (dimer.site_energy_1 + dimer.site_energy_2);
    // atan2 keeps e as the upper state for either sign of Δ or J.
    let theta = 0.5 * j.atan2(delta);
    let half_split = delta.hypot(j);
    let basis = ExcitonBasis {
        mixing_angle_theta: theta,
        average_freq: avg,
        half_difference_delta: delta,
        coupling_j: j,
        energy_e: avg + half_split,
        energy_e_prime: avg - half_split,
        energy_f: dimer.site_energy_1 + dimer.site_energy_2,
        mu_eg: Vector3::zeros(),
        mu_epg: Vector3::zeros(),
        mu_fe: Vector3::zeros(),
        mu_fep: Vector3::zeros(),
        angle_epg: 0.0,
        angle_fe: 0.0,
        angle_fep: 0.0,
    };
    transition_dipoles(dimer, basis)
}

/// Fills in the four transition dipoles and their angles to μ_eg.
pub fn transition_dipoles(dimer: &DimerParams, mut basis: ExcitonBasis) -> Result<ExcitonBasis> {
    let [d1, d2] = dimer.site_dipoles();
    let (s, c) = basis.mixing_angle_theta.sin_cos();
    basis.mu_eg = d1 * c + d2 * s;
    basis.mu_epg = d2 * c - d1 * s;
    basis.mu_fe = d1 * s + d2 * c;
    basis.mu_fep = d1 * c - d2 * s;
    if basis.mu_eg.norm() == 0.0 {
        return Err(Error::DegenerateGeometry(
            "μ_eg vanishes, so dipole angles have no reference",
        ));
    }
    basis.angle_epg = unsigned_angle(&basis.mu_eg, &basis.mu_epg);
    basis.angle_fe = unsigned_angle(&basis.mu_eg, &basis.mu_fe);
    basis.angle_fep = unsigned_angle(&basis.mu_eg, &basis.mu_fep);
    Ok(basis)
}

fn unsigned_angle(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

impl ExcitonBasis {
    pub fn dipole(&self, t: Transition) -> Vector3<f64> {
        match t {
            Transition::EG => self.mu_eg,
            Transition::EPrimeG => self.mu_epg,
            Transition::FE => self.mu_fe,
            Transition::FEPrime => self.mu_fep,
        }
    }

    pub fn energy(&self, level: Level) -> f64 {
        match level {
            Level::G => 0.0,
            Level::E => self.energy_e,
            Level::EPrime => self.energy_e_prime,
            Level::F => self.energy_f,
        }
    }

    pub fn exciton_energy(&self, x: Exciton) -> f64 {
        self.energy(x.level())
    }

    /// ϖ_upper − ϖ_lower of a transition, cm⁻¹.
    pub fn transition_freq(&self, t: Transition) -> f64 {
        let (u, l) = t.levels();
        self.energy(u) - self.energy(l)
    }

    /// ϖ_e − ϖ_e′, always positive.
    pub fn splitting(&self) -> f64 {
        self.energy_e - self.energy_e_prime
    }

    /// Rotation about y taking μ_eg onto ẑ.
    fn frame_angle(&self) -> f64 {
        self.mu_eg.x.atan2(self.mu_eg.z)
    }

    /// The dipole in the molecular frame where μ_eg = |μ_eg| ẑ.
    pub fn molecular_dipole(&self, t: Transition) -> Vector3<f64> {
        let v = self.dipole(t);
        let (s, c) = self.frame_angle().sin_cos();
        Vector3::new(c * v.x - s * v.z, v.y, s * v.x + c * v.z)
    }

    /// In-plane angle of a dipole measured from μ_eg, in (−π, π]. The stored
    /// `angle_*` fields are the magnitudes of these.
    pub fn signed_angle(&self, t: Transition) -> f64 {
        let v = self.molecular_dipole(t);
        v.x.atan2(v.z)
    }
}

//! Secular Redfield dynamics of the dimer in identical Ohmic site baths.

use alloc::format;
#[allow(unused_imports)]
use num_traits::Float;

use crate::levels::{Exciton, Level};
use crate::model::ExcitonBasis;
use crate::tensor::{chi_index, ProcessTensor};
use crate::units::UnitSystem;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BathParams {
    /// λ, cm⁻¹.
    pub reorganization_energy: f64,
    /// ω_c, cm⁻¹.
    pub cutoff_freq: f64,
    /// Kelvin. Zero is allowed and means an empty bath (n̄ = 0).
    pub temperature: f64,
}

impl BathParams {
    pub const fn reference() -> Self {
        BathParams {
            reorganization_energy: 30.0,
            cutoff_freq: 120.0,
            temperature: 298.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reorganization_energy >= 0.0 && self.reorganization_energy.is_finite()) {
            return Err(Error::invalid(
                "reorganization_energy",
                format!("must be finite and >= 0, got {}", self.reorganization_energy),
            ));
        }
        if !(self.cutoff_freq > 0.0 && self.cutoff_freq.is_finite()) {
            return Err(Error::invalid(
                "cutoff_freq",
                format!("must be finite and > 0, got {}", self.cutoff_freq),
            ));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid(
                "temperature",
                format!("must be finite and >= 0, got {}", self.temperature),
            ));
        }
        Ok(())
    }
}

impl Default for BathParams {
    fn default() -> Self {
        Self::reference()
    }
}

/// Ohmic spectral density with exponential cutoff, J(ω) = (λ/ω_c) ω e^{−ω/ω_c}.
pub fn spectral_density(omega: f64, bath: &BathParams) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain {
            quantity: "spectral density frequency",
            value: omega,
        });
    }
    Ok(bath.reorganization_energy / bath.cutoff_freq * omega * (-omega / bath.cutoff_freq).exp())
}

/// Bose occupation at ω (cm⁻¹) for thermal energy kT (cm⁻¹).
pub fn bose_occupation(omega: f64, kt: f64) -> f64 {
    if kt == 0.0 {
        0.0
    } else {
        1.0 / (omega / kt).exp_m1()
    }
}

/// Rates and frequencies of the secular generator. Rates are in rad/fs,
/// frequencies in cm⁻¹ (converted when propagating).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedfieldGenerator {
    /// K[n][ν]: d p_n/dT = Σ_ν K[n][ν] p_ν, index 0 = e, 1 = e′.
    pub population_rates: [[f64; 2]; 2],
    /// Dephasing of |e⟩⟨e′|, rad/fs.
    pub gamma_ee_prime: f64,
    /// Optical dephasing of |p⟩⟨g|, indexed by exciton, rad/fs.
    pub gamma_pg: [f64; 2],
    /// Optical dephasing of |f⟩⟨p|, indexed by exciton, rad/fs.
    pub gamma_fp: [f64; 2],
    /// Level energies g, e, e′, f in cm⁻¹.
    pub energies: [f64; 4],
    pub units: UnitSystem,
}

fn level_slot(l: Level) -> usize {
    match l {
        Level::G => 0,
        Level::E => 1,
        Level::EPrime => 2,
        Level::F => 3,
    }
}

impl RedfieldGenerator {
    /// k_{e→e′}, rad/fs.
    pub fn rate_down(&self) -> f64 {
        self.population_rates[1][0]
    }

    /// k_{e′→e}, rad/fs.
    pub fn rate_up(&self) -> f64 {
        self.population_rates[0][1]
    }

    /// A generator with no bath at all: pure phase evolution.
    pub fn closed(basis: &ExcitonBasis, units: UnitSystem) -> Self {
        RedfieldGenerator {
            population_rates: [[0.0; 2]; 2],
            gamma_ee_prime: 0.0,
            gamma_pg: [0.0; 2],
            gamma_fp: [0.0; 2],
            energies: [0.0, basis.energy_e, basis.energy_e_prime, basis.energy_f],
            units,
        }
    }

    /// Replaces all four optical dephasing rates by one value given in cm⁻¹.
    pub fn with_optical_dephasing(mut self, gamma_cm: f64) -> Result<Self> {
        if !(gamma_cm >= 0.0 && gamma_cm.is_finite()) {
            return Err(Error::invalid(
                "optical_dephasing",
                format!("must be finite and >= 0, got {gamma_cm}"),
            ));
        }
        let g = self.units.angular(gamma_cm);
        self.gamma_pg = [g; 2];
        self.gamma_fp = [g; 2];
        Ok(self)
    }

    /// E_i − E_j in cm⁻¹.
    pub fn frequency(&self, i: Level, j: Level) -> f64 {
        self.energies[level_slot(i)] - self.energies[level_slot(j)]
    }

    /// Γ_ij for an optical coherence or the exciton coherence, rad/fs.
    pub fn dephasing(&self, i: Level, j: Level) -> Result<f64> {
        use Level::*;
        let (a, b) = if level_slot(i) <= level_slot(j) { (i, j) } else { (j, i) };
        match (a, b) {
            (G, E) => Ok(self.gamma_pg[0]),
            (G, EPrime) => Ok(self.gamma_pg[1]),
            (E, F) => Ok(self.gamma_fp[0]),
            (EPrime, F) => Ok(self.gamma_fp[1]),
            (E, EPrime) => Ok(self.gamma_ee_prime),
            _ => Err(Error::UnknownCoherence(i, j)),
        }
    }

    fn check(&self) -> Result<()> {
        let k = &self.population_rates;
        let all = [
            k[1][0],
            k[0][1],
            self.gamma_ee_prime,
            self.gamma_pg[0],
            self.gamma_pg[1],
            self.gamma_fp[0],
            self.gamma_fp[1],
        ];
        if all.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::InconsistentRates("negative or non-finite rate"));
        }
        for col in 0..2 {
            let s = k[0][col] + k[1][col];
            if s.abs() > 1e-14 * (k[0][col].abs() + k[1][col].abs()) {
                return Err(Error::InconsistentRates("population rate columns must sum to zero"));
            }
        }
        if self.gamma_ee_prime + 1e-15 < 0.5 * (k[1][0] + k[0][1]) {
            return Err(Error::InconsistentRates(
                "coherence dephasing below half the population decay",
            ));
        }
        Ok(())
    }
}

/// Secular Redfield rates for the dimer with identical independent Ohmic baths on
/// both sites.
pub fn build_redfield_generator(
    basis: &ExcitonBasis,
    bath: &BathParams,
    units: UnitSystem,
) -> Result<RedfieldGenerator> {
    bath.validate()?;
    let w = basis.splitting();
    if !(w > 0.0) {
        return Err(Error::DegenerateModel);
    }
    let kt = units.thermal_energy(bath.temperature);
    let (s, c) = basis.mixing_angle_theta.sin_cos();
    let sin2 = (2.0 * basis.mixing_angle_theta).sin();
    let cos2 = (2.0 * basis.mixing_angle_theta).cos();

    let jw = spectral_density(w, bath)?;
    let nbar = bose_occupation(w, kt);
    let k_down = sin2 * sin2 * jw * (nbar + 1.0);
    let k_up = sin2 * sin2 * jw * nbar;
    // Zero-frequency limit of 2J(ω)(n̄+1) is 2λkT/ω_c.
    let flat = bath.reorganization_energy * kt / bath.cutoff_freq;

    let pure_ee = 2.0 * cos2 * cos2 * flat;
    let pure_opt = (c.powi(4) + s.powi(4)) * flat;
    let gamma_ee = 0.5 * (k_down + k_up) + pure_ee;
    let gamma_eg = 0.5 * k_down + pure_opt;
    let gamma_epg = 0.5 * k_up + pure_opt;

    let a = |x: f64| units.angular(x);
    let gen = RedfieldGenerator {
        population_rates: [[-a(k_down), a(k_up)], [a(k_down), -a(k_up)]],
        gamma_ee_prime: a(gamma_ee),
        gamma_pg: [a(gamma_eg), a(gamma_epg)],
        gamma_fp: [a(gamma_eg), a(gamma_epg)],
        energies: [0.0, basis.energy_e, basis.energy_e_prime, basis.energy_f],
        units,
    };
    gen.check()?;
    Ok(gen)
}

/// χ(T) of the secular generator. Populations and the exciton coherence
/// evolve independently, each in closed form.
pub fn propagate_process_tensor(gen: &RedfieldGenerator, t: f64) -> Result<ProcessTensor> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            quantity: "waiting time",
            value: t,
        });
    }
    let kd = gen.rate_down();
    let ku = gen.rate_up();
    let total = kd + ku;
    let mut el = [C64::new(0.0, 0.0); 16];
    use Exciton::{EPrime as Ep, E};
    // exp(K T) = eq·1ᵀ + e^{−sT}(I − eq·1ᵀ), with eq the stationary populations.
    let (eq, decay) = if total > 0.0 {
        ([ku / total, kd / total], (-total * t).exp())
    } else {
        ([0.0, 0.0], 1.0)
    };
    for n in Exciton::ALL {
        for nu in Exciton::ALL {
            let delta = if n == nu { 1.0 } else { 0.0 };
            let p = if total > 0.0 {
                eq[n.index()] + decay * (delta - eq[n.index()])
            } else {
                delta
            };
            el[chi_index(n, n, nu, nu)] = C64::new(p, 0.0);
        }
    }
    let w = gen.units.angular(gen.frequency(Level::E, Level::EPrime));
    let coh = C64::new(-gen.gamma_ee_prime * t, -w * t).exp();
    el[chi_index(E, Ep, E, Ep)] = coh;
    el[chi_index(Ep, E, Ep, E)] = coh.conj();
    Ok(ProcessTensor::from_elements(t, el))
}

/// G_ij(t) = Θ(t) exp[(−iϖ_ij − Γ_ij)t] for optical coherences |i⟩⟨j|.
pub fn optical_coherence_propagator(i: Level, j: Level, duration: f64, gen: &RedfieldGenerator) -> Result<C64> {
    use Level::*;
    let allowed = matches!(
        (i, j),
        (G, E) | (G, EPrime) | (E, G) | (EPrime, G) | (F, E) | (F, EPrime) | (E, F) | (EPrime, F)
    );
    if !allowed {
        return Err(Error::UnknownCoherence(i, j));
    }
    if duration < 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let gamma = gen.dephasing(i, j)?;
    let w = gen.units.angular(gen.frequency(i, j));
    Ok(C64::new(-gamma * duration, -w * duration).exp())
}

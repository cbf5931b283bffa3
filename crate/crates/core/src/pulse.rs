//! The two-waveform pulse toolbox and the experiment matrix C.

use alloc::format;
use nalgebra::{Matrix2, SMatrix};
#[allow(unused_imports)]
use num_traits::Float;

use crate::levels::{Exciton, PathwayLabels};
use crate::linalg;
use crate::model::ExcitonBasis;
use crate::units::UnitSystem;
use crate::{Error, Result, C64};

/// 16×16 complex matrix, rows (ω₁ω₂ω₃ω₄) and columns (p,q,r,s).
pub type Matrix16 = SMatrix<C64, 16, 16>;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulseToolbox {
    /// cm⁻¹.
    pub freq_plus: f64,
    /// cm⁻¹.
    pub freq_minus: f64,
    /// Gaussian width σ, fs.
    pub pulse_width_sigma: f64,
    pub field_strength_lambda: f64,
}

impl PulseToolbox {
    pub const fn reference() -> Self {
        PulseToolbox {
            freq_plus: 13480.0,
            freq_minus: 12130.0,
            pulse_width_sigma: 40.0,
            field_strength_lambda: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pulse_width_sigma > 0.0 && self.pulse_width_sigma.is_finite()) {
            return Err(Error::invalid(
                "pulse_width_sigma",
                format!("must be finite and > 0, got {}", self.pulse_width_sigma),
            ));
        }
        if !self.freq_plus.is_finite() || !self.freq_minus.is_finite() {
            return Err(Error::invalid("freq_plus", "carrier frequencies must be finite"));
        }
        if !self.field_strength_lambda.is_finite() {
            return Err(Error::invalid("field_strength_lambda", "must be finite"));
        }
        Ok(())
    }

    pub fn carrier_freq(&self, c: Carrier) -> f64 {
        match c {
            Carrier::Plus => self.freq_plus,
            Carrier::Minus => self.freq_minus,
        }
    }

    /// C^p_ω for the exciton label p, i.e. for any transition resonant with ϖ_pg.
    pub fn coefficient(&self, basis: &ExcitonBasis, p: Exciton, c: Carrier, units: &UnitSystem) -> C64 {
        pulse_coefficient(basis.exciton_energy(p), self.carrier_freq(c), self, units)
    }
}

impl Default for PulseToolbox {
    fn default() -> Self {
        Self::reference()
    }
}

/// Which of the two waveforms a pulse uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Carrier {
    Plus,
    Minus,
}

impl Carrier {
    pub const ALL: [Carrier; 2] = [Carrier::Plus, Carrier::Minus];

    pub const fn index(self) -> usize {
        match self {
            Carrier::Plus => 0,
            Carrier::Minus => 1,
        }
    }

    pub const fn symbol(self) -> char {
        match self {
            Carrier::Plus => '+',
            Carrier::Minus => '-',
        }
    }
}

/// Row label of the experiment matrix: the carriers of the four pulses.
pub fn carrier_tuple(row: usize) -> [Carrier; 4] {
    let c = |bit: usize| {
        if (row >> bit) & 1 == 0 {
            Carrier::Plus
        } else {
            Carrier::Minus
        }
    };
    [c(3), c(2), c(1), c(0)]
}

/// Text label such as `+-+-` for a row index.
pub fn carrier_label(row: usize) -> [u8; 4] {
    carrier_tuple(row).map(|c| c.symbol() as u8)
}

/// Parses a `+-+-` style label back into its row index.
pub fn parse_carrier_label(label: &str) -> Option<usize> {
    let b = label.as_bytes();
    if b.len() != 4 {
        return None;
    }
    b.iter().try_fold(0usize, |acc, ch| match ch {
        b'+' => Some(acc * 2),
        b'-' => Some(acc * 2 + 1),
        _ => None,
    })
}

/// Excitation coefficient iλ√(2πσ²)·exp(−σ²(ϖ − ω)²/2), the Fourier transform
/// of a unit-peak Gaussian envelope of width σ. Frequencies in cm⁻¹, σ in fs.
pub fn pulse_coefficient(transition_cm: f64, carrier_cm: f64, toolbox: &PulseToolbox, units: &UnitSystem) -> C64 {
    let sigma = toolbox.pulse_width_sigma;
    let dw = units.angular(transition_cm - carrier_cm);
    let mag = toolbox.field_strength_lambda
        * (2.0 * core::f64::consts::PI * sigma * sigma).sqrt()
        * (-0.5 * sigma * sigma * dw * dw).exp();
    C64::new(0.0, mag)
}

/// The experiment matrix and its 2×2 generator.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    /// c[ω][p] = C^p_ω, row + then −, column e then e′.
    pub base: Matrix2<C64>,
    pub entries: Matrix16,
    pub determinant: C64,
    pub base_condition: f64,
}

/// Relative determinant threshold used by [`build_c_matrix`].
pub const DEFAULT_SINGULAR_THRESHOLD: f64 = 1e-12;

pub fn build_c_matrix(basis: &ExcitonBasis, toolbox: &PulseToolbox, units: &UnitSystem) -> Result<CMatrix> {
    build_c_matrix_with(basis, toolbox, units, DEFAULT_SINGULAR_THRESHOLD)
}

/// As [`build_c_matrix`], rejecting |det c| < threshold·‖c‖²_F.
pub fn build_c_matrix_with(
    basis: &ExcitonBasis,
    toolbox: &PulseToolbox,
    units: &UnitSystem,
    threshold: f64,
) -> Result<CMatrix> {
    toolbox.validate()?;
    let base = Matrix2::from_fn(|w, p| toolbox.coefficient(basis, Exciton::from_index(p), Carrier::ALL[w], units));
    let det = base.determinant();
    let norm2 = base.norm_squared();
    if toolbox.freq_plus == toolbox.freq_minus || !(det.norm() >= threshold * norm2) || norm2 == 0.0 {
        return Err(Error::SingularToolbox {
            freq_plus: toolbox.freq_plus,
            freq_minus: toolbox.freq_minus,
            determinant: det.norm(),
        });
    }
    Ok(CMatrix {
        base,
        entries: kron4(&base),
        determinant: det,
        base_condition: linalg::condition_number2(&base),
    })
}

/// Fourfold Kronecker product, row index ω₁·8+ω₂·4+ω₃·2+ω₄.
pub fn kron4(m: &Matrix2<C64>) -> Matrix16 {
    Matrix16::from_fn(|r, c| {
        (0..4).fold(C64::new(1.0, 0.0), |acc, k| {
            let shift = 3 - k;
            acc * m[((r >> shift) & 1, (c >> shift) & 1)]
        })
    })
}

impl CMatrix {
    /// Exact inverse from the Kronecker structure.
    pub fn inverse(&self) -> Matrix16 {
        let inv = self.base.try_inverse().expect("nonsingular by construction");
        kron4(&inv)
    }

    /// cond(base)⁴, the 2-norm condition number of the full matrix.
    pub fn condition_number(&self) -> f64 {
        self.base_condition.powi(4)
    }

    /// Entry for an experiment row and a pathway column.
    pub fn entry(&self, row: usize, labels: PathwayLabels) -> C64 {
        self.entries[(row, labels.index())]
    }
}

//! From measured signals back to χ(T).

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg;
use crate::orientation::{solve_chi_blocks, MBlocks};
use crate::pulse::CMatrix;
use crate::response::{PathwaySignalSet, SignalTable};
use crate::tensor::{validate_tensor, ProcessTensor};
use crate::{Error, Result, C64};

/// How C is inverted.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Inversion {
    /// P = C⁻¹S through the Kronecker structure.
    #[default]
    Exact,
    /// P = (CᴴC + α‖C‖²I)⁻¹CᴴS with a relative ridge α.
    Tikhonov { alpha: f64 },
}

/// Recovers the sixteen averaged pathway amplitudes from one row of signals.
pub fn invert_row(s: &[C64; 16], c: &CMatrix, how: Inversion) -> Result<[C64; 16]> {
    let sv = nalgebra::SVector::<C64, 16>::from_column_slice(s);
    let p = match how {
        Inversion::Exact => c.inverse() * sv,
        Inversion::Tikhonov { alpha } => {
            if !(alpha >= 0.0) {
                return Err(Error::invalid("alpha", "ridge parameter must be >= 0"));
            }
            let a = DMatrix::from_iterator(16, 16, c.entries.iter().copied());
            let ah = a.adjoint();
            let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm_sqr()));
            let lhs = &ah * &a + DMatrix::identity(16, 16) * C64::new(alpha * scale, 0.0);
            let rhs = &ah * DVector::from_column_slice(s);
            let x = linalg::solve(&lhs, &rhs).ok_or(Error::SingularToolbox {
                freq_plus: f64::NAN,
                freq_minus: f64::NAN,
                determinant: 0.0,
            })?;
            nalgebra::SVector::<C64, 16>::from_iterator(x.iter().copied())
        }
    };
    let mut out = [C64::new(0.0, 0.0); 16];
    out.copy_from_slice(p.as_slice());
    Ok(out)
}

/// P per waiting time from a signal table.
pub fn invert_signals(table: &SignalTable, c: &CMatrix, how: Inversion) -> Result<Vec<PathwaySignalSet>> {
    table
        .waiting_times
        .iter()
        .zip(table.rows.iter())
        .map(|(&t, row)| {
            Ok(PathwaySignalSet {
                waiting_time: t,
                tau: 0.0,
                t: 0.0,
                gamma: table.gamma,
                averaged: true,
                values: invert_row(row, c, how)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub gamma: f64,
    pub chi: Vec<ProcessTensor>,
    /// Max elementwise deviation from the reference, per T.
    pub residuals: Option<Vec<f64>>,
    pub hermiticity_defect: Vec<f64>,
    pub trace_defect: Vec<f64>,
    pub min_choi_eigenvalue: Vec<f64>,
    /// Largest imaginary part left in the real unknowns, per T.
    pub imaginary_leak: Vec<f64>,
    pub c_condition: f64,
    pub m_conditions: [f64; 3],
}

impl ReconstructionReport {
    pub fn max_residual(&self) -> Option<f64> {
        self.residuals.as_ref().map(|r| r.iter().copied().fold(0.0, f64::max))
    }
}

/// Full inversion S → P → χ with validation at every waiting time.
pub fn reconstruct(
    table: &SignalTable,
    c: &CMatrix,
    m: &MBlocks,
    reference: Option<&[ProcessTensor]>,
    how: Inversion,
) -> Result<ReconstructionReport> {
    if let Some(r) = reference {
        if r.len() != table.len() {
            return Err(Error::DimensionMismatch {
                expected: table.len(),
                found: r.len(),
            });
        }
    }
    let sets = invert_signals(table, c, how)?;
    let mut report = ReconstructionReport {
        gamma: table.gamma,
        chi: Vec::with_capacity(sets.len()),
        residuals: reference.map(|_| Vec::with_capacity(sets.len())),
        hermiticity_defect: Vec::with_capacity(sets.len()),
        trace_defect: Vec::with_capacity(sets.len()),
        min_choi_eigenvalue: Vec::with_capacity(sets.len()),
        imaginary_leak: Vec::with_capacity(sets.len()),
        c_condition: c.condition_number(),
        m_conditions: m.conditions,
    };
    for (k, p) in sets.iter().enumerate() {
        let sol = solve_chi_blocks(p, m)?;
        let d = validate_tensor(&sol.chi);
        if let (Some(res), Some(r)) = (report.residuals.as_mut(), reference) {
            res.push(sol.chi.max_deviation(&r[k]));
        }
        report.hermiticity_defect.push(d.hermiticity_defect);
        report.trace_defect.push(d.trace_defect);
        report.min_choi_eigenvalue.push(d.min_choi_eigenvalue);
        report.imaginary_leak.push(sol.imaginary_leak);
        report.chi.push(sol.chi);
    }
    Ok(report)
}

/// Multiplicative noise for robustness studies.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseModel {
    /// Relative Gaussian width applied independently to every signal sample.
    pub relative_width: f64,
    /// Relative Gaussian width of a laser-intensity factor shared by the
    /// sixteen experiments at one waiting time.
    #[cfg_attr(feature = "serde", serde(default))]
    pub intensity_fluctuation: f64,
}

impl NoiseModel {
    pub fn apply<R: Rng + ?Sized>(&self, table: &mut SignalTable, rng: &mut R) {
        for row in table.rows.iter_mut() {
            let n: f64 = StandardNormal.sample(rng);
            let shared = 1.0 + self.intensity_fluctuation * n;
            for s in row.iter_mut() {
                let n: f64 = StandardNormal.sample(rng);
                *s *= shared * (1.0 + self.relative_width * n);
            }
        }
    }
}

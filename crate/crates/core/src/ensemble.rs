//! Diagonal-disorder ensembles and deterministic averaging.

use alloc::format;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bath::{build_redfield_generator, propagate_process_tensor, BathParams, RedfieldGenerator};
use crate::model::{build_exciton_basis, DimerParams, ExcitonBasis};
use crate::pulse::{build_c_matrix, CMatrix, PulseToolbox};
use crate::response::{ForwardModel, IsotropicAverage, PathwaySignalSet, ResponseMode, SignalTable};
use crate::tensor::ProcessTensor;
use crate::units::UnitSystem;
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleSpec {
    pub n_members: usize,
    /// Standard deviation of each site energy, cm⁻¹.
    pub sigma_inh: f64,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_members == 0 {
            return Err(Error::invalid("n_members", "need at least one member"));
        }
        if !(self.sigma_inh >= 0.0 && self.sigma_inh.is_finite()) {
            return Err(Error::invalid(
                "sigma_inh",
                format!("must be finite and >= 0, got {}", self.sigma_inh),
            ));
        }
        Ok(())
    }
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            n_members: 10_000,
            sigma_inh: 40.0,
            seed: 0x2DF5_0A7C,
        }
    }
}

/// Member `i` of the ensemble. Each member owns ChaCha stream `i` under the
/// common seed, so the draw does not depend on evaluation order.
pub fn member(base: &DimerParams, spec: &EnsembleSpec, i: usize) -> DimerParams {
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    rng.set_stream(i as u64);
    let n1: f64 = StandardNormal.sample(&mut rng);
    let n2: f64 = StandardNormal.sample(&mut rng);
    DimerParams {
        site_energy_1: base.site_energy_1 + spec.sigma_inh * n1,
        site_energy_2: base.site_energy_2 + spec.sigma_inh * n2,
        ..*base
    }
}

pub fn sample_members(base: &DimerParams, spec: &EnsembleSpec) -> Result<Vec<DimerParams>> {
    spec.validate()?;
    Ok((0..spec.n_members).map(|i| member(base, spec, i)).collect())
}

/// Pairwise reduction with a fixed split (left half, right half). The result
/// depends only on the order of `items`, never on scheduling.
pub fn tree_reduce<T, F>(items: &[T], combine: &F) -> Option<T>
where
    T: Clone,
    F: Fn(&T, &T) -> T,
{
    match items.len() {
        0 => None,
        1 => Some(items[0].clone()),
        n => {
            let (l, r) = items.split_at(n / 2);
            let a = tree_reduce(l, combine)?;
            let b = tree_reduce(r, combine)?;
            Some(combine(&a, &b))
        }
    }
}

/// Everything that stays fixed across members.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSetup {
    pub bath: BathParams,
    pub toolbox: PulseToolbox,
    pub units: UnitSystem,
    pub waiting_times: Vec<f64>,
    pub gammas: Vec<f64>,
    pub tau: f64,
    pub t: f64,
    pub mode: ResponseMode,
    /// Replaces the Redfield optical dephasing (cm⁻¹) when set.
    pub optical_dephasing: Option<f64>,
}

/// Model objects of one dimer.
#[derive(Debug, Clone)]
pub struct DimerModel {
    pub basis: ExcitonBasis,
    pub gen: RedfieldGenerator,
    pub cmatrix: CMatrix,
}

impl SimulationSetup {
    pub fn model(&self, dimer: &DimerParams) -> Result<DimerModel> {
        let basis = build_exciton_basis(dimer)?;
        let mut gen = build_redfield_generator(&basis, &self.bath, self.units)?;
        if let Some(g) = self.optical_dephasing {
            gen = gen.with_optical_dephasing(g)?;
        }
        let cmatrix = build_c_matrix(&basis, &self.toolbox, &self.units)?;
        Ok(DimerModel { basis, gen, cmatrix })
    }

    /// Ground-truth tensors over the waiting-time grid.
    pub fn truth(&self, gen: &RedfieldGenerator) -> Result<Vec<ProcessTensor>> {
        self.waiting_times
            .iter()
            .map(|&t| propagate_process_tensor(gen, t))
            .collect()
    }

    /// Isotropically averaged signals of one dimer for every Γ.
    pub fn simulate(&self, dimer: &DimerParams) -> Result<MemberOutput> {
        let model = self.model(dimer)?;
        let truth = self.truth(&model.gen)?;
        let fm = ForwardModel {
            basis: &model.basis,
            gen: &model.gen,
            cmatrix: &model.cmatrix,
            tau: self.tau,
            t: self.t,
            mode: self.mode,
        };
        let iso = IsotropicAverage::zzzz();
        let mut per_gamma = Vec::with_capacity(self.gammas.len());
        for &g in &self.gammas {
            per_gamma.push(fm.simulate(g, &truth, &iso)?);
        }
        Ok(MemberOutput { truth, per_gamma })
    }
}

/// Output of one simulated dimer (or an ensemble mean of them).
#[derive(Debug, Clone, PartialEq)]
pub struct MemberOutput {
    pub truth: Vec<ProcessTensor>,
    /// (pathways per T, signal table) for each Γ of the setup.
    pub per_gamma: Vec<(Vec<PathwaySignalSet>, SignalTable)>,
}

fn add_arrays(a: &[C64; 16], b: &[C64; 16]) -> [C64; 16] {
    let mut o = *a;
    for (x, y) in o.iter_mut().zip(b.iter()) {
        *x += y;
    }
    o
}

fn scale_array(a: &mut [C64; 16], f: f64) {
    for x in a.iter_mut() {
        *x *= f;
    }
}

impl MemberOutput {
    /// Elementwise sum; both outputs must come from the same setup.
    pub fn sum(&self, other: &MemberOutput) -> MemberOutput {
        let truth = self
            .truth
            .iter()
            .zip(other.truth.iter())
            .map(|(a, b)| a.combine(1.0, b, 1.0))
            .collect();
        let per_gamma = self
            .per_gamma
            .iter()
            .zip(other.per_gamma.iter())
            .map(|((pa, ta), (pb, tb))| {
                let sets = pa
                    .iter()
                    .zip(pb.iter())
                    .map(|(x, y)| PathwaySignalSet {
                        values: add_arrays(&x.values, &y.values),
                        ..*x
                    })
                    .collect();
                let table = SignalTable {
                    gamma: ta.gamma,
                    waiting_times: ta.waiting_times.clone(),
                    rows: ta
                        .rows
                        .iter()
                        .zip(tb.rows.iter())
                        .map(|(x, y)| add_arrays(x, y))
                        .collect(),
                };
                (sets, table)
            })
            .collect();
        MemberOutput { truth, per_gamma }
    }

    pub fn scale(&mut self, f: f64) {
        for t in self.truth.iter_mut() {
            *t = t.combine(f, t, 0.0);
        }
        for (sets, table) in self.per_gamma.iter_mut() {
            for s in sets.iter_mut() {
                scale_array(&mut s.values, f);
            }
            for r in table.rows.iter_mut() {
                scale_array(r, f);
            }
        }
    }
}

/// Arithmetic mean with the fixed pairwise reduction order.
pub fn mean_outputs(outputs: &[MemberOutput]) -> Result<MemberOutput> {
    let mut total = tree_reduce(outputs, &|a: &MemberOutput, b: &MemberOutput| a.sum(b))
        .ok_or(Error::invalid("n_members", "need at least one member"))?;
    total.scale(1.0 / outputs.len() as f64);
    Ok(total)
}

/// Mean of signal tables with the fixed pairwise reduction order.
pub fn average_signals(tables: &[SignalTable]) -> Result<SignalTable> {
    let first = tables
        .first()
        .ok_or(Error::invalid("n_members", "need at least one member"))?;
    for t in tables {
        if t.rows.len() != first.rows.len() {
            return Err(Error::DimensionMismatch {
                expected: first.rows.len(),
                found: t.rows.len(),
            });
        }
    }
    let n = tables.len() as f64;
    let rows = (0..first.rows.len())
        .map(|k| {
            let col: Vec<[C64; 16]> = tables.iter().map(|t| t.rows[k]).collect();
            let mut s = tree_reduce(&col, &add_arrays).unwrap();
            scale_array(&mut s, 1.0 / n);
            s
        })
        .collect();
    Ok(SignalTable {
        gamma: first.gamma,
        waiting_times: first.waiting_times.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_width_reproduces_base() {
        let base = DimerParams::reference();
        let spec = EnsembleSpec {
            n_members: 5,
            sigma_inh: 0.0,
            seed: 3,
        };
        for m in sample_members(&base, &spec).unwrap() {
            assert_eq!(m, base);
        }
    }

    #[test]
    fn deterministic_and_order_free() {
        let base = DimerParams::reference();
        let spec = EnsembleSpec::default();
        let a = sample_members(&base, &EnsembleSpec { n_members: 50, ..spec }).unwrap();
        let b = sample_members(&base, &EnsembleSpec { n_members: 50, ..spec }).unwrap();
        assert_eq!(a, b);
        assert_eq!(member(&base, &spec, 37), a[37]);
        let other = sample_members(
            &base,
            &EnsembleSpec {
                n_members: 50,
                seed: 1,
                ..spec
            },
        )
        .unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn sample_mean_within_standard_error() {
        let base = DimerParams::reference();
        let spec = EnsembleSpec::default();
        let m = sample_members(&base, &spec).unwrap();
        let n = m.len() as f64;
        let mean1 = m.iter().map(|d| d.site_energy_1).sum::<f64>() / n;
        let mean2 = m.iter().map(|d| d.site_energy_2).sum::<f64>() / n;
        let bound = 3.0 * spec.sigma_inh / n.sqrt();
        assert!((mean1 - 12881.0).abs() < bound, "{mean1}");
        assert!((mean2 - 12719.0).abs() < bound, "{mean2}");
        assert!(m.iter().all(|d| d.coupling_j == base.coupling_j));
    }

    #[test]
    fn tree_reduce_is_fixed_order() {
        let v: Vec<f64> = (0..1000).map(|k| 1.0 / (1.0 + k as f64)).collect();
        let a = tree_reduce(&v, &|x: &f64, y: &f64| x + y).unwrap();
        let b = tree_reduce(&v, &|x: &f64, y: &f64| x + y).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let mut rev = v.clone();
        rev.reverse();
        let c = tree_reduce(&rev, &|x: &f64, y: &f64| x + y).unwrap();
        assert!((a - c).abs() <= 1e-12 * a.abs());
        assert_eq!(tree_reduce::<f64, _>(&[], &|x, y| x + y), None);
    }
}

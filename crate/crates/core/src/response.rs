//! Fourth-order fluorescence response of the dimer.
//!
//! Pulses 1 and 2 prepare `|q⟩⟨p|` (and a ground-state hole when p = q), χ(T)
//! propagates it, pulses 3 and 4 carry it to a population and the detector
//! weighs that population. The rephasing channel fixes which side each pulse
//! acts on: pulses 1 and 4 carry μ⁻ (bra excitation or ket de-excitation),
//! pulses 2 and 3 carry μ⁺.
//!
//! Every pathway amplitude is linear in the sixteen single-exciton χ elements.
//! Dipole projections stay symbolic ([`LinearTerm::dipoles`]) until a
//! [`DipoleProjection`] evaluates them, so the same terms serve fixed
//! orientations, isotropic averages and the M-block derivation.

use alloc::vec::Vec;
use nalgebra::{Matrix3, SVector, Vector3};

use crate::bath::{optical_coherence_propagator, RedfieldGenerator};
use crate::levels::{Exciton, Level, PathwayLabels, Transition};
use crate::model::ExcitonBasis;
use crate::orientation::iso_average_four;
use crate::pulse::{CMatrix, Carrier, PulseToolbox};
use crate::tensor::{chi_index, ProcessTensor};
use crate::{Error, Result, C64};

/// Which side of the density matrix a field interaction acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Ket,
    Bra,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagramFamily {
    GroundStateBleach,
    StimulatedEmission,
    ExcitedStateAbsorption,
}

impl DiagramFamily {
    pub const fn tag(self) -> &'static str {
        match self {
            DiagramFamily::GroundStateBleach => "GSB",
            DiagramFamily::StimulatedEmission => "SE",
            DiagramFamily::ExcitedStateAbsorption => "ESA",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interaction {
    pub side: Side,
    pub transition: Transition,
}

/// One detection diagram: how pulses 3 and 4 take a state prepared at the end
/// of the waiting time to a detected population.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Diagram {
    pub family: DiagramFamily,
    /// Ket and bra of the state at the end of T; (g, g) for the hole.
    pub start: (Level, Level),
    pub pulses: [Interaction; 2],
    /// Coherence (ket, bra) carried between pulses 3 and 4.
    pub during_t: (Level, Level),
    pub final_population: Level,
}

impl Diagram {
    /// (−1) per bra interaction among pulses 3 and 4.
    pub fn sign(&self) -> f64 {
        self.pulses
            .iter()
            .fold(1.0, |s, i| if i.side == Side::Bra { -s } else { s })
    }

    /// Pulse labels (r, s) selected by the two transitions.
    pub fn labels(&self) -> (Exciton, Exciton) {
        (
            self.pulses[0].transition.resonance(),
            self.pulses[1].transition.resonance(),
        )
    }
}

fn raise(from: Level) -> impl Iterator<Item = Transition> {
    Transition::ALL.into_iter().filter(move |t| t.levels().1 == from)
}

fn lower(from: Level) -> impl Iterator<Item = Transition> {
    Transition::ALL.into_iter().filter(move |t| t.levels().0 == from)
}

/// Enumerates every detection diagram that ends in a population with nonzero
/// detection weight. There are fourteen: two GSB, four SE and eight ESA.
pub fn diagrams() -> Vec<Diagram> {
    let mut starts = Vec::new();
    starts.push((Level::G, Level::G));
    for a in Exciton::ALL {
        for b in Exciton::ALL {
            starts.push((a.level(), b.level()));
        }
    }
    let mut out = Vec::new();
    for &(ket0, bra0) in &starts {
        // Pulse 3 (μ⁺): ket excitation or bra de-excitation.
        let mut third = Vec::new();
        for t in raise(ket0) {
            third.push((
                Interaction {
                    side: Side::Ket,
                    transition: t,
                },
                (t.levels().0, bra0),
            ));
        }
        for t in lower(bra0) {
            third.push((
                Interaction {
                    side: Side::Bra,
                    transition: t,
                },
                (ket0, t.levels().1),
            ));
        }
        for (i3, (ket1, bra1)) in third {
            // Pulse 4 (μ⁻): ket de-excitation or bra excitation.
            let mut fourth = Vec::new();
            for t in lower(ket1) {
                fourth.push((
                    Interaction {
                        side: Side::Ket,
                        transition: t,
                    },
                    (t.levels().1, bra1),
                ));
            }
            for t in raise(bra1) {
                fourth.push((
                    Interaction {
                        side: Side::Bra,
                        transition: t,
                    },
                    (ket1, t.levels().0),
                ));
            }
            for (i4, (ket2, bra2)) in fourth {
                if ket2 != bra2 || ket2 == Level::G {
                    continue;
                }
                let family = if ket0 == Level::G {
                    DiagramFamily::GroundStateBleach
                } else if i3.side == Side::Bra {
                    DiagramFamily::StimulatedEmission
                } else {
                    DiagramFamily::ExcitedStateAbsorption
                };
                out.push(Diagram {
                    family,
                    start: (ket0, bra0),
                    pulses: [i3, i4],
                    during_t: (ket1, bra1),
                    final_population: ket2,
                });
            }
        }
    }
    out
}

/// Fluorescence weight of a population: 0 for g, 1 for the single excitons, Γ
/// for the biexciton.
pub fn detection_weight(level: Level, gamma: f64) -> f64 {
    match level {
        Level::G => 0.0,
        Level::E | Level::EPrime => 1.0,
        Level::F => gamma,
    }
}

/// A signed population produced by one diagram, before detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalStateTerm {
    pub family: DiagramFamily,
    pub population: Level,
    pub amplitude: C64,
}

/// Contracts final populations with Â = Σ_ν Γ_ν |ν⟩⟨ν|.
pub fn detect_observable(terms: &[FinalStateTerm], gamma: f64) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for t in terms {
        let ok = match t.family {
            DiagramFamily::GroundStateBleach | DiagramFamily::StimulatedEmission => t.population != Level::F,
            DiagramFamily::ExcitedStateAbsorption => t.population != Level::G,
        };
        if !ok {
            return Err(Error::InconsistentFinalState {
                family: t.family.tag(),
                population: t.population,
            });
        }
        acc += t.amplitude * detection_weight(t.population, gamma);
    }
    Ok(acc)
}

/// State left by pulses 1 and 2 and the coherence time τ:
/// −C^p C^q (μ_pg·e₁)(μ_qg·e₂) G_gp(τ) (|q⟩⟨p| − δ_pq |g⟩⟨g|).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveInitialState {
    pub p: Exciton,
    pub q: Exciton,
    pub carriers: [Carrier; 2],
    pub coherence_time_tau: f64,
    /// Amplitude on |q⟩⟨p|.
    pub coherence: C64,
    /// Amplitude on |g⟩⟨g|, present iff p = q.
    pub hole: Option<C64>,
}

impl EffectiveInitialState {
    /// Population trace of the state.
    pub fn trace(&self) -> C64 {
        let diag = if self.p == self.q {
            self.coherence
        } else {
            C64::new(0.0, 0.0)
        };
        diag + self.hole.unwrap_or_default()
    }
}

/// Prepares the effective initial state. `polarizations` projects the
/// site-frame dipoles; `None` defers the projections (factor 1). A negative τ
/// gives the zero state.
#[allow(clippy::too_many_arguments)]
pub fn prepare_initial_state(
    p: Exciton,
    q: Exciton,
    carriers: [Carrier; 2],
    tau: f64,
    basis: &ExcitonBasis,
    gen: &RedfieldGenerator,
    toolbox: &PulseToolbox,
    polarizations: Option<[Vector3<f64>; 2]>,
) -> Result<EffectiveInitialState> {
    let proj = match polarizations {
        Some([e1, e2]) => basis.dipole(p.from_ground()).dot(&e1) * basis.dipole(q.from_ground()).dot(&e2),
        None => 1.0,
    };
    let units = &gen.units;
    let amp = if tau < 0.0 {
        C64::new(0.0, 0.0)
    } else {
        -toolbox.coefficient(basis, p, carriers[0], units)
            * toolbox.coefficient(basis, q, carriers[1], units)
            * proj
            * optical_coherence_propagator(Level::G, p.level(), tau, gen)?
    };
    Ok(EffectiveInitialState {
        p,
        q,
        carriers,
        coherence_time_tau: tau,
        coherence: amp,
        hole: (p == q).then_some(-amp),
    })
}

/// How the printed pathway formulas are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ResponseMode {
    /// Diagrammatic derivation: ground row by closure, ESA propagating as
    /// |f⟩⟨s̄| and carrying χ_{r̄s̄qp}.
    #[default]
    Derived,
    /// The formulas exactly as printed, kept for comparison. Not linear in χ.
    Verbatim,
}

/// One symbolic contribution: coefficient × Π(μ_k·e_k) × χ[chi_index].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearTerm {
    pub dipoles: [Transition; 4],
    pub chi_index: usize,
    pub coefficient: C64,
    pub family: DiagramFamily,
}

/// Evaluates the product of four dipole projections.
pub trait DipoleProjection {
    fn project(&self, dipoles: [Vector3<f64>; 4]) -> f64;
    /// Whether this is an orientational average.
    fn is_average(&self) -> bool;
}

/// A single molecule: site-frame dipoles are rotated into the lab frame and
/// projected on the four polarizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedOrientation {
    pub rotation: Matrix3<f64>,
    pub polarizations: [Vector3<f64>; 4],
}

impl DipoleProjection for FixedOrientation {
    fn project(&self, d: [Vector3<f64>; 4]) -> f64 {
        (0..4)
            .map(|k| (self.rotation * d[k]).dot(&self.polarizations[k]))
            .product()
    }
    fn is_average(&self) -> bool {
        false
    }
}

/// Isotropic average over molecular orientations for given lab polarizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicAverage {
    pub polarizations: [Vector3<f64>; 4],
}

impl IsotropicAverage {
    /// All four pulses polarized along z, as in collinear fluorescence setups.
    pub fn zzzz() -> Self {
        IsotropicAverage {
            polarizations: [Vector3::z(); 4],
        }
    }
}

impl DipoleProjection for IsotropicAverage {
    fn project(&self, d: [Vector3<f64>; 4]) -> f64 {
        iso_average_four(d, self.polarizations)
    }
    fn is_average(&self) -> bool {
        true
    }
}

/// Symbolic terms of all sixteen pathway amplitudes at fixed (τ, t, Γ).
#[derive(Debug, Clone)]
pub struct PathwayCatalog {
    pub tau: f64,
    pub t: f64,
    pub gamma: f64,
    terms: [Vec<LinearTerm>; 16],
}

impl PathwayCatalog {
    pub fn new(tau: f64, t: f64, gamma: f64, gen: &RedfieldGenerator) -> Result<Self> {
        if !(0.0..=2.0).contains(&gamma) {
            return Err(Error::invalid("quantum_yield_gamma", "must lie in [0, 2]"));
        }
        let mut terms: [Vec<LinearTerm>; 16] = Default::default();
        if tau < 0.0 || t < 0.0 {
            return Ok(PathwayCatalog { tau, t, gamma, terms });
        }
        let diags = diagrams();
        for labels in PathwayLabels::all() {
            let [p, q, r, s] = labels.0;
            // −(μ_p·e₁)(μ_q·e₂)G_gp(τ) on |q⟩⟨p|, opposite sign on the hole.
            let prep = -optical_coherence_propagator(Level::G, p.level(), tau, gen)?;
            let out = &mut terms[labels.index()];
            for d in diags.iter().filter(|d| d.labels() == (r, s)) {
                let g_t = optical_coherence_propagator(d.during_t.0, d.during_t.1, t, gen)?;
                let w = d.sign() * detection_weight(d.final_population, gamma);
                let dipoles = [
                    p.from_ground(),
                    q.from_ground(),
                    d.pulses[0].transition,
                    d.pulses[1].transition,
                ];
                let base = prep * g_t * w;
                match (d.start.0.exciton(), d.start.1.exciton()) {
                    (Some(a), Some(b)) => out.push(LinearTerm {
                        dipoles,
                        chi_index: chi_index(a, b, q, p),
                        coefficient: base,
                        family: d.family,
                    }),
                    _ => {
                        // Hole after T: −δ_pq + ... becomes δ_pq − χ_ggqp, which
                        // closure turns into χ_eeqp + χ_e′e′qp.
                        for n in Exciton::ALL {
                            out.push(LinearTerm {
                                dipoles,
                                chi_index: chi_index(n, n, q, p),
                                coefficient: -base,
                                family: d.family,
                            });
                        }
                    }
                }
            }
        }
        Ok(PathwayCatalog { tau, t, gamma, terms })
    }

    pub fn terms(&self, labels: PathwayLabels) -> &[LinearTerm] {
        &self.terms[labels.index()]
    }

    /// L with P = L·χ, row = pathway index, column = χ index.
    pub fn coefficient_matrix<P: DipoleProjection + ?Sized>(&self, basis: &ExcitonBasis, proj: &P) -> [[C64; 16]; 16] {
        let mut l = [[C64::new(0.0, 0.0); 16]; 16];
        for (row, terms) in self.terms.iter().enumerate() {
            for term in terms {
                let v = proj.project(term.dipoles.map(|t| basis.dipole(t)));
                l[row][term.chi_index] += term.coefficient * v;
            }
        }
        l
    }

    pub fn amplitude<P: DipoleProjection + ?Sized>(
        &self,
        labels: PathwayLabels,
        basis: &ExcitonBasis,
        chi: &ProcessTensor,
        proj: &P,
    ) -> C64 {
        self.terms(labels)
            .iter()
            .map(|term| {
                term.coefficient * proj.project(term.dipoles.map(|t| basis.dipole(t))) * chi.elements[term.chi_index]
            })
            .sum()
    }

    pub fn signal_set<P: DipoleProjection + ?Sized>(
        &self,
        basis: &ExcitonBasis,
        chi: &ProcessTensor,
        proj: &P,
    ) -> PathwaySignalSet {
        let mut values = [C64::new(0.0, 0.0); 16];
        for labels in PathwayLabels::all() {
            values[labels.index()] = self.amplitude(labels, basis, chi, proj);
        }
        PathwaySignalSet {
            waiting_time: chi.waiting_time,
            tau: self.tau,
            t: self.t,
            gamma: self.gamma,
            averaged: proj.is_average(),
            values,
        }
    }
}

/// One pathway amplitude P^{pqrs}(τ, T, t); T is carried by χ.
#[allow(clippy::too_many_arguments)]
pub fn pathway_amplitude<P: DipoleProjection + ?Sized>(
    labels: PathwayLabels,
    tau: f64,
    t: f64,
    gamma: f64,
    basis: &ExcitonBasis,
    gen: &RedfieldGenerator,
    chi: &ProcessTensor,
    proj: &P,
    mode: ResponseMode,
) -> Result<C64> {
    match mode {
        ResponseMode::Derived => Ok(PathwayCatalog::new(tau, t, gamma, gen)?.amplitude(labels, basis, chi, proj)),
        ResponseMode::Verbatim => verbatim_amplitude(labels, tau, t, gamma, basis, gen, chi, proj),
    }
}

/// The printed formulas read literally: χ_qqqp in the bracket, G_rg(t) on the
/// diagonal ESA term and no χ on the off-diagonal ESA term.
#[allow(clippy::too_many_arguments)]
fn verbatim_amplitude<P: DipoleProjection + ?Sized>(
    labels: PathwayLabels,
    tau: f64,
    t: f64,
    gamma: f64,
    basis: &ExcitonBasis,
    gen: &RedfieldGenerator,
    chi: &ProcessTensor,
    proj: &P,
) -> Result<C64> {
    if tau < 0.0 || t < 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let [p, q, r, s] = labels.0;
    let mu = |ts: [Transition; 4]| proj.project(ts.map(|x| basis.dipole(x)));
    let g_gp = optical_coherence_propagator(Level::G, p.level(), tau, gen)?;
    let (pg, qg) = (p.from_ground(), q.from_ground());
    let esa = 1.0 - gamma;
    if r == s {
        let x = r;
        let g = optical_coherence_propagator(x.level(), Level::G, t, gen)?;
        let delta = if p == q { 1.0 } else { 0.0 };
        let bracket = chi.get(q, q, q, p) - delta - chi.get(x, x, q, p);
        let fx = x.partner().to_biexciton();
        let a = mu([pg, qg, x.from_ground(), x.from_ground()]) * g * bracket
            - mu([pg, qg, fx, fx]) * esa * g * chi.get(x.partner(), x.partner(), q, p);
        Ok(g_gp * a)
    } else {
        let g_se = optical_coherence_propagator(s.level(), Level::G, t, gen)?;
        let g_esa = optical_coherence_propagator(Level::F, s.partner().level(), t, gen)?;
        let a = mu([pg, qg, r.from_ground(), s.from_ground()]) * g_se * chi.get(s, r, q, p)
            + mu([pg, qg, r.partner().to_biexciton(), s.partner().to_biexciton()]) * esa * g_esa;
        Ok(-g_gp * a)
    }
}

/// The sixteen pathway amplitudes at one waiting time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathwaySignalSet {
    pub waiting_time: f64,
    pub tau: f64,
    pub t: f64,
    pub gamma: f64,
    pub averaged: bool,
    /// Indexed by [`PathwayLabels::index`].
    pub values: [C64; 16],
}

impl PathwaySignalSet {
    pub fn get(&self, labels: PathwayLabels) -> C64 {
        self.values[labels.index()]
    }

    pub fn as_vector(&self) -> SVector<C64, 16> {
        SVector::from_column_slice(&self.values)
    }
}

/// S = C·P for the sixteen carrier tuples.
pub fn assemble_signal(c: &CMatrix, p: &PathwaySignalSet) -> [C64; 16] {
    let s = c.entries * p.as_vector();
    let mut out = [C64::new(0.0, 0.0); 16];
    out.copy_from_slice(s.as_slice());
    out
}

/// Signals over a waiting-time grid; `rows[k][row]` is S at `waiting_times[k]`
/// for carrier tuple `row`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTable {
    pub gamma: f64,
    pub waiting_times: Vec<f64>,
    pub rows: Vec<[C64; 16]>,
}

impl SignalTable {
    pub fn len(&self) -> usize {
        self.waiting_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waiting_times.is_empty()
    }
}

/// Forward model over a grid of waiting times for one dimer.
#[derive(Debug, Clone)]
pub struct ForwardModel<'a> {
    pub basis: &'a ExcitonBasis,
    pub gen: &'a RedfieldGenerator,
    pub cmatrix: &'a CMatrix,
    pub tau: f64,
    pub t: f64,
    pub mode: ResponseMode,
}

impl ForwardModel<'_> {
    /// Pathway sets and the signal table for every χ in `tensors`.
    pub fn simulate<P: DipoleProjection + ?Sized>(
        &self,
        gamma: f64,
        tensors: &[ProcessTensor],
        proj: &P,
    ) -> Result<(Vec<PathwaySignalSet>, SignalTable)> {
        let mut sets = Vec::with_capacity(tensors.len());
        match self.mode {
            ResponseMode::Derived => {
                let cat = PathwayCatalog::new(self.tau, self.t, gamma, self.gen)?;
                let l = cat.coefficient_matrix(self.basis, proj);
                for chi in tensors {
                    let mut values = [C64::new(0.0, 0.0); 16];
                    for (row, v) in values.iter_mut().enumerate() {
                        *v = l[row].iter().zip(chi.elements.iter()).map(|(a, b)| a * b).sum();
                    }
                    sets.push(PathwaySignalSet {
                        waiting_time: chi.waiting_time,
                        tau: self.tau,
                        t: self.t,
                        gamma,
                        averaged: proj.is_average(),
                        values,
                    });
                }
            }
            ResponseMode::Verbatim => {
                for chi in tensors {
                    let mut values = [C64::new(0.0, 0.0); 16];
                    for labels in PathwayLabels::all() {
                        values[labels.index()] =
                            verbatim_amplitude(labels, self.tau, self.t, gamma, self.basis, self.gen, chi, proj)?;
                    }
                    sets.push(PathwaySignalSet {
                        waiting_time: chi.waiting_time,
                        tau: self.tau,
                        t: self.t,
                        gamma,
                        averaged: proj.is_average(),
                        values,
                    });
                }
            }
        }
        let table = SignalTable {
            gamma,
            waiting_times: tensors.iter().map(|c| c.waiting_time).collect(),
            rows: sets.iter().map(|p| assemble_signal(self.cmatrix, p)).collect(),
        };
        Ok((sets, table))
    }
}

//! Isotropic orientational averages and the M blocks.
//!
//! For a sample of randomly oriented dimers the pathway amplitudes at τ = t = 0
//! depend on χ(T) through three small linear systems, one per (p, q) block:
//! `P^{pq} = M^{pq} χ^{pq}`. The M blocks are assembled here from the symbolic
//! pathway terms of [`crate::response`], not transcribed.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use crate::bath::RedfieldGenerator;
use crate::levels::{Exciton, PathwayLabels, Transition};
use crate::linalg;
use crate::model::ExcitonBasis;
use crate::response::{DipoleProjection, IsotropicAverage, PathwayCatalog, PathwaySignalSet};
use crate::tensor::{chi_index, chi_labels, ProcessTensor};
use crate::units::UnitSystem;
use crate::{Error, Result, C64};

/// The fourth-rank isotropic tensor in the basis of the three pair patterns
/// (12)(34), (13)(24), (14)(23).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsoTensor {
    pub weights: [[i32; 3]; 3],
    pub denominator: i32,
}

impl IsoTensor {
    pub const STANDARD: IsoTensor = IsoTensor {
        weights: [[4, -1, -1], [-1, 4, -1], [-1, -1, 4]],
        denominator: 30,
    };

    /// Pair-pattern vector [(v₁·v₂)(v₃·v₄), (v₁·v₃)(v₂·v₄), (v₁·v₄)(v₂·v₃)].
    pub fn patterns(v: &[Vector3<f64>; 4]) -> [f64; 3] {
        [
            v[0].dot(&v[1]) * v[2].dot(&v[3]),
            v[0].dot(&v[2]) * v[1].dot(&v[3]),
            v[0].dot(&v[3]) * v[1].dot(&v[2]),
        ]
    }

    /// labᵀ · W · mol.
    pub fn contract(&self, lab: [f64; 3], mol: [f64; 3]) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += lab[i] * self.weights[i][j] as f64 * mol[j];
            }
        }
        acc / self.denominator as f64
    }
}

/// ⟨Π_k (R a_k · e_k)⟩ over uniformly distributed rotations R.
pub fn iso_average_four(mol: [Vector3<f64>; 4], lab: [Vector3<f64>; 4]) -> f64 {
    IsoTensor::STANDARD.contract(IsoTensor::patterns(&lab), IsoTensor::patterns(&mol))
}

/// The all-parallel special case (1/15)[(a·b)(c·d) + (a·c)(b·d) + (a·d)(b·c)].
pub fn iso_average_zzzz(mol: [Vector3<f64>; 4]) -> f64 {
    let p = IsoTensor::patterns(&mol);
    (p[0] + p[1] + p[2]) / 15.0
}

/// Which of the three M blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    /// p = q = e.
    Ee,
    /// p = q = e′.
    EpEp,
    /// p ≠ q, eight real unknowns.
    Mixed,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::Ee, Block::EpEp, Block::Mixed];

    pub const fn name(self) -> &'static str {
        match self {
            Block::Ee => "M_ee",
            Block::EpEp => "M_e'e'",
            Block::Mixed => "M_ee'",
        }
    }

    pub const fn dim(self) -> usize {
        match self {
            Block::Mixed => 8,
            _ => 4,
        }
    }

    /// Pathway labels of the block rows, in order.
    pub fn rows(self) -> Vec<PathwayLabels> {
        use Exciton::{EPrime as Ep, E};
        let rs = [(E, E), (E, Ep), (Ep, E), (Ep, Ep)];
        let with = |p, q| rs.iter().map(move |&(r, s)| PathwayLabels::new(p, q, r, s));
        match self {
            Block::Ee => with(E, E).collect(),
            Block::EpEp => with(Ep, Ep).collect(),
            Block::Mixed => with(Ep, E).chain(with(E, Ep)).collect(),
        }
    }
}

/// Real-unknown expansion of a χ element: the block it belongs to and up to
/// two (column, factor) pairs.
///
/// Column order per block:
/// * ee: [χ_eeee, χ_e′e′ee, Re χ_ee′ee, Im χ_ee′ee]
/// * e′e′: [χ_eee′e′, χ_e′e′e′e′, Re χ_ee′e′e′, Im χ_ee′e′e′]
/// * mixed: Re then Im of [χ_eeee′, χ_e′e′ee′, χ_ee′ee′, χ_e′eee′]
pub fn unknown_expansion(k: usize) -> (Block, [(usize, C64); 2]) {
    let [n, m, nu, mu] = chi_labels(k);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let zero = (0, C64::new(0.0, 0.0));
    if nu == mu {
        let block = if nu == Exciton::E { Block::Ee } else { Block::EpEp };
        let cols = match (n, m) {
            (Exciton::E, Exciton::E) => [(0, one), zero],
            (Exciton::EPrime, Exciton::EPrime) => [(1, one), zero],
            (Exciton::E, Exciton::EPrime) => [(2, one), (3, i)],
            (Exciton::EPrime, Exciton::E) => [(2, one), (3, -i)],
        };
        (block, cols)
    } else {
        let slot = |a: Exciton, b: Exciton| match (a, b) {
            (Exciton::E, Exciton::E) => 0,
            (Exciton::EPrime, Exciton::EPrime) => 1,
            (Exciton::E, Exciton::EPrime) => 2,
            (Exciton::EPrime, Exciton::E) => 3,
        };
        if nu == Exciton::E {
            let c = slot(n, m);
            (Block::Mixed, [(c, one), (c + 4, i)])
        } else {
            // χ_nme′e = conj(χ_mnee′)
            let c = slot(m, n);
            (Block::Mixed, [(c, one), (c + 4, -i)])
        }
    }
}

/// One symbolic contribution to an M-block entry:
/// M[row][col] += coefficient · ⟨Π(μ_k·e_k)⟩_iso.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MTerm {
    pub block: Block,
    pub row: usize,
    pub col: usize,
    pub dipoles: [Transition; 4],
    pub coefficient: C64,
}

/// Symbolic M-block terms at quantum yield Γ.
pub fn m_block_terms(basis: &ExcitonBasis, gamma: f64) -> Result<Vec<MTerm>> {
    // At τ = t = 0 every propagator is exactly 1, so a closed generator suffices.
    let gen = RedfieldGenerator::closed(basis, UnitSystem::STANDARD);
    let cat = PathwayCatalog::new(0.0, 0.0, gamma, &gen)?;
    let mut out = Vec::new();
    for block in Block::ALL {
        for (row, labels) in block.rows().into_iter().enumerate() {
            for term in cat.terms(labels) {
                let (b, cols) = unknown_expansion(term.chi_index);
                debug_assert_eq!(b, block);
                for (col, f) in cols {
                    if f == C64::new(0.0, 0.0) {
                        continue;
                    }
                    out.push(MTerm {
                        block,
                        row,
                        col,
                        dipoles: term.dipoles,
                        coefficient: term.coefficient * f,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Default condition-number ceiling for the M blocks.
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct MBlocks {
    pub m_ee: DMatrix<C64>,
    pub m_epep: DMatrix<C64>,
    pub m_eep: DMatrix<C64>,
    pub gamma: f64,
    /// 2-norm condition numbers in [`Block::ALL`] order.
    pub conditions: [f64; 3],
}

pub fn build_m_blocks(basis: &ExcitonBasis, gamma: f64) -> Result<MBlocks> {
    build_m_blocks_with(basis, gamma, DEFAULT_CONDITION_LIMIT)
}

pub fn build_m_blocks_with(basis: &ExcitonBasis, gamma: f64, condition_limit: f64) -> Result<MBlocks> {
    let iso = IsotropicAverage::zzzz();
    let mut mats = [DMatrix::zeros(4, 4), DMatrix::zeros(4, 4), DMatrix::zeros(8, 8)];
    for t in m_block_terms(basis, gamma)? {
        let v = iso.project(t.dipoles.map(|d| basis.dipole(d)));
        let idx = Block::ALL.iter().position(|b| *b == t.block).unwrap();
        mats[idx][(t.row, t.col)] += t.coefficient * v;
    }
    let mut conditions = [0.0; 3];
    for (k, m) in mats.iter().enumerate() {
        let c = linalg::condition_number(m);
        if !(c <= condition_limit) {
            return Err(Error::SingularGeometry {
                block: Block::ALL[k].name(),
                condition: c,
            });
        }
        conditions[k] = c;
    }
    let [m_ee, m_epep, m_eep] = mats;
    Ok(MBlocks {
        m_ee,
        m_epep,
        m_eep,
        gamma,
        conditions,
    })
}

impl MBlocks {
    pub fn block(&self, b: Block) -> &DMatrix<C64> {
        match b {
            Block::Ee => &self.m_ee,
            Block::EpEp => &self.m_epep,
            Block::Mixed => &self.m_eep,
        }
    }

    /// Forward map: averaged pathway amplitudes from χ.
    pub fn apply(&self, chi: &ProcessTensor) -> [C64; 16] {
        let mut out = [C64::new(0.0, 0.0); 16];
        for b in Block::ALL {
            let x = real_unknowns(b, chi);
            let p = self.block(b) * x;
            for (row, labels) in b.rows().into_iter().enumerate() {
                out[labels.index()] = p[row];
            }
        }
        out
    }
}

/// The real unknown vector of a block read off a tensor.
pub fn real_unknowns(block: Block, chi: &ProcessTensor) -> DVector<C64> {
    use Exciton::{EPrime as Ep, E};
    let r = |z: C64| C64::new(z.re, 0.0);
    let im = |z: C64| C64::new(z.im, 0.0);
    match block {
        Block::Ee | Block::EpEp => {
            let x = if block == Block::Ee { E } else { Ep };
            let c = chi.get(E, Ep, x, x);
            DVector::from_vec(alloc::vec![
                r(chi.get(E, E, x, x)),
                r(chi.get(Ep, Ep, x, x)),
                r(c),
                im(c)
            ])
        }
        Block::Mixed => {
            let v = [
                chi.get(E, E, E, Ep),
                chi.get(Ep, Ep, E, Ep),
                chi.get(E, Ep, E, Ep),
                chi.get(Ep, E, E, Ep),
            ];
            DVector::from_iterator(8, v.iter().map(|z| r(*z)).chain(v.iter().map(|z| im(*z))))
        }
    }
}

/// χ recovered from averaged pathway amplitudes at one waiting time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSolution {
    pub chi: ProcessTensor,
    /// Largest imaginary part of the real unknowns, a consistency diagnostic.
    pub imaginary_leak: f64,
}

/// Solves the three blocks and assembles χ using Hermiticity; the ground row
/// is closed by trace conservation.
pub fn solve_chi_blocks(p: &PathwaySignalSet, m: &MBlocks) -> Result<ChiSolution> {
    use Exciton::{EPrime as Ep, E};
    let mut el = [C64::new(0.0, 0.0); 16];
    let mut leak = 0.0f64;
    for b in Block::ALL {
        let rhs = DVector::from_iterator(b.dim(), b.rows().into_iter().map(|l| p.get(l)));
        let x = linalg::solve(m.block(b), &rhs).ok_or(Error::SingularGeometry {
            block: b.name(),
            condition: f64::INFINITY,
        })?;
        leak = x.iter().fold(leak, |acc, z| acc.max(z.im.abs()));
        let xr: Vec<f64> = x.iter().map(|z| z.re).collect();
        let c = |re: f64, im: f64| C64::new(re, im);
        match b {
            Block::Ee | Block::EpEp => {
                let nu = if b == Block::Ee { E } else { Ep };
                el[chi_index(E, E, nu, nu)] = c(xr[0], 0.0);
                el[chi_index(Ep, Ep, nu, nu)] = c(xr[1], 0.0);
                el[chi_index(E, Ep, nu, nu)] = c(xr[2], xr[3]);
                el[chi_index(Ep, E, nu, nu)] = c(xr[2], -xr[3]);
            }
            Block::Mixed => {
                let pairs = [(E, E), (Ep, Ep), (E, Ep), (Ep, E)];
                for (k, &(n, mm)) in pairs.iter().enumerate() {
                    let z = c(xr[k], xr[k + 4]);
                    el[chi_index(n, mm, E, Ep)] = z;
                    el[chi_index(mm, n, Ep, E)] = z.conj();
                }
            }
        }
    }
    Ok(ChiSolution {
        chi: ProcessTensor::from_elements(p.waiting_time, el),
        imaginary_leak: leak,
    })
}

/// An entry where the derived block differs from the closed-form reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    pub block: Block,
    pub row: usize,
    pub col: usize,
    pub derived: C64,
    pub printed: C64,
}

/// Closed-form entries as they appear in the literature (1-based indices),
/// evaluated with signed in-plane angles from μ_eg. Only entries with an
/// unambiguous printed value are listed.
pub fn printed_reference(basis: &ExcitonBasis, gamma: f64) -> Vec<(Block, usize, usize, C64)> {
    let mu = |t| basis.dipole(t).norm();
    let th = |t| basis.signed_angle(t);
    let (eg, epg, fe, fep) = (
        mu(Transition::EG),
        mu(Transition::EPrimeG),
        mu(Transition::FE),
        mu(Transition::FEPrime),
    );
    let (t_epg, t_fe, t_fep) = (th(Transition::EPrimeG), th(Transition::FE), th(Transition::FEPrime));
    let cos = |x: f64| x.cos();
    let sin = |x: f64| x.sin();
    let g1 = 1.0 - gamma;
    let re = |x: f64| C64::new(x, 0.0);
    let i = C64::new(0.0, 1.0);
    let zero = re(0.0);
    let mut v = Vec::new();

    let ee23 = -eg * eg / 15.0
        * (g1 * (3.0 * cos(t_fe) * cos(t_fep) + sin(t_fe) * sin(t_fep)) * fe * fep + 3.0 * cos(t_epg) * eg * epg);
    v.push((Block::Ee, 1, 1, re(-2.0 / 15.0 * eg.powi(4))));
    v.push((
        Block::Ee,
        1,
        2,
        re(-eg.powi(4) / 5.0 - g1 / 15.0 * (cos(2.0 * t_fep) + 2.0) * fep * fep * eg * eg),
    ));
    for (r, c) in [(1, 3), (1, 4), (2, 1), (2, 2), (3, 1), (3, 2), (4, 3), (4, 4)] {
        v.push((Block::Ee, r, c, zero));
    }
    v.push((Block::Ee, 2, 3, re(ee23)));
    v.push((Block::Ee, 3, 3, re(ee23)));
    v.push((Block::Ee, 2, 4, -i * ee23));
    v.push((Block::Ee, 3, 4, i * ee23));
    v.push((
        Block::Ee,
        4,
        1,
        re(-eg * eg / 15.0 * ((cos(2.0 * t_epg) + 2.0) * epg * epg + g1 * (cos(2.0 * t_fe) + 2.0) * fe * fe)),
    ));
    v.push((
        Block::Ee,
        4,
        2,
        re(-2.0 / 15.0 * eg * eg * epg * epg * (cos(2.0 * t_epg) + 2.0)),
    ));

    let epep23 = -epg * epg / 15.0
        * (g1 * (2.0 * cos(t_fe - t_fep) + cos(t_fe + t_fep - 2.0 * t_epg)) * fe * fep + 3.0 * cos(t_epg) * eg * epg);
    v.push((
        Block::EpEp,
        1,
        1,
        re(-2.0 / 5.0 * eg * eg * epg * epg * (cos(2.0 * t_epg) + 2.0)),
    ));
    v.push((
        Block::EpEp,
        1,
        2,
        re(-eg * eg / 5.0 * ((cos(2.0 * t_epg) + 2.0) * eg * eg + g1 * (cos(2.0 * t_fep - t_epg) + 2.0) * fep * fep)),
    ));
    for (r, c) in [(1, 3), (1, 4), (2, 1), (2, 2), (3, 1), (3, 2), (4, 3), (4, 4)] {
        v.push((Block::EpEp, r, c, zero));
    }
    v.push((Block::EpEp, 2, 3, re(epep23)));
    v.push((Block::EpEp, 3, 3, re(epep23)));
    v.push((Block::EpEp, 2, 4, -i * epep23));
    v.push((Block::EpEp, 3, 4, i * ee23));
    v.push((
        Block::EpEp,
        4,
        1,
        re(-epg * epg / 15.0 * (3.0 * epg * epg + g1 * (cos(2.0 * t_fe - t_epg) + 2.0) * fe * fe)),
    ));
    v.push((Block::EpEp, 4, 2, re(-2.0 / 5.0 * epg.powi(4))));

    v.push((Block::Mixed, 1, 1, re(-2.0 / 5.0 * cos(t_epg) * eg.powi(3) * epg)));
    v.push((
        Block::Mixed,
        1,
        2,
        re(-eg * epg / 15.0
            * (3.0 * cos(t_epg) * eg * eg + g1 * (cos(2.0 * t_fep - t_epg) + 2.0 * cos(t_epg)) * fep * fep)),
    ));
    v
}

/// Compares derived blocks with [`printed_reference`] at relative tolerance.
pub fn compare_with_printed(basis: &ExcitonBasis, m: &MBlocks, rel_tol: f64) -> Vec<Discrepancy> {
    let scale = m
        .m_ee
        .iter()
        .chain(m.m_epep.iter())
        .chain(m.m_eep.iter())
        .fold(0.0f64, |a, z| a.max(z.norm()));
    printed_reference(basis, m.gamma)
        .into_iter()
        .filter_map(|(block, r, c, printed)| {
            let derived = m.block(block)[(r - 1, c - 1)];
            let tol = rel_tol * scale.max(printed.norm());
            ((derived - printed).norm() > tol).then_some(Discrepancy {
                block,
                row: r,
                col: c,
                derived,
                printed,
            })
        })
        .collect()
}

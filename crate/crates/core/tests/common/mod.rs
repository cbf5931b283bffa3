//! Independent oracles shared by the integration tests. Nothing here calls the
//! pathway catalog: states are explicit 4×4 density matrices on {g, e, e′, f}
//! and every field interaction is a plain commutator.
#![allow(dead_code)]

use fsqpt_core::prelude::*;
use nalgebra::{DMatrix, Matrix3, Quaternion, SMatrix, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type M4 = SMatrix<C64, 4, 4>;
pub type M9 = SMatrix<C64, 9, 9>;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn slot(l: Level) -> usize {
    match l {
        Level::G => 0,
        Level::E => 1,
        Level::EPrime => 2,
        Level::F => 3,
    }
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        if v.norm() > 1e-6 {
            return v.normalize();
        }
    }
}

/// Haar-random rotation from a normalized Gaussian quaternion.
pub fn random_rotation<R: Rng>(rng: &mut R) -> Matrix3<f64> {
    let q = Quaternion::new(
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    );
    *UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix()
}

/// Raising part of the dipole operator for pulse label `x`, projected on
/// `pol` after rotating the molecule by `rot`.
pub fn raising(basis: &ExcitonBasis, x: Exciton, rot: &Matrix3<f64>, pol: &Vector3<f64>) -> M4 {
    let mut m = M4::zeros();
    for t in Transition::ALL {
        if t.resonance() == x {
            let (up, low) = t.levels();
            m[(slot(up), slot(low))] += c((rot * basis.dipole(t)).dot(pol));
        }
    }
    m
}

fn comm(a: &M4, b: &M4) -> M4 {
    a * b - b * a
}

/// Free evolution of optical coherences. Anything else present in `rho` is a
/// bug in the caller.
fn evolve(rho: &M4, dur: f64, gen: &RedfieldGenerator) -> M4 {
    let w = gen.units.wavenumber_to_angular_freq;
    let rate = |i: usize, j: usize| -> f64 {
        let (a, b) = (i.min(j), i.max(j));
        match (a, b) {
            (0, 1) => gen.gamma_pg[0],
            (0, 2) => gen.gamma_pg[1],
            (1, 3) => gen.gamma_fp[0],
            (2, 3) => gen.gamma_fp[1],
            _ => f64::NAN,
        }
    };
    M4::from_fn(|i, j| {
        let z = rho[(i, j)];
        if z == C64::new(0.0, 0.0) {
            return z;
        }
        let g = rate(i, j);
        assert!(g.is_finite(), "unexpected element ({i},{j}) = {z}");
        let de = gen.energies[i] - gen.energies[j];
        z * C64::new(-g * dur, -w * de * dur).exp()
    })
}

/// χ as a 9×9 map on the {g, e, e′} block, index 3n + m.
fn apply_chi(rho: &M4, chi: &M9) -> M4 {
    for k in 0..4 {
        assert_eq!(rho[(3, k)], C64::new(0.0, 0.0));
        assert_eq!(rho[(k, 3)], C64::new(0.0, 0.0));
    }
    let v = SMatrix::<C64, 9, 1>::from_fn(|r, _| rho[(r / 3, r % 3)]);
    let out = chi * v;
    M4::from_fn(|i, j| {
        if i < 3 && j < 3 {
            out[3 * i + j]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// State after pulses 1–3 and the coherence time t.
#[allow(clippy::too_many_arguments)]
pub fn third_order_state(
    labels: PathwayLabels,
    tau: f64,
    t: f64,
    basis: &ExcitonBasis,
    gen: &RedfieldGenerator,
    chi: &M9,
    rot: &Matrix3<f64>,
    pols: &[Vector3<f64>; 4],
) -> M4 {
    let [p, q, r, _] = labels.0;
    let mut rho = M4::zeros();
    rho[(0, 0)] = c(1.0);
    let down1 = raising(basis, p, rot, &pols[0]).transpose();
    rho = evolve(&comm(&down1, &rho), tau, gen);
    rho = comm(&raising(basis, q, rot, &pols[1]), &rho);
    rho = apply_chi(&rho, chi);
    rho = comm(&raising(basis, r, rot, &pols[2]), &rho);
    evolve(&rho, t, gen)
}

/// Fluorescence amplitude Tr[Â ρ⁽⁴⁾] with Â = diag(0, 1, 1, Γ).
#[allow(clippy::too_many_arguments)]
pub fn fluorescence_oracle(
    labels: PathwayLabels,
    tau: f64,
    t: f64,
    gamma: f64,
    basis: &ExcitonBasis,
    gen: &RedfieldGenerator,
    chi: &M9,
    rot: &Matrix3<f64>,
    pols: &[Vector3<f64>; 4],
) -> C64 {
    let rho3 = third_order_state(labels, tau, t, basis, gen, chi, rot, pols);
    let down4 = raising(basis, labels.s(), rot, &pols[3]).transpose();
    let rho4 = comm(&down4, &rho3);
    rho4[(1, 1)] + rho4[(2, 2)] + rho4[(3, 3)] * gamma
}

/// Photon-echo amplitude: third-order polarization Tr[μ⁻₄ ρ⁽³⁾].
#[allow(clippy::too_many_arguments)]
pub fn photon_echo_oracle(
    labels: PathwayLabels,
    tau: f64,
    t: f64,
    basis: &ExcitonBasis,
    gen: &RedfieldGenerator,
    chi: &M9,
    rot: &Matrix3<f64>,
    pols: &[Vector3<f64>; 4],
) -> C64 {
    let rho3 = third_order_state(labels, tau, t, basis, gen, chi, rot, pols);
    let down4 = raising(basis, labels.s(), rot, &pols[3]).transpose();
    (down4 * rho3).trace()
}

/// Lindblad superoperator on the 3-level space, vec index 3n + m.
pub fn lindbladian(h: &Matrix3<C64>, jumps: &[Matrix3<C64>]) -> M9 {
    let i = C64::new(0.0, 1.0);
    let mut out = M9::zeros();
    for col in 0..9 {
        let mut e = Matrix3::<C64>::zeros();
        e[(col / 3, col % 3)] = c(1.0);
        let mut d = (h * e - e * h) * (-i);
        for l in jumps {
            let ld = l.adjoint();
            d += l * e * ld - (ld * l * e + e * ld * l) * c(0.5);
        }
        for row in 0..9 {
            out[(row, col)] = d[(row / 3, row % 3)];
        }
    }
    out
}

pub fn expm(m: &M9) -> M9 {
    let d = DMatrix::from_iterator(9, 9, m.iter().copied()).exp();
    M9::from_iterator(d.iter().copied())
}

fn random_c<R: Rng>(rng: &mut R, scale: f64) -> C64 {
    let a: f64 = StandardNormal.sample(rng);
    let b: f64 = StandardNormal.sample(rng);
    C64::new(a, b) * scale
}

/// A random CPTP map of the form the tomography assumes: the ground state is
/// stationary, the single-exciton block may relax into it and ground–exciton
/// coherences never feed the exciton block. Rates are in fs⁻¹.
pub fn random_lindblad_tensor<R: Rng>(rng: &mut R) -> (ProcessTensor, M9) {
    let mut h = Matrix3::<C64>::zeros();
    h[(1, 1)] = c(rng.random_range(-0.05..0.05));
    h[(2, 2)] = c(rng.random_range(-0.05..0.05));
    let off = random_c(rng, 0.02);
    h[(1, 2)] = off;
    h[(2, 1)] = off.conj();
    let mut jumps = Vec::new();
    for _ in 0..2 {
        let mut l = Matrix3::<C64>::zeros();
        for a in 1..3 {
            for b in 1..3 {
                l[(a, b)] = random_c(rng, 0.05);
            }
        }
        jumps.push(l);
    }
    let mut decay = Matrix3::<C64>::zeros();
    decay[(0, 1)] = random_c(rng, 0.03);
    decay[(0, 2)] = random_c(rng, 0.03);
    jumps.push(decay);
    let t = rng.random_range(0.0..600.0);
    let s = expm(&(lindbladian(&h, &jumps) * c(t)));
    (ProcessTensor::from_superoperator(t, &s), s)
}

/// The secular generator written as a Lindblad equation: population transfer
/// ops, pure dephasing on |e⟩⟨e| and the exciton Hamiltonian.
pub fn redfield_as_lindblad(gen: &RedfieldGenerator) -> M9 {
    let w = gen.units.wavenumber_to_angular_freq;
    let mut h = Matrix3::<C64>::zeros();
    h[(1, 1)] = c(w * gen.energies[1]);
    h[(2, 2)] = c(w * gen.energies[2]);
    let (kd, ku) = (gen.rate_down(), gen.rate_up());
    let pure = gen.gamma_ee_prime - 0.5 * (kd + ku);
    assert!(pure >= 0.0);
    let mut l1 = Matrix3::<C64>::zeros();
    l1[(2, 1)] = c(kd.sqrt());
    let mut l2 = Matrix3::<C64>::zeros();
    l2[(1, 2)] = c(ku.sqrt());
    let mut l3 = Matrix3::<C64>::zeros();
    l3[(1, 1)] = c((2.0 * pure).sqrt());
    lindbladian(&h, &[l1, l2, l3])
}

pub fn reference_model() -> (ExcitonBasis, RedfieldGenerator, CMatrix) {
    let b = build_exciton_basis(&DimerParams::reference()).unwrap();
    let g = build_redfield_generator(&b, &BathParams::reference(), UnitSystem::STANDARD).unwrap();
    let cm = build_c_matrix(&b, &PulseToolbox::reference(), &UnitSystem::STANDARD).unwrap();
    (b, g, cm)
}

/// Noiseless signal table for the given tensors at τ = t = 0.
pub fn synthesize(
    basis: &ExcitonBasis,
    gen: &RedfieldGenerator,
    cm: &CMatrix,
    gamma: f64,
    tensors: &[ProcessTensor],
) -> SignalTable {
    let cat = PathwayCatalog::new(0.0, 0.0, gamma, gen).unwrap();
    let iso = IsotropicAverage::zzzz();
    SignalTable {
        gamma,
        waiting_times: tensors.iter().map(|t| t.waiting_time).collect(),
        rows: tensors
            .iter()
            .map(|chi| assemble_signal(cm, &cat.signal_set(basis, chi, &iso)))
            .collect(),
    }
}

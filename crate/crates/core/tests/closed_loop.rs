//! Signals synthesized from known tensors and inverted again.

mod common;

use common::*;
use fsqpt_core::ensemble::{mean_outputs, SimulationSetup};
use fsqpt_core::prelude::*;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

const GAMMAS: [f64; 5] = [0.0, 0.5, 1.0, 1.5, 2.0];

fn grid() -> Vec<f64> {
    (0..30).map(|k| 120.0 + 20.0 * k as f64).collect()
}

#[test]
fn redfield_ground_truth_is_recovered_for_every_gamma() {
    let (b, g, cm) = reference_model();
    let truth: Vec<ProcessTensor> = grid()
        .iter()
        .map(|&t| propagate_process_tensor(&g, t).unwrap())
        .collect();
    let mut recovered = Vec::new();
    for gamma in GAMMAS {
        let table = synthesize(&b, &g, &cm, gamma, &truth);
        let m = build_m_blocks(&b, gamma).unwrap();
        let rep = reconstruct(&table, &cm, &m, Some(&truth), Inversion::Exact).unwrap();
        assert!(
            rep.max_residual().unwrap() <= 1e-8,
            "Γ = {gamma}: {:?}",
            rep.max_residual()
        );
        for k in 0..truth.len() {
            assert!(rep.trace_defect[k] <= 1e-10);
            assert!(rep.hermiticity_defect[k] <= 1e-10);
            assert!(rep.min_choi_eigenvalue[k] >= -1e-8);
        }
        recovered.push(rep.chi);
    }
    for a in &recovered {
        for bb in &recovered {
            for (x, y) in a.iter().zip(bb.iter()) {
                assert!(x.max_deviation(y) <= 1e-8);
            }
        }
    }
}

#[test]
fn random_lindblad_maps_round_trip() {
    let (b, g, cm) = reference_model();
    let mut rng = StdRng::seed_from_u64(21);
    let maps: Vec<ProcessTensor> = (0..100).map(|_| random_lindblad_tensor(&mut rng).0).collect();
    for gamma in GAMMAS {
        let table = synthesize(&b, &g, &cm, gamma, &maps);
        let m = build_m_blocks(&b, gamma).unwrap();
        let rep = reconstruct(&table, &cm, &m, Some(&maps), Inversion::Exact).unwrap();
        let worst = rep.max_residual().unwrap();
        assert!(worst <= 1e-10, "Γ = {gamma}: {worst}");
    }
}

#[test]
fn exact_inversion_recovers_pathways_and_ignores_row_order() {
    let (b, g, cm) = reference_model();
    let chi = vec![propagate_process_tensor(&g, 200.0).unwrap()];
    let cat = PathwayCatalog::new(0.0, 0.0, 1.0, &g).unwrap();
    let p = cat.signal_set(&b, &chi[0], &IsotropicAverage::zzzz());
    let table = synthesize(&b, &g, &cm, 1.0, &chi);
    let back = invert_signals(&table, &cm, Inversion::Exact).unwrap();
    for k in 0..16 {
        assert!((back[0].values[k] - p.values[k]).norm() <= 1e-12 * p.values[k].norm().max(1.0));
    }
    // Reversing the experiments together with the rows of C is the same system.
    let s = table.rows[0];
    let rev_s: Vec<C64> = (0..16).rev().map(|r| s[r]).collect();
    let rev_c = nalgebra::DMatrix::from_fn(16, 16, |r, col| cm.entries[(15 - r, col)]);
    let sol = rev_c.lu().solve(&nalgebra::DVector::from_vec(rev_s)).unwrap();
    for k in 0..16 {
        assert!((sol[k] - p.values[k]).norm() <= 1e-12 * p.values[k].norm().max(1.0));
    }
}

#[test]
fn noise_respects_perturbation_bound() {
    let (b, g, cm) = reference_model();
    let chi = vec![propagate_process_tensor(&g, 300.0).unwrap()];
    let clean = synthesize(&b, &g, &cm, 2.0, &chi);
    let p0 = invert_signals(&clean, &cm, Inversion::Exact).unwrap()[0].as_vector();
    let noise = NoiseModel {
        relative_width: 1e-3,
        intensity_fluctuation: 0.0,
    };
    let kappa = cm.condition_number();
    let mut rng = StdRng::seed_from_u64(22);
    let mut mean_rel = 0.0;
    for _ in 0..100 {
        let mut noisy = clean.clone();
        noise.apply(&mut noisy, &mut rng);
        let ds: f64 = noisy.rows[0]
            .iter()
            .zip(clean.rows[0].iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let s: f64 = clean.rows[0].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let p = invert_signals(&noisy, &cm, Inversion::Exact).unwrap()[0].as_vector();
        let rel = (p - p0).norm() / p0.norm();
        assert!(rel <= kappa * ds / s * (1.0 + 1e-9), "{rel} > {kappa}·{}", ds / s);
        mean_rel += rel / 100.0;
    }
    assert!(mean_rel <= kappa * 1e-3, "{mean_rel}");
}

#[test]
fn tikhonov_converges_to_exact() {
    let (b, g, cm) = reference_model();
    let chi = vec![propagate_process_tensor(&g, 300.0).unwrap()];
    let table = synthesize(&b, &g, &cm, 0.5, &chi);
    let exact = invert_signals(&table, &cm, Inversion::Exact).unwrap()[0].as_vector();
    let mut prev = f64::INFINITY;
    for alpha in [1e-2, 1e-4, 1e-6, 1e-8] {
        let p = invert_signals(&table, &cm, Inversion::Tikhonov { alpha }).unwrap()[0].as_vector();
        let err = (p - exact).norm() / exact.norm();
        assert!(err < prev);
        prev = err;
    }
    assert!(prev < 1e-6);
}

#[test]
fn pooled_signals_reconstruct_to_mean_of_memberwise_reconstructions() {
    // With one fixed C and M the pipeline is linear, so averaging before or
    // after the inversion agrees.
    let setup = SimulationSetup {
        bath: BathParams::reference(),
        toolbox: PulseToolbox::reference(),
        units: UnitSystem::STANDARD,
        waiting_times: vec![150.0, 400.0],
        gammas: vec![1.5],
        tau: 0.0,
        t: 0.0,
        mode: ResponseMode::Derived,
        optical_dephasing: None,
    };
    let base = DimerParams::reference();
    let members = sample_members(
        &base,
        &EnsembleSpec {
            n_members: 64,
            ..EnsembleSpec::default()
        },
    )
    .unwrap();
    let outs: Vec<_> = members.iter().map(|d| setup.simulate(d).unwrap()).collect();
    let nominal = setup.model(&base).unwrap();
    let m = build_m_blocks(&nominal.basis, 1.5).unwrap();
    let tables: Vec<SignalTable> = outs.iter().map(|o| o.per_gamma[0].1.clone()).collect();
    let pooled = reconstruct(
        &average_signals(&tables).unwrap(),
        &nominal.cmatrix,
        &m,
        None,
        Inversion::Exact,
    )
    .unwrap();
    let per: Vec<_> = tables
        .iter()
        .map(|t| reconstruct(t, &nominal.cmatrix, &m, None, Inversion::Exact).unwrap())
        .collect();
    for k in 0..2 {
        let mut acc = [C64::new(0.0, 0.0); 16];
        for r in &per {
            for (a, z) in acc.iter_mut().zip(r.chi[k].elements.iter()) {
                *a += z / per.len() as f64;
            }
        }
        let mean = ProcessTensor::from_elements(pooled.chi[k].waiting_time, acc);
        let scale = mean.elements.iter().fold(1.0f64, |s, z| s.max(z.norm()));
        assert!(pooled.chi[k].max_deviation(&mean) <= 1e-10 * scale);
    }
    // A one-member mean is that member.
    let single = mean_outputs(&outs[..1]).unwrap();
    assert_eq!(single, outs[0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pathways_are_linear_in_chi(seed in any::<u64>(), a in -2.0..2.0f64, bw in -2.0..2.0f64, gamma in 0.0..2.0f64) {
        let (b, g, _) = reference_model();
        let mut rng = StdRng::seed_from_u64(seed);
        let (x, _) = random_lindblad_tensor(&mut rng);
        let (y, _) = random_lindblad_tensor(&mut rng);
        let z = x.combine(a, &y, bw);
        let cat = PathwayCatalog::new(0.0, 0.0, gamma, &g).unwrap();
        let iso = IsotropicAverage::zzzz();
        let (px, py, pz) = (cat.signal_set(&b, &x, &iso), cat.signal_set(&b, &y, &iso), cat.signal_set(&b, &z, &iso));
        for k in 0..16 {
            let want = px.values[k] * a + py.values[k] * bw;
            prop_assert!((pz.values[k] - want).norm() <= 1e-12 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn propagation_is_a_semigroup(t1 in 0.0..800.0f64, t2 in 0.0..800.0f64) {
        let (_, g, _) = reference_model();
        let a = propagate_process_tensor(&g, t1).unwrap();
        let b = propagate_process_tensor(&g, t2).unwrap();
        let ab = propagate_process_tensor(&g, t1 + t2).unwrap();
        prop_assert!(a.then(&b).max_deviation(&ab) < 1e-12);
    }

    #[test]
    fn trace_sum_rule(t in 0.0..2000.0f64, seed in any::<u64>()) {
        let (_, g, _) = reference_model();
        let mut rng = StdRng::seed_from_u64(seed);
        for chi in [propagate_process_tensor(&g, t).unwrap(), random_lindblad_tensor(&mut rng).0] {
            for nu in Exciton::ALL {
                for mu in Exciton::ALL {
                    let delta = if nu == mu { 1.0 } else { 0.0 };
                    let s = chi.get_level(Level::G, Level::G, nu.level(), mu.level())
                        + chi.get(Exciton::E, Exciton::E, nu, mu)
                        + chi.get(Exciton::EPrime, Exciton::EPrime, nu, mu);
                    prop_assert!((s - C64::new(delta, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn isotropic_pathways_ignore_molecular_rotation(seed in any::<u64>(), gamma in 0.0..2.0f64) {
        let (b, g, _) = reference_model();
        let mut rng = StdRng::seed_from_u64(seed);
        let rot = random_rotation(&mut rng);
        let mut rb = b;
        rb.mu_eg = rot * b.mu_eg;
        rb.mu_epg = rot * b.mu_epg;
        rb.mu_fe = rot * b.mu_fe;
        rb.mu_fep = rot * b.mu_fep;
        let (chi, _) = random_lindblad_tensor(&mut rng);
        let cat = PathwayCatalog::new(0.0, 0.0, gamma, &g).unwrap();
        let iso = IsotropicAverage::zzzz();
        let (p, q) = (cat.signal_set(&b, &chi, &iso), cat.signal_set(&rb, &chi, &iso));
        for k in 0..16 {
            prop_assert!((p.values[k] - q.values[k]).norm() <= 1e-12 * (1.0 + p.values[k].norm()));
        }
    }
}

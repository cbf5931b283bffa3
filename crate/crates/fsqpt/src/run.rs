//! Orchestration behind the subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fsqpt_core::ensemble::{member, MemberOutput};
use fsqpt_core::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::io::{self, IoError};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("model: {0}")]
    Model(#[from] fsqpt_core::Error),
    #[error("{0}")]
    Usage(String),
}

/// Pairwise reduction over member indices `0..n`, split at the midpoint like
/// [`fsqpt_core::ensemble::tree_reduce`]. Leaves run in parallel; the
/// result is independent of the thread count.
pub fn par_tree_reduce<T, L, C>(n: usize, leaf: &L, combine: &C) -> Option<Result<T, RunError>>
where
    T: Send,
    L: Fn(usize) -> Result<T, RunError> + Sync,
    C: Fn(T, T) -> T + Sync,
{
    fn go<T: Send, L, C>(lo: usize, hi: usize, leaf: &L, combine: &C) -> Result<T, RunError>
    where
        L: Fn(usize) -> Result<T, RunError> + Sync,
        C: Fn(T, T) -> T + Sync,
    {
        if hi - lo == 1 {
            return leaf(lo);
        }
        let mid = lo + (hi - lo) / 2;
        let (a, b) = rayon::join(|| go(lo, mid, leaf, combine), || go(mid, hi, leaf, combine));
        Ok(combine(a?, b?))
    }
    (n > 0).then(|| go(0, n, leaf, combine))
}

fn members_of(cfg: &ExperimentConfig) -> usize {
    if cfg.homogeneous_only {
        1
    } else {
        cfg.ensemble.n_members
    }
}

fn member_params(cfg: &ExperimentConfig, i: usize) -> DimerParams {
    if cfg.homogeneous_only {
        cfg.dimer
    } else {
        member(&cfg.dimer, &cfg.ensemble, i)
    }
}

/// Ensemble mean (or the single homogeneous dimer) of every simulated output.
pub fn simulate_mean(cfg: &ExperimentConfig) -> Result<MemberOutput, RunError> {
    let setup = cfg.setup();
    let n = members_of(cfg);
    let leaf = |i: usize| setup.simulate(&member_params(cfg, i)).map_err(RunError::from);
    let mut total = par_tree_reduce(n, &leaf, &|a: MemberOutput, b: MemberOutput| a.sum(&b)).unwrap()?;
    if n > 1 {
        total.scale(1.0 / n as f64);
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub versions: Versions,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Versions {
    pub fsqpt: String,
    pub fsqpt_core: String,
}

fn ensure_dir(dir: &Path) -> Result<(), IoError> {
    std::fs::create_dir_all(dir).map_err(|source| IoError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn name(p: &Path) -> String {
    p.file_name().unwrap().to_string_lossy().into_owned()
}

/// Writes signal and pathway tables per Γ, the ground-truth tensors and the
/// manifest. Returns the written paths.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, RunError> {
    let dir = &cfg.output_dir;
    ensure_dir(dir)?;
    let mut out = simulate_mean(cfg)?;
    if let Some(noise) = &cfg.noise {
        for (gi, (_, table)) in out.per_gamma.iter_mut().enumerate() {
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.ensemble.seed);
            // Members use streams 0..n; noise counts down from the top.
            rng.set_stream(u64::MAX - gi as u64);
            noise.apply(table, &mut rng);
        }
    }
    let mut files = Vec::new();
    for (gi, (sets, table)) in out.per_gamma.iter().enumerate() {
        let g = cfg.gammas[gi];
        let s = io::signal_file(dir, g);
        io::write_signals(&s, table)?;
        let p = io::pathway_file(dir, g);
        io::write_pathways(&p, sets)?;
        files.push(s);
        files.push(p);
    }
    let t = io::truth_file(dir);
    io::write_tensors(&t, &out.truth)?;
    files.push(t);
    let manifest = Manifest {
        config: cfg.clone(),
        seed: cfg.ensemble.seed,
        versions: Versions {
            fsqpt: env!("CARGO_PKG_VERSION").into(),
            fsqpt_core: fsqpt_core::VERSION.into(),
        },
        files: files.iter().map(|f| name(f)).collect(),
    };
    let m = io::manifest_file(dir);
    io::write_text(&m, &(serde_json::to_string_pretty(&manifest).unwrap() + "\n"))?;
    files.push(m);
    Ok(files)
}

/// Reconstruction of one Γ read back from disk.
#[derive(Debug, Clone)]
pub struct GammaReconstruction {
    pub gamma: f64,
    pub report: ReconstructionReport,
}

pub fn reconstruct_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<GammaReconstruction>, RunError> {
    let setup = cfg.setup();
    let nominal = setup.model(&cfg.dimer)?;
    let truth_path = io::truth_file(dir);
    let truth = if truth_path.exists() {
        Some(io::read_tensors(&truth_path)?)
    } else {
        None
    };
    let mut out = Vec::new();
    for &g in &cfg.gammas {
        let table = io::read_signals(&io::signal_file(dir, g), g)?;
        if table.waiting_times != cfg.waiting_times_fs {
            return Err(RunError::Usage(format!(
                "{} has {} waiting times that do not match the config grid of {}",
                io::signal_file(dir, g).display(),
                table.len(),
                cfg.waiting_times_fs.len()
            )));
        }
        let m = build_m_blocks(&nominal.basis, g)?;
        let reference = truth.as_deref().filter(|t| t.len() == table.len());
        let report = reconstruct(&table, &nominal.cmatrix, &m, reference, Inversion::Exact)?;
        io::write_tensors(&io::chi_file(dir, g), &report.chi)?;
        out.push(GammaReconstruction { gamma: g, report });
    }
    let text = reconstruction_text(cfg, &out);
    io::write_text(&dir.join("reconstruction_report.txt"), &text)?;
    Ok(out)
}

pub fn reconstruction_text(cfg: &ExperimentConfig, recs: &[GammaReconstruction]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# reconstruction with the nominal dimer's C and M ({})",
        if cfg.homogeneous_only {
            "homogeneous"
        } else {
            "ensemble-mean signals"
        }
    );
    for r in recs {
        let rep = &r.report;
        let _ = writeln!(
            s,
            "gamma {:.2}  cond(C) {:.6e}  cond(M) {:.6e} {:.6e} {:.6e}",
            r.gamma, rep.c_condition, rep.m_conditions[0], rep.m_conditions[1], rep.m_conditions[2]
        );
        let _ = writeln!(s, "  T_fs  max_residual  hermiticity  trace  min_choi_eig");
        for (k, chi) in rep.chi.iter().enumerate() {
            let res = rep
                .residuals
                .as_ref()
                .map(|v| format!("{:.3e}", v[k]))
                .unwrap_or_else(|| "n/a".into());
            let _ = writeln!(
                s,
                "  {:6.1}  {}  {:.3e}  {:.3e}  {:.3e}",
                chi.waiting_time, res, rep.hermiticity_defect[k], rep.trace_defect[k], rep.min_choi_eigenvalue[k]
            );
        }
        if let Some(m) = rep.max_residual() {
            let _ = writeln!(s, "  max residual {m:.3e}");
        }
    }
    s
}

/// Per-T defects of a tensor file.
#[derive(Debug, Clone)]
pub struct ValidationOutcome {
    pub rows: Vec<(f64, TensorDefects)>,
    pub tolerance: f64,
}

impl ValidationOutcome {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|(_, d)| d.passes(self.tolerance))
    }

    pub fn text(&self) -> String {
        let mut s = String::from("T_fs  hermiticity  trace  min_choi_eig  status\n");
        for (t, d) in &self.rows {
            let mut bad = Vec::new();
            if d.hermiticity_defect > self.tolerance {
                bad.push("hermiticity");
            }
            if d.trace_defect > self.tolerance {
                bad.push("trace");
            }
            if d.min_choi_eigenvalue < -self.tolerance {
                bad.push("choi");
            }
            let status = if bad.is_empty() {
                "ok".to_string()
            } else {
                format!("FAIL({})", bad.join(","))
            };
            let _ = writeln!(
                s,
                "{t:.1}  {:.3e}  {:.3e}  {:.3e}  {status}",
                d.hermiticity_defect, d.trace_defect, d.min_choi_eigenvalue
            );
        }
        s
    }
}

pub fn validate_file(path: &Path, tolerance: f64) -> Result<ValidationOutcome, RunError> {
    let tensors = io::read_tensors(path)?;
    if tensors.is_empty() {
        return Err(RunError::Usage(format!("{} contains no waiting times", path.display())));
    }
    Ok(ValidationOutcome {
        rows: tensors.iter().map(|c| (c.waiting_time, validate_tensor(c))).collect(),
        tolerance,
    })
}

/// Cross-Γ summary of a directory that has been reconstructed.
#[derive(Debug, Clone)]
pub struct Summary {
    /// (Γ, max residual against the ground truth, min Choi eigenvalue).
    pub per_gamma: Vec<(f64, Option<f64>, f64)>,
    pub max_pairwise_deviation: f64,
}

pub fn summarize(cfg: &ExperimentConfig, dir: &Path) -> Result<Summary, RunError> {
    let truth_path = io::truth_file(dir);
    let truth = truth_path.exists().then(|| io::read_tensors(&truth_path)).transpose()?;
    let mut all = Vec::new();
    let mut per_gamma = Vec::new();
    for &g in &cfg.gammas {
        let chi = io::read_tensors(&io::chi_file(dir, g))?;
        let res = truth.as_ref().map(|t| {
            chi.iter()
                .zip(t.iter())
                .map(|(a, b)| a.max_deviation(b))
                .fold(0.0, f64::max)
        });
        let minc = chi
            .iter()
            .map(|c| validate_tensor(c).min_choi_eigenvalue)
            .fold(f64::INFINITY, f64::min);
        per_gamma.push((g, res, minc));
        all.push(chi);
    }
    let mut worst = 0.0f64;
    for a in &all {
        for b in &all {
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max(x.max_deviation(y));
            }
        }
    }
    Ok(Summary {
        per_gamma,
        max_pairwise_deviation: worst,
    })
}

impl Summary {
    pub fn text(&self) -> String {
        let mut s = String::from("gamma  max_residual  min_choi_eig\n");
        for (g, r, c) in &self.per_gamma {
            let r = r.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "n/a".into());
            let _ = writeln!(s, "{g:.2}  {r}  {c:.3e}");
        }
        let _ = writeln!(
            s,
            "max pairwise deviation across gamma: {:.3e}",
            self.max_pairwise_deviation
        );
        s
    }
}

/// Member-by-member reconstruction: each dimer's signals are inverted with
/// its own C and M, then the recovered tensors are averaged. Pipeline
/// linearity makes this the ensemble-averaged tensor.
#[derive(Debug, Clone)]
pub struct MemberwiseResult {
    pub truth_mean: Vec<ProcessTensor>,
    /// Mean reconstructed tensors, one list per Γ.
    pub reconstructed_mean: Vec<Vec<ProcessTensor>>,
    /// Worst single-member residual over all Γ and T.
    pub max_member_residual: f64,
}

pub fn memberwise_reconstruction(cfg: &ExperimentConfig) -> Result<MemberwiseResult, RunError> {
    let setup = cfg.setup();
    let n = members_of(cfg);
    let iso = IsotropicAverage::zzzz();
    let leaf = |i: usize| -> Result<MemberwiseResult, RunError> {
        let model = setup.model(&member_params(cfg, i))?;
        let truth = setup.truth(&model.gen)?;
        let mut rec = Vec::with_capacity(cfg.gammas.len());
        let mut worst = 0.0f64;
        for &g in &cfg.gammas {
            let cat = PathwayCatalog::new(0.0, 0.0, g, &model.gen)?;
            let table = SignalTable {
                gamma: g,
                waiting_times: cfg.waiting_times_fs.clone(),
                rows: truth
                    .iter()
                    .map(|chi| assemble_signal(&model.cmatrix, &cat.signal_set(&model.basis, chi, &iso)))
                    .collect(),
            };
            let m = build_m_blocks(&model.basis, g)?;
            let rep = reconstruct(&table, &model.cmatrix, &m, Some(&truth), Inversion::Exact)?;
            worst = worst.max(rep.max_residual().unwrap());
            rec.push(rep.chi);
        }
        Ok(MemberwiseResult {
            truth_mean: truth,
            reconstructed_mean: rec,
            max_member_residual: worst,
        })
    };
    let add = |a: &[ProcessTensor], b: &[ProcessTensor]| -> Vec<ProcessTensor> {
        a.iter().zip(b.iter()).map(|(x, y)| x.combine(1.0, y, 1.0)).collect()
    };
    let combine = |a: MemberwiseResult, b: MemberwiseResult| MemberwiseResult {
        truth_mean: add(&a.truth_mean, &b.truth_mean),
        reconstructed_mean: a
            .reconstructed_mean
            .iter()
            .zip(b.reconstructed_mean.iter())
            .map(|(x, y)| add(x, y))
            .collect(),
        max_member_residual: a.max_member_residual.max(b.max_member_residual),
    };
    let mut total = par_tree_reduce(n, &leaf, &combine).unwrap()?;
    let f = 1.0 / n as f64;
    let scale = |v: &mut Vec<ProcessTensor>| {
        for t in v.iter_mut() {
            *t = t.combine(f, t, 0.0);
        }
    };
    scale(&mut total.truth_mean);
    for r in total.reconstructed_mean.iter_mut() {
        scale(r);
    }
    Ok(total)
}

/// Installs the global thread pool from `FSQPT_THREADS` when set.
pub fn init_threads() -> Result<(), RunError> {
    if let Ok(v) = std::env::var("FSQPT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| RunError::Usage(format!("FSQPT_THREADS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(RunError::Usage("FSQPT_THREADS must be at least 1".into()));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

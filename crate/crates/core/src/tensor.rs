//! The process tensor χ(T) of the single-exciton manifold.
//!
//! `ρ_nm(T) = Σ_νμ χ_nmνμ(T) ρ_νμ(0)` for n, m, ν, μ ∈ {e, e′}. The ground row
//! χ_ggνμ follows from trace closure, and the ground state itself is stationary
//! (χ_abgg = δ_ag δ_bg).

use nalgebra::{Complex, DMatrix, SMatrix, SymmetricEigen};
use num_traits::{Float, Zero};

use crate::levels::{Exciton, Level};
use crate::C64;

/// Flat index n·8 + m·4 + ν·2 + μ of χ_nmνμ.
#[inline]
pub const fn chi_index(n: Exciton, m: Exciton, nu: Exciton, mu: Exciton) -> usize {
    n.index() * 8 + m.index() * 4 + nu.index() * 2 + mu.index()
}

/// Inverse of [`chi_index`].
#[inline]
pub const fn chi_labels(k: usize) -> [Exciton; 4] {
    [
        Exciton::from_index((k >> 3) & 1),
        Exciton::from_index((k >> 2) & 1),
        Exciton::from_index((k >> 1) & 1),
        Exciton::from_index(k & 1),
    ]
}

/// Nine-dimensional superoperator on {g, e, e′}, row (n, m) = 3n + m.
pub type Superoperator = SMatrix<C64, 9, 9>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessTensor {
    pub waiting_time: f64,
    /// χ_nmνμ at [`chi_index`].
    pub elements: [C64; 16],
    /// χ_ggνμ at ν·2 + μ.
    pub ground_row: [C64; 4],
}

impl ProcessTensor {
    /// Builds a tensor and closes the ground row: χ_ggνμ = δ_νμ − χ_eeνμ − χ_e′e′νμ.
    pub fn from_elements(waiting_time: f64, elements: [C64; 16]) -> Self {
        let mut ground_row = [C64::zero(); 4];
        for nu in Exciton::ALL {
            for mu in Exciton::ALL {
                let delta = if nu == mu { 1.0 } else { 0.0 };
                let mut v = C64::new(delta, 0.0);
                for n in Exciton::ALL {
                    v -= elements[chi_index(n, n, nu, mu)];
                }
                ground_row[nu.index() * 2 + mu.index()] = v;
            }
        }
        ProcessTensor {
            waiting_time,
            elements,
            ground_row,
        }
    }

    pub fn identity(waiting_time: f64) -> Self {
        let mut e = [C64::zero(); 16];
        for n in Exciton::ALL {
            for m in Exciton::ALL {
                e[chi_index(n, m, n, m)] = C64::new(1.0, 0.0);
            }
        }
        Self::from_elements(waiting_time, e)
    }

    #[inline]
    pub fn get(&self, n: Exciton, m: Exciton, nu: Exciton, mu: Exciton) -> C64 {
        self.elements[chi_index(n, m, nu, mu)]
    }

    /// Element on the {g, e, e′} space; optical coherences map to zero and the
    /// ground state is stationary.
    pub fn get_level(&self, n: Level, m: Level, nu: Level, mu: Level) -> C64 {
        let one = C64::new(1.0, 0.0);
        match (n.exciton(), m.exciton(), nu.exciton(), mu.exciton()) {
            (Some(n), Some(m), Some(nu), Some(mu)) => self.get(n, m, nu, mu),
            (None, None, Some(nu), Some(mu)) if n == Level::G && m == Level::G => {
                self.ground_row[nu.index() * 2 + mu.index()]
            }
            _ if nu == Level::G && mu == Level::G => {
                if n == Level::G && m == Level::G {
                    one
                } else {
                    C64::zero()
                }
            }
            _ => C64::zero(),
        }
    }

    pub fn superoperator(&self) -> Superoperator {
        const L: [Level; 3] = [Level::G, Level::E, Level::EPrime];
        Superoperator::from_fn(|r, c| self.get_level(L[r / 3], L[r % 3], L[c / 3], L[c % 3]))
    }

    /// Reads the single-exciton block back out of a superoperator. The ground
    /// row is taken from the superoperator, not re-closed.
    pub fn from_superoperator(waiting_time: f64, s: &Superoperator) -> Self {
        let mut elements = [C64::zero(); 16];
        for (k, slot) in elements.iter_mut().enumerate() {
            let [n, m, nu, mu] = chi_labels(k);
            *slot = s[(
                3 * (n.index() + 1) + m.index() + 1,
                3 * (nu.index() + 1) + mu.index() + 1,
            )];
        }
        let mut ground_row = [C64::zero(); 4];
        for nu in Exciton::ALL {
            for mu in Exciton::ALL {
                ground_row[nu.index() * 2 + mu.index()] = s[(0, 3 * (nu.index() + 1) + mu.index() + 1)];
            }
        }
        ProcessTensor {
            waiting_time,
            elements,
            ground_row,
        }
    }

    /// `later ∘ self`: first propagate by `self`, then by `later`.
    pub fn then(&self, later: &ProcessTensor) -> ProcessTensor {
        let s = later.superoperator() * self.superoperator();
        Self::from_superoperator(self.waiting_time + later.waiting_time, &s)
    }

    /// Choi matrix J_(n,ν),(m,μ) = χ_nmνμ on {g, e, e′}, row (n, ν) = 3n + ν.
    pub fn choi(&self) -> DMatrix<C64> {
        const L: [Level; 3] = [Level::G, Level::E, Level::EPrime];
        DMatrix::from_fn(9, 9, |r, c| self.get_level(L[r / 3], L[c / 3], L[r % 3], L[c % 3]))
    }

    /// Largest elementwise deviation, including the ground row.
    pub fn max_deviation(&self, other: &ProcessTensor) -> f64 {
        self.elements
            .iter()
            .zip(other.elements.iter())
            .chain(self.ground_row.iter().zip(other.ground_row.iter()))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Elementwise affine combination `a·self + b·other`; the ground row is
    /// combined the same way.
    pub fn combine(&self, a: f64, other: &ProcessTensor, b: f64) -> ProcessTensor {
        let mut out = *self;
        for (o, (x, y)) in out.elements.iter_mut().chain(out.ground_row.iter_mut()).zip(
            self.elements
                .iter()
                .chain(self.ground_row.iter())
                .zip(other.elements.iter().chain(other.ground_row.iter())),
        ) {
            *o = x * a + y * b;
        }
        out
    }
}

/// Property defects of a process tensor. All are nonnegative except the Choi
/// eigenvalue, which is what it is.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TensorDefects {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_choi_eigenvalue: f64,
}

impl TensorDefects {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.hermiticity_defect <= tolerance && self.trace_defect <= tolerance && self.min_choi_eigenvalue >= -tolerance
    }
}

/// Hermiticity, trace closure and the smallest Choi eigenvalue.
pub fn validate_tensor(chi: &ProcessTensor) -> TensorDefects {
    let mut herm = 0.0f64;
    for n in Exciton::ALL {
        for m in Exciton::ALL {
            for nu in Exciton::ALL {
                for mu in Exciton::ALL {
                    let d = chi.get(n, m, nu, mu) - chi.get(m, n, mu, nu).conj();
                    herm = herm.max(d.norm());
                }
            }
        }
    }
    // Ground row: χ_ggνμ = conj(χ_ggμν).
    for nu in Exciton::ALL {
        for mu in Exciton::ALL {
            let d = chi.ground_row[nu.index() * 2 + mu.index()] - chi.ground_row[mu.index() * 2 + nu.index()].conj();
            herm = herm.max(d.norm());
        }
    }

    let mut trace = 0.0f64;
    for nu in Exciton::ALL {
        for mu in Exciton::ALL {
            let delta = if nu == mu { 1.0 } else { 0.0 };
            let s = chi.ground_row[nu.index() * 2 + mu.index()]
                + chi.get(Exciton::E, Exciton::E, nu, mu)
                + chi.get(Exciton::EPrime, Exciton::EPrime, nu, mu);
            trace = trace.max((s - C64::new(delta, 0.0)).norm());
        }
    }

    TensorDefects {
        hermiticity_defect: herm,
        trace_defect: trace,
        min_choi_eigenvalue: min_hermitian_eigenvalue(&chi.choi()),
    }
}

/// Smallest eigenvalue of the Hermitian part of a square matrix.
pub(crate) fn min_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let h: DMatrix<Complex<f64>> = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    eig.eigenvalues.iter().copied().fold(f64::infinity(), f64::min)
}

//! State, transition and pathway labels of the dimer.

use core::fmt;

/// One of the two single-exciton states. `E` is the upper exciton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Exciton {
    E,
    EPrime,
}

impl Exciton {
    pub const ALL: [Exciton; 2] = [Exciton::E, Exciton::EPrime];

    #[inline]
    pub const fn index(self) -> usize {
        match self {
            Exciton::E => 0,
            Exciton::EPrime => 1,
        }
    }

    #[inline]
    pub const fn from_index(i: usize) -> Exciton {
        if i == 0 {
            Exciton::E
        } else {
            Exciton::EPrime
        }
    }

    /// The other single exciton.
    #[inline]
    pub const fn partner(self) -> Exciton {
        match self {
            Exciton::E => Exciton::EPrime,
            Exciton::EPrime => Exciton::E,
        }
    }

    #[inline]
    pub const fn level(self) -> Level {
        match self {
            Exciton::E => Level::E,
            Exciton::EPrime => Level::EPrime,
        }
    }

    /// Ground-state absorption g → self.
    #[inline]
    pub const fn from_ground(self) -> Transition {
        match self {
            Exciton::E => Transition::EG,
            Exciton::EPrime => Transition::EPrimeG,
        }
    }

    /// Excited-state absorption self → f.
    #[inline]
    pub const fn to_biexciton(self) -> Transition {
        match self {
            Exciton::E => Transition::FE,
            Exciton::EPrime => Transition::FEPrime,
        }
    }

    pub const fn symbol(self) -> &'static str {
        match self {
            Exciton::E => "e",
            Exciton::EPrime => "e'",
        }
    }
}

impl fmt::Display for Exciton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Any eigenstate of the dimer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Level {
    G,
    E,
    EPrime,
    F,
}

impl Level {
    pub const fn exciton(self) -> Option<Exciton> {
        match self {
            Level::E => Some(Exciton::E),
            Level::EPrime => Some(Exciton::EPrime),
            _ => None,
        }
    }

    pub const fn symbol(self) -> &'static str {
        match self {
            Level::G => "g",
            Level::E => "e",
            Level::EPrime => "e'",
            Level::F => "f",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Optically allowed transitions; dipoles are real so μ_ij = μ_ji.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Transition {
    EG,
    EPrimeG,
    FE,
    FEPrime,
}

impl Transition {
    pub const ALL: [Transition; 4] = [Transition::EG, Transition::EPrimeG, Transition::FE, Transition::FEPrime];

    #[inline]
    pub const fn index(self) -> usize {
        match self {
            Transition::EG => 0,
            Transition::EPrimeG => 1,
            Transition::FE => 2,
            Transition::FEPrime => 3,
        }
    }

    /// (upper, lower) levels.
    pub const fn levels(self) -> (Level, Level) {
        match self {
            Transition::EG => (Level::E, Level::G),
            Transition::EPrimeG => (Level::EPrime, Level::G),
            Transition::FE => (Level::F, Level::E),
            Transition::FEPrime => (Level::F, Level::EPrime),
        }
    }

    /// The exciton whose ground-state transition shares this transition's
    /// frequency: ϖ_fe = ϖ_e′g and ϖ_fe′ = ϖ_eg. Pulse coefficients are
    /// labelled by it.
    #[inline]
    pub const fn resonance(self) -> Exciton {
        match self {
            Transition::EG | Transition::FEPrime => Exciton::E,
            Transition::EPrimeG | Transition::FE => Exciton::EPrime,
        }
    }

    pub const fn symbol(self) -> &'static str {
        match self {
            Transition::EG => "eg",
            Transition::EPrimeG => "e'g",
            Transition::FE => "fe",
            Transition::FEPrime => "fe'",
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Pulse labels (p, q, r, s) of one pathway amplitude P^{p,q,r,s}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathwayLabels(pub [Exciton; 4]);

impl PathwayLabels {
    pub fn new(p: Exciton, q: Exciton, r: Exciton, s: Exciton) -> Self {
        PathwayLabels([p, q, r, s])
    }

    /// Index 8p + 4q + 2r + s with e = 0, e′ = 1; this is also the column order
    /// of the experiment matrix C.
    #[inline]
    pub fn index(self) -> usize {
        self.0.iter().fold(0, |acc, x| 2 * acc + x.index())
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        debug_assert!(i < 16);
        PathwayLabels([
            Exciton::from_index((i >> 3) & 1),
            Exciton::from_index((i >> 2) & 1),
            Exciton::from_index((i >> 1) & 1),
            Exciton::from_index(i & 1),
        ])
    }

    pub fn all() -> impl Iterator<Item = PathwayLabels> {
        (0..16).map(PathwayLabels::from_index)
    }

    pub fn p(self) -> Exciton {
        self.0[0]
    }
    pub fn q(self) -> Exciton {
        self.0[1]
    }
    pub fn r(self) -> Exciton {
        self.0[2]
    }
    pub fn s(self) -> Exciton {
        self.0[3]
    }
}

impl fmt::Display for PathwayLabels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [p, q, r, s] = self.0;
        write!(f, "{p},{q},{r},{s}")
    }
}

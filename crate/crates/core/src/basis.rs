//! Product bases for the dimer: the fixed-excitation sector used by the
//! closed models and the cutoff basis used by the open system.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One product state `|n_L, k_L> ⊗ |n_R, k_R>`.
///
/// `k` counts spin excitations, `k = m + S` with `m` the magnetic quantum
/// number, so every label is a non-negative integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisState {
    pub n_left: u32,
    pub k_left: u32,
    pub n_right: u32,
    pub k_right: u32,
}

impl BasisState {
    pub const fn new(n_left: u32, k_left: u32, n_right: u32, k_right: u32) -> Self {
        Self {
            n_left,
            k_left,
            n_right,
            k_right,
        }
    }

    pub fn excitations(&self) -> u32 {
        self.n_left + self.k_left + self.n_right + self.k_right
    }

    pub fn left_excitations(&self) -> u32 {
        self.n_left + self.k_left
    }

    pub fn right_excitations(&self) -> u32 {
        self.n_right + self.k_right
    }
}

impl std::fmt::Display for BasisState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.n_left, self.k_left, self.n_right, self.k_right
        )
    }
}

/// Identifies the basis an operator was built on, so mismatched operands are
/// caught instead of silently multiplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisTag {
    Sector { n_p: u32, n_atoms: u32 },
    Truncated { n_cut: u32, two_s: u32 },
}

impl BasisTag {
    /// Atoms per unit (`2S`).
    pub fn n_atoms(&self) -> u32 {
        match *self {
            BasisTag::Sector { n_atoms, .. } => n_atoms,
            BasisTag::Truncated { two_s, .. } => two_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorParams {
    pub n_p: u32,
    pub n_atoms: u32,
}

impl SectorParams {
    pub fn new(n_p: u32, n_atoms: u32) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::invalid("n_atoms must be at least 1"));
        }
        Ok(Self { n_p, n_atoms })
    }
}

/// Common interface of the sector and truncated bases.
pub trait Basis {
    fn tag(&self) -> BasisTag;
    fn states(&self) -> &[BasisState];
    fn index_of(&self, state: &BasisState) -> Option<usize>;

    fn dim(&self) -> usize {
        self.states().len()
    }

    fn n_atoms(&self) -> u32 {
        self.tag().n_atoms()
    }
}

fn build_index(states: &[BasisState]) -> HashMap<BasisState, usize> {
    states.iter().enumerate().map(|(i, s)| (*s, i)).collect()
}

#[derive(Debug, Clone)]
pub struct SectorBasis {
    params: SectorParams,
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
}

impl SectorBasis {
    pub fn params(&self) -> SectorParams {
        self.params
    }
}

impl Basis for SectorBasis {
    fn tag(&self) -> BasisTag {
        BasisTag::Sector {
            n_p: self.params.n_p,
            n_atoms: self.params.n_atoms,
        }
    }

    fn states(&self) -> &[BasisState] {
        &self.states
    }

    fn index_of(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }
}

/// All states with `n_L + k_L + n_R + k_R = n_p` and `k ≤ N`, in
/// lexicographic order of `(n_L, k_L, n_R, k_R)`.
pub fn enumerate_sector(params: SectorParams) -> SectorBasis {
    let SectorParams { n_p, n_atoms } = params;
    let mut states = Vec::new();
    for n_left in 0..=n_p {
        for k_left in 0..=n_atoms.min(n_p - n_left) {
            let rest = n_p - n_left - k_left;
            for n_right in 0..=rest {
                let k_right = rest - n_right;
                if k_right <= n_atoms {
                    states.push(BasisState::new(n_left, k_left, n_right, k_right));
                }
            }
        }
    }
    let index = build_index(&states);
    SectorBasis {
        params,
        states,
        index,
    }
}

/// Product basis with `n ≤ n_cut` per cavity and spin length `S = two_s / 2`.
#[derive(Debug, Clone)]
pub struct TruncatedBasis {
    n_cut: u32,
    two_s: u32,
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
}

impl TruncatedBasis {
    pub fn n_cut(&self) -> u32 {
        self.n_cut
    }

    pub fn spin_s(&self) -> f64 {
        f64::from(self.two_s) / 2.0
    }
}

impl Basis for TruncatedBasis {
    fn tag(&self) -> BasisTag {
        BasisTag::Truncated {
            n_cut: self.n_cut,
            two_s: self.two_s,
        }
    }

    fn states(&self) -> &[BasisState] {
        &self.states
    }

    fn index_of(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }
}

/// Spin length is passed as `two_s = 2S` so half-integers stay exact.
pub fn enumerate_truncated(n_cut: u32, two_s: u32) -> TruncatedBasis {
    let mut states = Vec::new();
    for n_left in 0..=n_cut {
        for k_left in 0..=two_s {
            for n_right in 0..=n_cut {
                for k_right in 0..=two_s {
                    states.push(BasisState::new(n_left, k_left, n_right, k_right));
                }
            }
        }
    }
    let index = build_index(&states);
    TruncatedBasis {
        n_cut,
        two_s,
        states,
        index,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sectors() {
        assert_eq!(enumerate_sector(SectorParams::new(0, 2).unwrap()).states(), &[BasisState::new(0, 0, 0, 0)]);
        assert_eq!(enumerate_sector(SectorParams::new(1, 1).unwrap()).dim(), 4);
        assert_eq!(enumerate_sector(SectorParams::new(2, 2).unwrap()).dim(), 10);
    }

    #[test]
    fn zero_atoms_rejected() {
        assert!(SectorParams::new(3, 0).is_err());
    }

    #[test]
    fn truncated_dims() {
        assert_eq!(enumerate_truncated(3, 6).dim(), 784);
        assert_eq!(enumerate_truncated(0, 1).dim(), 4);
        assert_eq!(enumerate_truncated(1, 1).dim(), 16);
    }

    #[test]
    fn lookup() {
        let b = enumerate_sector(SectorParams::new(2, 2).unwrap());
        assert_eq!(b.index_of(&b.states()[0]), Some(0));
        assert_eq!(b.index_of(&BasisState::new(3, 0, 0, 0)), None);
        for (i, s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
        }
    }

    #[test]
    fn ordering_is_lexicographic() {
        let b = enumerate_sector(SectorParams::new(5, 3).unwrap());
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        let t = enumerate_truncated(2, 2);
        assert!(t.states().windows(2).all(|w| w[0] < w[1]));
    }
}

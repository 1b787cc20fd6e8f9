//! Operators of the dimer as dense matrices on a product basis.

use faer::{c64, Mat};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, BasisState, BasisTag};
use crate::error::{Error, Result};
use crate::seeding::realization_rng;

/// Divisor applied to the light-matter coupling `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingNorm {
    /// `λ/√N`, the closed-model convention.
    SqrtAtoms,
    /// `λ/√S` with `S = N/2`, the gain-loss convention.
    SqrtSpin,
}

impl CouplingNorm {
    fn divisor(self, n_atoms: u32) -> f64 {
        match self {
            CouplingNorm::SqrtAtoms => f64::from(n_atoms).sqrt(),
            CouplingNorm::SqrtSpin => (f64::from(n_atoms) / 2.0).sqrt(),
        }
    }
}

/// Model parameters in units of the hopping `J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub omega_c_left: f64,
    pub omega_c_right: f64,
    pub omega_s: f64,
    pub lambda: f64,
    pub j_hop: f64,
    pub delta_left: f64,
    pub delta_right: f64,
    pub kappa: f64,
    /// `None` selects the builder's own convention.
    pub coupling_norm: Option<CouplingNorm>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega_c_left: 1.0,
            omega_c_right: 1.0,
            omega_s: 1.0,
            lambda: 0.0,
            j_hop: 1.0,
            delta_left: 0.0,
            delta_right: 0.0,
            kappa: 0.0,
            coupling_norm: None,
        }
    }
}

impl ModelParams {
    /// Resonant dimer with `ω_c = ω_s = J = 1`.
    pub fn resonant(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn with_cavities(mut self, (left, right): (f64, f64)) -> Self {
        self.omega_c_left = left;
        self.omega_c_right = right;
        self
    }

    /// Gain on the left, equal loss on the right: `Δ_L = κ`, `Δ_R = −κ`.
    pub fn with_gain_loss(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self.delta_left = kappa;
        self.delta_right = -kappa;
        self
    }

    /// `J = 0` is accepted so decoupled limits stay reachable.
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.omega_c_left,
            self.omega_c_right,
            self.omega_s,
            self.lambda,
            self.j_hop,
            self.delta_left,
            self.delta_right,
            self.kappa,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("model parameters must be finite"));
        }
        if self.lambda < 0.0 {
            return Err(Error::invalid("lambda must be non-negative"));
        }
        if self.j_hop < 0.0 {
            return Err(Error::invalid("j_hop must be non-negative"));
        }
        if self.kappa < 0.0 {
            return Err(Error::invalid("kappa must be non-negative"));
        }
        Ok(())
    }
}

/// Uniform relative disorder of the two cavity frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderLaw {
    pub center: f64,
    pub relative_width: f64,
    pub seed: u64,
    pub realization_index: u64,
}

impl DisorderLaw {
    pub fn new(center: f64, seed: u64, realization_index: u64) -> Self {
        Self {
            center,
            relative_width: 0.10,
            seed,
            realization_index,
        }
    }
}

/// Independent draws `ω_u ~ U[c(1−w), c(1+w)]`, left first.
pub fn draw_disorder(law: &DisorderLaw) -> (f64, f64) {
    let mut rng = realization_rng(law.seed, law.realization_index);
    let mut draw = || {
        let u: f64 = rng.random();
        law.center * (1.0 + law.relative_width * (2.0 * u - 1.0))
    };
    let left = draw();
    let right = draw();
    (left, right)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderMode {
    Cavity,
    Spin,
}

/// Raising amplitude `<level+1| op† |level>`: `√(n+1)` for the cavity,
/// `√((k+1)(N−k))` for the collective spin of `N` atoms.
pub fn ladder_amplitude(mode: LadderMode, from_level: u32, n_atoms: u32) -> Result<f64> {
    match mode {
        LadderMode::Cavity => Ok((f64::from(from_level) + 1.0).sqrt()),
        LadderMode::Spin => {
            if from_level > n_atoms {
                return Err(Error::LevelOutOfRange {
                    mode: "spin",
                    level: from_level,
                });
            }
            let k = f64::from(from_level);
            Ok(((k + 1.0) * (f64::from(n_atoms) - k)).sqrt())
        }
    }
}

/// Dense operator tagged with its basis.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    basis_tag: BasisTag,
    entries: Mat<c64>,
    hermitian: bool,
}

impl OperatorMatrix {
    /// Wraps a matrix; the Hermitian flag is set only if the entries pass
    /// the `10⁻¹²` relative check.
    pub fn new(basis_tag: BasisTag, entries: Mat<c64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::invalid("operator matrix must be square"));
        }
        let hermitian = hermitian_defect(entries.as_ref()) <= 1e-12 * max_abs(entries.as_ref());
        Ok(Self {
            basis_tag,
            entries,
            hermitian,
        })
    }

    pub fn basis_tag(&self) -> BasisTag {
        self.basis_tag
    }

    pub fn entries(&self) -> &Mat<c64> {
        &self.entries
    }

    pub fn into_entries(self) -> Mat<c64> {
        self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(self.entries.as_ref())
    }

    /// Real diagonal, if the operator is diagonal with real entries.
    pub fn real_diagonal(&self) -> Option<Vec<f64>> {
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                let z = self.entries[(i, j)];
                if (i != j && z != c64::new(0.0, 0.0)) || (i == j && z.im != 0.0) {
                    return None;
                }
            }
        }
        Some((0..n).map(|i| self.entries[(i, i)].re).collect())
    }

    /// Real part as a real matrix, if the imaginary part vanishes.
    pub fn to_real(&self) -> Option<Mat<f64>> {
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                if self.entries[(i, j)].im != 0.0 {
                    return None;
                }
            }
        }
        Some(Mat::from_fn(n, n, |i, j| self.entries[(i, j)].re))
    }

    /// `max|AB − BA|`.
    pub fn commutator_max(&self, other: &OperatorMatrix) -> Result<f64> {
        self.check_same_basis(other.basis_tag)?;
        let ab = &self.entries * &other.entries;
        let ba = &other.entries * &self.entries;
        Ok(max_abs((ab - ba).as_ref()))
    }

    /// `max|M − Mᵀ|`.
    pub fn transpose_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..j {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)]).norm());
            }
        }
        worst
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(self.entries.as_ref())
    }

    pub(crate) fn check_same_basis(&self, tag: BasisTag) -> Result<()> {
        if self.basis_tag != tag {
            return Err(Error::BasisMismatch {
                expected: self.basis_tag,
                found: tag,
            });
        }
        Ok(())
    }
}

pub(crate) fn max_abs(m: faer::MatRef<'_, c64>) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

fn hermitian_defect(m: faer::MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Sparse `(row, col, value)` entries of the Hamiltonian on any basis.
/// Terms leaving a truncated basis are dropped.
pub(crate) fn hamiltonian_triplets<B: Basis>(
    basis: &B,
    params: &ModelParams,
    norm: CouplingNorm,
    gain_loss: bool,
) -> Vec<(usize, usize, c64)> {
    let n_atoms = basis.n_atoms();
    let spin_offset = f64::from(n_atoms) / 2.0;
    let g = if n_atoms == 0 {
        0.0
    } else {
        params.lambda / norm.divisor(n_atoms)
    };
    let nf = f64::from(n_atoms);
    let mut out = Vec::with_capacity(basis.dim() * 7);

    for (col, s) in basis.states().iter().enumerate() {
        let (n_l, k_l, n_r, k_r) = (
            f64::from(s.n_left),
            f64::from(s.k_left),
            f64::from(s.n_right),
            f64::from(s.k_right),
        );
        let mut diag = c64::new(
            params.omega_c_left * n_l
                + params.omega_c_right * n_r
                + params.omega_s * (k_l - spin_offset)
                + params.omega_s * (k_r - spin_offset),
            0.0,
        );
        if gain_loss {
            diag.im = params.delta_left * n_l + params.delta_right * n_r;
        }
        out.push((col, col, diag));

        let mut push = |target: Option<BasisState>, amp: f64| {
            if amp == 0.0 {
                return;
            }
            if let Some(row) = target.and_then(|t| basis.index_of(&t)) {
                out.push((row, col, c64::new(amp, 0.0)));
            }
        };

        if g != 0.0 {
            // a† S⁻ and a S⁺ on each unit
            if s.k_left > 0 {
                let amp = g * (n_l + 1.0).sqrt() * (k_l * (nf - k_l + 1.0)).sqrt();
                push(Some(BasisState::new(s.n_left + 1, s.k_left - 1, s.n_right, s.k_right)), amp);
            }
            if s.n_left > 0 && s.k_left < n_atoms {
                let amp = g * n_l.sqrt() * ((k_l + 1.0) * (nf - k_l)).sqrt();
                push(Some(BasisState::new(s.n_left - 1, s.k_left + 1, s.n_right, s.k_right)), amp);
            }
            if s.k_right > 0 {
                let amp = g * (n_r + 1.0).sqrt() * (k_r * (nf - k_r + 1.0)).sqrt();
                push(Some(BasisState::new(s.n_left, s.k_left, s.n_right + 1, s.k_right - 1)), amp);
            }
            if s.n_right > 0 && s.k_right < n_atoms {
                let amp = g * n_r.sqrt() * ((k_r + 1.0) * (nf - k_r)).sqrt();
                push(Some(BasisState::new(s.n_left, s.k_left, s.n_right - 1, s.k_right + 1)), amp);
            }
        }
        if params.j_hop != 0.0 {
            // J (a_L† a_R + a_R† a_L)
            if s.n_right > 0 {
                let amp = params.j_hop * (n_l + 1.0).sqrt() * n_r.sqrt();
                push(Some(BasisState::new(s.n_left + 1, s.k_left, s.n_right - 1, s.k_right)), amp);
            }
            if s.n_left > 0 {
                let amp = params.j_hop * n_l.sqrt() * (n_r + 1.0).sqrt();
                push(Some(BasisState::new(s.n_left - 1, s.k_left, s.n_right + 1, s.k_right)), amp);
            }
        }
    }
    out
}

pub(crate) fn dense_from_triplets(dim: usize, triplets: &[(usize, usize, c64)]) -> Mat<c64> {
    let mut m = Mat::<c64>::zeros(dim, dim);
    for &(i, j, v) in triplets {
        m[(i, j)] += v;
    }
    m
}

/// Closed dimer Hamiltonian with coupling `λ/√N` unless overridden.
pub fn build_hamiltonian_tcd<B: Basis>(basis: &B, params: &ModelParams) -> Result<OperatorMatrix> {
    params.validate()?;
    if params.delta_left != 0.0 || params.delta_right != 0.0 {
        return Err(Error::invalid(
            "closed Hamiltonian requires delta_left = delta_right = 0",
        ));
    }
    let norm = params.coupling_norm.unwrap_or(CouplingNorm::SqrtAtoms);
    let triplets = hamiltonian_triplets(basis, params, norm, false);
    OperatorMatrix::new(basis.tag(), dense_from_triplets(basis.dim(), &triplets))
}

/// Gain-loss dimer: the closed Hamiltonian plus `iΔ_u a_u†a_u`, coupling
/// `λ/√S` unless overridden.
pub fn build_hamiltonian_nh<B: Basis>(basis: &B, params: &ModelParams) -> Result<OperatorMatrix> {
    params.validate()?;
    let norm = params.coupling_norm.unwrap_or(CouplingNorm::SqrtSpin);
    let triplets = hamiltonian_triplets(basis, params, norm, true);
    OperatorMatrix::new(basis.tag(), dense_from_triplets(basis.dim(), &triplets))
}

fn diagonal_operator<B: Basis>(basis: &B, f: impl Fn(&BasisState) -> f64) -> Result<OperatorMatrix> {
    let n = basis.dim();
    let mut m = Mat::<c64>::zeros(n, n);
    for (i, s) in basis.states().iter().enumerate() {
        m[(i, i)] = c64::new(f(s), 0.0);
    }
    OperatorMatrix::new(basis.tag(), m)
}

/// `N̂ = n_L + k_L + n_R + k_R` on each product state.
pub fn build_number_operator<B: Basis>(basis: &B) -> Result<OperatorMatrix> {
    diagonal_operator(basis, |s| f64::from(s.excitations()))
}

/// `Î = ((n_L + k_L) − (n_R + k_R)) / n_p`.
pub fn build_imbalance_operator<B: Basis>(basis: &B, n_p: u32) -> Result<OperatorMatrix> {
    if n_p == 0 {
        return Err(Error::invalid("imbalance needs n_p > 0"));
    }
    let np = f64::from(n_p);
    diagonal_operator(basis, |s| {
        (f64::from(s.left_excitations()) - f64::from(s.right_excitations())) / np
    })
}

/// Cavity annihilation operators `(a_L, a_R)` on a truncated basis.
pub fn build_annihilators<B: Basis>(basis: &B) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let n = basis.dim();
    let mut left = Mat::<c64>::zeros(n, n);
    let mut right = Mat::<c64>::zeros(n, n);
    for (col, s) in basis.states().iter().enumerate() {
        if s.n_left > 0 {
            let t = BasisState::new(s.n_left - 1, s.k_left, s.n_right, s.k_right);
            if let Some(row) = basis.index_of(&t) {
                left[(row, col)] = c64::new(f64::from(s.n_left).sqrt(), 0.0);
            }
        }
        if s.n_right > 0 {
            let t = BasisState::new(s.n_left, s.k_left, s.n_right - 1, s.k_right);
            if let Some(row) = basis.index_of(&t) {
                right[(row, col)] = c64::new(f64::from(s.n_right).sqrt(), 0.0);
            }
        }
    }
    Ok((
        OperatorMatrix::new(basis.tag(), left)?,
        OperatorMatrix::new(basis.tag(), right)?,
    ))
}

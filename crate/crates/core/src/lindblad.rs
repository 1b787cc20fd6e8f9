//! Lindblad Liouvillian of the dimer with loss on the left cavity and pump on
//! the right, its weak U(1) block structure, and general eigensolves.
//!
//! Density matrices are vectorized row by row, `ρ_ij ↦ i·D + j`, so that
//! `A ρ B ↦ (A ⊗ Bᵀ) vec ρ`.

use std::borrow::Cow;

use faer::{c64, Mat, MatRef};
use serde::Serialize;

use crate::basis::{Basis, BasisTag, TruncatedBasis};
use crate::complex_stats::{general_eigenvalues, ComplexSpectrum};
use crate::error::{Error, Result};
use crate::operators::{build_annihilators, build_hamiltonian_tcd, ModelParams, OperatorMatrix};
use crate::sparse::CsrMatrix;

/// A superoperator on the full operator space, or its restriction to one
/// weak-symmetry block.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim_rho: usize,
    basis_tag: BasisTag,
    /// `k` of the `𝒩₋` block, `None` for the full space.
    sector: Option<i64>,
    /// Vectorized indices `i·D + j` spanned by the rows and columns.
    indices: Vec<usize>,
    matrix: CsrMatrix,
}

impl Superoperator {
    pub fn dim_rho(&self) -> usize {
        self.dim_rho
    }

    pub fn basis_tag(&self) -> BasisTag {
        self.basis_tag
    }

    pub fn sector(&self) -> Option<i64> {
        self.sector
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn to_dense(&self) -> Mat<c64> {
        self.matrix.to_dense()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    /// `max_b |Σ_i ℒ_{(i,i), b}|`: how far `⟨⟨𝟙|ℒ` is from zero.
    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.dim_rho;
        let functional: Vec<c64> = self
            .indices
            .iter()
            .map(|&a| if a / d == a % d { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
            .collect();
        self.matrix.vecmat(&functional).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `−i(H⊗𝟙 − 𝟙⊗Hᵀ) + Σ_k [O_k⊗Ō_k − ½(O_k†O_k⊗𝟙 + 𝟙⊗(O_k†O_k)ᵀ)]`.
pub fn liouvillian_from_operators(h: &OperatorMatrix, jumps: &[OperatorMatrix]) -> Result<Superoperator> {
    let tag = h.basis_tag();
    for o in jumps {
        o.check_same_basis(tag)?;
    }
    let d = h.dim();
    let nonzeros = |m: MatRef<'_, c64>| -> Vec<(usize, usize, c64)> {
        let mut out = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v != c64::new(0.0, 0.0) {
                    out.push((i, j, v));
                }
            }
        }
        out
    };
    let mut triplets = Vec::new();
    // A ⊗ 𝟙 contributes A_ik at ((i,j),(k,j)); 𝟙 ⊗ Bᵀ contributes B_lj at ((i,j),(i,l))
    let left_mul = |a: &[(usize, usize, c64)], scale: c64, out: &mut Vec<(usize, usize, c64)>| {
        for &(i, k, v) in a {
            for j in 0..d {
                out.push((i * d + j, k * d + j, scale * v));
            }
        }
    };
    let right_mul = |b: &[(usize, usize, c64)], scale: c64, out: &mut Vec<(usize, usize, c64)>| {
        for &(l, j, v) in b {
            for i in 0..d {
                out.push((i * d + j, i * d + l, scale * v));
            }
        }
    };
    let h_nz = nonzeros(h.entries().as_ref());
    left_mul(&h_nz, c64::new(0.0, -1.0), &mut triplets);
    right_mul(&h_nz, c64::new(0.0, 1.0), &mut triplets);
    for o in jumps {
        let om = o.entries();
        let o_nz = nonzeros(om.as_ref());
        // O ρ O†: O_ik conj(O_jl) at ((i,j),(k,l))
        for &(i, k, a) in &o_nz {
            for &(j, l, b) in &o_nz {
                triplets.push((i * d + j, k * d + l, a * b.conj()));
            }
        }
        let odo = om.adjoint() * om;
        let odo_nz = nonzeros(odo.as_ref());
        left_mul(&odo_nz, c64::new(-0.5, 0.0), &mut triplets);
        right_mul(&odo_nz, c64::new(-0.5, 0.0), &mut triplets);
    }
    Ok(Superoperator {
        dim_rho: d,
        basis_tag: tag,
        sector: None,
        indices: (0..d * d).collect(),
        matrix: CsrMatrix::from_triplets(d * d, d * d, triplets),
    })
}

/// Closed dimer Hamiltonian plus jumps `√(2κ) a_L` and `√(2κ) a_R†`. The
/// gain/loss rates of `params` are ignored; `κ = 0` gives the unitary
/// generator.
pub fn build_liouvillian(basis: &TruncatedBasis, params: &ModelParams) -> Result<Superoperator> {
    params.validate()?;
    let closed = ModelParams {
        delta_left: 0.0,
        delta_right: 0.0,
        ..*params
    };
    let h = build_hamiltonian_tcd(basis, &closed)?;
    let rate = (2.0 * params.kappa).sqrt();
    let jumps = if params.kappa > 0.0 {
        let (a_left, a_right) = build_annihilators(basis)?;
        let (l, r) = (a_left.entries(), a_right.entries());
        let loss = Mat::from_fn(l.nrows(), l.ncols(), |i, j| l[(i, j)] * rate);
        let pump = Mat::from_fn(r.nrows(), r.ncols(), |i, j| r[(j, i)].conj() * rate);
        vec![OperatorMatrix::new(basis.tag(), loss)?, OperatorMatrix::new(basis.tag(), pump)?]
    } else {
        Vec::new()
    };
    liouvillian_from_operators(&h, &jumps)
}

fn counter_diagonal(liou: &Superoperator, n_op: &OperatorMatrix) -> Result<Vec<f64>> {
    n_op.check_same_basis(liou.basis_tag)?;
    if n_op.dim() != liou.dim_rho {
        return Err(Error::invalid("counter dimension does not match the superoperator"));
    }
    n_op.real_diagonal()
        .ok_or_else(|| Error::invalid("counter must be a real diagonal operator"))
}

/// `𝒩₋` eigenvalue `N_i − N_j` of each vectorized index.
fn charges(liou: &Superoperator, counts: &[f64]) -> Vec<f64> {
    let d = liou.dim_rho;
    liou.indices.iter().map(|&a| counts[a / d] - counts[a % d]).collect()
}

/// `max |[ℒ, 𝒩₋]|` with `𝒩₋ρ = N̂ρ − ρN̂`.
pub fn weak_symmetry_residual(liou: &Superoperator, n_op: &OperatorMatrix) -> Result<f64> {
    let counts = counter_diagonal(liou, n_op)?;
    let q = charges(liou, &counts);
    Ok(liou
        .matrix
        .iter()
        .map(|(r, c, v)| v.norm() * (q[c] - q[r]).abs())
        .fold(0.0, f64::max))
}

fn check_symmetry(liou: &Superoperator, n_op: &OperatorMatrix) -> Result<Vec<f64>> {
    let residual = weak_symmetry_residual(liou, n_op)?;
    if residual > 1e-10 * liou.max_abs().max(1.0) {
        return Err(Error::SymmetryBroken(residual));
    }
    let counts = counter_diagonal(liou, n_op)?;
    Ok(charges(liou, &counts))
}

/// Distinct `𝒩₋` eigenvalues present, ascending.
pub fn sector_labels(liou: &Superoperator, n_op: &OperatorMatrix) -> Result<Vec<i64>> {
    let counts = counter_diagonal(liou, n_op)?;
    let mut labels: Vec<i64> = charges(liou, &counts).iter().map(|q| q.round() as i64).collect();
    labels.sort_unstable();
    labels.dedup();
    Ok(labels)
}

/// Restriction of `ℒ` to the block of operators `|i⟩⟨j|` with `N_i − N_j = k`.
pub fn sector_project(liou: &Superoperator, n_op: &OperatorMatrix, k: i64) -> Result<Superoperator> {
    let q = check_symmetry(liou, n_op)?;
    let local: Vec<usize> = (0..q.len()).filter(|&a| q[a].round() as i64 == k).collect();
    if local.is_empty() {
        return Err(Error::InsufficientData(format!("weak-symmetry sector {k} is empty")));
    }
    Ok(Superoperator {
        dim_rho: liou.dim_rho,
        basis_tag: liou.basis_tag,
        sector: Some(k),
        indices: local.iter().map(|&a| liou.indices[a]).collect(),
        matrix: liou.matrix.submatrix(&local),
    })
}

/// Anything that can be handed to a dense general eigensolver.
pub trait GeneralMatrix {
    fn dense(&self) -> Cow<'_, Mat<c64>>;
}

impl GeneralMatrix for Mat<c64> {
    fn dense(&self) -> Cow<'_, Mat<c64>> {
        Cow::Borrowed(self)
    }
}

impl GeneralMatrix for OperatorMatrix {
    fn dense(&self) -> Cow<'_, Mat<c64>> {
        Cow::Borrowed(self.entries())
    }
}

impl GeneralMatrix for Superoperator {
    fn dense(&self) -> Cow<'_, Mat<c64>> {
        Cow::Owned(self.to_dense())
    }
}

pub fn diagonalize_general<M: GeneralMatrix + ?Sized>(m: &M) -> Result<ComplexSpectrum> {
    let dense = m.dense();
    Ok(ComplexSpectrum::new(general_eigenvalues(dense.as_ref().as_ref())?))
}

#[derive(Debug, Clone)]
pub struct GeneralEigen {
    pub values: Vec<c64>,
    /// Right eigenvectors as columns.
    pub vectors: Mat<c64>,
}

impl GeneralEigen {
    /// `max_i ‖M v_i − z_i v_i‖ / ‖v_i‖` over the given pair indices.
    pub fn residual(&self, m: MatRef<'_, c64>, pairs: &[usize]) -> f64 {
        pairs
            .iter()
            .map(|&i| {
                let v = self.vectors.col(i);
                let mv = m * v;
                let norm = v.norm_l2();
                let diff: f64 = (0..v.nrows())
                    .map(|r| (mv[r] - self.values[i] * v[r]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                diff / norm
            })
            .fold(0.0, f64::max)
    }
}

pub fn general_eigen<M: GeneralMatrix + ?Sized>(m: &M) -> Result<GeneralEigen> {
    let dense = m.dense();
    let evd = dense.eigen().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let values = (0..dense.nrows()).map(|i| evd.S()[i]).collect();
    Ok(GeneralEigen {
        values,
        vectors: evd.U().to_owned(),
    })
}

/// Largest distance between a value and the conjugate it is greedily paired
/// with; zero for a spectrum closed under conjugation.
pub fn conjugation_defect(values: &[c64]) -> f64 {
    let mut used = vec![false; values.len()];
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].im.abs().total_cmp(&values[b].im.abs()));
    let mut worst: f64 = 0.0;
    for &i in &order {
        if used[i] {
            continue;
        }
        let target = values[i].conj();
        let j = (0..values.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (values[a] - target).norm().total_cmp(&(values[b] - target).norm()))
            .unwrap();
        used[i] = true;
        used[j] = true;
        worst = worst.max((values[j] - target).norm());
    }
    worst
}

/// Largest distance in a greedy nearest-value matching of two spectra;
/// `None` when the lengths differ.
pub fn multiset_distance(a: &[c64], b: &[c64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for z in a {
        let j = (0..b.len())
            .filter(|&j| !used[j])
            .min_by(|&x, &y| (b[x] - z).norm().total_cmp(&(b[y] - z).norm()))?;
        used[j] = true;
        worst = worst.max((b[j] - z).norm());
    }
    Some(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroModes {
    pub count: usize,
    pub max_real: f64,
}

/// Eigenvalues within `tol` of the origin and the largest real part.
pub fn zero_modes(values: &[c64], tol: f64) -> ZeroModes {
    ZeroModes {
        count: values.iter().filter(|z| z.norm() <= tol).count(),
        max_real: values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::enumerate_truncated;
    use crate::operators::build_number_operator;

    #[test]
    fn lossy_oscillator() {
        let (w, kappa): (f64, f64) = (1.3, 0.4);
        let tag = BasisTag::Truncated { n_cut: 1, two_s: 0 };
        let h = OperatorMatrix::new(tag, Mat::from_fn(2, 2, |i, j| c64::new(if i == j { w * i as f64 } else { 0.0 }, 0.0))).unwrap();
        let a = Mat::from_fn(2, 2, |i, j| c64::new(if i == 0 && j == 1 { (2.0 * kappa).sqrt() } else { 0.0 }, 0.0));
        let l = liouvillian_from_operators(&h, &[OperatorMatrix::new(tag, a).unwrap()]).unwrap();
        let got = diagonalize_general(&l).unwrap().values;
        let want = [c64::new(0.0, 0.0), c64::new(-2.0 * kappa, 0.0), c64::new(-kappa, w), c64::new(-kappa, -w)];
        assert!(multiset_distance(&got, &want).unwrap() < 1e-12, "{got:?}");
        assert!(l.trace_preservation_residual() < 1e-14);
    }

    #[test]
    fn sectors_cover_space() {
        let basis = enumerate_truncated(1, 1);
        let params = ModelParams {
            kappa: 1.0,
            ..ModelParams::resonant(1.0)
        };
        let l = build_liouvillian(&basis, &params).unwrap();
        let n = build_number_operator(&basis).unwrap();
        assert!(weak_symmetry_residual(&l, &n).unwrap() < 1e-12);
        let labels = sector_labels(&l, &n).unwrap();
        let total: usize = labels.iter().map(|&k| sector_project(&l, &n, k).unwrap().dim()).sum();
        assert_eq!(total, 256);
        assert!(sector_project(&l, &n, 99).is_err());
    }

    #[test]
    fn conjugation_pairs() {
        let v = [c64::new(1.0, 2.0), c64::new(1.0, -2.0), c64::new(3.0, 0.0)];
        assert!(conjugation_defect(&v) < 1e-15);
        assert!(conjugation_defect(&[c64::new(1.0, 2.0), c64::new(1.0, 2.0)]) > 1.0);
    }
}

//! Exact unitary dynamics through the eigendecomposition, imbalance
//! trajectories and eigenstate statistics of the imbalance.

use faer::{c64, Mat, Side};

use crate::basis::{Basis, BasisState, BasisTag};
use crate::error::{Error, Result};
use crate::operators::OperatorMatrix;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub basis_tag: BasisTag,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub eigenvectors: Mat<c64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max|HV − VΛ|`.
    pub fn residual(&self, h: &OperatorMatrix) -> f64 {
        let hv = h.entries() * &self.eigenvectors;
        let n = self.dim();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for i in 0..n {
                let r = hv[(i, j)] - self.eigenvectors[(i, j)] * self.eigenvalues[j];
                worst = worst.max(r.norm());
            }
        }
        worst
    }
}

fn require_hermitian(h: &OperatorMatrix) -> Result<()> {
    if !h.is_hermitian() {
        return Err(Error::invalid("operator is not Hermitian"));
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian operator. Real-symmetric inputs
/// take the cheaper real path.
pub fn diagonalize_hermitian(h: &OperatorMatrix) -> Result<EigenDecomposition> {
    require_hermitian(h)?;
    let (eigenvalues, eigenvectors) = match h.to_real() {
        Some(real) => {
            let evd = real
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
            let vals = evd.S().column_vector().iter().copied().collect::<Vec<_>>();
            let u = evd.U();
            let vecs = Mat::from_fn(u.nrows(), u.ncols(), |i, j| c64::new(u[(i, j)], 0.0));
            (vals, vecs)
        }
        None => {
            let evd = h
                .entries()
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
            let vals = evd.S().column_vector().iter().map(|z| z.re).collect::<Vec<_>>();
            (vals, evd.U().to_owned())
        }
    };
    Ok(EigenDecomposition {
        basis_tag: h.basis_tag(),
        eigenvalues,
        eigenvectors,
    })
}

/// Ascending eigenvalues only.
pub fn hermitian_eigenvalues(h: &OperatorMatrix) -> Result<Vec<f64>> {
    require_hermitian(h)?;
    let vals = match h.to_real() {
        Some(real) => real.self_adjoint_eigenvalues(Side::Lower),
        None => h.entries().self_adjoint_eigenvalues(Side::Lower),
    }
    .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    Ok(vals)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub basis_tag: BasisTag,
    pub amplitudes: Vec<c64>,
}

impl QuantumState {
    /// The product state `|state>` of `basis`.
    pub fn basis_state<B: Basis>(basis: &B, state: &BasisState) -> Result<Self> {
        let idx = basis
            .index_of(state)
            .ok_or_else(|| Error::NotInBasis(state.to_string()))?;
        let mut amplitudes = vec![c64::new(0.0, 0.0); basis.dim()];
        amplitudes[idx] = c64::new(1.0, 0.0);
        Ok(Self {
            basis_tag: basis.tag(),
            amplitudes,
        })
    }

    /// All excitations in the left cavity, `(n_p, 0, 0, 0)`.
    pub fn left_cavity<B: Basis>(basis: &B, n_p: u32) -> Result<Self> {
        Self::basis_state(basis, &BasisState::new(n_p, 0, 0, 0))
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn check_tag(expected: BasisTag, found: BasisTag) -> Result<()> {
    if expected != found {
        return Err(Error::BasisMismatch { expected, found });
    }
    Ok(())
}

/// Coefficients `V†ψ` in the eigenbasis.
fn eigen_coefficients(decomp: &EigenDecomposition, psi: &QuantumState) -> Result<Vec<c64>> {
    check_tag(decomp.basis_tag, psi.basis_tag)?;
    let v = &decomp.eigenvectors;
    let n = decomp.dim();
    Ok((0..n)
        .map(|k| {
            (0..n)
                .map(|s| v[(s, k)].conj() * psi.amplitudes[s])
                .sum::<c64>()
        })
        .collect())
}

/// `V e^{−iΛt} V† ψ₀`.
pub fn evolve(decomp: &EigenDecomposition, psi0: &QuantumState, t: f64) -> Result<QuantumState> {
    let coeffs = eigen_coefficients(decomp, psi0)?;
    let n = decomp.dim();
    let phased: Vec<c64> = coeffs
        .iter()
        .zip(&decomp.eigenvalues)
        .map(|(c, e)| c * c64::cis(-e * t))
        .collect();
    let v = &decomp.eigenvectors;
    let amplitudes = (0..n)
        .map(|s| (0..n).map(|k| v[(s, k)] * phased[k]).sum::<c64>())
        .collect();
    Ok(QuantumState {
        basis_tag: psi0.basis_tag,
        amplitudes,
    })
}

/// `Re <ψ|O|ψ>`.
pub fn expectation(op: &OperatorMatrix, psi: &QuantumState) -> Result<f64> {
    check_tag(op.basis_tag(), psi.basis_tag)?;
    let m = op.entries();
    let n = op.dim();
    let mut acc = c64::new(0.0, 0.0);
    for j in 0..n {
        let mut col = c64::new(0.0, 0.0);
        for i in 0..n {
            col += psi.amplitudes[i].conj() * m[(i, j)];
        }
        acc += col * psi.amplitudes[j];
    }
    Ok(acc.re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub steady_mean: f64,
    pub steady_window: (f64, f64),
}

impl ObservableTrace {
    /// Mean over the samples with `t ≥ t_start`, the last time being the
    /// window end.
    pub fn from_samples(times: Vec<f64>, values: Vec<f64>, t_start: f64) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InsufficientData("empty or mismatched trace".into()));
        }
        let t_end = *times.last().unwrap();
        let (sum, count) = times
            .iter()
            .zip(&values)
            .filter(|(t, _)| **t >= t_start)
            .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
        if count == 0 {
            return Err(Error::InsufficientData("steady window holds no samples".into()));
        }
        Ok(Self {
            times,
            values,
            steady_mean: sum / count as f64,
            steady_window: (t_start, t_end),
        })
    }
}

/// Logarithmically spaced times from `t_min` to `t_max` inclusive.
pub fn log_time_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![t_max],
        _ => {
            let (a, b) = (t_min.ln(), t_max.ln());
            (0..points)
                .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
                .collect()
        }
    }
}

const TIME_BLOCK: usize = 64;

/// `<ψ(t)|O|ψ(t)>` on every grid time, evolved in blocks of times with one
/// dense product per block.
pub fn observable_trace(
    decomp: &EigenDecomposition,
    psi0: &QuantumState,
    grid: &[f64],
    op: &OperatorMatrix,
    window_fraction: f64,
) -> Result<ObservableTrace> {
    if grid.is_empty() {
        return Err(Error::InsufficientData("empty time grid".into()));
    }
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::invalid("window_fraction must lie in (0, 1]"));
    }
    check_tag(decomp.basis_tag, op.basis_tag())?;
    let coeffs = eigen_coefficients(decomp, psi0)?;
    let n = decomp.dim();
    let diag = op.real_diagonal();
    let mut values = Vec::with_capacity(grid.len());

    for chunk in grid.chunks(TIME_BLOCK) {
        let phases = Mat::from_fn(n, chunk.len(), |k, j| {
            coeffs[k] * c64::cis(-decomp.eigenvalues[k] * chunk[j])
        });
        let psi = &decomp.eigenvectors * &phases;
        match &diag {
            Some(d) => {
                for j in 0..chunk.len() {
                    values.push((0..n).map(|s| d[s] * psi[(s, j)].norm_sqr()).sum());
                }
            }
            None => {
                let o_psi = op.entries() * &psi;
                for j in 0..chunk.len() {
                    let z: c64 = (0..n).map(|s| psi[(s, j)].conj() * o_psi[(s, j)]).sum();
                    values.push(z.re);
                }
            }
        }
    }

    let (t0, t1) = (grid[0], *grid.last().unwrap());
    let t_start = t1 - window_fraction * (t1 - t0);
    ObservableTrace::from_samples(grid.to_vec(), values, t_start)
}

/// Imbalance trajectory from `psi0`; identical to [`observable_trace`] with
/// the imbalance operator.
pub fn imbalance_trace(
    decomp: &EigenDecomposition,
    psi0: &QuantumState,
    grid: &[f64],
    i_op: &OperatorMatrix,
    window_fraction: f64,
) -> Result<ObservableTrace> {
    observable_trace(decomp, psi0, grid, i_op, window_fraction)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenstateStat {
    pub mean: f64,
    pub std: f64,
    pub energy_per_atom: f64,
}

/// Mean and quantum standard deviation of `op` in every eigenstate.
pub fn eigenstate_imbalance_stats(
    decomp: &EigenDecomposition,
    op: &OperatorMatrix,
) -> Result<Vec<EigenstateStat>> {
    check_tag(decomp.basis_tag, op.basis_tag())?;
    let n = decomp.dim();
    let v = &decomp.eigenvectors;
    let o_v = match op.real_diagonal() {
        Some(d) => Mat::from_fn(n, n, |i, j| v[(i, j)] * d[i]),
        None => op.entries() * v,
    };
    let atoms = f64::from(decomp.basis_tag.n_atoms());
    let scale = if atoms > 0.0 { atoms } else { 1.0 };
    (0..n)
        .map(|j| {
            let mut mean = c64::new(0.0, 0.0);
            let mut second = 0.0;
            for i in 0..n {
                mean += v[(i, j)].conj() * o_v[(i, j)];
                second += o_v[(i, j)].norm_sqr();
            }
            let var = second - mean.re * mean.re;
            if var < -1e-12 {
                return Err(Error::Degenerate(format!("negative variance {var:e} in eigenstate {j}")));
            }
            Ok(EigenstateStat {
                mean: mean.re,
                std: var.max(0.0).sqrt(),
                energy_per_atom: decomp.eigenvalues[j] / scale,
            })
        })
        .collect()
}

/// First `λ` at which the steady imbalance exceeds 1/2, linearly
/// interpolated. `None` when the sweep never crosses from below.
pub fn critical_coupling_estimate(sweep: &[(f64, f64)]) -> Option<f64> {
    let mut pts = sweep.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let first = pts.iter().position(|&(_, y)| y > 0.5)?;
    if first == 0 {
        return None;
    }
    let (x0, y0) = pts[first - 1];
    let (x1, y1) = pts[first];
    Some(x0 + (0.5 - y0) * (x1 - x0) / (y1 - y0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate_sector, SectorParams};
    use crate::operators::{build_hamiltonian_tcd, ModelParams};

    fn diag_op(values: &[f64]) -> OperatorMatrix {
        let n = values.len();
        let m = Mat::from_fn(n, n, |i, j| {
            c64::new(if i == j { values[i] } else { 0.0 }, 0.0)
        });
        OperatorMatrix::new(BasisTag::Sector { n_p: 0, n_atoms: 1 }, m).unwrap()
    }

    #[test]
    fn sorted_eigenvalues() {
        let d = diagonalize_hermitian(&diag_op(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 2.0, 3.0]);
        let d = diagonalize_hermitian(&diag_op(&[1.0; 4])).unwrap();
        assert!(d.eigenvalues.iter().all(|&e| (e - 1.0).abs() < 1e-15));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = Mat::<c64>::zeros(2, 2);
        m[(0, 1)] = c64::new(1.0, 0.0);
        let op = OperatorMatrix::new(BasisTag::Sector { n_p: 0, n_atoms: 1 }, m).unwrap();
        assert!(diagonalize_hermitian(&op).is_err());
    }

    #[test]
    fn zero_time_is_identity() {
        let b = enumerate_sector(SectorParams::new(4, 2).unwrap());
        let h = build_hamiltonian_tcd(&b, &ModelParams::resonant(2.0)).unwrap();
        let d = diagonalize_hermitian(&h).unwrap();
        let psi = QuantumState::left_cavity(&b, 4).unwrap();
        let out = evolve(&d, &psi, 0.0).unwrap();
        for (a, b) in out.amplitudes.iter().zip(&psi.amplitudes) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn crossing_of_step() {
        let star = 1.9 * 2.5f64.sqrt();
        let sweep = vec![(1.0, 0.0), (2.0, 0.0), (star, 0.5), (4.0, 1.0), (5.0, 1.0)];
        assert!((critical_coupling_estimate(&sweep).unwrap() - star).abs() < 1e-12);
        assert_eq!(critical_coupling_estimate(&[(1.0, 0.1), (2.0, 0.2)]), None);
        assert_eq!(critical_coupling_estimate(&[(1.0, 0.9), (2.0, 0.95)]), None);
    }

    #[test]
    fn grid_endpoints() {
        let g = log_time_grid(1e-2, 1e4, 7);
        assert!((g[0] - 1e-2).abs() < 1e-15 && (g[6] - 1e4).abs() < 1e-9);
        assert!((g[3] - 10.0).abs() < 1e-12);
    }
}

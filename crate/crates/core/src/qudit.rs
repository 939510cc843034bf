//! Qudit state types and the metrics shared by the rest of the crate.
//!
//! A slit state is the amplitude vector `(c_0, ..., c_{d-1})` of a photon
//! after `d` slits with complex transmissivities, written in the logical basis
//! `|ℓ⟩`. General (mixed) states are carried as [`DensityMatrix`].

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::C64;

/// Tolerance on `Σ|c_ℓ|² = 1`.
pub const NORM_TOL: f64 = 1e-12;
/// Elementwise tolerance on `ρ = ρ†` and on `Tr ρ = 1`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;

/// A normalized pure qudit state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct QuditState {
    amplitudes: CVector,
}

impl QuditState {
    /// Wrap an amplitude vector; fails unless it is normalized to `NORM_TOL`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        let norm_sq: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(Self { amplitudes: CVector::from_vec(amplitudes) })
    }

    /// Rescale an arbitrary nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Degenerate("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|c| c / norm).collect())
    }

    /// The logical basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range for d={dim}")));
        }
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[index] = C64::new(1.0, 0.0);
        Self::new(v)
    }

    /// `(1/√d) Σ_ℓ |ℓ⟩`.
    pub fn uniform(dim: usize) -> Result<Self> {
        let amp = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self::normalized(vec![amp; dim])
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// `⟨other|self⟩`.
    pub fn overlap(&self, other: &CVector) -> C64 {
        other.dotc(&self.amplitudes)
    }
}

/// A `d×d` Hermitian, unit-trace operator.
///
/// Construction checks Hermiticity and trace only. Positivity is checked
/// where it matters ([`fidelity`]) or enforced with [`project_to_physical`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct DensityMatrix {
    elements: CMatrix,
}

impl DensityMatrix {
    pub fn new(elements: CMatrix) -> Result<Self> {
        let dim = elements.nrows();
        if elements.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: elements.ncols() });
        }
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if elements.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NotPhysical("non-finite entry".into()));
        }
        let herm = linalg::hermiticity_error(&elements);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotPhysical(format!("not Hermitian (max deviation {herm:e})")));
        }
        let tr = linalg::trace(&elements);
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(Error::NotPhysical(format!("trace is {tr}, expected 1")));
        }
        Ok(Self { elements })
    }

    /// Hermitize and rescale to unit trace before validating.
    pub(crate) fn normalize_from(elements: &CMatrix) -> Result<Self> {
        let h = linalg::hermitize(elements);
        let tr = linalg::trace(&h).re;
        if !tr.is_finite() || tr.abs() <= f64::EPSILON {
            return Err(Error::Degenerate(format!("matrix trace {tr} cannot be normalized")));
        }
        Self::new(h.unscale(tr))
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(CMatrix::identity(dim, dim).unscale(dim as f64))
    }

    pub fn from_pure(state: &QuditState) -> Self {
        Self { elements: linalg::outer(state.amplitudes(), state.amplitudes()) }
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.elements
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v = linalg::eigh(&self.elements).0;
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOL
    }

    /// `⟨ψ|ρ|ψ⟩` for an arbitrary (not necessarily normalized) vector.
    pub fn expectation(&self, psi: &CVector) -> f64 {
        psi.dotc(&(&self.elements * psi)).re
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        (&self.elements - &other.elements).norm()
    }
}

/// `ρ = |Ψ⟩⟨Ψ|`.
pub fn density_from_pure(state: &QuditState) -> Result<DensityMatrix> {
    let norm_sq = state.amplitudes().norm_squared();
    if (norm_sq - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(norm_sq));
    }
    Ok(DensityMatrix::from_pure(state))
}

/// Eigenvalues below this (times `d`) are treated as roundoff when
/// factoring a density matrix inside [`fidelity`].
const RANK_FLOOR: f64 = 1e-14;

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
///
/// Evaluated as `(Tr √(A† ρ A))²` with `σ = A A†`, factoring whichever
/// argument has the lower numerical rank. Square roots of roundoff-level
/// eigenvalues never enter, so pure arguments are handled to machine
/// precision. The result is clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let floor = RANK_FLOOR * rho.dim() as f64;
    let spectra = [("rho", rho), ("sigma", sigma)].map(|(name, m)| {
        let (values, vectors) = linalg::eigh(m.matrix());
        (name, values, vectors)
    });
    for (name, values, _) in &spectra {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPhysical(format!("{name} has eigenvalue {min:e}")));
        }
    }
    let rank = |values: &[f64]| values.iter().filter(|&&v| v > floor).count();
    let (factored, middle) = if rank(&spectra[1].1) <= rank(&spectra[0].1) {
        (&spectra[1], rho)
    } else {
        (&spectra[0], sigma)
    };
    let (_, values, vectors) = factored;
    let kept: Vec<usize> = (0..values.len()).filter(|&k| values[k] > floor).collect();
    if kept.is_empty() {
        return Err(Error::Degenerate("density matrix has no positive eigenvalues".into()));
    }
    let a = CMatrix::from_fn(values.len(), kept.len(), |i, c| vectors[(i, kept[c])] * values[kept[c]].sqrt());
    let inner = a.adjoint() * middle.matrix() * &a;
    let trace_root: f64 = linalg::eigh(&inner).0.iter().map(|&v| v.max(0.0).sqrt()).sum();
    Ok((trace_root * trace_root).clamp(0.0, 1.0))
}

/// Map an arbitrary square matrix to the closest unit-trace PSD matrix by
/// eigenvalue clipping: Hermitize, zero the negative eigenvalues, renormalize.
pub fn project_to_physical(matrix: &CMatrix) -> Result<DensityMatrix> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let (values, vectors) = linalg::eigh(matrix);
    let clipped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= f64::EPSILON * matrix.nrows() as f64 {
        return Err(Error::Degenerate("no positive eigenvalues left after clipping".into()));
    }
    let normalized: Vec<f64> = clipped.iter().map(|v| v / total).collect();
    DensityMatrix::normalize_from(&linalg::from_spectrum(&normalized, &vectors))
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<QuditState> {
    let v = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    QuditState::normalized(v)
}

/// Random density matrix of the given rank from the induced (Ginibre)
/// ensemble: `G G† / Tr(G G†)` with `G` a `d×rank` complex Gaussian matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!("rank {rank} invalid for d={dim}")));
    }
    let g = CMatrix::from_fn(dim, rank, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    DensityMatrix::normalize_from(&(&g * g.adjoint()))
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<StateJson> for QuditState {
    type Error = Error;

    fn try_from(j: StateJson) -> Result<Self> {
        if j.re.len() != j.dim || j.im.len() != j.dim {
            return Err(Error::Format(format!("state of dim {} has {} re / {} im entries", j.dim, j.re.len(), j.im.len())));
        }
        QuditState::new(j.re.iter().zip(&j.im).map(|(&r, &i)| C64::new(r, i)).collect())
    }
}

impl From<QuditState> for StateJson {
    fn from(s: QuditState) -> Self {
        StateJson {
            dim: s.dim(),
            re: s.amplitudes.iter().map(|c| c.re).collect(),
            im: s.amplitudes.iter().map(|c| c.im).collect(),
        }
    }
}

/// Row-major `{"dim": d, "re": [[..]], "im": [[..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        MatrixJson { dim: m.nrows(), re: rows(|c| c.re), im: rows(|c| c.im) }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let d = self.dim;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::Format(format!("matrix entries do not form a {d}x{d} grid")));
        }
        Ok(CMatrix::from_fn(d, d, |i, j| C64::new(self.re[i][j], self.im[i][j])))
    }
}

impl TryFrom<MatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        DensityMatrix::new(j.to_matrix()?)
    }
}

impl From<DensityMatrix> for MatrixJson {
    fn from(rho: DensityMatrix) -> Self {
        MatrixJson::from_matrix(&rho.elements)
    }
}

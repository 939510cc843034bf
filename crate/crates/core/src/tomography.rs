//! Forward probability model and reconstruction by linear inversion.
//!
//! Probabilities are stacked basis by basis, `p[J·d + m] = p_m⁽ᴶ⁾`, and
//! `vec(ρ)` is row-major (`ρ_{ij}` at index `i·d + j`), matching
//! [`measurement_matrix`](crate::bases::measurement_matrix).

use serde::{Deserialize, Serialize};

use crate::bases::TomographySet;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::optics::{self, OpticalConfig, Prepared};
use crate::qudit::{project_to_physical, DensityMatrix};
use crate::C64;

/// Allowed deviation of a row sum from 1.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// One row of outcome probabilities per measurement basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<Vec<u64>>>,
    /// Experimental configurations used to acquire the table.
    pub settings: usize,
}

impl ProbabilityTable {
    pub fn new(dim: usize, rows: Vec<Vec<f64>>, settings: usize) -> Result<Self> {
        check_shape(dim, rows.len(), rows.iter().map(Vec::len))?;
        for (j, row) in rows.iter().enumerate() {
            if let Some(p) = row.iter().find(|p| !(-1e-12..=1.0 + 1e-12).contains(*p)) {
                return Err(Error::InvalidProbabilities(format!("row {j} has entry {p} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidProbabilities(format!("row {j} sums to {sum}")));
            }
        }
        let rows = rows.into_iter().map(|r| r.into_iter().map(|p| p.clamp(0.0, 1.0)).collect()).collect();
        Ok(Self { dim, rows, counts: None, settings })
    }

    /// Frequencies from raw photocounts; every row must have at least one count.
    pub fn from_counts(dim: usize, counts: Vec<Vec<u64>>, settings: usize) -> Result<Self> {
        check_shape(dim, counts.len(), counts.iter().map(Vec::len))?;
        let rows = counts
            .iter()
            .enumerate()
            .map(|(j, row)| {
                let total: u64 = row.iter().sum();
                if total == 0 {
                    return Err(Error::InvalidProbabilities(format!("row {j} has no counts")));
                }
                Ok(row.iter().map(|&c| c as f64 / total as f64).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        let mut table = Self::new(dim, rows, settings)?;
        table.counts = Some(counts);
        Ok(table)
    }

    /// Accept measured values as-is: negative readings are clipped to zero and
    /// each row is rescaled to sum to one.
    pub fn from_measured(dim: usize, rows: Vec<Vec<f64>>, settings: usize) -> Result<Self> {
        check_shape(dim, rows.len(), rows.iter().map(Vec::len))?;
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(j, row)| normalize_row(j, row.into_iter().map(|p| p.max(0.0)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, rows, settings)
    }

    pub fn flattened(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }

    /// Largest absolute entrywise difference.
    pub fn max_difference(&self, other: &ProbabilityTable) -> f64 {
        self.flattened()
            .iter()
            .zip(other.flattened())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_shape(dim: usize, nrows: usize, lens: impl Iterator<Item = usize>) -> Result<()> {
    if nrows != dim + 1 {
        return Err(Error::DimensionMismatch { expected: dim + 1, found: nrows });
    }
    for len in lens {
        if len != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: len });
        }
    }
    Ok(())
}

fn normalize_row(j: usize, row: Vec<f64>) -> Result<Vec<f64>> {
    let sum: f64 = row.iter().sum();
    if !(sum > 0.0 && sum.is_finite()) {
        return Err(Error::InvalidProbabilities(format!("row {j} has zero total")));
    }
    Ok(row.into_iter().map(|p| p / sum).collect())
}

fn check_set_dim(set: &TomographySet, found: usize) -> Result<()> {
    if set.dim() != found {
        return Err(Error::DimensionMismatch { expected: set.dim(), found });
    }
    Ok(())
}

/// Born probabilities `Tr(ρ |Φ_m⁽ᴶ⁾⟩⟨Φ_m⁽ᴶ⁾|)` for every basis of the set.
pub fn forward_probabilities(rho: &DensityMatrix, set: &TomographySet) -> Result<ProbabilityTable> {
    check_set_dim(set, rho.dim())?;
    let rows = set
        .bases()
        .iter()
        .map(|b| (0..set.dim()).map(|m| rho.expectation(&b.element(m)).max(0.0)).collect())
        .collect();
    ProbabilityTable::new(set.dim(), rows, set.settings())
}

/// Unconstrained least-squares estimate and its residual.
#[derive(Debug, Clone)]
pub struct LinearEstimate {
    /// Hermitized solution of `M vec(ρ) = p`; may have negative eigenvalues.
    pub matrix: CMatrix,
    /// `‖M vec(ρ̂) − p‖₂` of the raw least-squares solution.
    pub residual_norm: f64,
}

/// Least-squares inversion of `p = M vec(ρ)` after renormalizing each row
/// of the table.
pub fn linear_inversion(table: &ProbabilityTable, set: &TomographySet) -> Result<LinearEstimate> {
    check_set_dim(set, table.dim)?;
    check_shape(table.dim, table.rows.len(), table.rows.iter().map(Vec::len))?;
    let probs: Vec<f64> = table
        .rows
        .iter()
        .enumerate()
        .map(|(j, r)| normalize_row(j, r.clone()))
        .collect::<Result<Vec<_>>>()?
        .concat();
    linear_inversion_raw(&probs, set)
}

/// Least-squares inversion on a raw stacked probability vector, with no
/// renormalization.
pub fn linear_inversion_raw(probabilities: &[f64], set: &TomographySet) -> Result<LinearEstimate> {
    let d = set.dim();
    let m = set.measurement_matrix();
    if probabilities.len() != m.nrows() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: probabilities.len() });
    }
    if m.ncols() != d * d || set.condition_number().is_infinite() {
        return Err(Error::NotInformationallyComplete("measurement matrix is rank deficient".into()));
    }
    let p = CVector::from_iterator(probabilities.len(), probabilities.iter().map(|&v| C64::new(v, 0.0)));
    let x = set.pseudo_inverse() * &p;
    let residual_norm = (m * &x - &p).norm();
    let raw = CMatrix::from_fn(d, d, |i, j| x[i * d + j]);
    Ok(LinearEstimate { matrix: linalg::hermitize(&raw), residual_norm })
}

/// Linear inversion followed by projection onto the physical states.
pub fn reconstruct(table: &ProbabilityTable, set: &TomographySet) -> Result<DensityMatrix> {
    project_to_physical(&linear_inversion(table, set)?.matrix)
}

/// Raw detector readout of the multiplexed scheme: row 0 holds the per-slit
/// spot intensities of the canonical-basis grating, row `J ≥ 1` the pattern
/// intensities at the `d` multiplex positions (position order) with the
/// mask set to the seed of basis `J`.
pub fn multiplexed_readout<'a>(
    prepared: impl Into<Prepared<'a>>,
    set: &TomographySet,
    config: &OpticalConfig,
    efficiencies: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let prepared = prepared.into();
    check_set_dim(set, prepared.dim())?;
    check_set_dim(set, config.dim)?;
    set.bases()
        .iter()
        .map(|b| match &b.seed {
            None => optics::canonical_raw_intensities(prepared, efficiencies),
            Some(seed) => optics::multiplex_intensities(config, prepared, seed),
        })
        .collect()
}

/// Calibrated probability table from a multiplexed readout (one image per
/// basis, `d + 1` settings).
pub fn calibrate_readout(
    readout: &[Vec<f64>],
    set: &TomographySet,
    config: &OpticalConfig,
    efficiencies: &[f64],
) -> Result<ProbabilityTable> {
    check_shape(set.dim(), readout.len(), readout.iter().map(Vec::len))?;
    let envelope = optics::envelope_factors(config)?;
    let rows = set
        .bases()
        .iter()
        .zip(readout)
        .map(|(b, raw)| {
            if b.is_canonical() {
                optics::calibrate_canonical(raw, efficiencies)
            } else {
                optics::probabilities_from_intensities(raw, &envelope)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ProbabilityTable::new(set.dim(), rows, set.settings())
}

/// Noiseless multiplexed measurement through the optical model.
pub fn multiplexed_scheme<'a>(
    prepared: impl Into<Prepared<'a>>,
    set: &TomographySet,
    config: &OpticalConfig,
    efficiencies: &[f64],
) -> Result<ProbabilityTable> {
    let raw = multiplexed_readout(prepared, set, config, efficiencies)?;
    calibrate_readout(&raw, set, config, efficiencies)
}

/// Central intensities `I(x = 0)` of the traditional scheme: one mask per
/// basis element, `d(d + 1)` settings in total.
pub fn traditional_intensities<'a>(
    prepared: impl Into<Prepared<'a>>,
    set: &TomographySet,
    config: &OpticalConfig,
) -> Result<Vec<Vec<f64>>> {
    let prepared = prepared.into();
    check_set_dim(set, prepared.dim())?;
    check_set_dim(set, config.dim)?;
    set.bases()
        .iter()
        .map(|b| (0..set.dim()).map(|m| optics::intensity_at(config, prepared, &b.element(m), 0.0)).collect())
        .collect()
}

/// Traditional one-projector-per-setting measurement, normalized within
/// each basis.
pub fn traditional_scheme<'a>(
    prepared: impl Into<Prepared<'a>>,
    set: &TomographySet,
    config: &OpticalConfig,
) -> Result<ProbabilityTable> {
    let raw = traditional_intensities(prepared, set, config)?;
    let rows = raw.into_iter().enumerate().map(|(j, r)| normalize_row(j, r)).collect::<Result<Vec<_>>>()?;
    ProbabilityTable::new(set.dim(), rows, traditional_settings(set.dim()))
}

pub fn traditional_settings(dim: usize) -> usize {
    dim * (dim + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{build_tomography_set, load_paper_bases_d6};
    use crate::qudit::{fidelity, random_density_matrix, random_pure_state, QuditState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn maximally_mixed_forward() {
        let set = load_paper_bases_d6();
        let t = forward_probabilities(&DensityMatrix::maximally_mixed(6).unwrap(), &set).unwrap();
        assert!(t.flattened().iter().all(|p| (p - 1.0 / 6.0).abs() < 1e-14));
        assert_eq!(t.settings, 7);
    }

    #[test]
    fn uniform_state_on_fourier_basis() {
        let set = load_paper_bases_d6();
        let rho = DensityMatrix::from_pure(&QuditState::uniform(6).unwrap());
        let t = forward_probabilities(&rho, &set).unwrap();
        assert!((t.rows[1][0] - 1.0).abs() < 1e-12);
        assert!(t.rows[1][1..].iter().all(|p| p.abs() < 1e-12));
    }

    #[test]
    fn forward_dimension_mismatch() {
        let set = load_paper_bases_d6();
        let rho = DensityMatrix::maximally_mixed(3).unwrap();
        assert!(matches!(forward_probabilities(&rho, &set), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn noiseless_round_trip_paper_set() {
        let set = load_paper_bases_d6();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let rho = DensityMatrix::from_pure(&random_pure_state(6, &mut rng).unwrap());
            let t = forward_probabilities(&rho, &set).unwrap();
            let est = linear_inversion(&t, &set).unwrap();
            assert!((&est.matrix - rho.matrix()).camax() < 1e-9);
            assert!(est.residual_norm < 1e-12);
            let back = reconstruct(&t, &set).unwrap();
            assert!(fidelity(&back, &rho).unwrap() >= 1.0 - 1e-9);
        }
        let mixed = DensityMatrix::maximally_mixed(6).unwrap();
        let back = reconstruct(&forward_probabilities(&mixed, &set).unwrap(), &set).unwrap();
        assert!(back.distance(&mixed) < 1e-12);
    }

    #[test]
    fn all_equal_rows_give_maximally_mixed() {
        let set = build_tomography_set(4, 10, 3).unwrap();
        let t = ProbabilityTable::new(4, vec![vec![0.25; 4]; 5], 5).unwrap();
        let rho = reconstruct(&t, &set).unwrap();
        assert!(rho.distance(&DensityMatrix::maximally_mixed(4).unwrap()) < 1e-12);
    }

    #[test]
    fn perturbation_bounded_by_smallest_singular_value() {
        let set = load_paper_bases_d6();
        let s = linalg::singular_values(set.measurement_matrix());
        let sigma_min = *s.last().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let rho = random_density_matrix(6, 3, &mut rng).unwrap();
        let clean = forward_probabilities(&rho, &set).unwrap().flattened();
        for _ in 0..20 {
            let noisy: Vec<f64> = clean.iter().map(|p| p + rng.random_range(-1e-3..1e-3)).collect();
            let dp: f64 = noisy.iter().zip(&clean).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let est = linear_inversion_raw(&noisy, &set).unwrap();
            let err = (&est.matrix - rho.matrix()).norm();
            assert!(err <= dp / sigma_min * (1.0 + 1e-9), "{err} > {}", dp / sigma_min);
        }
    }

    #[test]
    fn traditional_matches_multiplexed() {
        let set = load_paper_bases_d6();
        let cfg = OpticalConfig::default_for(6);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let rho = random_density_matrix(6, 2, &mut rng).unwrap();
        let born = forward_probabilities(&rho, &set).unwrap();
        let multi = multiplexed_scheme(&rho, &set, &cfg, &[1.0; 6]).unwrap();
        let trad = traditional_scheme(&rho, &set, &cfg).unwrap();
        assert!(born.max_difference(&multi) < 1e-9);
        assert!(born.max_difference(&trad) < 1e-9);
        assert_eq!((multi.settings, trad.settings), (7, 42));
    }

    #[test]
    fn traditional_canonical_row() {
        let set = load_paper_bases_d6();
        let cfg = OpticalConfig::default_for(6);
        let zero = DensityMatrix::from_pure(&QuditState::basis(6, 0).unwrap());
        let t = traditional_scheme(&zero, &set, &cfg).unwrap();
        assert_eq!(t.rows[0], vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn table_validation() {
        assert!(ProbabilityTable::new(2, vec![vec![0.5, 0.5]; 2], 3).is_err());
        assert!(ProbabilityTable::new(2, vec![vec![0.6, 0.5]; 3], 3).is_err());
        assert!(ProbabilityTable::new(2, vec![vec![1.5, -0.5]; 3], 3).is_err());
        assert!(ProbabilityTable::from_counts(2, vec![vec![1, 0], vec![0, 0], vec![2, 2]], 3).is_err());
        let t = ProbabilityTable::from_counts(2, vec![vec![3, 1], vec![0, 4], vec![2, 2]], 3).unwrap();
        assert_eq!(t.rows[0], vec![0.75, 0.25]);
        let m = ProbabilityTable::from_measured(2, vec![vec![0.7, -0.1], vec![2.0, 2.0], vec![1.0, 3.0]], 3).unwrap();
        assert_eq!(m.rows, vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.25, 0.75]]);
    }

    #[test]
    fn wrong_length_vector_rejected() {
        let set = load_paper_bases_d6();
        assert!(linear_inversion_raw(&[0.1; 10], &set).is_err());
    }
}

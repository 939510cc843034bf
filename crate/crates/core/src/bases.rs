//! Self-multiplexing measurement bases and informationally complete sets.
//!
//! A flat-amplitude seed `b` (`|b_ℓ|² = 1/d`) generates the orthonormal basis
//! `|Φ_m⟩ = Σ_ℓ b_ℓ ωᵐˡ |ℓ⟩`, all of whose outcome probabilities appear in a
//! single interference pattern. A tomography set is the canonical basis plus
//! `d` such bases; the first of them is generated by the uniform seed.

use std::f64::consts::TAU;

use nalgebra::SVD;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{self, root_of_unity, CMatrix, CVector};
use crate::C64;

/// Tolerance on `|b_ℓ|² = 1/d` for seeds.
pub const SEED_FLATNESS_TOL: f64 = 1e-9;
/// `σ_min / σ_max` below this counts as rank deficient.
pub const RANK_TOL: f64 = 1e-14;
pub const DEFAULT_TRIALS: usize = 100;

const PAPER_D6_JSON: &str = include_str!("../data/paper_d6_bases.json");

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    pub label: usize,
    /// Generating vector; `None` for the canonical basis.
    pub seed: Option<CVector>,
    /// Row `m` holds the components of `|Φ_m⟩`.
    pub vectors: CMatrix,
}

impl MeasurementBasis {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn element(&self, m: usize) -> CVector {
        self.vectors.row(m).transpose()
    }

    pub fn is_canonical(&self) -> bool {
        self.seed.is_none()
    }

    /// `G_{mn} = ⟨Φ_m|Φ_n⟩`.
    pub fn gram(&self) -> CMatrix {
        self.vectors.conjugate() * self.vectors.transpose()
    }

    /// `|⟨Φ_m|ψ⟩|²` for every element.
    pub fn born_probabilities(&self, psi: &CVector) -> Vec<f64> {
        (0..self.dim()).map(|m| self.element(m).dotc(psi).norm_sqr()).collect()
    }
}

pub fn check_flat_seed(seed: &CVector) -> Result<()> {
    let d = seed.len();
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let expected = 1.0 / d as f64;
    for (index, b) in seed.iter().enumerate() {
        let modulus_sq = b.norm_sqr();
        if modulus_sq.is_nan() || (modulus_sq - expected).abs() > SEED_FLATNESS_TOL {
            return Err(Error::InvalidSeed { index, modulus_sq, expected });
        }
    }
    Ok(())
}

/// Complete a flat-amplitude seed into its basis; row 0 is the seed itself.
pub fn generate_basis(seed: &CVector, label: usize) -> Result<MeasurementBasis> {
    check_flat_seed(seed)?;
    let d = seed.len();
    let vectors = CMatrix::from_fn(d, d, |m, l| seed[l] * root_of_unity(d, m * l));
    Ok(MeasurementBasis { label, seed: Some(seed.clone()), vectors })
}

pub fn canonical_basis(dim: usize) -> MeasurementBasis {
    MeasurementBasis { label: 0, seed: None, vectors: CMatrix::identity(dim, dim) }
}

/// `(1/√d)·exp(iθ_ℓ)` with independent uniform phases.
pub fn random_flat_seed<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let amp = 1.0 / (dim as f64).sqrt();
    CVector::from_fn(dim, |_, _| C64::from_polar(amp, rng.random_range(0.0..TAU)))
}

/// `(1/√d) Σ_ℓ |ℓ⟩`.
pub fn uniform_seed(dim: usize) -> CVector {
    CVector::from_element(dim, C64::new(1.0 / (dim as f64).sqrt(), 0.0))
}

/// Stack the rank-one maps `vec(ρ) ↦ ⟨Φ|ρ|Φ⟩` of every basis element.
///
/// Row `J·d + m` belongs to element `m` of basis `J`; column `i·d + j`
/// multiplies `ρ_{ij}` (row-major `vec(ρ)`). The entry is `(Φ_m)_i* (Φ_m)_j`.
pub fn measurement_matrix(bases: &[MeasurementBasis]) -> Result<CMatrix> {
    let d = bases.first().map(MeasurementBasis::dim).ok_or_else(|| Error::InvalidArgument("no bases".into()))?;
    if let Some(b) = bases.iter().find(|b| b.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: b.dim() });
    }
    if bases.len() != d + 1 {
        return Err(Error::InvalidArgument(format!("expected {} bases for d={d}, got {}", d + 1, bases.len())));
    }
    let mut m = CMatrix::zeros(bases.len() * d, d * d);
    for (jb, basis) in bases.iter().enumerate() {
        for k in 0..d {
            let row = jb * d + k;
            for i in 0..d {
                let ci = basis.vectors[(k, i)].conj();
                for j in 0..d {
                    m[(row, i * d + j)] = ci * basis.vectors[(k, j)];
                }
            }
        }
    }
    Ok(m)
}

/// `σ_max / σ_min`, or `+∞` when `σ_min < RANK_TOL · σ_max`.
pub fn condition_number(m: &CMatrix) -> f64 {
    condition_from_singular_values(&linalg::singular_values(m))
}

fn condition_from_singular_values(s: &[f64]) -> f64 {
    let max = s.first().copied().unwrap_or(0.0);
    let min = s.last().copied().unwrap_or(0.0);
    if max == 0.0 || min < RANK_TOL * max {
        f64::INFINITY
    } else {
        max / min
    }
}

/// The canonical basis plus `d` self-multiplexing bases, together with the
/// linear map from `vec(ρ)` to the `d(d+1)` outcome probabilities.
#[derive(Debug, Clone)]
pub struct TomographySet {
    dim: usize,
    bases: Vec<MeasurementBasis>,
    measurement: CMatrix,
    pseudo_inverse: CMatrix,
    condition_number: f64,
    rng_seed: Option<u64>,
    /// Condition numbers of every candidate set considered, in trial order.
    trial_log: Vec<f64>,
}

impl TomographySet {
    pub fn from_bases(bases: Vec<MeasurementBasis>, rng_seed: Option<u64>) -> Result<Self> {
        let measurement = measurement_matrix(&bases)?;
        let dim = bases[0].dim();
        let svd = SVD::new(measurement.clone(), true, true);
        let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
        s.sort_by(|x, y| y.total_cmp(x));
        // Same routine as the basis search, so logged and stored values agree bitwise.
        let condition_number = condition_number(&measurement);
        if !condition_number.is_finite() {
            return Err(Error::NotInformationallyComplete(format!(
                "measurement matrix has rank below {} (smallest singular value {:e})",
                dim * dim,
                s.last().copied().unwrap_or(0.0)
            )));
        }
        let pseudo_inverse = svd
            .pseudo_inverse(RANK_TOL * s[0])
            .map_err(|e| Error::NotInformationallyComplete(e.to_string()))?;
        Ok(Self {
            dim,
            bases,
            measurement,
            pseudo_inverse,
            condition_number,
            rng_seed,
            trial_log: vec![condition_number],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bases(&self) -> &[MeasurementBasis] {
        &self.bases
    }

    pub fn basis(&self, label: usize) -> Option<&MeasurementBasis> {
        self.bases.get(label)
    }

    pub fn measurement_matrix(&self) -> &CMatrix {
        &self.measurement
    }

    pub(crate) fn pseudo_inverse(&self) -> &CMatrix {
        &self.pseudo_inverse
    }

    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    pub fn rng_seed(&self) -> Option<u64> {
        self.rng_seed
    }

    pub fn trial_log(&self) -> &[f64] {
        &self.trial_log
    }

    /// Number of experimental configurations of the multiplexed scheme.
    pub fn settings(&self) -> usize {
        self.dim + 1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SetJson::from(self)).expect("set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: SetJson = serde_json::from_str(text)?;
        parsed.into_set(false)
    }

    /// SHA-256 of the serialized seeds, used to tie tables to the set that
    /// produced them.
    pub fn content_hash(&self) -> String {
        let j = SetJson::from(self);
        let key = serde_json::to_string(&(j.dim, &j.bases)).expect("set serializes");
        hex::encode(Sha256::digest(key.as_bytes()))
    }
}

/// Generate `trials` candidate sets and keep the best conditioned one.
///
/// `B₀` is canonical, `B₁` comes from the uniform seed and `B₂ … B_d` from
/// random flat seeds. Candidates are drawn sequentially from a ChaCha8 stream
/// seeded with `seed`; ties go to the lowest trial index.
pub fn build_tomography_set(dim: usize, trials: usize, seed: u64) -> Result<TomographySet> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<Vec<CVector>> = (0..trials)
        .map(|_| (2..=dim).map(|_| random_flat_seed(dim, &mut rng)).collect())
        .collect();

    let assemble = |seeds: &[CVector]| -> Result<Vec<MeasurementBasis>> {
        let mut bases = vec![canonical_basis(dim), generate_basis(&uniform_seed(dim), 1)?];
        for (i, s) in seeds.iter().enumerate() {
            bases.push(generate_basis(s, i + 2)?);
        }
        Ok(bases)
    };

    let trial_log: Vec<f64> = candidates
        .par_iter()
        .map(|seeds| Ok(condition_number(&measurement_matrix(&assemble(seeds)?)?)))
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (i, &c) in trial_log.iter().enumerate() {
        if c < trial_log[best] {
            best = i;
        }
    }
    if !trial_log[best].is_finite() {
        return Err(Error::NotInformationallyComplete(format!("all {trials} candidate sets are singular")));
    }
    let mut set = TomographySet::from_bases(assemble(&candidates[best])?, Some(seed))?;
    set.trial_log = trial_log;
    Ok(set)
}

/// The six generating vectors of the published d = 6 set, exactly as listed
/// (three decimals).
pub fn paper_d6_raw_seeds() -> Vec<CVector> {
    let parsed: SetJson = serde_json::from_str(PAPER_D6_JSON).expect("bundled fixture is valid JSON");
    parsed.bases.iter().map(BasisJson::to_vector).collect()
}

/// Rescale every component to modulus `1/√d`, keeping its phase.
pub fn reflatten(seed: &CVector) -> CVector {
    let amp = 1.0 / (seed.len() as f64).sqrt();
    seed.map(|b| C64::from_polar(amp, b.arg()))
}

/// The published d = 6 set, with seeds re-flattened before completion.
pub fn load_paper_bases_d6() -> TomographySet {
    let parsed: SetJson = serde_json::from_str(PAPER_D6_JSON).expect("bundled fixture is valid JSON");
    parsed.into_set(true).expect("bundled d=6 set is informationally complete")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SeedJson {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl SeedJson {
    fn to_vector(&self) -> CVector {
        CVector::from_iterator(self.re.len(), self.re.iter().zip(&self.im).map(|(&r, &i)| C64::new(r, i)))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BasisJson {
    label: usize,
    seed: SeedJson,
}

impl BasisJson {
    fn to_vector(&self) -> CVector {
        self.seed.to_vector()
    }
}

/// On-disk form of a set: the canonical basis is implicit, every other basis
/// is stored as its seed vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SetJson {
    dim: usize,
    rng_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    condition_number: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    trial_condition_numbers: Vec<f64>,
    bases: Vec<BasisJson>,
}

impl SetJson {
    fn into_set(self, reflatten_seeds: bool) -> Result<TomographySet> {
        let d = self.dim;
        let mut bases = vec![canonical_basis(d)];
        for (i, b) in self.bases.iter().enumerate() {
            if b.seed.re.len() != d || b.seed.im.len() != d {
                return Err(Error::Format(format!("basis {} seed does not have {d} components", b.label)));
            }
            if b.label != i + 1 {
                return Err(Error::Format(format!("expected basis label {}, found {}", i + 1, b.label)));
            }
            let v = b.to_vector();
            let v = if reflatten_seeds { reflatten(&v) } else { v };
            bases.push(generate_basis(&v, b.label)?);
        }
        let mut set = TomographySet::from_bases(bases, self.rng_seed)?;
        if !self.trial_condition_numbers.is_empty() {
            set.trial_log = self.trial_condition_numbers;
        }
        Ok(set)
    }

    fn from(set: &TomographySet) -> Self {
        let bases = set
            .bases
            .iter()
            .filter_map(|b| {
                b.seed.as_ref().map(|s| BasisJson {
                    label: b.label,
                    seed: SeedJson { re: s.iter().map(|c| c.re).collect(), im: s.iter().map(|c| c.im).collect() },
                })
            })
            .collect();
        SetJson {
            dim: set.dim,
            rng_seed: set.rng_seed,
            condition_number: Some(set.condition_number),
            trial_condition_numbers: if set.trial_log.len() > 1 { set.trial_log.clone() } else { Vec::new() },
            bases,
        }
    }
}

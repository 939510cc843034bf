//! Shot noise, the random-phase mixed-state ensemble and end-to-end
//! Monte Carlo experiments.
//!
//! Every run draws from its own ChaCha8 stream `(rng_seed, run_index)`, so
//! runs can be evaluated in parallel and still give identical reports.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::{build_tomography_set, load_paper_bases_d6, TomographySet, DEFAULT_TRIALS};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::optics::{sinc, OpticalConfig, Prepared};
use crate::qudit::{fidelity, project_to_physical, DensityMatrix, MatrixJson, QuditState};
use crate::tomography::{self, linear_inversion, traditional_settings, ProbabilityTable};
use crate::C64;

pub const DEFAULT_ENSEMBLE_SAMPLES: usize = 1000;

pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Multinomial photocounts for `photons` detections, drawn as a chain of
/// conditional binomials.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], photons: u64, rng: &mut R) -> Result<Vec<u64>> {
    if photons == 0 {
        return Err(Error::InvalidArgument("photon number must be positive".into()));
    }
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidProbabilities("negative or non-finite probability".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tomography::ROW_SUM_TOL {
        return Err(Error::InvalidProbabilities(format!("probabilities sum to {total}")));
    }
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = photons;
    let mut mass = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probs.len() {
            counts[i] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q)
            .map_err(|e| Error::InvalidProbabilities(e.to_string()))?
            .sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    Ok(counts)
}

/// Independent Poisson counts with the given means.
fn sample_poisson<R: Rng + ?Sized>(means: &[f64], rng: &mut R) -> Result<Vec<u64>> {
    means
        .iter()
        .map(|&m| {
            if m <= 0.0 {
                return Ok(0);
            }
            let k: f64 = Poisson::new(m).map_err(|e| Error::InvalidArgument(e.to_string()))?.sample(rng);
            Ok(k as u64)
        })
        .collect()
}

/// `(1/√d) Σ_ℓ exp(i 2πℓ/d) exp(iΔ_ℓ) |ℓ⟩` with `Δ_ℓ ~ U[0, 2πℓ/d]`.
/// `Δ_0` is identically zero, so no random number is drawn for it.
pub fn random_phase_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> QuditState {
    let amp = 1.0 / (dim as f64).sqrt();
    let d = dim as f64;
    let mut v = Vec::with_capacity(dim);
    v.push(C64::new(amp, 0.0));
    for l in 1..dim {
        let width = TAU * l as f64 / d;
        let delta = rng.random::<f64>() * width;
        v.push(C64::from_polar(amp, TAU * l as f64 / d + delta));
    }
    QuditState::new(v).expect("flat amplitudes are normalized")
}

/// `E[exp(iΔ)]` for `Δ ~ U[0, width]`, i.e. `exp(i width/2) sinc(width/2)`.
fn mean_phase_factor(width: f64) -> C64 {
    C64::from_polar(sinc(width / 2.0), width / 2.0)
}

/// Closed-form ensemble average of the random-phase states:
/// `ρ_{ℓℓ'} = (1/d) exp(i2π(ℓ−ℓ')/d) E[e^{iΔ_ℓ}] E[e^{−iΔ_ℓ'}]` off the
/// diagonal and `1/d` on it.
pub fn rho3_analytic(dim: usize) -> Result<DensityMatrix> {
    let d = dim as f64;
    let factors: Vec<C64> = (0..dim)
        .map(|l| C64::from_polar(1.0, TAU * l as f64 / d) * mean_phase_factor(TAU * l as f64 / d))
        .collect();
    let m = CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new(1.0 / d, 0.0)
        } else {
            factors[i] * factors[j].conj() / d
        }
    });
    DensityMatrix::normalize_from(&m)
}

/// The ensemble matrix as printed alongside the experiment, taken literally:
/// phase `exp(i3πℓ/d)` on the row index only and `sinc(ℓ/d) sinc(ℓ'/d)` with
/// `sinc(u) = sin(u)/u`. Not Hermitian; kept only to quantify its distance
/// from [`rho3_analytic`].
pub fn rho3_printed_formula(dim: usize) -> CMatrix {
    let d = dim as f64;
    CMatrix::from_fn(dim, dim, |l, lp| {
        if l == lp {
            C64::new(1.0 / d, 0.0)
        } else {
            C64::from_polar(sinc(l as f64 / d) * sinc(lp as f64 / d) / d, 3.0 * PI * l as f64 / d)
        }
    })
}

/// Monte Carlo average of `|Ψ₃⟩⟨Ψ₃|` over `samples` draws.
pub fn rho3_reference<R: Rng + ?Sized>(dim: usize, samples: usize, rng: &mut R) -> Result<DensityMatrix> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let mut acc = CMatrix::zeros(dim, dim);
    for _ in 0..samples {
        let psi = random_phase_state(dim, rng);
        acc += psi.amplitudes() * psi.amplitudes().adjoint();
    }
    DensityMatrix::normalize_from(&acc.unscale(samples as f64))
}

/// `½(|0⟩ + i|2⟩ − i|3⟩ − |4⟩)` in d = 6.
pub fn psi2_d6() -> QuditState {
    let z = C64::new(0.0, 0.0);
    QuditState::new(vec![
        C64::new(0.5, 0.0),
        z,
        C64::new(0.0, 0.5),
        C64::new(0.0, -0.5),
        C64::new(-0.5, 0.0),
        z,
    ])
    .expect("normalized by construction")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// `d + 1` settings, outcomes read from pattern positions.
    Multiplexed,
    /// `d(d + 1)` settings, one projector each, read at the pattern centre.
    Traditional,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Multiplexed => "multiplexed",
            Scheme::Traditional => "traditional",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasesSource {
    PaperD6,
    Generated { trials: usize },
}

/// What is prepared behind the slits.
#[derive(Debug, Clone)]
pub enum Target {
    Pure { label: String, state: QuditState },
    Density { label: String, rho: DensityMatrix },
    /// Time average over random-phase masks, redrawn in every run.
    Rho3Ensemble,
}

impl Target {
    pub fn psi1(dim: usize) -> Result<Self> {
        Ok(Target::Pure { label: "psi1".into(), state: QuditState::uniform(dim)? })
    }

    pub fn psi2() -> Self {
        Target::Pure { label: "psi2".into(), state: psi2_d6() }
    }

    pub fn label(&self) -> &str {
        match self {
            Target::Pure { label, .. } | Target::Density { label, .. } => label,
            Target::Rho3Ensemble => "rho3",
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Target::Pure { state, .. } => Some(state.dim()),
            Target::Density { rho, .. } => Some(rho.dim()),
            Target::Rho3Ensemble => None,
        }
    }

    /// The state reconstructions are compared against.
    pub fn reference(&self, dim: usize) -> Result<DensityMatrix> {
        match self {
            Target::Pure { state, .. } => Ok(DensityMatrix::from_pure(state)),
            Target::Density { rho, .. } => Ok(rho.clone()),
            Target::Rho3Ensemble => rho3_analytic(dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dim: usize,
    /// Detected photons per setting; `None` runs the noiseless model.
    pub photons_per_setting: Option<u64>,
    pub monte_carlo_runs: usize,
    pub ensemble_samples: usize,
    pub rng_seed: u64,
    pub optical: OpticalConfig,
    pub bases_source: BasesSource,
    /// Relative diffraction efficiencies of the canonical-basis gratings.
    pub canonical_efficiencies: Vec<f64>,
}

impl ExperimentConfig {
    pub fn new(dim: usize, photons_per_setting: Option<u64>, monte_carlo_runs: usize, rng_seed: u64) -> Self {
        Self {
            dim,
            photons_per_setting,
            monte_carlo_runs,
            ensemble_samples: DEFAULT_ENSEMBLE_SAMPLES,
            rng_seed,
            optical: OpticalConfig::default_for(dim),
            bases_source: if dim == 6 { BasesSource::PaperD6 } else { BasesSource::Generated { trials: DEFAULT_TRIALS } },
            canonical_efficiencies: vec![1.0; dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::DimensionTooSmall(self.dim));
        }
        if self.photons_per_setting == Some(0) {
            return Err(Error::InvalidArgument("photons per setting must be positive".into()));
        }
        if self.monte_carlo_runs == 0 || self.ensemble_samples == 0 {
            return Err(Error::InvalidArgument("run and ensemble counts must be positive".into()));
        }
        if self.optical.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: self.optical.dim });
        }
        if self.canonical_efficiencies.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: self.canonical_efficiencies.len() });
        }
        if let BasesSource::Generated { trials: 0 } = self.bases_source {
            return Err(Error::InvalidArgument("trials must be positive".into()));
        }
        self.optical.validate()
    }

    pub fn build_set(&self) -> Result<TomographySet> {
        self.validate()?;
        match self.bases_source {
            BasesSource::PaperD6 if self.dim != 6 => {
                Err(Error::InvalidArgument("the bundled basis set is for d = 6".into()))
            }
            BasesSource::PaperD6 => Ok(load_paper_bases_d6()),
            BasesSource::Generated { trials } => build_tomography_set(self.dim, trials, self.rng_seed),
        }
    }
}

/// Everything produced by one simulated acquisition and reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub label: String,
    pub scheme: Scheme,
    pub dim: usize,
    pub rng_seed: u64,
    pub run_index: u64,
    pub photons_per_setting: Option<u64>,
    pub settings_used: usize,
    pub condition_number: f64,
    pub target: DensityMatrix,
    /// Noiseless probabilities of the prepared (possibly ensemble-averaged) state.
    pub ideal: ProbabilityTable,
    /// Probabilities handed to the reconstruction, with raw counts if noisy.
    pub measured: ProbabilityTable,
    pub linear_estimate: MatrixJson,
    pub residual_norm: f64,
    pub reconstructed: DensityMatrix,
    pub fidelity: f64,
}

/// Readout of one prepared state under `scheme`: calibrated rows for the
/// multiplexed scheme, raw centre intensities for the traditional one.
fn raw_readout(
    prepared: Prepared<'_>,
    set: &TomographySet,
    config: &ExperimentConfig,
    scheme: Scheme,
) -> Result<Vec<Vec<f64>>> {
    match scheme {
        Scheme::Multiplexed => tomography::multiplexed_readout(prepared, set, &config.optical, &config.canonical_efficiencies),
        Scheme::Traditional => tomography::traditional_intensities(prepared, set, &config.optical),
    }
}

fn ideal_table(raw: &[Vec<f64>], set: &TomographySet, config: &ExperimentConfig, scheme: Scheme) -> Result<ProbabilityTable> {
    match scheme {
        Scheme::Multiplexed => tomography::calibrate_readout(raw, set, &config.optical, &config.canonical_efficiencies),
        Scheme::Traditional => {
            ProbabilityTable::from_measured(set.dim(), raw.to_vec(), traditional_settings(set.dim()))
        }
    }
}

/// Noiseless and measured probability tables of one acquisition.
#[derive(Debug, Clone, PartialEq)]
pub struct Acquisition {
    pub ideal: ProbabilityTable,
    pub measured: ProbabilityTable,
}

/// Simulate the detector side of one run: prepare (and, for the ensemble,
/// time-average) the state, read out every setting and apply shot noise.
/// Randomness comes from the stream `(config.rng_seed, run_index)`.
pub fn acquire(
    config: &ExperimentConfig,
    set: &TomographySet,
    target: &Target,
    scheme: Scheme,
    run_index: u64,
) -> Result<Acquisition> {
    config.validate()?;
    let d = config.dim;
    if set.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: set.dim() });
    }
    if let Some(td) = target.dim() {
        if td != d {
            return Err(Error::DimensionMismatch { expected: d, found: td });
        }
    }
    let mut rng = rng_stream(config.rng_seed, run_index);
    let raw = match target {
        Target::Pure { state, .. } => raw_readout(state.into(), set, config, scheme)?,
        Target::Density { rho, .. } => raw_readout(rho.into(), set, config, scheme)?,
        Target::Rho3Ensemble => {
            let mut acc = vec![vec![0.0; d]; d + 1];
            for _ in 0..config.ensemble_samples {
                let psi = random_phase_state(d, &mut rng);
                let r = raw_readout((&psi).into(), set, config, scheme)?;
                for (a, row) in acc.iter_mut().zip(&r) {
                    for (x, v) in a.iter_mut().zip(row) {
                        *x += v;
                    }
                }
            }
            let n = config.ensemble_samples as f64;
            acc.into_iter().map(|row| row.into_iter().map(|v| v / n).collect()).collect()
        }
    };
    let ideal = ideal_table(&raw, set, config, scheme)?;

    let measured = match (config.photons_per_setting, scheme) {
        (None, _) => ideal.clone(),
        (Some(n), Scheme::Multiplexed) => {
            let counts = ideal.rows.iter().map(|row| sample_counts(row, n, &mut rng)).collect::<Result<Vec<_>>>()?;
            ProbabilityTable::from_counts(d, counts, set.settings())?
        }
        (Some(n), Scheme::Traditional) => {
            // Separate exposures per projector with the same expected photon
            // total per basis as one multiplexed image.
            let counts = ideal
                .rows
                .iter()
                .map(|row| sample_poisson(&row.iter().map(|p| p * n as f64).collect::<Vec<_>>(), &mut rng))
                .collect::<Result<Vec<_>>>()?;
            ProbabilityTable::from_counts(d, counts, traditional_settings(d))?
        }
    };

    Ok(Acquisition { ideal, measured })
}

/// One acquisition followed by reconstruction and scoring.
pub fn run_experiment(
    config: &ExperimentConfig,
    set: &TomographySet,
    target: &Target,
    scheme: Scheme,
    run_index: u64,
) -> Result<ExperimentReport> {
    let Acquisition { ideal, measured } = acquire(config, set, target, scheme, run_index)?;
    let reference = target.reference(config.dim)?;
    let estimate = linear_inversion(&measured, set)?;
    let reconstructed = project_to_physical(&estimate.matrix)?;
    let fid = fidelity(&reconstructed, &reference)?;
    Ok(ExperimentReport {
        label: target.label().to_string(),
        scheme,
        dim: config.dim,
        rng_seed: config.rng_seed,
        run_index,
        photons_per_setting: config.photons_per_setting,
        settings_used: measured.settings,
        condition_number: set.condition_number(),
        target: reference,
        ideal,
        measured,
        linear_estimate: MatrixJson::from_matrix(&estimate.matrix),
        residual_norm: estimate.residual_norm,
        reconstructed,
        fidelity: fid,
    })
}

pub fn run_multiplexed_experiment(
    config: &ExperimentConfig,
    set: &TomographySet,
    target: &Target,
    run_index: u64,
) -> Result<ExperimentReport> {
    run_experiment(config, set, target, Scheme::Multiplexed, run_index)
}

pub fn run_traditional_experiment(
    config: &ExperimentConfig,
    set: &TomographySet,
    target: &Target,
    run_index: u64,
) -> Result<ExperimentReport> {
    run_experiment(config, set, target, Scheme::Traditional, run_index)
}

/// Fidelity statistics over independent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub label: String,
    pub scheme: Scheme,
    pub runs: usize,
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
    /// Normal-approximation 95 % interval of the mean.
    pub ci95: [f64; 2],
    pub fidelities: Vec<f64>,
    /// Full report of run 0.
    pub first_run: ExperimentReport,
}

pub fn run_monte_carlo(
    config: &ExperimentConfig,
    set: &TomographySet,
    target: &Target,
    scheme: Scheme,
) -> Result<MonteCarloSummary> {
    config.validate()?;
    let reports: Vec<ExperimentReport> = (0..config.monte_carlo_runs as u64)
        .into_par_iter()
        .map(|i| run_experiment(config, set, target, scheme, i))
        .collect::<Result<_>>()?;
    let fidelities: Vec<f64> = reports.iter().map(|r| r.fidelity).collect();
    let (mean, std) = mean_std(&fidelities);
    let half = 1.96 * std / (fidelities.len() as f64).sqrt();
    Ok(MonteCarloSummary {
        label: target.label().to_string(),
        scheme,
        runs: fidelities.len(),
        mean_fidelity: mean,
        std_fidelity: std,
        ci95: [mean - half, mean + half],
        fidelities,
        first_run: reports.into_iter().next().expect("at least one run"),
    })
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Side-by-side figures of two reports; deltas are `b − a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportComparison {
    pub label_a: String,
    pub label_b: String,
    pub fidelity: [f64; 2],
    pub fidelity_delta: f64,
    pub settings: [usize; 2],
    pub condition_number: [f64; 2],
    pub condition_number_delta: f64,
    /// Frobenius distance between the two reconstructions.
    pub reconstruction_distance: f64,
}

pub fn compare_report(a: &ExperimentReport, b: &ExperimentReport) -> Result<ReportComparison> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, found: b.dim });
    }
    Ok(ReportComparison {
        label_a: format!("{} ({})", a.label, a.scheme),
        label_b: format!("{} ({})", b.label, b.scheme),
        fidelity: [a.fidelity, b.fidelity],
        fidelity_delta: b.fidelity - a.fidelity,
        settings: [a.settings_used, b.settings_used],
        condition_number: [a.condition_number, b.condition_number],
        condition_number_delta: b.condition_number - a.condition_number,
        reconstruction_distance: a.reconstructed.distance(&b.reconstructed),
    })
}

impl fmt::Display for ReportComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<18} {:>22} {:>22} {:>12}", "", self.label_a, self.label_b, "delta")?;
        writeln!(f, "{:<18} {:>22.6} {:>22.6} {:>12.2e}", "fidelity", self.fidelity[0], self.fidelity[1], self.fidelity_delta)?;
        writeln!(f, "{:<18} {:>22} {:>22} {:>12}", "settings", self.settings[0], self.settings[1], self.settings[1] as i64 - self.settings[0] as i64)?;
        writeln!(
            f,
            "{:<18} {:>22.6} {:>22.6} {:>12.2e}",
            "condition number", self.condition_number[0], self.condition_number[1], self.condition_number_delta
        )?;
        write!(f, "{:<18} {:>22.3e}", "|rho_a - rho_b|", self.reconstruction_distance)
    }
}

/// Monte Carlo reproduction of the d = 6 experiment for a list of targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub config: ExperimentConfig,
    pub scheme: Scheme,
    pub condition_number: f64,
    pub set_hash: String,
    pub states: Vec<MonteCarloSummary>,
    /// Frobenius distance between the literal printed ensemble formula and
    /// the closed-form ensemble average (present when rho3 was run).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho3_printed_formula_distance: Option<f64>,
}

pub fn reproduce(config: &ExperimentConfig, targets: &[Target], scheme: Scheme) -> Result<ReproductionReport> {
    let set = config.build_set()?;
    let states = targets
        .iter()
        .map(|t| run_monte_carlo(config, &set, t, scheme))
        .collect::<Result<Vec<_>>>()?;
    let rho3_printed_formula_distance = if targets.iter().any(|t| matches!(t, Target::Rho3Ensemble)) {
        Some((rho3_printed_formula(config.dim) - rho3_analytic(config.dim)?.matrix()).norm())
    } else {
        None
    };
    Ok(ReproductionReport {
        config: config.clone(),
        scheme,
        condition_number: set.condition_number(),
        set_hash: set.content_hash(),
        states,
        rho3_printed_formula_distance,
    })
}

impl fmt::Display for ReproductionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let photons = self.config.photons_per_setting.map_or("noiseless".to_string(), |n| n.to_string());
        writeln!(
            f,
            "scheme {} | d = {} | photons/setting {} | runs {} | seed {} | condition number {:.4}",
            self.scheme, self.config.dim, photons, self.config.monte_carlo_runs, self.config.rng_seed, self.condition_number
        )?;
        for s in &self.states {
            writeln!(
                f,
                "  {:<6} settings {:>3}  mean fidelity {:.5}  95% CI [{:.5}, {:.5}]  std {:.2e}",
                s.label, s.first_run.settings_used, s.mean_fidelity, s.ci95[0], s.ci95[1], s.std_fidelity
            )?;
        }
        if let Some(dist) = self.rho3_printed_formula_distance {
            writeln!(f, "  printed rho3 formula vs closed-form average: |diff|_F = {dist:.4}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_counts() {
        let mut rng = rng_stream(1, 0);
        assert_eq!(sample_counts(&[1.0, 0.0], 1234, &mut rng).unwrap(), vec![1234, 0]);
        assert_eq!(sample_counts(&[0.0, 1.0], 1234, &mut rng).unwrap(), vec![0, 1234]);
        let a = sample_counts(&[0.2, 0.3, 0.5], 1000, &mut rng_stream(4, 2)).unwrap();
        let b = sample_counts(&[0.2, 0.3, 0.5], 1000, &mut rng_stream(4, 2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().sum::<u64>(), 1000);
    }

    #[test]
    fn invalid_counts_input() {
        let mut rng = rng_stream(1, 0);
        assert!(sample_counts(&[0.5, 0.6], 10, &mut rng).is_err());
        assert!(sample_counts(&[1.5, -0.5], 10, &mut rng).is_err());
        assert!(sample_counts(&[0.5, 0.5], 0, &mut rng).is_err());
    }

    #[test]
    fn streams_differ() {
        let a: u64 = rng_stream(5, 0).random();
        let b: u64 = rng_stream(5, 1).random();
        assert_ne!(a, b);
    }

    #[test]
    fn random_phase_state_structure() {
        let mut rng = rng_stream(2, 0);
        for _ in 0..100 {
            let psi = random_phase_state(6, &mut rng);
            assert_eq!(psi.amplitudes()[0], C64::new(1.0 / 6f64.sqrt(), 0.0));
            assert!(psi.amplitudes().iter().all(|c| (c.norm() - 1.0 / 6f64.sqrt()).abs() < 1e-15));
        }
    }

    #[test]
    fn rho3_analytic_entries() {
        let rho = rho3_analytic(6).unwrap();
        for l in 0..6 {
            assert!((rho.matrix()[(l, l)].re - 1.0 / 6.0).abs() < 1e-15);
        }
        // E[e^{iΔ}] over U[0, π/3] = (e^{iπ/3} − 1)/(iπ/3); ρ_10 = (1/6) e^{iπ/3} E[e^{iΔ_1}].
        let w = PI / 3.0;
        let mean = (C64::from_polar(1.0, w) - 1.0) / C64::new(0.0, w);
        let expected = C64::from_polar(1.0, w) * mean / 6.0;
        assert!((rho.matrix()[(1, 0)] - expected).norm() < 1e-15);
        assert!(rho.is_physical());
    }

    #[test]
    fn printed_formula_is_not_hermitian() {
        let printed = rho3_printed_formula(6);
        assert!(crate::linalg::hermiticity_error(&printed) > 1e-3);
    }

    #[test]
    fn psi2_normalized() {
        assert_eq!(psi2_d6().dim(), 6);
    }

    #[test]
    fn noiseless_experiment_is_exact() {
        let config = ExperimentConfig::new(6, None, 1, 3);
        let set = config.build_set().unwrap();
        let r = run_multiplexed_experiment(&config, &set, &Target::psi2(), 0).unwrap();
        assert!(r.fidelity > 1.0 - 1e-9);
        assert_eq!(r.settings_used, 7);
        let t = run_traditional_experiment(&config, &set, &Target::psi2(), 0).unwrap();
        assert_eq!(t.settings_used, 42);
        let cmp = compare_report(&r, &t).unwrap();
        assert!(cmp.fidelity_delta.abs() < 1e-9);
        assert!(cmp.reconstruction_distance < 1e-9);
        assert_eq!(cmp.settings, [7, 42]);
    }

    #[test]
    fn compare_identical_reports() {
        let config = ExperimentConfig::new(6, Some(1000), 1, 8);
        let set = config.build_set().unwrap();
        let r = run_multiplexed_experiment(&config, &set, &Target::psi1(6).unwrap(), 0).unwrap();
        let cmp = compare_report(&r, &r).unwrap();
        assert_eq!(cmp.fidelity_delta, 0.0);
        assert_eq!(cmp.condition_number_delta, 0.0);
        assert_eq!(cmp.reconstruction_distance, 0.0);
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::new(6, Some(0), 1, 0);
        assert!(c.validate().is_err());
        c.photons_per_setting = Some(10);
        c.dim = 5;
        assert!(c.validate().is_err());
        let c = ExperimentConfig { bases_source: BasesSource::PaperD6, ..ExperimentConfig::new(4, None, 1, 0) };
        assert!(c.build_set().is_err());
    }

    #[test]
    fn target_dimension_checked() {
        let config = ExperimentConfig::new(4, None, 1, 0);
        let set = config.build_set().unwrap();
        assert!(run_multiplexed_experiment(&config, &set, &Target::psi2(), 0).is_err());
    }
}

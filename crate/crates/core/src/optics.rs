//! Far-field (Fraunhofer) interference of `d` slits behind a projector mask.
//!
//! Slits with transmissivities `c_ℓ b_ℓ*` produce, in the focal plane of a
//! lens of focal length `f`,
//!
//! ```text
//! I(x) = sinc²(k x a / 2f) · |Σ_ℓ c_ℓ b_ℓ* exp(i ℓ s k x / f)|²
//! ```
//!
//! At the multiplex positions `x⁽ᵐ⁾ = f λ m / (s d)` the phase factor becomes
//! `ωᵐˡ` with `ω = exp(2πi/d)`, so position `m` reads the projection onto the
//! vector with components `b_ℓ ω^(−mℓ)`. That is basis element `(d − m) mod d`
//! of the family generated from `b` (see [`position_of_outcome`]).

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{root_of_unity, CVector};
use crate::qudit::{DensityMatrix, QuditState};
use crate::C64;

/// Envelope factors below this cannot be divided out reliably.
pub const ENVELOPE_FLOOR: f64 = 1e-6;

/// `sin(u)/u`, with `u` in radians.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Geometry of the slit array and the Fourier lens. All lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalConfig {
    pub slit_width: f64,
    pub slit_separation: f64,
    pub focal_length: f64,
    pub wavelength: f64,
    pub dim: usize,
}

impl OpticalConfig {
    pub fn new(slit_width: f64, slit_separation: f64, focal_length: f64, wavelength: f64, dim: usize) -> Result<Self> {
        let cfg = Self { slit_width, slit_separation, focal_length, wavelength, dim };
        cfg.validate()?;
        Ok(cfg)
    }

    /// 50 µm slits on a 100 µm pitch, f = 150 mm, λ = 405 nm.
    pub fn default_for(dim: usize) -> Self {
        Self { slit_width: 50e-6, slit_separation: 100e-6, focal_length: 0.15, wavelength: 405e-9, dim }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.slit_width, self.slit_separation, self.focal_length, self.wavelength]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig("non-finite length".into()));
        }
        if !(self.slit_width > 0.0 && self.slit_width < self.slit_separation) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < slit width ({}) < slit separation ({})",
                self.slit_width, self.slit_separation
            )));
        }
        if !(self.focal_length > 0.0 && self.wavelength > 0.0) {
            return Err(Error::InvalidConfig("focal length and wavelength must be positive".into()));
        }
        if self.dim < 2 {
            return Err(Error::DimensionTooSmall(self.dim));
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    /// Distance between adjacent multiplex positions, `f λ / (s d)`.
    pub fn multiplex_spacing(&self) -> f64 {
        self.focal_length * self.wavelength / (self.slit_separation * self.dim as f64)
    }
}

/// Something that can sit behind the slit array: a pure slit state or a
/// density matrix (for time-averaged, mixed illumination).
#[derive(Debug, Clone, Copy)]
pub enum Prepared<'a> {
    Pure(&'a QuditState),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a QuditState> for Prepared<'a> {
    fn from(s: &'a QuditState) -> Self {
        Prepared::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for Prepared<'a> {
    fn from(r: &'a DensityMatrix) -> Self {
        Prepared::Mixed(r)
    }
}

impl Prepared<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Prepared::Pure(s) => s.dim(),
            Prepared::Mixed(r) => r.dim(),
        }
    }

    /// `|Σ_ℓ c_ℓ b_ℓ* phase_ℓ|²`, or its ensemble average
    /// `Σ_{ℓℓ'} ρ_{ℓℓ'} b_ℓ* b_ℓ' phase_ℓ phase_ℓ'*` for a density matrix.
    fn fringe(&self, projector: &CVector, phases: &[C64]) -> f64 {
        match self {
            Prepared::Pure(s) => s
                .amplitudes()
                .iter()
                .zip(projector.iter())
                .zip(phases)
                .map(|((c, b), p)| c * b.conj() * p)
                .sum::<C64>()
                .norm_sqr(),
            Prepared::Mixed(r) => {
                let rho = r.matrix();
                let w: Vec<C64> = projector.iter().zip(phases).map(|(b, p)| b.conj() * p).collect();
                let mut acc = C64::new(0.0, 0.0);
                for (i, wi) in w.iter().enumerate() {
                    for (j, wj) in w.iter().enumerate() {
                        acc += rho[(i, j)] * wi * wj.conj();
                    }
                }
                acc.re.max(0.0)
            }
        }
    }
}

fn check_dims(config: &OpticalConfig, prepared: &Prepared<'_>, projector: &CVector) -> Result<()> {
    for found in [prepared.dim(), projector.len()] {
        if found != config.dim {
            return Err(Error::DimensionMismatch { expected: config.dim, found });
        }
    }
    Ok(())
}

/// Focal-plane intensity at position `x` for the prepared state behind a
/// mask encoding `projector`.
pub fn intensity_at<'a>(
    config: &OpticalConfig,
    prepared: impl Into<Prepared<'a>>,
    projector: &CVector,
    x: f64,
) -> Result<f64> {
    let prepared = prepared.into();
    check_dims(config, &prepared, projector)?;
    Ok(intensity_unchecked(config, &prepared, projector, x))
}

fn intensity_unchecked(config: &OpticalConfig, prepared: &Prepared<'_>, projector: &CVector, x: f64) -> f64 {
    let k = config.wavenumber();
    let envelope = sinc(k * x * config.slit_width / (2.0 * config.focal_length)).powi(2);
    let step = config.slit_separation * k * x / config.focal_length;
    let phases: Vec<C64> = (0..config.dim).map(|l| C64::from_polar(1.0, l as f64 * step)).collect();
    envelope * prepared.fringe(projector, &phases)
}

/// `x⁽ᵐ⁾ = f λ m / (s d)` for `m = 0..d`.
pub fn multiplex_positions(config: &OpticalConfig) -> Vec<f64> {
    let spacing = config.multiplex_spacing();
    (0..config.dim).map(|m| spacing * m as f64).collect()
}

/// `sinc²(π (a/s) (m/d))` for each multiplex position.
pub fn envelope_factors(config: &OpticalConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let ratio = config.slit_width / config.slit_separation;
    let d = config.dim as f64;
    (0..config.dim)
        .map(|m| {
            let factor = sinc(PI * ratio * m as f64 / d).powi(2);
            if factor < ENVELOPE_FLOOR {
                Err(Error::IllConditionedEnvelope { position: m, factor })
            } else {
                Ok(factor)
            }
        })
        .collect()
}

/// Index of the multiplex position that reads basis element `outcome`.
pub fn position_of_outcome(dim: usize, outcome: usize) -> usize {
    (dim - outcome % dim) % dim
}

/// Intensities at the exact multiplex positions, in position order,
/// evaluated in closed form (`envelope_m · |Σ c_ℓ b_ℓ* ωᵐˡ|²`).
pub fn multiplex_intensities<'a>(
    config: &OpticalConfig,
    prepared: impl Into<Prepared<'a>>,
    projector: &CVector,
) -> Result<Vec<f64>> {
    let prepared = prepared.into();
    check_dims(config, &prepared, projector)?;
    let envelope = envelope_factors(config)?;
    let d = config.dim;
    Ok((0..d)
        .map(|m| {
            let phases: Vec<C64> = (0..d).map(|l| root_of_unity(d, m * l)).collect();
            envelope[m] * prepared.fringe(projector, &phases)
        })
        .collect())
}

/// How the diffraction envelope is divided out of multiplex intensities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EnvelopeCalibration {
    /// Use the known `sinc²` factors.
    Analytic,
    /// Divide by measured envelope values, one per multiplex position.
    Empirical(Vec<f64>),
}

impl EnvelopeCalibration {
    fn factors(&self, config: &OpticalConfig) -> Result<Vec<f64>> {
        match self {
            EnvelopeCalibration::Analytic => envelope_factors(config),
            EnvelopeCalibration::Empirical(v) => {
                if v.len() != config.dim {
                    return Err(Error::DimensionMismatch { expected: config.dim, found: v.len() });
                }
                if let Some((i, &f)) = v.iter().enumerate().find(|(_, &f)| !(f.is_finite() && f >= ENVELOPE_FLOOR)) {
                    return Err(Error::IllConditionedEnvelope { position: i, factor: f });
                }
                Ok(v.clone())
            }
        }
    }
}

/// Turn position-ordered multiplex intensities into outcome probabilities:
/// divide out the envelope, reorder positions to basis elements and normalize.
pub fn probabilities_from_intensities(intensities: &[f64], envelope: &[f64]) -> Result<Vec<f64>> {
    let d = intensities.len();
    if envelope.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: envelope.len() });
    }
    let corrected: Vec<f64> = (0..d)
        .map(|m| {
            let k = position_of_outcome(d, m);
            intensities[k].max(0.0) / envelope[k]
        })
        .collect();
    let total: f64 = corrected.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Degenerate("all multiplex intensities are zero".into()));
    }
    Ok(corrected.into_iter().map(|v| v / total).collect())
}

/// A sampled interference pattern together with its multiplex readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferencePattern {
    pub config: OpticalConfig,
    pub x_grid: Vec<f64>,
    pub intensities: Vec<f64>,
    /// Grid indices that coincide with `x⁽⁰⁾ … x⁽ᵈ⁻¹⁾`.
    pub multiplex_indices: Vec<usize>,
    /// Closed-form intensities at the exact multiplex positions.
    pub multiplex_intensities: Vec<f64>,
    /// Grid points per multiplex spacing.
    pub samples_per_spacing: usize,
}

/// Sample `I(x)` over one full fringe period, `[−x⁽¹⁾/2, x⁽ᵈ⁻¹⁾ + x⁽¹⁾/2]`.
///
/// `samples_per_period` is the number of grid points between adjacent
/// multiplex positions; it must be at least 8 and is rounded up to an even
/// number so that the period edges land on the grid.
pub fn render_pattern<'a>(
    config: &OpticalConfig,
    prepared: impl Into<Prepared<'a>>,
    projector: &CVector,
    samples_per_period: usize,
) -> Result<InterferencePattern> {
    if samples_per_period < 8 {
        return Err(Error::InvalidArgument(format!("samples_per_period must be >= 8, got {samples_per_period}")));
    }
    config.validate()?;
    let prepared = prepared.into();
    check_dims(config, &prepared, projector)?;
    let q = samples_per_period + samples_per_period % 2;
    let half = q / 2;
    let d = config.dim;
    let spacing = config.multiplex_spacing();
    let n = d * q + 1;
    let x_grid: Vec<f64> = (0..n).map(|i| spacing * (i as f64 - half as f64) / q as f64).collect();
    let intensities = x_grid.iter().map(|&x| intensity_unchecked(config, &prepared, projector, x)).collect();
    let multiplex_indices = (0..d).map(|m| half + m * q).collect();
    let multiplex_intensities = multiplex_intensities(config, prepared, projector)?;
    Ok(InterferencePattern { config: *config, x_grid, intensities, multiplex_indices, multiplex_intensities, samples_per_spacing: q })
}

impl InterferencePattern {
    /// Pointwise mean of patterns rendered on the same grid (time-averaged
    /// exposure over a sequence of masks).
    pub fn average(patterns: &[InterferencePattern]) -> Result<InterferencePattern> {
        let first = patterns.first().ok_or_else(|| Error::InvalidArgument("no patterns to average".into()))?;
        if patterns.iter().any(|p| p.x_grid != first.x_grid || p.config != first.config) {
            return Err(Error::InvalidArgument("patterns were rendered on different grids".into()));
        }
        let n = patterns.len() as f64;
        let mean = |f: fn(&InterferencePattern) -> &Vec<f64>| -> Vec<f64> {
            (0..f(first).len()).map(|i| patterns.iter().map(|p| f(p)[i]).sum::<f64>() / n).collect()
        };
        Ok(InterferencePattern {
            intensities: mean(|p| &p.intensities),
            multiplex_intensities: mean(|p| &p.multiplex_intensities),
            ..first.clone()
        })
    }

    pub fn multiplex_positions(&self) -> Vec<f64> {
        multiplex_positions(&self.config)
    }

    /// Sum of the multiplex intensities relative to `d` times the mean
    /// intensity over one period. Exactly 1 without a slit envelope; lower
    /// values mean more light falls between the read-out positions.
    pub fn multiplex_power_ratio(&self) -> f64 {
        let period = self.config.dim * self.samples_per_spacing;
        let grid_sum: f64 = self.intensities[..period].iter().sum();
        let multiplexed: f64 = self.multiplex_intensities.iter().sum();
        if grid_sum > 0.0 {
            multiplexed * self.samples_per_spacing as f64 / grid_sum
        } else {
            0.0
        }
    }
}

/// Probabilities of the `d` basis elements read from one pattern, with the
/// analytic envelope correction.
pub fn extract_probabilities(pattern: &InterferencePattern) -> Result<Vec<f64>> {
    extract_probabilities_with(pattern, &EnvelopeCalibration::Analytic)
}

pub fn extract_probabilities_with(pattern: &InterferencePattern, calibration: &EnvelopeCalibration) -> Result<Vec<f64>> {
    let envelope = calibration.factors(&pattern.config)?;
    probabilities_from_intensities(&pattern.multiplex_intensities, &envelope)
}

/// Canonical-basis readout through per-slit gratings with unequal
/// diffraction efficiencies, corrected by a calibration run on the flat state.
pub fn canonical_readout<'a>(prepared: impl Into<Prepared<'a>>, efficiencies: &[f64]) -> Result<Vec<f64>> {
    let raw = canonical_raw_intensities(prepared, efficiencies)?;
    calibrate_canonical(&raw, efficiencies)
}

/// Per-slit spot intensities `η_ℓ ρ_ℓℓ` before any calibration.
pub fn canonical_raw_intensities<'a>(prepared: impl Into<Prepared<'a>>, efficiencies: &[f64]) -> Result<Vec<f64>> {
    let prepared = prepared.into();
    let d = prepared.dim();
    check_efficiencies(d, efficiencies)?;
    let populations: Vec<f64> = match prepared {
        Prepared::Pure(s) => s.amplitudes().iter().map(|c| c.norm_sqr()).collect(),
        Prepared::Mixed(r) => r.matrix().diagonal().iter().map(|z| z.re.max(0.0)).collect(),
    };
    Ok(populations.iter().zip(efficiencies).map(|(p, e)| p * e).collect())
}

/// Normalize raw spot intensities, then divide by the normalized readout of
/// the flat calibration state and renormalize.
pub fn calibrate_canonical(raw: &[f64], efficiencies: &[f64]) -> Result<Vec<f64>> {
    check_efficiencies(raw.len(), efficiencies)?;
    let raw = normalize(raw.to_vec())?;
    let calibration = normalize(efficiencies.to_vec())?;
    normalize(raw.iter().zip(&calibration).map(|(r, c)| r / c).collect())
}

fn check_efficiencies(d: usize, efficiencies: &[f64]) -> Result<()> {
    if efficiencies.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: efficiencies.len() });
    }
    if efficiencies.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument("slit efficiencies must be positive".into()));
    }
    Ok(())
}

fn normalize(v: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = v.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Degenerate("zero total intensity".into()));
    }
    Ok(v.into_iter().map(|x| x / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::random_pure_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform6() -> QuditState {
        QuditState::uniform(6).unwrap()
    }

    #[test]
    fn central_maximum_of_uniform_state() {
        let cfg = OpticalConfig::default_for(6);
        let psi = uniform6();
        let i0 = intensity_at(&cfg, &psi, psi.amplitudes(), 0.0).unwrap();
        assert!((i0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn uniform_state_zeros_at_multiplex_positions() {
        let cfg = OpticalConfig::default_for(6);
        let psi = uniform6();
        for x in &multiplex_positions(&cfg)[1..] {
            assert!(intensity_at(&cfg, &psi, psi.amplitudes(), *x).unwrap() < 1e-18);
        }
    }

    #[test]
    fn orthogonal_projector_is_dark_at_centre() {
        let cfg = OpticalConfig::default_for(6);
        let psi = uniform6();
        // second element of the Fourier basis generated by the uniform seed
        let b = CVector::from_fn(6, |l, _| root_of_unity(6, l) / 6f64.sqrt());
        assert!(intensity_at(&cfg, &psi, &b, 0.0).unwrap() < 1e-30);
    }

    #[test]
    fn multiplex_positions_values() {
        let cfg = OpticalConfig::new(0.5e-4, 1.0e-4, 0.15, 405e-9, 6).unwrap();
        let x = multiplex_positions(&cfg);
        assert_eq!(x[0], 0.0);
        assert!((x[1] - 1.0125e-4).abs() < 1e-18);
        let wide = OpticalConfig { slit_separation: 2.0e-4, ..cfg };
        for (a, b) in x.iter().zip(multiplex_positions(&wide)) {
            assert!((a / 2.0 - b).abs() <= 1e-20);
        }
    }

    #[test]
    fn envelope_values() {
        let cfg = OpticalConfig::default_for(6);
        let env = envelope_factors(&cfg).unwrap();
        assert_eq!(env[0], 1.0);
        // sinc²(π/4) = 8/π²
        assert!((env[3] - 8.0 / (PI * PI)).abs() < 1e-14);
        assert!((env[3] - 0.8106).abs() < 1e-4);
        assert!(env.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn envelope_guard() {
        let cfg = OpticalConfig { slit_width: 0.999999e-4, slit_separation: 1e-4, dim: 5000, ..OpticalConfig::default_for(2) };
        assert!(matches!(envelope_factors(&cfg), Err(Error::IllConditionedEnvelope { .. })));
    }

    #[test]
    fn invalid_configs() {
        assert!(OpticalConfig::new(2e-4, 1e-4, 0.15, 405e-9, 6).is_err());
        assert!(OpticalConfig::new(5e-5, 1e-4, -0.15, 405e-9, 6).is_err());
        assert!(OpticalConfig::new(5e-5, 1e-4, 0.15, 405e-9, 1).is_err());
    }

    #[test]
    fn outcome_position_map() {
        assert_eq!(position_of_outcome(6, 0), 0);
        assert_eq!(position_of_outcome(6, 1), 5);
        assert_eq!(position_of_outcome(6, 5), 1);
        assert_eq!(position_of_outcome(2, 1), 1);
    }

    #[test]
    fn rendered_pattern_has_peak_at_origin() {
        let cfg = OpticalConfig::default_for(6);
        let psi = uniform6();
        let pat = render_pattern(&cfg, &psi, psi.amplitudes(), 16).unwrap();
        assert!(pat.intensities.iter().all(|&v| v >= 0.0));
        let argmax = pat
            .intensities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(argmax, pat.multiplex_indices[0]);
        assert_eq!(pat.x_grid[pat.multiplex_indices[0]], 0.0);
        let p = extract_probabilities(&pat).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn grid_covers_one_period() {
        let cfg = OpticalConfig::default_for(5);
        let psi = QuditState::uniform(5).unwrap();
        let pat = render_pattern(&cfg, &psi, psi.amplitudes(), 9).unwrap();
        let x1 = cfg.multiplex_spacing();
        assert_eq!(pat.samples_per_spacing, 10);
        assert!((pat.x_grid[0] + x1 / 2.0).abs() < 1e-18);
        assert!((pat.x_grid.last().unwrap() - 4.5 * x1).abs() < 1e-15);
        assert!(pat.x_grid.windows(2).all(|w| w[1] > w[0]));
        for (m, &i) in pat.multiplex_indices.iter().enumerate() {
            assert!((pat.x_grid[i] - m as f64 * x1).abs() < 0.5 * x1 / 10.0);
        }
        assert!(render_pattern(&cfg, &psi, psi.amplitudes(), 7).is_err());
    }

    #[test]
    fn grid_refinement_keeps_multiplex_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cfg = OpticalConfig::default_for(6);
        let psi = random_pure_state(6, &mut rng).unwrap();
        let b = crate::bases::random_flat_seed(6, &mut rng);
        let coarse = render_pattern(&cfg, &psi, &b, 8).unwrap();
        let fine = render_pattern(&cfg, &psi, &b, 64).unwrap();
        for m in 0..6 {
            let a = coarse.intensities[coarse.multiplex_indices[m]];
            let z = fine.intensities[fine.multiplex_indices[m]];
            assert!((a - z).abs() < 1e-9);
            assert!((a - coarse.multiplex_intensities[m]).abs() < 1e-12);
        }
    }

    #[test]
    fn power_ratio_is_one_without_envelope_limit() {
        let cfg = OpticalConfig { slit_width: 1e-9, ..OpticalConfig::default_for(4) };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = random_pure_state(4, &mut rng).unwrap();
        let b = crate::bases::random_flat_seed(4, &mut rng);
        let pat = render_pattern(&cfg, &psi, &b, 16).unwrap();
        assert!((pat.multiplex_power_ratio() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn averaged_patterns_of_basis_states_are_uniform() {
        let cfg = OpticalConfig::default_for(4);
        let b = QuditState::uniform(4).unwrap();
        let patterns: Vec<_> = (0..4)
            .map(|l| render_pattern(&cfg, &QuditState::basis(4, l).unwrap(), b.amplitudes(), 8).unwrap())
            .collect();
        let avg = InterferencePattern::average(&patterns).unwrap();
        for p in extract_probabilities(&avg).unwrap() {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_calibration_matches_analytic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = OpticalConfig::default_for(5);
        let psi = random_pure_state(5, &mut rng).unwrap();
        let b = crate::bases::random_flat_seed(5, &mut rng);
        let pat = render_pattern(&cfg, &psi, &b, 8).unwrap();
        let analytic = extract_probabilities(&pat).unwrap();
        let measured = EnvelopeCalibration::Empirical(envelope_factors(&cfg).unwrap());
        let empirical = extract_probabilities_with(&pat, &measured).unwrap();
        for (a, e) in analytic.iter().zip(&empirical) {
            assert!((a - e).abs() < 1e-15);
        }
        assert!(extract_probabilities_with(&pat, &EnvelopeCalibration::Empirical(vec![1.0; 3])).is_err());
    }

    #[test]
    fn dark_pattern_is_degenerate() {
        assert!(matches!(probabilities_from_intensities(&[0.0; 4], &[1.0; 4]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn canonical_readout_cases() {
        let p = canonical_readout(&QuditState::basis(4, 0).unwrap(), &[1.0; 4]).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0, 0.0]);
        let p = canonical_readout(&uniform6(), &[1.0; 6]).unwrap();
        assert!(p.iter().all(|v| (v - 1.0 / 6.0).abs() < 1e-15));
        let psi = QuditState::new(vec![C64::new(0.7f64.sqrt(), 0.0), C64::new(0.3f64.sqrt(), 0.0)]).unwrap();
        let p = canonical_readout(&psi, &[0.9, 1.1]).unwrap();
        assert!((p[0] - 0.7).abs() < 1e-12 && (p[1] - 0.3).abs() < 1e-12);
        assert!(canonical_readout(&psi, &[0.0, 1.0]).is_err());
        assert!(canonical_readout(&psi, &[1.0]).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let cfg = OpticalConfig::default_for(3);
        let psi = QuditState::uniform(2).unwrap();
        assert!(matches!(
            intensity_at(&cfg, &psi, psi.amplitudes(), 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}

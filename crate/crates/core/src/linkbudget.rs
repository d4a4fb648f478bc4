//! BS to RIS link budget.
//!
//! The BS drives the surface through an `l_max x n_antennas` channel. The
//! transmitter uses an MRT precoder matched to the co-phasing vector of the
//! surface, and the surface combines its elements with equal gain. Because
//! each of the two depends on the other, [`mrt_egc_combine`] alternates
//! between them until the combined gain stops changing.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_lower, Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Fixed-point iteration cap for the MRT/EGC alternation.
pub const COMBINER_MAX_ITERS: usize = 10_000;
/// Relative gain change under which the alternation is considered converged.
pub const COMBINER_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGeometry {
    #[serde(rename = "distance_m")]
    pub distance: f64,
    #[serde(rename = "carrier_frequency_hz")]
    pub carrier_frequency: f64,
    pub path_loss_exponent: f64,
    #[serde(rename = "absorption_loss_db")]
    pub absorption_loss: f64,
    pub n_antennas: usize,
    pub l_max: usize,
}

impl Default for ScenarioGeometry {
    fn default() -> Self {
        Self {
            distance: 75.0,
            carrier_frequency: 2.4e9,
            path_loss_exponent: 3.5,
            absorption_loss: 3.0,
            n_antennas: 4,
            l_max: 100,
        }
    }
}

impl ScenarioGeometry {
    pub fn validate(&self) -> Result<()> {
        check_lower("distance_m", self.distance, 0.0, true)?;
        check_lower("carrier_frequency_hz", self.carrier_frequency, 0.0, true)?;
        check_lower("path_loss_exponent", self.path_loss_exponent, 2.0, false)?;
        check_lower("absorption_loss_db", self.absorption_loss, 0.0, false)?;
        if self.n_antennas == 0 {
            return Err(Error::invalid("n_antennas", "must be at least 1"));
        }
        if self.l_max == 0 {
            return Err(Error::invalid("l_max", "must be at least 1"));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ChannelMode {
    /// Fully correlated line-of-sight channel: equal magnitudes, rank one.
    #[default]
    #[serde(rename = "rank1-los")]
    Rank1Los,
    /// Independent circularly-symmetric Gaussian entries.
    #[serde(rename = "iid-rayleigh")]
    IidRayleigh,
}

/// Row-major `rows x cols` complex channel, one row per reflective element.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
    mode: ChannelMode,
}

impl ChannelMatrix {
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: Vec<Complex64>,
        mode: ChannelMode,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("channel", "dimensions must be nonzero"));
        }
        if entries.len() != rows * cols {
            return Err(Error::invalid(
                "channel",
                format!("expected {} entries, got {}", rows * cols, entries.len()),
            ));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::invalid("channel", "entries must be finite"));
        }
        Ok(Self {
            rows,
            cols,
            entries,
            mode,
        })
    }

    /// Number of reflective elements (`l_max`).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of BS antennas (`n_antennas`).
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mode(&self) -> ChannelMode {
        self.mode
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.cols + col]
    }

    /// `H x` for an antenna-domain vector `x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.cols);
        self.entries
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(h, v)| h * v).sum())
            .collect()
    }

    /// `H^H y` for an element-domain vector `y`.
    pub fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (row, yi) in self.entries.chunks_exact(self.cols).zip(y) {
            for (acc, h) in out.iter_mut().zip(row) {
                *acc += h.conj() * yi;
            }
        }
        out
    }

    /// Multiplies every entry by `exp(j * angle)`.
    pub fn rotated(&self, angle: f64) -> Self {
        let rot = Complex64::from_polar(1.0, angle);
        Self {
            entries: self.entries.iter().map(|h| h * rot).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinerState {
    /// Unit-norm MRT precoder `a`.
    pub precoder: Vec<Complex64>,
    /// EGC co-phasing angles `Theta`, each in `[0, 2 pi)`.
    pub phases: Vec<f64>,
    /// `P_r / P_t`.
    pub gain: f64,
}

/// Per antenna-element link gain: free-space reference at 1 m, log-distance
/// decay with the configured exponent, and the reflection absorption loss.
pub fn path_loss_gain(geometry: &ScenarioGeometry) -> Result<f64> {
    geometry.validate()?;
    let reference = (geometry.wavelength() / (4.0 * PI)).powi(2);
    let decay = geometry.distance.powf(-geometry.path_loss_exponent);
    let absorption = 10f64.powf(-geometry.absorption_loss / 10.0);
    Ok(reference * decay * absorption)
}

pub fn build_channel(
    geometry: &ScenarioGeometry,
    mode: ChannelMode,
    seed: u64,
) -> Result<ChannelMatrix> {
    let g = path_loss_gain(geometry)?;
    let (rows, cols) = (geometry.l_max, geometry.n_antennas);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = match mode {
        ChannelMode::Rank1Los => {
            let amplitude = g.sqrt();
            let element: Vec<f64> = (0..rows).map(|_| rng.gen_range(0.0..TAU)).collect();
            let antenna: Vec<f64> = (0..cols).map(|_| rng.gen_range(0.0..TAU)).collect();
            element
                .iter()
                .flat_map(|&u| {
                    antenna
                        .iter()
                        .map(move |&v| Complex64::from_polar(amplitude, u + v))
                })
                .collect()
        }
        ChannelMode::IidRayleigh => {
            let scale = (g / 2.0).sqrt();
            (0..rows * cols)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(scale * re, scale * im)
                })
                .collect()
        }
    };
    ChannelMatrix::from_entries(rows, cols, entries, mode)
}

fn wrap_phase(angle: f64) -> f64 {
    let mut x = angle;
    if x < 0.0 {
        x += TAU;
    }
    if x >= TAU {
        x = 0.0;
    }
    x
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn phasors(phases: &[f64]) -> Vec<Complex64> {
    phases
        .iter()
        .map(|&t| Complex64::from_polar(1.0, t))
        .collect()
}

/// Alternates `Theta <- arg(H a)` and `a <- H^H exp(j Theta) / ||.||`,
/// starting from `Theta = 0`, until the gain `||H^H exp(j Theta)||^2`
/// settles.
pub fn mrt_egc_combine(h: &ChannelMatrix) -> Result<CombinerState> {
    let mut phases = vec![0.0; h.rows()];
    let mut previous: Option<f64> = None;
    for _ in 0..COMBINER_MAX_ITERS {
        let matched = h.apply_adjoint(&phasors(&phases));
        let gain = norm_sqr(&matched);
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(gain > 0.0) {
            return Err(Error::DegenerateChannel(
                "H^H exp(j Theta) vanished; no precoder direction".into(),
            ));
        }
        let norm = gain.sqrt();
        let precoder: Vec<Complex64> = matched.iter().map(|z| z / norm).collect();
        if let Some(prev) = previous {
            if (gain - prev).abs() <= COMBINER_REL_TOL * gain {
                return Ok(CombinerState {
                    precoder,
                    phases,
                    gain,
                });
            }
        }
        previous = Some(gain);
        phases = h
            .apply(&precoder)
            .iter()
            .map(|z| wrap_phase(z.arg()))
            .collect();
    }
    Err(Error::DegenerateChannel(format!(
        "MRT/EGC alternation did not converge in {COMBINER_MAX_ITERS} iterations"
    )))
}

pub fn received_power(state: &CombinerState, p_t: f64) -> Result<f64> {
    check_lower("p_t", p_t, 0.0, false)?;
    Ok(state.gain * p_t)
}

/// Fractions of `P_r` reaching the harvester and the detector when `eta *
/// l_max` of the coherently combined elements are diverted to harvesting.
pub fn as_partition_gains(eta: f64, l_max: usize) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid(
            "eta",
            format!("must lie in [0, 1], got {eta}"),
        ));
    }
    if l_max == 0 {
        return Err(Error::invalid("l_max", "must be at least 1"));
    }
    let count = eta * l_max as f64;
    if (count - count.round()).abs() > 1e-9 * l_max as f64 {
        return Err(Error::invalid(
            "eta",
            format!("eta * l_max = {count} is not an integer"),
        ));
    }
    Ok((eta * eta, (1.0 - eta) * (1.0 - eta)))
}

/// `|exp(j Theta)^H Q H a|^2` where `Q` keeps only the elements flagged in
/// `selected`: the power of the coherent sum over a subset of elements.
pub fn subset_combining_gain(
    h: &ChannelMatrix,
    state: &CombinerState,
    selected: &[bool],
) -> Result<f64> {
    if selected.len() != h.rows() {
        return Err(Error::invalid(
            "selected",
            format!("expected {} flags, got {}", h.rows(), selected.len()),
        ));
    }
    let received = h.apply(&state.precoder);
    let sum: Complex64 = received
        .iter()
        .zip(&state.phases)
        .zip(selected)
        .filter(|(_, &keep)| keep)
        .map(|((y, &t), _)| Complex64::from_polar(1.0, -t) * y)
        .sum();
    Ok(sum.norm_sqr())
}

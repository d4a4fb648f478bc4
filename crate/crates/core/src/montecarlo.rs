//! Receive-power fluctuation campaigns.
//!
//! A plan is computed once from the assumed received power (the nominal
//! value minus an optional safety bias) and then frozen. Each trial draws
//! the actual power of one control sequence and replays the frozen plan
//! against it. Trial `i` always uses random stream `i` of the campaign seed,
//! so results do not depend on how trials are spread across threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_lower, Error, Result};
use crate::solvers::{
    dynamic_split_snr, selection_snr, solve, splitter_snr, Method, ShareParam, SwiptInputs,
    SwiptSolution,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluctuationModel {
    /// Standard deviation of the actual power as a fraction of nominal.
    pub std_fraction: f64,
    /// The plan assumes `nominal - bias_stds * std`.
    #[serde(default)]
    pub bias_stds: f64,
    #[serde(default = "default_truncate")]
    pub truncate_at_zero: bool,
    pub n_trials: usize,
    pub seed: u64,
}

fn default_truncate() -> bool {
    true
}

impl Default for FluctuationModel {
    fn default() -> Self {
        Self {
            std_fraction: 0.25,
            bias_stds: 0.0,
            truncate_at_zero: true,
            n_trials: 100_000,
            seed: 1,
        }
    }
}

impl FluctuationModel {
    pub fn validate(&self) -> Result<()> {
        check_lower("std_fraction", self.std_fraction, 0.0, false)?;
        check_lower("bias_stds", self.bias_stds, 0.0, false)?;
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials", "must be at least 1"));
        }
        Ok(())
    }

    /// Received power the plan is built for, floored at zero.
    pub fn assumed_p_r(&self, nominal: f64) -> f64 {
        (nominal - self.bias_stds * self.std_fraction * nominal).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub p_r_actual: f64,
    /// Every sub-packet the plan needs decoded reached `snr_0`.
    pub detected: bool,
    pub harvested: f64,
    pub updated: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McSummary {
    pub method: Method,
    pub mean_updated_fraction: f64,
    pub std_updated_fraction: f64,
    pub detected_fraction: f64,
    pub n_trials: usize,
    pub plan: SwiptSolution,
}

/// Independent random stream for trial `index` of a campaign.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn draw_p_r<R: Rng + ?Sized>(nominal: f64, model: &FluctuationModel, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let x = nominal + model.std_fraction * nominal * z;
    if model.truncate_at_zero && x < 0.0 {
        0.0
    } else {
        x
    }
}

/// Solves `method` at the assumed power; the result is frozen for a campaign.
pub fn plan(method: Method, assumed_p_r: f64, inputs: &SwiptInputs) -> Result<SwiptSolution> {
    solve(method, &inputs.with_p_r(assumed_p_r))
}

/// Replays a frozen plan against the actual received power of one sequence.
///
/// TS and DS have already fixed which sub-packets are decoded, so they can
/// never update more than planned. PS and AS decode everything and spend
/// whatever energy turns up.
pub fn run_trial(frozen: &SwiptSolution, p_r_actual: f64, inputs: &SwiptInputs) -> TrialOutcome {
    let l_max = frozen.l_max;
    let l_plan = frozen.l;
    let energy = |p: f64| inputs.energy(p);
    let (snr, harvested, cap) = match frozen.share {
        ShareParam::TimeSharing { .. } => (
            p_r_actual / inputs.sigma2,
            (l_max - l_plan) as f64 * energy(p_r_actual),
            l_plan,
        ),
        ShareParam::PowerSplitting { rho } => (
            splitter_snr(p_r_actual, rho, inputs.sigma2, inputs.delta2),
            l_max as f64 * energy(p_r_actual * rho),
            l_max,
        ),
        ShareParam::DynamicSplitting { gamma_lo } => (
            dynamic_split_snr(p_r_actual, gamma_lo, inputs.sigma2, inputs.delta2),
            l_plan as f64 * energy(p_r_actual * gamma_lo)
                + (l_max - l_plan) as f64 * energy(p_r_actual),
            l_plan,
        ),
        ShareParam::AntennaSelection { eta, .. } => (
            selection_snr(p_r_actual, eta, inputs.sigma2),
            l_max as f64 * energy(p_r_actual * eta * eta),
            l_max,
        ),
    };
    let needs_detection = match frozen.method {
        Method::Ts | Method::Ds => l_plan > 0,
        Method::Ps | Method::As => true,
    };
    let detected = frozen.feasible && (!needs_detection || snr >= inputs.snr_0);
    let updated = if detected {
        let affordable = (harvested / inputs.e_0).floor();
        if affordable.is_nan() || affordable <= 0.0 {
            0
        } else if affordable >= cap as f64 {
            cap
        } else {
            affordable as usize
        }
    } else {
        0
    };
    TrialOutcome {
        p_r_actual,
        detected,
        harvested,
        updated,
    }
}

/// Frozen plan plus every trial outcome, in trial order.
pub fn simulate_trials(
    method: Method,
    inputs: &SwiptInputs,
    model: &FluctuationModel,
) -> Result<(SwiptSolution, Vec<TrialOutcome>)> {
    inputs.validate()?;
    model.validate()?;
    let frozen = plan(method, model.assumed_p_r(inputs.p_r), inputs)?;
    let outcomes = (0..model.n_trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(model.seed, i);
            let actual = draw_p_r(inputs.p_r, model, &mut rng);
            run_trial(&frozen, actual, inputs)
        })
        .collect();
    Ok((frozen, outcomes))
}

pub fn run_campaign(
    method: Method,
    inputs: &SwiptInputs,
    model: &FluctuationModel,
) -> Result<McSummary> {
    let (frozen, outcomes) = simulate_trials(method, inputs, model)?;
    Ok(summarize(method, frozen, &outcomes))
}

/// Aggregates in exact integer arithmetic, so the summary is independent of
/// reduction order.
fn summarize(method: Method, frozen: SwiptSolution, outcomes: &[TrialOutcome]) -> McSummary {
    let n = outcomes.len() as u128;
    let l_max = frozen.l_max as u128;
    let (sum, sum_sq, detected) = outcomes.iter().fold((0u128, 0u128, 0u128), |(s, q, d), o| {
        let u = o.updated as u128;
        (s + u, q + u * u, d + o.detected as u128)
    });
    let mean = sum as f64 / (n * l_max) as f64;
    // population variance of updated / l_max: (n * sum_sq - sum^2) / (n * l_max)^2
    let spread = n * sum_sq - sum * sum;
    let std = (spread as f64).sqrt() / (n * l_max) as f64;
    McSummary {
        method,
        mean_updated_fraction: mean,
        std_updated_fraction: std,
        detected_fraction: detected as f64 / n as f64,
        n_trials: outcomes.len(),
        plan: frozen,
    }
}

//! Closed-form RE update budgets for the four SWIPT receivers.
//!
//! Every solver maximizes the number `L` of reflective elements that can be
//! updated from one control sequence of `l_max` sub-packets, subject to an
//! energy constraint (harvest at least `L * e_0`) and a detection constraint
//! (every sub-packet addressed to an updated element reaches `snr_0`).
//! All returned budgets are capped at `l_max`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_lower, Error, Result};
use crate::harvest::{harvested_energy_unchecked, EhParams};

/// Relative slack used when re-checking solver output against the original
/// problem constraints.
pub const CERTIFY_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Time sharing: whole sub-packets go either to the harvester or the detector.
    #[serde(rename = "TS")]
    Ts,
    /// Static power splitting with a constant ratio.
    #[serde(rename = "PS")]
    Ps,
    /// Dynamic power splitting with a per-sub-packet ratio.
    #[serde(rename = "DS")]
    Ds,
    /// Antenna (element) selection between harvester and detector.
    #[serde(rename = "AS")]
    As,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ts, Method::Ps, Method::Ds, Method::As];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ts => "TS",
            Method::Ps => "PS",
            Method::Ds => "DS",
            Method::As => "AS",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TS" => Ok(Method::Ts),
            "PS" => Ok(Method::Ps),
            "DS" => Ok(Method::Ds),
            "AS" => Ok(Method::As),
            _ => Err(Error::invalid("method", format!("unknown method `{s}`"))),
        }
    }
}

/// One planning problem: nominal received power plus receiver requirements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwiptInputs {
    /// Received power `P_r` in watts.
    #[serde(rename = "p_r_w")]
    pub p_r: f64,
    /// Antenna noise variance in watts.
    #[serde(rename = "sigma2_w")]
    pub sigma2: f64,
    /// Power-splitter noise variance in watts.
    #[serde(rename = "delta2_w")]
    pub delta2: f64,
    /// Minimum detection SNR (linear).
    pub snr_0: f64,
    /// Energy to update one element, joules.
    #[serde(rename = "e0_j")]
    pub e_0: f64,
    pub l_max: usize,
    pub eh: EhParams,
}

impl SwiptInputs {
    pub fn validate(&self) -> Result<()> {
        check_lower("p_r", self.p_r, 0.0, false)?;
        check_lower("sigma2", self.sigma2, 0.0, true)?;
        check_lower("delta2", self.delta2, 0.0, false)?;
        check_lower("snr_0", self.snr_0, 0.0, true)?;
        check_lower("e_0", self.e_0, 0.0, true)?;
        if self.l_max == 0 {
            return Err(Error::invalid("l_max", "must be at least 1"));
        }
        Ok(())
    }

    /// SNR when the full received power goes to the detector.
    pub fn snr_max(&self) -> f64 {
        self.p_r / self.sigma2
    }

    /// SNR seen by the power splitter alone; infinite when `delta2 = 0`.
    pub fn snr_split(&self) -> f64 {
        if self.delta2 == 0.0 {
            f64::INFINITY
        } else {
            self.p_r / self.delta2
        }
    }

    pub fn with_p_r(self, p_r: f64) -> Self {
        Self { p_r, ..self }
    }

    pub fn energy(&self, p_harv: f64) -> f64 {
        harvested_energy_unchecked(p_harv.max(0.0), &self.eh)
    }

    pub fn e_max(&self) -> f64 {
        self.energy(self.p_r)
    }
}

/// Method-specific splitting or sharing decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShareParam {
    /// Fraction of sub-packets routed to the harvester, `(l_max - L) / l_max`.
    TimeSharing { alpha: f64 },
    /// Fraction of power routed to the harvester in every sub-packet.
    PowerSplitting { rho: f64 },
    /// Ratio `gamma_lo` on the first `L` sub-packets, 1 on the rest.
    /// `gamma_lo = 0` is the pure switch position and bypasses the splitter.
    DynamicSplitting { gamma_lo: f64 },
    /// `n_harvest = eta * l_max` elements feed the harvester.
    AntennaSelection { eta: f64, n_harvest: usize },
}

impl ShareParam {
    pub fn value(&self) -> f64 {
        match *self {
            ShareParam::TimeSharing { alpha } => alpha,
            ShareParam::PowerSplitting { rho } => rho,
            ShareParam::DynamicSplitting { gamma_lo } => gamma_lo,
            ShareParam::AntennaSelection { eta, .. } => eta,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ShareParam::TimeSharing { .. } => "alpha",
            ShareParam::PowerSplitting { .. } => "rho",
            ShareParam::DynamicSplitting { .. } => "gamma_lo",
            ShareParam::AntennaSelection { .. } => "eta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwiptSolution {
    pub method: Method,
    /// Number of updated elements.
    pub l: usize,
    pub l_max: usize,
    pub share: ShareParam,
    /// Energy harvested in each detected sub-packet (0 for TS).
    pub e_detect: f64,
    /// Energy harvested in a sub-packet devoted entirely to the harvester.
    pub e_max: f64,
    /// Total energy collected over the control sequence.
    pub total_energy: f64,
    pub feasible: bool,
}

impl SwiptSolution {
    pub fn fraction(&self) -> f64 {
        self.l as f64 / self.l_max as f64
    }

    /// Harvest indicator per sub-packet for TS: `false` (detect) on the
    /// first `L`, `true` (harvest) afterwards.
    pub fn ts_schedule(&self) -> Option<Vec<bool>> {
        match self.share {
            ShareParam::TimeSharing { .. } => Some((0..self.l_max).map(|i| i >= self.l).collect()),
            _ => None,
        }
    }

    /// Per-sub-packet splitting ratio for DS.
    pub fn gamma_profile(&self) -> Option<Vec<f64>> {
        match self.share {
            ShareParam::DynamicSplitting { gamma_lo } => Some(
                (0..self.l_max)
                    .map(|i| if i < self.l { gamma_lo } else { 1.0 })
                    .collect(),
            ),
            _ => None,
        }
    }
}

fn floor_capped(x: f64, l_max: usize) -> usize {
    if x.is_nan() || x <= 0.0 {
        0
    } else {
        let f = x.floor();
        if f >= l_max as f64 {
            l_max
        } else {
            f as usize
        }
    }
}

/// SNR after a power splitter that keeps `1 - rho` of the signal and adds
/// noise of variance `delta2`. Without splitter noise the SNR does not depend
/// on `rho`.
pub fn splitter_snr(p_r: f64, rho: f64, sigma2: f64, delta2: f64) -> f64 {
    if delta2 == 0.0 {
        p_r / sigma2
    } else {
        let keep = 1.0 - rho;
        p_r * keep / (sigma2 * keep + delta2)
    }
}

/// Detection SNR of the dynamic splitter at ratio `gamma`; `gamma = 0` is the
/// switch position, where the signal bypasses the splitter as in TS.
pub fn dynamic_split_snr(p_r: f64, gamma: f64, sigma2: f64, delta2: f64) -> f64 {
    if gamma == 0.0 {
        p_r / sigma2
    } else {
        splitter_snr(p_r, gamma, sigma2, delta2)
    }
}

/// Detection SNR when `eta * l_max` elements are diverted to the harvester:
/// the signal adds coherently over the detecting elements, the noise does not.
pub fn selection_snr(p_r: f64, eta: f64, sigma2: f64) -> f64 {
    p_r * (1.0 - eta) / sigma2
}

/// Largest splitting ratio that keeps the detector at `snr_0`, or `None`
/// when no ratio in `[0, 1]` does.
pub fn power_split_ratio(inputs: &SwiptInputs) -> Option<f64> {
    let snr_max = inputs.snr_max();
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if !(snr_max > inputs.snr_0) {
        return None;
    }
    let s_max = inputs.snr_0 / snr_max;
    let s_split = if inputs.delta2 == 0.0 {
        0.0
    } else {
        inputs.snr_0 / inputs.snr_split()
    };
    // (1 - (s_max + s_split)) / (1 - s_max), written without the cancellation
    // that ruins 1 - rho when the splitter noise is tiny
    let mut rho = 1.0 - s_split / (1.0 - s_max);
    if rho < 0.0 || rho.is_nan() {
        return None;
    }
    // Near rho = 1 the SNR is steep in rho; back off to the largest ratio
    // whose evaluated SNR still meets the threshold.
    for _ in 0..64 {
        if rho <= 0.0 || splitter_snr(inputs.p_r, rho, inputs.sigma2, inputs.delta2) >= inputs.snr_0
        {
            break;
        }
        rho = rho.next_down();
    }
    Some(rho.clamp(0.0, 1.0))
}

/// Number of elements that can feed the harvester while the remaining ones
/// still reach `snr_0`, or `None` when even all of them cannot.
pub fn selection_harvest_count(inputs: &SwiptInputs) -> Option<usize> {
    let snr_max = inputs.snr_max();
    if snr_max < inputs.snr_0 {
        return None;
    }
    let l_max = inputs.l_max as f64;
    let count = (l_max - inputs.snr_0 / snr_max * l_max).floor();
    Some(count.clamp(0.0, l_max) as usize)
}

pub fn solve(method: Method, inputs: &SwiptInputs) -> Result<SwiptSolution> {
    match method {
        Method::Ts => solve_ts(inputs),
        Method::Ps => solve_ps(inputs),
        Method::Ds => solve_ds(inputs),
        Method::As => solve_as(inputs),
    }
}

pub fn solve_ts(inputs: &SwiptInputs) -> Result<SwiptSolution> {
    inputs.validate()?;
    let l_max = inputs.l_max;
    let e_max = inputs.e_max();
    let feasible = inputs.snr_max() >= inputs.snr_0;
    let l = if feasible {
        floor_capped(l_max as f64 * e_max / (e_max + inputs.e_0), l_max)
    } else {
        0
    };
    Ok(SwiptSolution {
        method: Method::Ts,
        l,
        l_max,
        share: ShareParam::TimeSharing {
            alpha: (l_max - l) as f64 / l_max as f64,
        },
        e_detect: 0.0,
        e_max,
        total_energy: (l_max - l) as f64 * e_max,
        feasible,
    })
}

pub fn solve_ps(inputs: &SwiptInputs) -> Result<SwiptSolution> {
    inputs.validate()?;
    let l_max = inputs.l_max;
    let e_max = inputs.e_max();
    let (rho, l, feasible) = match power_split_ratio(inputs) {
        Some(rho) => {
            let e_r = inputs.energy(inputs.p_r * rho);
            (
                rho,
                floor_capped(e_r * l_max as f64 / inputs.e_0, l_max),
                true,
            )
        }
        None => (0.0, 0, false),
    };
    let e_detect = if feasible {
        inputs.energy(inputs.p_r * rho)
    } else {
        0.0
    };
    Ok(SwiptSolution {
        method: Method::Ps,
        l,
        l_max,
        share: ShareParam::PowerSplitting { rho },
        e_detect,
        e_max,
        total_energy: l_max as f64 * e_detect,
        feasible,
    })
}

/// DS detects the first `L` sub-packets at the PS ratio and harvests the rest
/// completely. When splitter noise alone breaks detection the detected
/// sub-packets fall back to the switch position (`gamma_lo = 0`), which is
/// exactly time sharing.
pub fn solve_ds(inputs: &SwiptInputs) -> Result<SwiptSolution> {
    inputs.validate()?;
    let l_max = inputs.l_max;
    let e_max = inputs.e_max();
    let feasible = inputs.snr_max() >= inputs.snr_0;
    let gamma_lo = power_split_ratio(inputs).unwrap_or(0.0);
    let e_detect = if feasible {
        inputs.energy(inputs.p_r * gamma_lo)
    } else {
        0.0
    };
    let l = if feasible {
        floor_capped(
            l_max as f64 * e_max / (e_max + inputs.e_0 - e_detect),
            l_max,
        )
    } else {
        0
    };
    Ok(SwiptSolution {
        method: Method::Ds,
        l,
        l_max,
        share: ShareParam::DynamicSplitting { gamma_lo },
        e_detect,
        e_max,
        total_energy: l as f64 * e_detect + (l_max - l) as f64 * e_max,
        feasible,
    })
}

pub fn solve_as(inputs: &SwiptInputs) -> Result<SwiptSolution> {
    inputs.validate()?;
    let l_max = inputs.l_max;
    let e_max = inputs.e_max();
    let (n_harvest, feasible) = match selection_harvest_count(inputs) {
        Some(n) => (n, true),
        None => (0, false),
    };
    let eta = n_harvest as f64 / l_max as f64;
    let e_detect = if feasible {
        inputs.energy(inputs.p_r * eta * eta)
    } else {
        0.0
    };
    let l = if feasible {
        floor_capped(e_detect * l_max as f64 / inputs.e_0, l_max)
    } else {
        0
    };
    Ok(SwiptSolution {
        method: Method::As,
        l,
        l_max,
        share: ShareParam::AntennaSelection { eta, n_harvest },
        e_detect,
        e_max,
        total_energy: l_max as f64 * e_detect,
        feasible,
    })
}

/// Outcome of re-evaluating the original problem constraints at a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub energy_ok: bool,
    pub snr_ok: bool,
    pub structure_ok: bool,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.energy_ok && self.snr_ok && self.structure_ok
    }
}

/// Recomputes harvested energy and detection SNR from the solution's share
/// parameter (not from its cached energies) and checks both constraints.
pub fn certify(inputs: &SwiptInputs, sol: &SwiptSolution) -> Certificate {
    let l = sol.l;
    let l_max = inputs.l_max;
    let p_r = inputs.p_r;
    let at_least = |value: f64, bound: f64| value >= bound * (1.0 - CERTIFY_REL_TOL);
    let mut structure_ok = l <= l_max && sol.l_max == l_max && (sol.feasible || l == 0);
    let (energy, snr) = match sol.share {
        ShareParam::TimeSharing { alpha } => {
            structure_ok &= alpha == (l_max - l) as f64 / l_max as f64;
            ((l_max - l) as f64 * inputs.e_max(), inputs.snr_max())
        }
        ShareParam::PowerSplitting { rho } => {
            structure_ok &= (0.0..=1.0).contains(&rho);
            (
                l_max as f64 * inputs.energy(p_r * rho),
                splitter_snr(p_r, rho, inputs.sigma2, inputs.delta2),
            )
        }
        ShareParam::DynamicSplitting { gamma_lo } => {
            structure_ok &= (0.0..=1.0).contains(&gamma_lo);
            (
                l as f64 * inputs.energy(p_r * gamma_lo) + (l_max - l) as f64 * inputs.e_max(),
                dynamic_split_snr(p_r, gamma_lo, inputs.sigma2, inputs.delta2),
            )
        }
        ShareParam::AntennaSelection { eta, n_harvest } => {
            structure_ok &= n_harvest <= l_max && eta == n_harvest as f64 / l_max as f64;
            (
                l_max as f64 * inputs.energy(p_r * eta * eta),
                selection_snr(p_r, eta, inputs.sigma2),
            )
        }
    };
    if l == 0 {
        return Certificate {
            energy_ok: true,
            snr_ok: true,
            structure_ok,
        };
    }
    Certificate {
        energy_ok: at_least(energy, l as f64 * inputs.e_0),
        snr_ok: at_least(snr, inputs.snr_0),
        structure_ok,
    }
}

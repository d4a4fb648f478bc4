//! Brute-force reference maximizers.
//!
//! Each oracle re-states its problem from scratch (constraints written out
//! directly, no shared closed-form helpers) and searches the decision
//! variable by enumeration or on a uniform grid. They are slow on purpose and
//! exist to certify the closed forms in [`crate::solvers`].

use crate::error::{Error, Result};
use crate::harvest::harvested_energy_unchecked;
use crate::solvers::SwiptInputs;

pub const MIN_GRID_STEPS: usize = 10_000;

fn energy(inputs: &SwiptInputs, p_harv: f64) -> f64 {
    harvested_energy_unchecked(p_harv, &inputs.eh)
}

fn updated(energy_per_subpacket: f64, inputs: &SwiptInputs) -> usize {
    let x = (energy_per_subpacket * inputs.l_max as f64 / inputs.e_0).floor();
    if x.is_nan() || x <= 0.0 {
        0
    } else {
        (x as usize).min(inputs.l_max)
    }
}

/// Detection SNR behind a noisy power splitter at ratio `rho`.
fn split_snr(inputs: &SwiptInputs, rho: f64) -> f64 {
    let p_info = inputs.p_r * (1.0 - rho);
    let noise = inputs.sigma2 * (1.0 - rho) + inputs.delta2;
    if noise == 0.0 {
        // delta2 = 0 and rho = 1: the ratio is constant in rho, take its limit
        inputs.p_r / inputs.sigma2
    } else {
        p_info / noise
    }
}

fn check_grid(grid_steps: usize) -> Result<()> {
    if grid_steps < MIN_GRID_STEPS {
        return Err(Error::invalid(
            "grid_steps",
            format!("must be at least {MIN_GRID_STEPS}, got {grid_steps}"),
        ));
    }
    Ok(())
}

pub fn oracle_ts(inputs: &SwiptInputs) -> usize {
    let e_max = energy(inputs, inputs.p_r);
    let detectable = inputs.p_r / inputs.sigma2 >= inputs.snr_0;
    (1..=inputs.l_max)
        .rev()
        .find(|&l| detectable && e_max * (inputs.l_max - l) as f64 >= l as f64 * inputs.e_0)
        .unwrap_or(0)
}

/// Grid search over `rho in {0, 1/grid_steps, ..., 1}`.
pub fn oracle_ps(inputs: &SwiptInputs, grid_steps: usize) -> Result<usize> {
    check_grid(grid_steps)?;
    Ok((0..=grid_steps)
        .map(|i| i as f64 / grid_steps as f64)
        .filter(|&rho| split_snr(inputs, rho) >= inputs.snr_0)
        .map(|rho| updated(energy(inputs, inputs.p_r * rho), inputs))
        .max()
        .unwrap_or(0))
}

/// Searches the prefix-structured profile: ratio `gamma_lo` on the first `L`
/// sub-packets, full harvesting afterwards. `gamma_lo = 0` routes the whole
/// sub-packet to the detector without passing the splitter.
pub fn oracle_ds(inputs: &SwiptInputs, grid_steps: usize) -> Result<usize> {
    check_grid(grid_steps)?;
    let detect_snr = |gamma: f64| {
        if gamma == 0.0 {
            inputs.p_r / inputs.sigma2
        } else {
            split_snr(inputs, gamma)
        }
    };
    let gamma_lo = (0..=grid_steps)
        .rev()
        .map(|i| i as f64 / grid_steps as f64)
        .find(|&g| detect_snr(g) >= inputs.snr_0);
    let e_max = energy(inputs, inputs.p_r);
    let Some(gamma_lo) = gamma_lo else {
        return Ok(0);
    };
    let e_lo = energy(inputs, inputs.p_r * gamma_lo);
    Ok((1..=inputs.l_max)
        .rev()
        .find(|&l| {
            let total = l as f64 * e_lo + (inputs.l_max - l) as f64 * e_max;
            total >= l as f64 * inputs.e_0
        })
        .unwrap_or(0))
}

/// Exhaustive over every admissible `eta = k / l_max`.
pub fn oracle_as(inputs: &SwiptInputs) -> usize {
    let l_max = inputs.l_max;
    (0..=l_max)
        .filter(|&k| {
            let detecting = (l_max - k) as f64 / l_max as f64;
            inputs.p_r / inputs.sigma2 * detecting >= inputs.snr_0
        })
        .map(|k| {
            let eta = k as f64 / l_max as f64;
            updated(energy(inputs, inputs.p_r * eta * eta), inputs)
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harvest::EhParams;

    fn base() -> SwiptInputs {
        SwiptInputs {
            p_r: 5.421815862538518e-8,
            sigma2: 1e-10,
            delta2: 1e-10,
            snr_0: 10f64.powf(0.7),
            e_0: 1e-9,
            l_max: 100,
            eh: EhParams::default(),
        }
    }

    #[test]
    fn ts_balanced_energy() {
        let mut i = base();
        i.e_0 = i.e_max();
        assert_eq!(oracle_ts(&i), 50);
    }

    #[test]
    fn infeasible_detection_gives_zero() {
        let mut i = base();
        i.snr_0 = 2.0 * i.snr_max();
        assert_eq!(oracle_ts(&i), 0);
        assert_eq!(oracle_ps(&i, 10_000).unwrap(), 0);
        assert_eq!(oracle_ds(&i, 10_000).unwrap(), 0);
        assert_eq!(oracle_as(&i), 0);
    }

    #[test]
    fn ps_grid_optimum_approaches_two_thirds() {
        let mut i = base();
        i.snr_0 = 0.25 * i.snr_max();
        for steps in [10_000usize, 100_000, 1_000_000] {
            let best = (0..=steps)
                .rev()
                .map(|k| k as f64 / steps as f64)
                .find(|&rho| split_snr(&i, rho) >= i.snr_0)
                .unwrap();
            assert!(best <= 2.0 / 3.0 + 1e-12);
            assert!(2.0 / 3.0 - best <= 1.0 / steps as f64);
        }
    }

    #[test]
    fn ds_full_budget_when_energy_is_plentiful() {
        let mut i = base();
        i.e_0 = 1e-12;
        assert_eq!(oracle_ds(&i, 10_000).unwrap(), 100);
    }

    #[test]
    fn ds_reduces_to_ts_without_splitter_headroom() {
        let mut i = base();
        i.snr_0 = 0.6 * i.snr_max();
        assert_eq!(oracle_ds(&i, 10_000).unwrap(), oracle_ts(&i));
    }

    #[test]
    fn grid_must_be_fine_enough() {
        assert!(oracle_ps(&base(), 100).is_err());
        assert!(oracle_ds(&base(), 9_999).is_err());
    }
}

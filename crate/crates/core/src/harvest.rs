//! Logistic (sigmoid) rectifier model.
//!
//! Harvested energy over one sub-packet of duration `t_sub` is
//!
//! ```text
//! E(p) = t_sub * e_hat / (1 - phi) * (1 / (1 + exp(-q p + q r)) - phi),   phi = 1 / (1 + exp(q r))
//! ```
//!
//! which is zero at `p = 0` and saturates at `t_sub * e_hat`.

use serde::{Deserialize, Serialize};

use crate::error::{check_lower, Result};

/// Rectifier constants. Construct through [`EhParams::new`] so `phi` stays
/// consistent with `q` and `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EhParamsSpec", into = "EhParamsSpec")]
pub struct EhParams {
    e_hat: f64,
    q: f64,
    r: f64,
    phi: f64,
    t_sub: f64,
}

/// Serialized form of [`EhParams`]; `phi` is derived, never stored.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EhParamsSpec {
    e_hat_j: f64,
    q_per_w: f64,
    r_w: f64,
    #[serde(default = "default_t_sub")]
    t_sub_s: f64,
}

fn default_t_sub() -> f64 {
    1.0
}

impl TryFrom<EhParamsSpec> for EhParams {
    type Error = crate::error::Error;

    fn try_from(s: EhParamsSpec) -> Result<Self> {
        EhParams::new(s.e_hat_j, s.q_per_w, s.r_w, s.t_sub_s)
    }
}

impl From<EhParams> for EhParamsSpec {
    fn from(p: EhParams) -> Self {
        Self {
            e_hat_j: p.e_hat,
            q_per_w: p.q,
            r_w: p.r,
            t_sub_s: p.t_sub,
        }
    }
}

impl Default for EhParams {
    /// Ê = 2.8 mJ, q = 1500 1/W, r = 2.2 mW, unit sub-packet duration.
    fn default() -> Self {
        Self::new(2.8e-3, 1500.0, 0.0022, 1.0).expect("default rectifier parameters are valid")
    }
}

impl EhParams {
    pub fn new(e_hat: f64, q: f64, r: f64, t_sub: f64) -> Result<Self> {
        check_lower("e_hat_j", e_hat, 0.0, true)?;
        check_lower("q_per_w", q, 0.0, true)?;
        check_lower("r_w", r, 0.0, false)?;
        check_lower("t_sub_s", t_sub, 0.0, true)?;
        Ok(Self {
            e_hat,
            q,
            r,
            phi: logistic(-q * r),
            t_sub,
        })
    }

    pub fn e_hat(&self) -> f64 {
        self.e_hat
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `1 / (1 + exp(q r))`, in `(0, 0.5]`.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn t_sub(&self) -> f64 {
        self.t_sub
    }

    /// Energy ceiling `t_sub * e_hat`.
    pub fn saturation(&self) -> f64 {
        self.t_sub * self.e_hat
    }

    pub fn with_e_hat(self, e_hat: f64) -> Result<Self> {
        Self::new(e_hat, self.q, self.r, self.t_sub)
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Energy harvested in one sub-packet from input power `p_harv` (watts).
pub fn harvested_energy(p_harv: f64, params: &EhParams) -> Result<f64> {
    check_lower("p_harv", p_harv, 0.0, false)?;
    Ok(harvested_energy_unchecked(p_harv, params))
}

/// [`harvested_energy`] without the sign check; `p_harv` must be `>= 0`.
///
/// Uses `sigma(a + d) - sigma(a) = sigma(a) (1 - e^-d) / (e^-d + e^a)` with
/// `a = -q r`, `d = q p`, which is exact at `p = 0`, keeps full relative
/// precision for tiny `p`, and never overflows.
pub(crate) fn harvested_energy_unchecked(p_harv: f64, params: &EhParams) -> f64 {
    let d = params.q * p_harv;
    let rise = -(-d).exp_m1();
    let denom = (-d).exp() + (-params.q * params.r).exp();
    let bracket = params.phi * rise / denom;
    params.t_sub * params.e_hat / (1.0 - params.phi) * bracket
}

/// Harvested energy when the whole received power feeds the rectifier.
pub fn e_max(p_r: f64, params: &EhParams) -> Result<f64> {
    harvested_energy(p_r, params)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values computed with 40-digit arithmetic from the textbook
    // form of the model.
    const PHI_DEFAULT: f64 = 0.035571189272636173;
    const MIDPOINT_J: f64 = 1.3483635656382640e-3;
    const SMALL_SIGNAL_J: f64 = 4.4820635195701595e-9;

    #[test]
    fn phi_matches_definition() {
        let p = EhParams::default();
        assert_relative_eq!(p.phi(), PHI_DEFAULT, max_relative = 1e-12);
        assert_relative_eq!(
            p.phi(),
            1.0 / (1.0 + (p.q() * p.r()).exp()),
            max_relative = 1e-12
        );
        let zero_offset = EhParams::new(1.0, 10.0, 0.0, 1.0).unwrap();
        assert_eq!(zero_offset.phi(), 0.5);
    }

    #[test]
    fn zero_input_harvests_nothing() {
        assert_eq!(harvested_energy(0.0, &EhParams::default()).unwrap(), 0.0);
        assert_eq!(e_max(0.0, &EhParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn sigmoid_midpoint() {
        let p = EhParams::default();
        assert_relative_eq!(
            harvested_energy(0.0022, &p).unwrap(),
            MIDPOINT_J,
            max_relative = 1e-12
        );
    }

    #[test]
    fn deep_saturation() {
        let p = EhParams::default();
        let e = harvested_energy(1.0, &p).unwrap();
        assert!((e - 2.8e-3).abs() <= 1e-6 * 2.8e-3);
        // far beyond exp overflow in the naive form
        let e = harvested_energy(1e6, &p).unwrap();
        assert_relative_eq!(e, p.saturation(), max_relative = 1e-15);
    }

    #[test]
    fn small_signal_linearization() {
        let p = EhParams::default();
        let exact = e_max(3e-8, &p).unwrap();
        assert_relative_eq!(exact, SMALL_SIGNAL_J, max_relative = 1e-10);
        let linear = p.e_hat() * p.q() * p.phi() * 3e-8;
        assert!(((exact - linear) / exact).abs() < 1e-4);
    }

    #[test]
    fn duration_scales_energy() {
        let one = EhParams::default();
        let half = EhParams::new(2.8e-3, 1500.0, 0.0022, 0.5).unwrap();
        let a = harvested_energy(1e-3, &one).unwrap();
        let b = harvested_energy(1e-3, &half).unwrap();
        assert_relative_eq!(b, 0.5 * a, max_relative = 1e-15);
        assert_relative_eq!(half.saturation(), 1.4e-3, max_relative = 1e-15);
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(harvested_energy(-1e-9, &EhParams::default()).is_err());
        assert!(harvested_energy(f64::NAN, &EhParams::default()).is_err());
        assert!(EhParams::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(EhParams::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(EhParams::new(1.0, 1.0, -0.1, 1.0).is_err());
        assert!(EhParams::new(1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn serde_uses_unit_suffixed_keys() {
        let json = r#"{"e_hat_j": 0.0028, "q_per_w": 1500, "r_w": 0.0022}"#;
        let p: EhParams = serde_json::from_str(json).unwrap();
        assert_eq!(p, EhParams::default());
        let bad = r#"{"e_hat_j": -1, "q_per_w": 1500, "r_w": 0.0022}"#;
        assert!(serde_json::from_str::<EhParams>(bad).is_err());
    }
}

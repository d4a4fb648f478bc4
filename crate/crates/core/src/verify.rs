//! Randomized solver-versus-oracle verification.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::harvest::{harvested_energy_unchecked, EhParams};
use crate::montecarlo::trial_rng;
use crate::oracle::{oracle_as, oracle_ds, oracle_ps, oracle_ts};
use crate::solvers::{certify, solve, solve_ps, Method, SwiptInputs, SwiptSolution};

pub const DEFAULT_GRID_STEPS: usize = 100_000;

/// Ladder factor for the monotonicity checks.
const LADDER: f64 = 1.3;

pub type Solver<'a> = dyn Fn(Method, &SwiptInputs) -> Result<SwiptSolution> + Sync + 'a;

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub check: &'static str,
    pub detail: String,
    pub inputs: SwiptInputs,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub n_inputs: usize,
    pub n_checks: usize,
    pub failures: Vec<Failure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.gen_range(lo_exp..hi_exp))
}

/// Draws a planning problem spanning infeasible, marginal, energy-limited and
/// saturated regimes.
pub fn random_inputs<R: Rng + ?Sized>(rng: &mut R) -> SwiptInputs {
    let l_max = rng.gen_range(1..=200);
    let sigma2 = log_uniform(rng, -13.0, -8.0);
    let delta2 = if rng.gen_bool(0.1) {
        0.0
    } else {
        log_uniform(rng, -13.0, -8.0)
    };
    let snr_0 = log_uniform(rng, -0.5, 2.0);
    let p_r = if rng.gen_bool(0.01) {
        0.0
    } else {
        snr_0 * sigma2 * log_uniform(rng, -0.5, 4.5)
    };
    let eh = EhParams::new(
        log_uniform(rng, -4.0, -2.0),
        log_uniform(rng, 2.0, 3.7),
        rng.gen_range(0.0..0.01),
        log_uniform(rng, -3.0, 0.0),
    )
    .expect("sampled rectifier parameters are in range");
    let e_max = harvested_energy_unchecked(p_r, &eh);
    let e_0 = e_max * log_uniform(rng, -3.0, 1.5);
    let e_0 = if e_0 > 0.0 {
        e_0
    } else {
        log_uniform(rng, -12.0, -6.0)
    };
    SwiptInputs {
        p_r,
        sigma2,
        delta2,
        snr_0,
        e_0,
        l_max,
        eh,
    }
}

struct Checker<'a> {
    inputs: SwiptInputs,
    failures: Vec<Failure>,
    checks: usize,
    solver: &'a Solver<'a>,
}

impl Checker<'_> {
    fn expect(&mut self, check: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(Failure {
                check,
                detail: detail(),
                inputs: self.inputs,
            });
        }
    }

    fn solve(&mut self, method: Method, inputs: &SwiptInputs) -> Option<SwiptSolution> {
        match (self.solver)(method, inputs) {
            Ok(sol) => Some(sol),
            Err(e) => {
                self.expect("solver-error", false, || format!("{method}: {e}"));
                None
            }
        }
    }
}

/// Runs every check on one input. Returns the failures and the number of
/// checks performed.
pub fn check_inputs(
    inputs: &SwiptInputs,
    grid_steps: usize,
    solver: &Solver<'_>,
) -> Result<(Vec<Failure>, usize)> {
    inputs.validate()?;
    let mut c = Checker {
        inputs: *inputs,
        failures: Vec::new(),
        checks: 0,
        solver,
    };
    let mut sols = Vec::with_capacity(4);
    for m in Method::ALL {
        match c.solve(m, inputs) {
            Some(s) => sols.push(s),
            None => return Ok((c.failures, c.checks)),
        }
    }
    let [ts, ps, ds, as_] = [sols[0], sols[1], sols[2], sols[3]];

    let o = oracle_ts(inputs);
    c.expect("oracle-ts", ts.l == o, || {
        format!("solve_ts L={} oracle L={o}", ts.l)
    });
    let o = oracle_as(inputs);
    c.expect("oracle-as", as_.l == o, || {
        format!("solve_as L={} oracle L={o}", as_.l)
    });
    let o = oracle_ps(inputs, grid_steps)?;
    c.expect("oracle-ps", ps.l.abs_diff(o) <= 1, || {
        format!("solve_ps L={} oracle L={o} (grid {grid_steps})", ps.l)
    });
    let o = oracle_ds(inputs, grid_steps)?;
    c.expect("oracle-ds", ds.l.abs_diff(o) <= 1, || {
        format!("solve_ds L={} oracle L={o} (grid {grid_steps})", ds.l)
    });

    c.expect("dominance", ds.l >= ts.l.max(ps.l), || {
        format!("DS L={} TS L={} PS L={}", ds.l, ts.l, ps.l)
    });
    c.expect(
        "shared-split",
        ps.share.value().to_bits() == ds.share.value().to_bits(),
        || format!("rho={} gamma_lo={}", ps.share.value(), ds.share.value()),
    );
    for sol in [ts, ps, ds, as_] {
        let cert = certify(inputs, &sol);
        c.expect("certify", cert.passed(), || {
            format!("{}: {cert:?} for {sol:?}", sol.method)
        });
    }

    let ladders: [(&'static str, SwiptInputs, bool); 3] = [
        (
            "monotone-p_r",
            SwiptInputs {
                p_r: inputs.p_r * LADDER,
                ..*inputs
            },
            true,
        ),
        (
            "monotone-e_0",
            SwiptInputs {
                e_0: inputs.e_0 * LADDER,
                ..*inputs
            },
            false,
        ),
        (
            "monotone-snr_0",
            SwiptInputs {
                snr_0: inputs.snr_0 * LADDER,
                ..*inputs
            },
            false,
        ),
    ];
    for (check, stepped, increasing) in ladders {
        for (m, before) in Method::ALL.into_iter().zip([ts, ps, ds, as_]) {
            let Some(after) = c.solve(m, &stepped) else {
                continue;
            };
            let ok = if increasing {
                after.l >= before.l
            } else {
                after.l <= before.l
            };
            c.expect(check, ok, || {
                format!("{m}: L {} -> {} after x{LADDER}", before.l, after.l)
            });
        }
    }
    Ok((c.failures, c.checks))
}

/// Checks `n_random` inputs drawn from `seed` against `solver`.
pub fn verify_with(
    n_random: usize,
    seed: u64,
    grid_steps: usize,
    solver: &Solver<'_>,
) -> Result<VerifyReport> {
    let results: Vec<(Vec<Failure>, usize)> = (0..n_random as u64)
        .into_par_iter()
        .map(|i| check_inputs(&random_inputs(&mut trial_rng(seed, i)), grid_steps, solver))
        .collect::<Result<_>>()?;
    let mut report = VerifyReport {
        n_inputs: n_random,
        n_checks: 0,
        failures: Vec::new(),
    };
    for (failures, checks) in results {
        report.n_checks += checks;
        report.failures.extend(failures);
    }
    Ok(report)
}

pub fn verify(n_random: usize, seed: u64, grid_steps: usize) -> Result<VerifyReport> {
    verify_with(n_random, seed, grid_steps, &solve)
}

/// Deliberately wrong solver used to exercise the harness: PS ignores the
/// splitter noise when choosing its ratio.
pub fn perturbed_solve(method: Method, inputs: &SwiptInputs) -> Result<SwiptSolution> {
    match method {
        Method::Ps => solve_ps(&SwiptInputs {
            delta2: 0.0,
            ..*inputs
        }),
        _ => solve(method, inputs),
    }
}

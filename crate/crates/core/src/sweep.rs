//! Parameter sweeps and the figure presets.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::montecarlo::run_campaign;
use crate::solvers::{solve, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Transmit power in dBm.
    PtDbm,
    /// Per-element update energy in joules.
    E0,
    /// Planning bias in standard deviations.
    BiasStds,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::PtDbm => "p_t_dbm",
            SweepAxis::E0 => "e0_j",
            SweepAxis::BiasStds => "bias_stds",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p_t_dbm" | "p_t" => Ok(SweepAxis::PtDbm),
            "e0_j" | "e0" => Ok(SweepAxis::E0),
            "bias_stds" | "bias" => Ok(SweepAxis::BiasStds),
            _ => Err(Error::invalid(
                "axis",
                format!("unknown sweep axis `{s}` (expected p_t_dbm, e0_j or bias_stds)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub from: f64,
    pub to: f64,
    /// Number of points, endpoints included.
    pub steps: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.from.is_finite() || !self.to.is_finite() {
            return Err(Error::invalid("range", "sweep bounds must be finite"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps", "must be at least 1"));
        }
        if self.steps > 1 && self.to < self.from {
            return Err(Error::invalid("range", "`to` must not be below `from`"));
        }
        let bad_low = match self.axis {
            SweepAxis::E0 => self.from <= 0.0,
            SweepAxis::BiasStds => self.from < 0.0,
            SweepAxis::PtDbm => false,
        };
        if bad_low {
            return Err(Error::invalid(
                "range",
                format!(
                    "{} sweep starts at an invalid value {}",
                    self.axis, self.from
                ),
            ));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let span = self.to - self.from;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.to
                } else {
                    self.from + span * i as f64 / last
                }
            })
            .collect()
    }
}

/// One sweep over an axis, with optional overrides of the scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRun {
    pub spec: SweepSpec,
    pub p_t_dbm: Option<f64>,
    pub bias_stds: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Transmit power 0 to 30 dBm, unbiased plans.
    Fig1,
    /// Transmit power 0 to 30 dBm with 1 and 2 std planning bias.
    Fig2,
    /// Update energy 0.5 to 20 nJ at 20 dBm with 2 std bias.
    Fig3,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            _ => Err(Error::invalid("preset", format!("unknown preset `{s}`"))),
        }
    }
}

const POWER_SWEEP: SweepSpec = SweepSpec {
    axis: SweepAxis::PtDbm,
    from: 0.0,
    to: 30.0,
    steps: 61,
};

impl Preset {
    pub fn runs(self) -> Vec<SweepRun> {
        match self {
            Preset::Fig1 => vec![SweepRun {
                spec: POWER_SWEEP,
                p_t_dbm: None,
                bias_stds: Some(0.0),
            }],
            Preset::Fig2 => [1.0, 2.0]
                .into_iter()
                .map(|bias| SweepRun {
                    spec: POWER_SWEEP,
                    p_t_dbm: None,
                    bias_stds: Some(bias),
                })
                .collect(),
            Preset::Fig3 => vec![SweepRun {
                spec: SweepSpec {
                    axis: SweepAxis::E0,
                    from: 0.5e-9,
                    to: 20e-9,
                    steps: 40,
                },
                p_t_dbm: Some(20.0),
                bias_stds: Some(2.0),
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub x_name: &'static str,
    pub x_value: f64,
    pub method: Method,
    pub bias_stds: f64,
    pub mean_updated_fraction: f64,
    pub std_updated_fraction: f64,
    /// Fraction planned and achieved with perfectly known received power.
    pub deterministic_fraction: f64,
}

/// Evaluates every (point, method) pair of `run`, points outermost. Trials
/// reuse the same random streams at every point, so curves are compared
/// under common random numbers.
pub fn run_sweep(scenario: &Scenario, run: &SweepRun) -> Result<Vec<SweepRecord>> {
    run.spec.validate()?;
    let base = &scenario.config;
    let mut records = Vec::with_capacity(run.spec.steps * base.methods.len());
    for x in run.spec.values() {
        let mut p_t_dbm = run.p_t_dbm.unwrap_or(base.p_t_dbm);
        let mut model = base.fluctuation;
        if let Some(b) = run.bias_stds {
            model.bias_stds = b;
        }
        let mut inputs = scenario.inputs_at(p_t_dbm);
        match run.spec.axis {
            SweepAxis::PtDbm => {
                p_t_dbm = x;
                inputs = scenario.inputs_at(p_t_dbm);
            }
            SweepAxis::E0 => inputs.e_0 = x,
            SweepAxis::BiasStds => model.bias_stds = x,
        }
        for &method in &base.methods {
            let summary = run_campaign(method, &inputs, &model)?;
            let deterministic = solve(method, &inputs)?;
            records.push(SweepRecord {
                x_name: run.spec.axis.name(),
                x_value: x,
                method,
                bias_stds: model.bias_stds,
                mean_updated_fraction: summary.mean_updated_fraction,
                std_updated_fraction: summary.std_updated_fraction,
                deterministic_fraction: deterministic.fraction(),
            });
        }
    }
    Ok(records)
}

pub fn run_preset(scenario: &Scenario, preset: Preset) -> Result<Vec<SweepRecord>> {
    let mut out = Vec::new();
    for run in preset.runs() {
        out.extend(run_sweep(scenario, &run)?);
    }
    Ok(out)
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, records)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;

    fn small_scenario() -> Scenario {
        let mut c = ScenarioConfig::default();
        c.fluctuation.n_trials = 500;
        Scenario::new(c).unwrap()
    }

    #[test]
    fn grid_values() {
        let v = POWER_SWEEP.values();
        assert_eq!(v.len(), 61);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[1], 0.5);
        assert_eq!(v[35], 17.5);
        assert_eq!(v[60], 30.0);
        let one = SweepSpec {
            axis: SweepAxis::E0,
            from: 1e-9,
            to: 1e-9,
            steps: 1,
        };
        assert_eq!(one.values(), vec![1e-9]);
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("p_t_dbm".parse::<SweepAxis>().unwrap(), SweepAxis::PtDbm);
        assert_eq!("e0".parse::<SweepAxis>().unwrap(), SweepAxis::E0);
        assert!("distance".parse::<SweepAxis>().is_err());
        assert!("fig4".parse::<Preset>().is_err());
    }

    #[test]
    fn invalid_ranges_rejected() {
        let s = small_scenario();
        for spec in [
            SweepSpec {
                axis: SweepAxis::PtDbm,
                from: 10.0,
                to: 0.0,
                steps: 3,
            },
            SweepSpec {
                axis: SweepAxis::E0,
                from: 0.0,
                to: 1e-9,
                steps: 3,
            },
            SweepSpec {
                axis: SweepAxis::BiasStds,
                from: 0.0,
                to: 1.0,
                steps: 0,
            },
            SweepSpec {
                axis: SweepAxis::PtDbm,
                from: f64::NAN,
                to: 1.0,
                steps: 2,
            },
        ] {
            let run = SweepRun {
                spec,
                p_t_dbm: None,
                bias_stds: None,
            };
            assert!(run_sweep(&s, &run).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn csv_header_is_stable() {
        let s = small_scenario();
        let run = SweepRun {
            spec: SweepSpec {
                axis: SweepAxis::BiasStds,
                from: 0.0,
                to: 2.0,
                steps: 3,
            },
            p_t_dbm: None,
            bias_stds: None,
        };
        let records = run_sweep(&s, &run).unwrap();
        assert_eq!(records.len(), 12);
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "x_name,x_value,method,bias_stds,mean_updated_fraction,std_updated_fraction,deterministic_fraction"
        );
        assert_eq!(lines.count(), 12);
        // every numeric field parses back to the value that was written
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        for (row, rec) in rdr.records().zip(&records) {
            let row = row.unwrap();
            assert_eq!(row[1].parse::<f64>().unwrap(), rec.x_value);
            assert_eq!(row[4].parse::<f64>().unwrap(), rec.mean_updated_fraction);
            assert_eq!(row[5].parse::<f64>().unwrap(), rec.std_updated_fraction);
        }
    }
}

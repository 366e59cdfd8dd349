//! Step and regularisation schedules from configuration keys.

use driftls::schedule::{RegSchedule, StepSchedule};

use crate::config::Config;
use crate::error::{CliError, Result};

pub const STEP_KEYS: &[&str] = &["step", "c", "c1", "gamma0", "step_alpha"];
pub const REG_KEYS: &[&str] = &["reg", "lambda0", "alpha"];

/// `step = rate_optimal | generic | power | constant | over_n` with parameters
/// `c`, `c1`, `gamma0`, `step_alpha`; `default` fills in anything unset.
pub fn step_schedule(cfg: &Config, default: StepSchedule) -> Result<StepSchedule> {
    let default_kind = match default {
        StepSchedule::RateOptimal { .. } => "rate_optimal",
        StepSchedule::Generic { .. } => "generic",
        StepSchedule::Power { .. } => "power",
        StepSchedule::Constant { .. } => "constant",
        StepSchedule::OverN { .. } => "over_n",
    };
    let (dc, dc1, dg, da) = match default {
        StepSchedule::RateOptimal { c } | StepSchedule::OverN { c } => (c, 100.0, 0.01, 0.5),
        StepSchedule::Generic { c, c1 } => (c, c1, 0.01, 0.5),
        StepSchedule::Power { c, alpha } => (c, 100.0, 0.01, alpha),
        StepSchedule::Constant { gamma0 } => (1.0, 100.0, gamma0, 0.5),
    };
    let kind = cfg.str("step", default_kind);
    let s = match kind.as_str() {
        "rate_optimal" => StepSchedule::RateOptimal { c: cfg.get("c", dc)? },
        "generic" => StepSchedule::Generic {
            c: cfg.get("c", dc)?,
            c1: cfg.get("c1", dc1)?,
        },
        "power" => StepSchedule::Power {
            c: cfg.get("c", dc)?,
            alpha: cfg.get("step_alpha", da)?,
        },
        "constant" => StepSchedule::Constant {
            gamma0: cfg.get("gamma0", dg)?,
        },
        "over_n" => StepSchedule::OverN { c: cfg.get("c", dc)? },
        other => {
            return Err(CliError::Config(format!(
                "unknown step schedule '{other}' (expected rate_optimal|generic|power|constant|over_n)"
            )))
        }
    };
    s.validate()?;
    Ok(s)
}

/// `reg = zero | constant | power | inverse_n` with `lambda0` and `alpha`.
pub fn reg_schedule(cfg: &Config, default: RegSchedule) -> Result<RegSchedule> {
    let default_kind = match default {
        RegSchedule::Zero => "zero",
        RegSchedule::Constant(_) => "constant",
        RegSchedule::Power { .. } => "power",
        RegSchedule::InverseN => "inverse_n",
    };
    let kind = cfg.str("reg", default_kind);
    let r = match kind.as_str() {
        "zero" => RegSchedule::Zero,
        "constant" => RegSchedule::Constant(cfg.get(
            "lambda0",
            match default {
                RegSchedule::Constant(l) => l,
                _ => 0.1,
            },
        )?),
        "power" => RegSchedule::Power {
            alpha: cfg.get(
                "alpha",
                match default {
                    RegSchedule::Power { alpha } => alpha,
                    _ => 0.6,
                },
            )?,
        },
        "inverse_n" => RegSchedule::InverseN,
        other => {
            return Err(CliError::Config(format!(
                "unknown regularisation '{other}' (expected zero|constant|power|inverse_n)"
            )))
        }
    };
    r.validate()?;
    Ok(r)
}

use std::fs::File;
use std::io::{self, Write};

use anyhow::{bail, Context, Result};

use irs_deploy::deploy::{optimize_deployment, SearchConfig, SCHEME_NAMES};
use irs_deploy::tiles::SolverOptions;
use irs_deploy::units::db_to_linear;
use irs_deploy::Cost;

use crate::args::{SweepArgs, SweepVar};
use crate::commands::load_scenario;
use crate::Outcome;

pub const HEADER: [&str; 12] = [
    "gamma0_db",
    "scheme",
    "feasible",
    "total_cost",
    "cell_use_cost",
    "hardware_cost",
    "num_pirs",
    "num_airs",
    "sum_passive_tiles",
    "sum_active_tiles",
    "wall_ms",
    "active_tile_cost",
];

/// Sweep points `from, from + step, ..` up to `to`, computed by index so the
/// values do not drift.
pub fn points(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        bail!("--step must be positive");
    }
    if !(from.is_finite() && to.is_finite()) || from > to {
        bail!("--from must not exceed --to");
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| from + k as f64 * step).collect())
}

pub fn run(args: &SweepArgs, solver: &SolverOptions) -> Result<Outcome> {
    let scenario = load_scenario(&args.scenario)?;
    for s in &args.schemes {
        if !SCHEME_NAMES.contains(&s.as_str()) {
            bail!("unknown scheme {s:?}; expected one of {}", SCHEME_NAMES.join(", "));
        }
    }
    let values = points(args.from, args.to, args.step)?;
    if args.variable == SweepVar::ActiveTileCost && args.gamma0_db.is_none() {
        bail!("--gamma0-db is required when sweeping active_tile_cost");
    }

    let sink: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout()),
    };
    let mut out = csv::Writer::from_writer(sink);
    out.write_record(HEADER)?;

    for &v in &values {
        let mut s = scenario.clone();
        let gamma0_db = match args.variable {
            SweepVar::Gamma0Db => v,
            SweepVar::ActiveTileCost => {
                s.costs.per_tile_active = Cost::from_f64(v).context("active tile cost must be finite")?;
                args.gamma0_db.unwrap()
            }
        };
        for scheme in &args.schemes {
            let mut config = SearchConfig::new(db_to_linear(gamma0_db)).with_scheme(scheme);
            config.workers = args.workers.max(1);
            config.solver = *solver;
            let r = optimize_deployment(&s, &config)?;
            let blank = String::new;
            let (total, cell_use, hardware, pirs, airs, pt, at) = match (&r.plan, &r.cost) {
                (Some(p), Some(c)) => (
                    c.total.to_string(),
                    c.cell_use.to_string(),
                    c.hardware.to_string(),
                    p.passive.len().to_string(),
                    p.active.len().to_string(),
                    p.passive_tiles().to_string(),
                    p.active_tiles().to_string(),
                ),
                _ => (blank(), blank(), blank(), blank(), blank(), blank(), blank()),
            };
            out.write_record([
                gamma0_db.to_string(),
                scheme.clone(),
                r.feasible().to_string(),
                total,
                cell_use,
                hardware,
                pirs,
                airs,
                pt,
                at,
                format!("{:.3}", r.wall_time.as_secs_f64() * 1e3),
                s.costs.per_tile_active.to_string(),
            ])?;
            out.flush()?;
        }
    }
    Ok(Outcome::Done)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_include_both_ends() {
        assert_eq!(points(10.0, 40.0, 3.0).unwrap().len(), 11);
        assert_eq!(points(2.0, 5.0, 1.0).unwrap(), vec![2.0, 3.0, 4.0, 5.0]);
        assert_eq!(points(1.0, 1.0, 0.5).unwrap(), vec![1.0]);
    }

    #[test]
    fn points_reject_bad_ranges() {
        assert!(points(5.0, 1.0, 1.0).is_err());
        assert!(points(1.0, 5.0, 0.0).is_err());
    }

    #[test]
    fn header_is_stable() {
        assert_eq!(
            HEADER[..11].join(","),
            "gamma0_db,scheme,feasible,total_cost,cell_use_cost,hardware_cost,num_pirs,num_airs,sum_passive_tiles,sum_active_tiles,wall_ms"
        );
    }
}

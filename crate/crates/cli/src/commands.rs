use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use irs_deploy::channel::explicit_path_snr;
use irs_deploy::deploy::{full_enumeration, optimize_deployment, SearchConfig, SolveReport};
use irs_deploy::routing::{brute_force_best_path, evaluate_plan, PathSolution};
use irs_deploy::snr::{all_passive_path_snr, direct_snr, hybrid_path_snr, path_hop_gains, path_tiles};
use irs_deploy::tiles::{brute_force_tiles, tile_optimizer, TileOutcome};
use irs_deploy::units::{db_to_linear, linear_to_db};
use irs_deploy::{total_cost, DeploymentPlan, Locations, Router, Scenario};

use crate::args::{scheme_name, Cli, Command, LocationArgs, OracleCommand};
use crate::sweep;
use crate::Outcome;

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Validate { scenario, json } => validate(scenario, *json),
        Command::Evaluate { scenario, plan, gamma0_db, json } => evaluate(scenario, plan, *gamma0_db, *json),
        Command::OptimizeTiles { scenario, locations, gamma0_db, method } => {
            let s = load_scenario(scenario)?;
            let locs = locations_of(&s, locations)?;
            let optimizer = tile_optimizer(method.name(), &cli.solver()).expect("every method is registered");
            let router = Router::new(&s);
            let outcome = optimizer.optimize(&router, &s, &locs, db_to_linear(*gamma0_db))?;
            print_tiles(&s, &locs, *gamma0_db, method.name(), outcome)
        }
        Command::Optimize { scenario, gamma0_db, benchmark, workers, plan_out } => {
            let s = load_scenario(scenario)?;
            let mut config = SearchConfig::new(db_to_linear(*gamma0_db)).with_scheme(scheme_name(*benchmark));
            config.workers = (*workers).max(1);
            config.solver = cli.solver();
            let report = optimize_deployment(&s, &config)?;
            if let (Some(out), Some(plan)) = (plan_out, &report.plan) {
                fs::write(out, plan.to_json() + "\n").with_context(|| format!("writing {}", out.display()))?;
            }
            print_report(&report, *gamma0_db)
        }
        Command::Sweep(args) => sweep::run(args, &cli.solver()),
        Command::Oracle(cmd) => oracle(cmd),
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let scenario = irs_deploy::load_scenario(&text).with_context(|| format!("loading {}", path.display()))?;
    for w in &scenario.warnings {
        eprintln!("warning: {w}");
    }
    Ok(scenario)
}

fn load_plan(path: &Path, scenario: &Scenario) -> Result<DeploymentPlan> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let plan = DeploymentPlan::from_json(&text).with_context(|| format!("loading {}", path.display()))?;
    plan.validate(scenario)?;
    Ok(plan)
}

fn locations_of(scenario: &Scenario, args: &LocationArgs) -> Result<Locations> {
    let locs = Locations::new(args.passive.iter().copied(), args.active.iter().copied());
    if locs.passive.len() != args.passive.len() || locs.active.len() != args.active.len() {
        bail!("duplicate cell in --passive or --active");
    }
    locs.validate(scenario)?;
    Ok(locs)
}

fn print_json(value: &Value) {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    // a closed pipe (`| head`) is not an error worth reporting
    let _ = writeln!(io::stdout().lock(), "{text}");
}

fn validate(path: &Path, as_json: bool) -> Result<Outcome> {
    let s = load_scenario(path)?;
    let graph = s.graph();
    let candidates = s.candidate_cells();
    if as_json {
        print_json(&json!({
            "rows": s.grid.rows,
            "cols": s.grid.cols,
            "cells": s.num_cells(),
            "bs_cell": s.bs_cell,
            "candidates": candidates,
            "los_node_pairs": s.los_nodes.len(),
            "los_user_pairs": s.los_users.len(),
            "graph_vertices": graph.vertices().len(),
            "graph_edges": graph.num_edges(),
            "max_tiles": s.max_tiles,
            "warnings": s.warnings,
        }));
    } else {
        println!("scenario ok: {}", path.display());
        println!("  grid        {} x {} cells of {} m", s.grid.rows, s.grid.cols, s.grid.cell_size);
        println!("  bs          cell {} at {:?}", s.bs_cell, s.bs_pos);
        println!("  candidates  {candidates:?}");
        println!("  los         {} node pairs, {} node-cell pairs", s.los_nodes.len(), s.los_users.len());
        println!("  graph       {} vertices, {} edges", graph.vertices().len(), graph.num_edges());
        println!("  max tiles   {}", s.max_tiles);
    }
    Ok(Outcome::Done)
}

fn path_string(p: &PathSolution) -> String {
    p.path.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("-")
}

fn evaluate(scenario: &Path, plan: &Path, gamma0_db: Option<f64>, as_json: bool) -> Result<Outcome> {
    let s = load_scenario(scenario)?;
    let plan = load_plan(plan, &s)?;
    let cells = evaluate_plan(&s, &plan)?;
    let cost = total_cost(&plan, &s.costs);
    let gamma0 = gamma0_db.map(db_to_linear);
    let short: Vec<&PathSolution> = match gamma0 {
        Some(g) => cells.iter().filter(|c| !c.meets(g)).collect(),
        None => Vec::new(),
    };

    if as_json {
        let shortfall: Vec<Value> = short
            .iter()
            .map(|c| {
                json!({
                    "cell": c.cell,
                    "snr_db": c.snr_db(),
                    "shortfall_db": c.snr_db().map(|v| gamma0_db.unwrap() - v),
                })
            })
            .collect();
        print_json(&json!({
            "plan": plan,
            "cost": cost,
            "cells": cells,
            "gamma0_db": gamma0_db,
            "shortfall": shortfall,
        }));
    } else {
        println!("{:>4}  {:<12}  {:<20}  {:>9}", "cell", "kind", "path", "snr_db");
        for c in &cells {
            let snr = c.snr_db().map_or("-".to_string(), |v| format!("{v:.3}"));
            println!("{:>4}  {:<12}  {:<20}  {:>9}", c.cell, c.kind.as_str(), path_string(c), snr);
        }
        println!("cost: cell-use {} + hardware {} = {}", cost.cell_use, cost.hardware, cost.total);
        if let Some(g_db) = gamma0_db {
            if short.is_empty() {
                println!("all cells meet {g_db} dB");
            } else {
                println!("cells below {g_db} dB:");
                for c in &short {
                    match c.snr_db() {
                        Some(v) => println!("  cell {:>3}: {v:.3} dB, short by {:.3} dB", c.cell, g_db - v),
                        None => println!("  cell {:>3}: unreachable", c.cell),
                    }
                }
            }
        }
    }
    Ok(if short.is_empty() { Outcome::Done } else { Outcome::Infeasible })
}

fn print_tiles(s: &Scenario, locs: &Locations, gamma0_db: f64, method: &str, outcome: TileOutcome) -> Result<Outcome> {
    let cell_use = s.costs.cell_use(locs.passive.len(), locs.active.len());
    let feasible = outcome.solution().is_some();
    print_json(&json!({
        "method": method,
        "gamma0_db": gamma0_db,
        "locations": locs,
        "cell_use_cost": cell_use,
        "feasible": feasible,
        "solution": outcome.solution(),
    }));
    Ok(if feasible { Outcome::Done } else { Outcome::Infeasible })
}

fn print_report(report: &SolveReport, gamma0_db: f64) -> Result<Outcome> {
    let mut value = serde_json::to_value(report)?;
    value["gamma0_db"] = json!(gamma0_db);
    value["feasible"] = json!(report.feasible());
    value["pruned_fraction"] = json!(report.pruned_fraction());
    print_json(&value);
    Ok(if report.feasible() { Outcome::Done } else { Outcome::Infeasible })
}

fn parse_vertex(token: &str, scenario: &Scenario) -> Result<usize> {
    let token = token.trim();
    if let Some(cell) = token.strip_prefix('u') {
        let cell: usize = cell.parse().with_context(|| format!("bad user vertex {token:?}"))?;
        if cell >= scenario.num_cells() {
            bail!("user vertex {token:?}: no cell {cell}");
        }
        return Ok(scenario.user_vertex(cell));
    }
    token.parse().with_context(|| format!("bad vertex id {token:?}"))
}

fn oracle(cmd: &OracleCommand) -> Result<Outcome> {
    match cmd {
        OracleCommand::Snr { scenario, plan, path, airs } => {
            let s = load_scenario(scenario)?;
            let plan = load_plan(plan, &s)?;
            let path = path.iter().map(|t| parse_vertex(t, &s)).collect::<Result<Vec<_>>>()?;
            if path.len() < 2 {
                bail!("--path needs at least two vertices");
            }
            let explicit = explicit_path_snr(&s, &plan, &path, *airs)?;
            let closed = if path.len() == 2 {
                let cell = path[1].checked_sub(s.num_cells()).context("path must end at a user vertex")?;
                direct_snr(&s, cell).context("no direct LoS to that cell")?
            } else {
                let gains = path_hop_gains(&s, &path)?;
                let tiles = path_tiles(&plan, &path)?;
                match airs {
                    Some(a) => {
                        let pos = path.iter().position(|v| v == a).context("--airs is not on the path")?;
                        hybrid_path_snr(&s.radio, &gains, &tiles, pos)?
                    }
                    None => all_passive_path_snr(&s.radio, &gains, &tiles)?,
                }
            };
            print_json(&json!({
                "path": path,
                "airs": airs,
                "explicit_snr_db": linear_to_db(explicit),
                "closed_form_snr_db": linear_to_db(closed),
                "relative_error": (explicit - closed).abs() / closed.abs(),
            }));
            Ok(Outcome::Done)
        }
        OracleCommand::Path { scenario, plan, cell } => {
            let s = load_scenario(scenario)?;
            let plan = load_plan(plan, &s)?;
            let routed = evaluate_plan(&s, &plan)?;
            let cells: Vec<usize> = match cell {
                Some(c) if *c >= s.num_cells() => bail!("no cell {c}"),
                Some(c) => vec![*c],
                None => (0..s.num_cells()).collect(),
            };
            let mut rows = Vec::new();
            let mut all_agree = true;
            for c in cells {
                let brute = brute_force_best_path(&s, &plan, c)?;
                let router = &routed[c];
                let agree = brute.kind == router.kind
                    && match (brute.snr_linear, router.snr_linear) {
                        (Some(a), Some(b)) => (a - b).abs() <= 1e-9 * a.abs().max(b.abs()),
                        (None, None) => true,
                        _ => false,
                    };
                all_agree &= agree;
                rows.push(json!({ "cell": c, "brute_force": brute, "router": router, "agree": agree }));
            }
            print_json(&json!({ "agree": all_agree, "cells": rows }));
            Ok(Outcome::Done)
        }
        OracleCommand::Tiles { scenario, locations, gamma0_db } => {
            let s = load_scenario(scenario)?;
            let locs = locations_of(&s, locations)?;
            let outcome = brute_force_tiles(&s, &locs, db_to_linear(*gamma0_db))?;
            print_tiles(&s, &locs, *gamma0_db, "brute_force", outcome)
        }
        OracleCommand::Deploy { scenario, gamma0_db, benchmark } => {
            let s = load_scenario(scenario)?;
            let config = SearchConfig::new(db_to_linear(*gamma0_db)).with_scheme(scheme_name(*benchmark));
            let report = full_enumeration(&s, &config)?;
            print_report(&report, *gamma0_db)
        }
    }
}

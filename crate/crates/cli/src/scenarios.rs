//! Scenario runners: wire the library into reproducible datasets.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hybrid_cycle::{
    check_sustainable, check_sustainable_raw, discount_tail_bound, find_x_eq, fmt::format_float,
    integrate, region_grid, ControlLaw, IntegratorConfig, LimitCycle, ModelParams, Trajectory,
};
use serde_json::json;

use crate::config::{Cli, CliError, CycleArgs, Format, RegionArgs, Scenario, SustainArgs, TrajArgs};

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.scenario {
        Scenario::Optimal(args) => run_trajectory(&args, true),
        Scenario::Myopic(args) => run_trajectory(&args, false),
        Scenario::Compare(args) => run_compare(&args),
        Scenario::LimitCycle(args) => run_limit_cycle(&args),
        Scenario::Region(args) => run_region(&args),
        Scenario::Sustainability(args) => run_sustainability(&args),
    }
}

fn law_for(params: &ModelParams, optimal: bool) -> Result<ControlLaw, CliError> {
    Ok(if optimal {
        ControlLaw::optimal(params.beta)?
    } else {
        ControlLaw::myopic(params.beta)?
    })
}

fn run_trajectory(args: &TrajArgs, optimal: bool) -> Result<(), CliError> {
    let (params, _) = args.params.resolve()?;
    let cfg = IntegratorConfig::new(args.step, args.horizon);
    let traj = integrate(&params, &law_for(&params, optimal)?, &cfg)?;
    report_payoff(&params, &traj, args.horizon)?;
    match args.format {
        Format::Csv => write_output(args.out.as_deref(), |w| traj.write_csv(w).map_err(Into::into)),
        Format::Json => write_output(args.out.as_deref(), |w| {
            let doc = json!({
                "t": traj.times, "x": traj.x, "u": traj.u,
                "lambda": traj.lambda, "L": traj.profit, "J": traj.payoff,
            });
            write_json(w, &doc)
        }),
    }
}

fn run_compare(args: &TrajArgs) -> Result<(), CliError> {
    let (params, _) = args.params.resolve()?;
    let cfg = IntegratorConfig::new(args.step, args.horizon);
    let opt = integrate(&params, &law_for(&params, true)?, &cfg)?;
    let myo = integrate(&params, &law_for(&params, false)?, &cfg)?;
    report_payoff(&params, &opt, args.horizon)?;
    match args.format {
        Format::Csv => write_output(args.out.as_deref(), |w| {
            writeln!(w, "t,J_opt,J_myopic,J_diff")?;
            for i in 0..opt.times.len() {
                writeln!(
                    w,
                    "{},{},{},{}",
                    format_float(opt.times[i]),
                    format_float(opt.payoff[i]),
                    format_float(myo.payoff[i]),
                    format_float(opt.payoff[i] - myo.payoff[i]),
                )?;
            }
            Ok(())
        }),
        Format::Json => write_output(args.out.as_deref(), |w| {
            let diff: Vec<f64> = opt
                .payoff
                .iter()
                .zip(&myo.payoff)
                .map(|(a, b)| a - b)
                .collect();
            let doc = json!({
                "t": opt.times, "J_opt": opt.payoff, "J_myopic": myo.payoff, "J_diff": diff,
            });
            write_json(w, &doc)
        }),
    }
}

fn run_limit_cycle(args: &CycleArgs) -> Result<(), CliError> {
    let (params, _) = args.params.resolve()?;
    let cycle = find_x_eq(&params)?;
    let summary = cycle.summary(&params);
    match args.format {
        Format::Csv => {
            let out = args.out.as_deref().ok_or_else(|| {
                CliError::Validation(
                    "limit-cycle with csv format needs --out (a .json sidecar is written next to it)"
                        .into(),
                )
            })?;
            write_output(Some(out), |w| cycle.write_csv(w).map_err(Into::into))?;
            let sidecar = out.with_extension("json");
            let mut w = BufWriter::new(File::create(&sidecar)?);
            serde_json::to_writer_pretty(&mut w, &summary)?;
            writeln!(w)?;
            Ok(())
        }
        Format::Json => write_output(args.out.as_deref(), |w| {
            let doc = json!({
                "x_eq": summary.x_eq,
                "lambda_eq": summary.lambda_eq,
                "residual": summary.residual,
                "contraction_rate": summary.contraction_rate,
                "samples": samples_json(&cycle),
            });
            write_json(w, &doc)
        }),
    }
}

fn samples_json(cycle: &LimitCycle) -> Vec<serde_json::Value> {
    cycle
        .samples
        .iter()
        .map(|s| json!({"t": s.t, "x_h": s.x, "u": s.u, "lambda": s.lambda}))
        .collect()
}

fn run_region(args: &RegionArgs) -> Result<(), CliError> {
    let (params, _) = args.params.resolve()?;
    let threads = crate::config::region_threads()?;
    // the scan works directly in (rho1, rho2); beta and t_s come from the
    // resolved parameters, the period is normalized to 1
    let t_s = params.t_s / params.period;
    let grid = region_grid(args.rho1_range, args.rho2_range, args.grid, params.beta, t_s, threads)?;
    match args.format {
        Format::Csv => write_output(args.out.as_deref(), |w| grid.write_csv(w).map_err(Into::into)),
        Format::Json => write_output(args.out.as_deref(), |w| {
            write_json(w, &serde_json::to_value(&grid).map_err(CliError::from)?)
        }),
    }
}

fn run_sustainability(args: &SustainArgs) -> Result<(), CliError> {
    let (params, raw) = args.params.resolve()?;
    let report = match raw {
        Some(raw) => check_sustainable_raw(&raw)?,
        None => check_sustainable(&params),
    };
    write_output(args.out.as_deref(), |w| {
        write_json(w, &serde_json::to_value(report).map_err(CliError::from)?)
    })
}

/// Trajectory runs report the truncated payoff together with the bound on
/// everything the truncation ignored.
fn report_payoff(params: &ModelParams, traj: &Trajectory, horizon: f64) -> Result<(), CliError> {
    let j = traj.payoff_at(horizon)?;
    let tail = discount_tail_bound(params.r, horizon, traj.max_abs_profit());
    eprintln!("J({horizon}) = {j:.6e}, discounted tail beyond horizon <= {tail:.6e}");
    Ok(())
}

fn write_json<W: Write>(mut w: W, doc: &serde_json::Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut w, doc)?;
    writeln!(&mut w)?;
    Ok(())
}

fn write_output<F>(out: Option<&Path>, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            let mut w = BufWriter::new(File::create(path)?);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

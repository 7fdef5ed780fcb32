use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use bbm_core::harness::{
    convergence_study, emit_report, epsilon_scaling, estimate_order, kdv_limit_slope,
    kdv_limit_study, log_spaced_taus, KdvLimitConfig, ReportFormat, StudyConfig, StudyMetadata,
};
use bbm_core::lemmas::{LemmaBattery, LemmaSetting};
use bbm_core::nonlinear::local_order_check;
use bbm_core::reference::ToleranceSpec;
use bbm_core::schemes::{integrate, write_snapshot_csv, SnapshotMeta, TrajectoryConfig};
use bbm_core::{DispersionPolynomial, InitialDatum, NonlinearFlow, OperatorSymbol, Scheme, SobolevWeight, SpectralGrid};
use serde_json::json;

use crate::settings::Settings;
use crate::Failure;

fn grid(s: &Settings) -> Result<SpectralGrid, Failure> {
    Ok(SpectralGrid::with_dealiasing(s.get("modes", 200usize)?, s.flag("dealias")?)?)
}

fn out_dir(s: &Settings, default: &str) -> PathBuf {
    PathBuf::from(s.raw("out").unwrap_or(default))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(bbm_core::Error::from)?;
    }
    let text = serde_json::to_string_pretty(value).map_err(bbm_core::Error::from)?;
    fs::write(path, text + "\n").map_err(bbm_core::Error::from)?;
    Ok(())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{v:.3}"))
}

pub fn simulate(s: &Settings) -> Result<(), Failure> {
    let grid = grid(s)?;
    let scheme: Scheme = s.get("scheme", Scheme::Strang)?;
    let epsilon = s.get("epsilon", 1.0)?;
    let tau = s.get("tau", 1e-2)?;
    let final_time = s.get("time", 5.0)?;
    let datum: InitialDatum = s.get("datum", InitialDatum::Bump)?;
    let config = TrajectoryConfig {
        epsilon,
        polynomial: DispersionPolynomial::classical(),
        tau,
        final_time,
        initial: datum.field(&grid),
    };
    let steps = config.steps()?;
    let stride = s.get("stride", (steps / 10).max(1))?;
    if stride == 0 {
        return Err(Failure::Config("stride must be positive".into()));
    }
    let traj = integrate(&scheme.spec(), &config, Some(stride))?;

    let dir = out_dir(s, "snapshots");
    fs::create_dir_all(&dir).map_err(bbm_core::Error::from)?;
    println!("{:>10} {:>14} {:>14}  file", "t", "mean", "l2");
    for (i, snap) in traj.snapshots.iter().enumerate() {
        let path = dir.join(format!("snapshot_{i:04}.csv"));
        let file = fs::File::create(&path).map_err(bbm_core::Error::from)?;
        let meta = SnapshotMeta {
            scheme,
            epsilon,
            tau,
            time: snap.time,
        };
        write_snapshot_csv(&mut BufWriter::new(file), &meta, &snap.field)?;
        println!(
            "{:>10.4} {:>14.6e} {:>14.6e}  {}",
            snap.time,
            snap.field.coeff(0).re,
            snap.field.l2_norm(),
            path.display()
        );
    }
    Ok(())
}

pub fn convergence(s: &Settings) -> Result<(), Failure> {
    let defaults = StudyConfig::default();
    let final_time = s.get("time", defaults.final_time)?;
    let config = StudyConfig {
        schemes: s.list("scheme", defaults.schemes.clone())?,
        epsilons: s.list("epsilon", defaults.epsilons.clone())?,
        taus: s.list("tau", log_spaced_taus(1e-1, 1e-3, 7, final_time))?,
        n_points: s.get("modes", defaults.n_points)?,
        final_time,
        datum: s.get("datum", defaults.datum)?,
        norm_r: s.get("norm-r", defaults.norm_r)?,
        dealias: s.flag("dealias")?,
        reference_tol: s.get("tol", defaults.reference_tol)?,
        seed: s.get("seed", defaults.seed)?,
        timings: s.flag("timings")?,
        ..defaults
    };
    let formats: Vec<ReportFormat> = s.list("format", ReportFormat::ALL.to_vec())?;
    let records = convergence_study(&config)?;
    let dir = out_dir(s, "results");
    let files = emit_report(&records, &dir, &formats, &StudyMetadata::from_config(&config))?;

    println!("{:<9} {:>6} {:>8}  window", "scheme", "eps", "eoc");
    for &scheme in &config.schemes {
        for &eps in &config.epsilons {
            match estimate_order(&records, scheme, eps) {
                Ok(fit) => println!(
                    "{:<9} {:>6} {:>8.3}  [{:.2e}, {:.2e}] ({} pts)",
                    scheme.name(),
                    eps,
                    fit.eoc,
                    fit.window.0,
                    fit.window.1,
                    fit.points
                ),
                Err(e) => println!("{:<9} {:>6} {:>8}  {e}", scheme.name(), eps, "n/a"),
            }
        }
    }
    if config.epsilons.len() >= 4 {
        println!("\n{:<9} {:>10} {:>10}", "scheme", "tau", "eps-slope");
        for &scheme in &config.schemes {
            for &tau in &config.taus {
                let slope = epsilon_scaling(&records, scheme, tau).ok();
                println!("{:<9} {:>10.3e} {:>10}", scheme.name(), tau, fmt_opt(slope));
            }
        }
    }
    let flagged = records.iter().filter(|r| !r.is_ok()).count();
    if flagged > 0 {
        eprintln!("{flagged} cell(s) flagged (see the flag column)");
    }
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

pub fn kdv_limit(s: &Settings) -> Result<(), Failure> {
    let defaults = KdvLimitConfig::default();
    let config = KdvLimitConfig {
        epsilons: s.list("epsilon", defaults.epsilons.clone())?,
        tau: s.get("tau", defaults.tau)?,
        final_time: s.get("time", defaults.final_time)?,
        n_points: s.get("modes", defaults.n_points)?,
        datum: s.get("datum", defaults.datum)?,
        dealias: s.flag("dealias")?,
        ..defaults
    };
    let formats: Vec<ReportFormat> = s.list("format", vec![ReportFormat::Csv, ReportFormat::Json])?;
    let records = kdv_limit_study(&config)?;
    let slope = kdv_limit_slope(&records).ok();

    let dir = out_dir(s, "results");
    fs::create_dir_all(&dir).map_err(bbm_core::Error::from)?;
    for format in formats {
        match format {
            ReportFormat::Csv | ReportFormat::PlotData => {
                let mut text = String::from("epsilon,difference_l2\n");
                for r in &records {
                    text.push_str(&format!("{},{:e}\n", r.epsilon, r.difference_l2));
                }
                let name = if format == ReportFormat::Csv { "kdv_limit.csv" } else { "kdv_limit.dat" };
                let text = if format == ReportFormat::Csv {
                    text
                } else {
                    text.replacen("epsilon,difference_l2", "# epsilon difference_l2", 1).replace(',', " ")
                };
                fs::write(dir.join(name), text).map_err(bbm_core::Error::from)?;
            }
            ReportFormat::Json => write_json(
                &dir.join("kdv_limit.json"),
                &json!({
                    "tau": config.tau,
                    "final_time": config.final_time,
                    "n_points": config.n_points,
                    "records": records,
                    "slope": slope,
                }),
            )?,
        }
    }
    println!("{:>8} {:>14}", "eps", "|u_bbm-u_kdv|");
    for r in &records {
        println!("{:>8} {:>14.6e}", r.epsilon, r.difference_l2);
    }
    println!("slope {}", fmt_opt(slope));
    Ok(())
}

pub fn lemmas(s: &Settings) -> Result<(), Failure> {
    let grid = grid(s)?;
    let weight = match s.raw("weight").map(str::to_ascii_lowercase).as_deref() {
        None | Some("bessel") => SobolevWeight::Bessel,
        Some("shifted") => SobolevWeight::Shifted,
        Some(other) => return Err(Failure::Config(format!("unknown weight '{other}'"))),
    };
    let battery = LemmaBattery {
        weight,
        trials: s.get("trials", 100usize)?,
        seed: s.get("seed", 0u64)?,
        ..LemmaBattery::default()
    };
    let settings = LemmaSetting::product(
        &s.list("epsilon", vec![0.01, 0.1, 0.5, 1.0])?,
        &s.list("sigma", vec![0.0, 0.5, 1.0])?,
        s.get("norm-r", 1.0)?,
        s.get("flow-time", 1.0)?,
    );
    let outcomes = battery.run(&grid, &settings)?;
    let value = serde_json::to_value(&outcomes).map_err(bbm_core::Error::from)?;
    match s.raw("out") {
        Some(path) => write_json(Path::new(path), &value)?,
        None => println!("{}", serde_json::to_string_pretty(&value).map_err(bbm_core::Error::from)?),
    }
    let violations = outcomes.iter().filter(|o| !o.pass).count();
    eprintln!("{} checks, {violations} violation(s)", outcomes.len());
    Ok(())
}

pub fn local_order(s: &Settings) -> Result<(), Failure> {
    let grid = grid(s)?;
    let datum: InitialDatum = s.get("datum", InitialDatum::Bump)?;
    let w0 = datum.field(&grid);
    let default_taus: Vec<f64> = (0..6).map(|i| 0.2 * 10f64.powf(-i as f64 / 5.0)).collect();
    let taus = s.list("tau", default_taus)?;
    let tol = ToleranceSpec::uniform(s.get("tol", 1e-14)?);
    let mut rows = Vec::new();
    println!("{:>6} {:>6} {:>8} {:>8}", "eps", "order", "slope", "expect");
    for eps in s.list("epsilon", vec![0.1, 1.0])? {
        let b = OperatorSymbol::l_eps(&grid, eps)?.scaled(eps);
        for order in s.list("order", vec![1usize, 2, 3, 4])? {
            let report = local_order_check(&NonlinearFlow::new(b.clone(), order)?, &w0, &taus, &tol)?;
            println!("{:>6} {:>6} {:>8} {:>8}", eps, order, fmt_opt(report.slope), order + 1);
            rows.push(json!({
                "epsilon": eps,
                "order": order,
                "taus": report.taus,
                "errors": report.errors,
                "slope": report.slope,
            }));
        }
    }
    if let Some(path) = s.raw("out") {
        write_json(Path::new(path), &serde_json::Value::Array(rows))?;
    }
    Ok(())
}

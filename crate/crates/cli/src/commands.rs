//! One function per subcommand; each returns results for the summary.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nvlab::corpus::{corpus, gaussian_ensemble, DatumRole, Member};
use nvlab::diagnostics::{gn_ratio, gn_ratio_spacetime, pde_residual, NormReport};
use nvlab::evolution::{evolve_direct, EvolveParams};
use nvlab::io::save_field;
use nvlab::miura::{
    classify, constraint_violation, miura_forward, roundtrip_error, MiuraPotential,
};
use nvlab::scattering::{inverse_scattering, scattering_transform};
use nvlab::validation::Suite;
use nvlab::{Field, GridSpec, KGrid};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, ExitStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Evolve,
    Scatter,
    Miura,
    Spectrum,
    GnScan,
    Validate,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Evolve,
        Command::Scatter,
        Command::Miura,
        Command::Spectrum,
        Command::GnScan,
        Command::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Scatter => "scatter",
            Command::Miura => "miura",
            Command::Spectrum => "spectrum",
            Command::GnScan => "gn-scan",
            Command::Validate => "validate",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s || c.name().replace('-', "_") == s)
            .ok_or_else(|| CliError::Config(format!("unknown command {s:?}")))
    }
}

/// What a command produced, before it is written to the summary.
#[derive(Debug)]
pub struct Outcome {
    pub status: ExitStatus,
    pub results: Value,
    pub warnings: Vec<String>,
    pub reports: Vec<NormReport>,
}

impl Outcome {
    fn new(results: Value) -> Self {
        Self {
            status: ExitStatus::Success,
            results,
            warnings: Vec::new(),
            reports: Vec::new(),
        }
    }
}

pub fn run(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    match cmd {
        Command::Evolve => evolve(cfg, out),
        Command::Scatter => scatter(cfg, out),
        Command::Miura => miura(cfg, out),
        Command::Spectrum => spectrum(cfg, out),
        Command::GnScan => gn_scan(cfg),
        Command::Validate => validate(cfg, out),
    }
}

fn evolve(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let model = cfg.model()?;
    let datum = cfg.datum()?;
    let u0 = datum.sample(grid)?;
    let traj = evolve_direct(&model, &u0, cfg.time.t_final, &cfg.evolve_params()?)?;
    traj.save(out.join("trajectory"))?;
    let m0 = u0.l2_norm();
    let l2: Vec<f64> = traj.states.iter().map(Field::l2_norm).collect();
    let drift: Vec<f64> = l2
        .iter()
        .map(|v| if m0 > 0.0 { (v / m0 - 1.0).abs() } else { *v })
        .collect();
    let constraint = if datum.role() == DatumRole::Constrained {
        Some(
            traj.states
                .iter()
                .map(constraint_violation)
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    let mut o = Outcome::new(Value::Null);
    for (j, t) in traj.times.iter().enumerate() {
        o.reports
            .push(NormReport::new(format!("l2@t={t:.6}"), l2[j], &grid));
        o.reports.push(NormReport::new(
            format!("l2_drift@t={t:.6}"),
            drift[j],
            &grid,
        ));
        if let Some(c) = &constraint {
            o.reports
                .push(NormReport::new(format!("constraint@t={t:.6}"), c[j], &grid));
        }
    }
    let mut residual_max = None;
    if traj.blow_up.is_none() && traj.len() >= 5 {
        match pde_residual(&traj, &model) {
            Ok(r) => {
                residual_max = Some(r.iter().map(|r| r.value).fold(0.0, f64::max));
                o.reports.extend(r);
            }
            Err(e) => o.warnings.push(format!("residual skipped: {e}")),
        }
    }
    o.results = json!({
        "times": traj.times,
        "l2": l2,
        "max_abs": traj.states.iter().map(Field::max_abs).collect::<Vec<_>>(),
        "l2_drift_max": drift.iter().copied().fold(0.0, f64::max),
        "constraint_max": constraint.map(|c| c.into_iter().fold(0.0, f64::max)),
        "pde_residual_max": residual_max,
        "meta": traj.meta,
        "blow_up": traj.blow_up,
    });
    if let Some(b) = traj.blow_up {
        o.status = ExitStatus::BlowUp;
        o.warnings.push(format!(
            "blow-up between t = {} and t = {} (norm {:.3e})",
            b.last_good, b.detected, b.norm
        ));
    }
    Ok(o)
}

fn scatter(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let kg = cfg.kgrid()?;
    let jost = cfg.jost();
    let u = cfg.datum()?.sample(grid)?;
    let data = scattering_transform(&u, &kg, &jost)?;
    data.save(out.join("scattering.field"))?;
    let failed: Vec<[f64; 2]> = data.failed().into_iter().map(|k| [k.k1, k.k2]).collect();
    let mut o = Outcome::new(Value::Null);
    if let Some(w) = data.warning {
        o.warnings.push(w.to_string());
    }
    let u_l2 = u.l2_norm();
    let plancherel = if u_l2 > 0.0 {
        data.l2_norm() / u_l2
    } else {
        1.0
    };
    o.reports
        .push(NormReport::new("scattering_l2", data.l2_norm(), &grid));
    if !failed.is_empty() {
        o.status = ExitStatus::Partial;
        o.warnings.push(format!(
            "{} of {} nodes failed",
            failed.len(),
            data.values.len()
        ));
        o.results = json!({
            "nodes": data.values.len(),
            "iterations": data.total_iterations(),
            "plancherel_ratio": plancherel,
            "failed": failed,
        });
        return Ok(o);
    }
    let involution = if u_l2 > 0.0 {
        inverse_scattering(&data, &grid, &jost)?.rel_distance(&u)
    } else {
        0.0
    };
    o.reports
        .push(NormReport::new("involution_error", involution, &grid));
    let passed = involution <= cfg.tolerances.involution;
    if !passed {
        o.status = ExitStatus::GateFailed;
    }
    o.results = json!({
        "nodes": data.values.len(),
        "iterations": data.total_iterations(),
        "plancherel_ratio": plancherel,
        "involution_error": involution,
        "involution_tolerance": cfg.tolerances.involution,
        "involution_passed": passed,
        "failed": failed,
    });
    Ok(o)
}

fn miura_members(cfg: &RunConfig) -> Vec<Member> {
    match &cfg.datum {
        Some(d) => vec![Member {
            name: "datum".into(),
            datum: d.clone(),
        }],
        None => corpus()
            .into_iter()
            .filter(|m| m.datum.role() == DatumRole::Constrained)
            .collect(),
    }
}

fn miura(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let newton = cfg.newton();
    let dir = out.join("miura");
    std::fs::create_dir_all(&dir)?;
    let mut o = Outcome::new(Value::Null);
    let mut rows = Vec::new();
    for m in miura_members(cfg) {
        let u = m.datum.sample(grid)?;
        let violation = constraint_violation(&u)?;
        let q = miura_forward(&u)?;
        save_field(dir.join(format!("{}.field", m.name)), q.field())?;
        let roundtrip = roundtrip_error(&u, &newton)?;
        let passed = roundtrip <= cfg.tolerances.roundtrip;
        if !passed {
            o.status = ExitStatus::GateFailed;
        }
        o.reports.push(NormReport::new(
            format!("roundtrip[{}]", m.name),
            roundtrip,
            &grid,
        ));
        rows.push(json!({
            "name": m.name,
            "constraint_violation": violation,
            "q_integral": q.field().integral().re,
            "q_max_abs": q.max_abs(),
            "roundtrip_error": roundtrip,
            "passed": passed,
        }));
    }
    o.results = json!({ "roundtrip_tolerance": cfg.tolerances.roundtrip, "members": rows });
    Ok(o)
}

fn spectrum(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let q = MiuraPotential::new(cfg.datum()?.sample(grid)?)?;
    let report = classify(&q, &cfg.eigen(), &cfg.newton(), cfg.tolerances.range)?;
    std::fs::write(out.join("classifier.json"), report.to_json())?;
    let mut o =
        Outcome::new(serde_json::to_value(&report).map_err(|e| CliError::Config(e.to_string()))?);
    o.reports
        .push(NormReport::new("lambda_min", report.lambda_min, &grid));
    if !report.consistent {
        o.warnings
            .push("the eigenvalue and Newton verdicts disagree".to_string());
    }
    Ok(o)
}

fn ensemble_lattices(cfg: &RunConfig, lambda: f64) -> Result<(GridSpec, KGrid), CliError> {
    let e = &cfg.ensemble;
    Ok((
        GridSpec::new(e.n, 12.0 / lambda)?,
        KGrid::new(e.nk, 3.0 * lambda)?,
    ))
}

fn member_ratios(cfg: &RunConfig, m: &Member) -> Result<Vec<NormReport>, CliError> {
    let e = &cfg.ensemble;
    let model = cfg.model()?;
    let jost = cfg.jost();
    let mut reports = Vec::new();
    for &lambda in &e.lambdas {
        let (g, kg) = ensemble_lattices(cfg, lambda)?;
        let u = m.datum.rescaled(lambda)?.sample(g)?;
        let mut r = gn_ratio(&u, e.s, e.r, &kg, &jost)?.with_scale(lambda);
        r.name = format!("{}[{}]", r.name, m.name);
        reports.push(r);
        if e.p != 0.0 {
            let t = e.horizon / lambda.powi(3);
            let step = t / (e.samples - 1) as f64;
            let times = (0..e.samples).map(|j| j as f64 * step).collect();
            let traj = evolve_direct(
                &model,
                &u,
                t,
                &EvolveParams::default().with_save_times(times),
            )?;
            let mut r = gn_ratio_spacetime(&traj, e.p, &kg, &jost)?.with_scale(lambda);
            r.name = format!("{}[{}]", r.name, m.name);
            reports.push(r);
        }
    }
    Ok(reports)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

fn gn_scan(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let e = &cfg.ensemble;
    let members = gaussian_ensemble(e.count, e.amplitude, cfg.seed);
    let per_member = members
        .par_iter()
        .map(|m| member_ratios(cfg, m))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = |prefix: &str| {
        let mut vals: Vec<f64> = per_member
            .iter()
            .flatten()
            .filter(|r| r.name.starts_with(prefix))
            .map(|r| r.value)
            .collect();
        if vals.is_empty() {
            return Value::Null;
        }
        let spreads: Vec<f64> = per_member
            .iter()
            .map(|rs| {
                let v = rs
                    .iter()
                    .filter(|r| r.name.starts_with(prefix))
                    .map(|r| r.value);
                v.clone().fold(0.0, f64::max) / v.fold(f64::INFINITY, f64::min)
            })
            .collect();
        let max = vals.iter().copied().fold(0.0, f64::max);
        let med = median(&mut vals);
        json!({
            "median": med,
            "max": max,
            "max_over_median": max / med,
            "max_scale_spread": spreads.iter().copied().fold(0.0, f64::max),
        })
    };
    let fixed = summary("gn_ratio[");
    let spacetime = summary("gn_ratio_spacetime[");
    let mut o = Outcome::new(json!({
        "members": members.len(),
        "lambdas": e.lambdas,
        "fixed": fixed,
        "spacetime": spacetime,
    }));
    o.reports = per_member.into_iter().flatten().collect();
    Ok(o)
}

fn validate(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let suite = Suite::new(cfg.scale())
        .with_params(cfg.jost())
        .with_seed(cfg.seed);
    let ids: Vec<String> = if cfg.gates.is_empty() {
        Suite::ids().map(String::from).collect()
    } else {
        cfg.gates.clone()
    };
    let gates: Vec<_> = ids.iter().filter_map(|id| suite.run(id)).collect();
    for g in &gates {
        println!("{}", g.line());
    }
    let json = serde_json::to_string_pretty(&gates).map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(out.join("gates.json"), json)?;
    let failed: Vec<&str> = gates
        .iter()
        .filter(|g| !g.passed)
        .map(|g| g.id.as_str())
        .collect();
    let mut o = Outcome::new(json!({
        "passed": gates.len() - failed.len(),
        "failed": failed,
        "gates": gates.iter().map(|g| json!({ "id": g.id, "passed": g.passed })).collect::<Vec<_>>(),
    }));
    if !failed.is_empty() {
        o.status = ExitStatus::GateFailed;
    }
    Ok(o)
}

//! The five commands. Each returns its results as JSON together with an
//! exit status; writing files is left to the caller.

use hamroot_core::construction::Construction;
use hamroot_core::dynamics::{cycle_space, CycleSpace, EnumerationOptions};
use hamroot_core::maps::{self, MapHandle};
use hamroot_core::obstruction::EnumerationEvidence;
use hamroot_core::verification::{run_suite, sample_ball, Suite, SuiteOptions};
use hamroot_core::{parity_certificate, CheckReport, Params, Perturbation, RadialProfile, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::sync::Arc;
use std::time::Instant;

use crate::config::{MapChoice, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    CheckFailure,
    InvalidConfig,
    Inconclusive,
    NumericalFailure,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::CheckFailure => 1,
            Status::InvalidConfig => 2,
            Status::Inconclusive => 3,
            Status::NumericalFailure => 4,
        }
    }
}

/// A table destined for CSV export.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub results: Value,
    pub checks: Vec<CheckReport>,
    pub status: Status,
    pub table: Option<Table>,
    pub message: String,
}

fn build(params: &Params, control: bool) -> Result<Arc<Construction>, String> {
    let perturbation = if control { Perturbation::Control } else { Perturbation::Standard };
    Construction::with_perturbation(*params, perturbation).map(Arc::new).map_err(|e| e.to_string())
}

fn select_map(construction: &Arc<Construction>, choice: MapChoice) -> MapHandle {
    match choice {
        MapChoice::Phi => maps::phi(construction),
        MapChoice::PhiSquared => maps::square(&maps::phi(construction)),
        MapChoice::FlowH => maps::flow_h(construction, 1.0),
    }
}

fn point_header(n: usize) -> Vec<String> {
    (1..=n).flat_map(|i| [format!("x{i}"), format!("y{i}")]).collect()
}

fn class_table(n: usize, space: &CycleSpace) -> Table {
    Table {
        header: point_header(n),
        rows: space
            .classes
            .iter()
            .flat_map(|c| c.points.iter().map(|p| p.to_reals().iter().map(|x| format!("{x:e}")).collect()))
            .collect(),
    }
}

pub fn construct(config: &RunConfig, params: &Params) -> CommandOutput {
    let construction = match build(params, config.cycles.control) {
        Ok(c) => c,
        Err(e) => return failure(Status::InvalidConfig, e),
    };
    let profile = construction.profile();
    let cycle: Vec<Vec<f64>> = construction.distinguished_cycle().iter().map(|z| z.to_reals()).collect();
    let r2 = params.r2();
    let results = json!({
        "map": maps::phi(&construction).info(),
        "peak_rate": params.peak_rate(),
        "epsilon_max": params.epsilon_max(),
        "epsilon": params.epsilon,
        "delta": params.delta,
        "harmonic": construction.harmonic(),
        "profile": {
            "center": profile.center(),
            "half_width": profile.half_width(),
            "slope_at_center": profile.slope(profile.center()),
            "slope_outer": params.delta,
        },
        "cutoff": { "support": [r2 / 9.0, 8.0 * r2 / 9.0], "plateau": [r2 / 3.0, 2.0 * r2 / 3.0] },
        "boundary_rotation": [9.0 * params.delta / 5.0, 2.0 * params.delta],
        "distinguished_cycle": cycle,
    });
    let table = Table {
        header: point_header(params.n),
        rows: cycle.iter().map(|p| p.iter().map(|x| format!("{x:e}")).collect()).collect(),
    };
    CommandOutput {
        message: format!(
            "pi/(2k) = {:.12}  epsilon_max = {:.12e}  epsilon = {:.6e}  {} cycle points",
            params.peak_rate(),
            params.epsilon_max(),
            params.epsilon,
            cycle.len()
        ),
        results,
        checks: Vec::new(),
        status: Status::Success,
        table: Some(table),
    }
}

fn failure(status: Status, message: String) -> CommandOutput {
    CommandOutput { results: json!({ "error": message }), checks: Vec::new(), status, table: None, message }
}

struct CyclesRun {
    space: CycleSpace,
    order: usize,
    map_name: String,
    seeds: usize,
}

fn run_cycles(config: &RunConfig, params: &Params) -> Result<CyclesRun, String> {
    let construction = build(params, config.cycles.control)?;
    let map = select_map(&construction, config.cycles.map);
    let order = config.cycles.order.unwrap_or(params.cycle_order());
    let opts = EnumerationOptions::from_params(params, config.grid_resolution);
    let space = cycle_space(map.as_ref(), order, &opts);
    for class in &space.classes {
        class
            .validate(map.as_ref(), params.newton_tol, params.dedup_radius)
            .map_err(|e| format!("enumerated class failed validation: {e}"))?;
    }
    let seeds = space.fixed_points.seeds;
    Ok(CyclesRun { space, order, map_name: map.info().name, seeds })
}

fn cycles_summary(run: &CyclesRun) -> Value {
    let fp = &run.space.fixed_points;
    json!({
        "map": run.map_name,
        "order": run.order,
        "count": run.space.count(),
        "classes": run.space.classes,
        "max_residual": run.space.classes.iter().map(|c| c.max_residual()).fold(0.0, f64::max),
        "fixed_point_count": fp.records.len(),
        "fixed_points": fp,
        "seeds": fp.seeds,
        "converged": fp.converged,
        "no_convergence": fp.no_convergence,
        "singular": fp.singular,
        "seed_failures": fp.failures.len(),
        "class_failures": run.space.failures,
    })
}

pub fn cycles(config: &RunConfig, params: &Params) -> CommandOutput {
    match run_cycles(config, params) {
        Ok(run) => CommandOutput {
            message: format!("{} classes of order {} for {}", run.space.count(), run.order, run.map_name),
            table: Some(class_table(params.n, &run.space)),
            results: cycles_summary(&run),
            checks: Vec::new(),
            status: Status::Success,
        },
        Err(e) => failure(Status::NumericalFailure, e),
    }
}

pub fn obstruct(config: &RunConfig, params: &Params) -> CommandOutput {
    let run = match run_cycles(config, params) {
        Ok(run) => run,
        Err(e) => return failure(Status::NumericalFailure, e),
    };
    let mut certificate = match parity_certificate(&run.space.classes, run.order, Some(params)) {
        Ok(c) => c,
        Err(e) => return failure(Status::NumericalFailure, e.to_string()),
    };
    certificate.enumeration = Some(EnumerationEvidence {
        map: run.map_name.clone(),
        grid_resolution: config.grid_resolution,
        seeds: run.seeds,
        newton_tol: params.newton_tol,
        dedup_radius: params.dedup_radius,
    });
    let status = match certificate.verdict {
        Verdict::NoSquareRoot => Status::Success,
        Verdict::Inconclusive => Status::Inconclusive,
    };
    CommandOutput {
        message: format!("{:?}: {} cycles of order {}", certificate.verdict, certificate.cycle_count, run.order),
        table: Some(class_table(params.n, &run.space)),
        results: json!({ "certificate": certificate, "enumeration": cycles_summary(&run) }),
        checks: Vec::new(),
        status,
    }
}

pub fn verify(config: &RunConfig, params: &Params) -> CommandOutput {
    let opts = SuiteOptions {
        seed: config.seed,
        samples: config.verify.samples,
        grid_resolution: config.grid_resolution,
        perturbation: config.perturbation(config.cycles.control),
        ..SuiteOptions::default()
    };
    let suite = if config.verify.quick { Suite::Quick } else { Suite::Full };
    let checks = match run_suite(params, &suite, &opts) {
        Ok(c) => c,
        Err(e) => return failure(Status::InvalidConfig, e.to_string()),
    };
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let vacuous = checks.iter().filter(|c| c.samples == 0).count();
    let table = Table {
        header: ["name", "samples", "max_defect", "tolerance", "pass"].map(String::from).to_vec(),
        rows: checks
            .iter()
            .map(|c| {
                vec![c.name.clone(), c.samples.to_string(), format!("{:e}", c.max_defect), format!("{:e}", c.tolerance), c.pass.to_string()]
            })
            .collect(),
    };
    CommandOutput {
        message: if failed.is_empty() {
            format!("{} checks passed{}", checks.len(), if vacuous > 0 { format!(" ({vacuous} vacuously)") } else { String::new() })
        } else {
            format!("{} of {} checks failed: {}", failed.len(), checks.len(), failed.join(", "))
        },
        results: json!({ "passed": failed.is_empty(), "failed": failed, "vacuous": vacuous }),
        status: if failed.is_empty() { Status::Success } else { Status::CheckFailure },
        checks,
        table: Some(table),
    }
}

/// One row of the sweep table.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub k: u32,
    pub scale: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub order: usize,
    pub count: Option<usize>,
    pub verdict: Option<Verdict>,
    /// `max |Φ(z) − z|` over the fixed sample.
    pub displacement: Option<f64>,
    /// `max 2ρ′(S(z))` over the same sample.
    pub max_rotation_rate: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

fn sweep_row(config: &RunConfig, base: &Params, k: u32, scale: f64) -> SweepRow {
    let start = Instant::now();
    let mut params = Params { k, ..*base };
    params.delta = base.delta * scale;
    let eps0 = if k == base.k { base.epsilon } else { 0.5 * hamroot_core::params::epsilon_max(base.radius, k) };
    params.epsilon = eps0 * scale;
    let order = params.cycle_order();
    let mut row = SweepRow {
        k,
        scale,
        delta: params.delta,
        epsilon: params.epsilon,
        order,
        count: None,
        verdict: None,
        displacement: None,
        max_rotation_rate: None,
        seconds: 0.0,
        error: None,
    };
    let result = (|| -> Result<(), String> {
        params.validate().map_err(|e| e.to_string())?;
        let construction = build(&params, config.sweep.control)?;
        let phi = maps::phi(&construction);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut displacement: f64 = 0.0;
        let mut rate: f64 = 0.0;
        for _ in 0..config.sweep.samples {
            let z = sample_ball(&mut rng, params.n, params.radius);
            let w = phi.apply(&z).map_err(|e| e.to_string())?;
            displacement = displacement.max(w.distance(&z));
            let s = hamroot_core::construction::weighted_action(&z);
            rate = rate.max(2.0 * construction.profile().slope(s));
        }
        row.displacement = Some(displacement);
        row.max_rotation_rate = Some(rate);
        let opts = EnumerationOptions::from_params(&params, config.grid_resolution);
        let space = cycle_space(phi.as_ref(), order, &opts);
        let cert = parity_certificate(&space.classes, order, Some(&params)).map_err(|e| e.to_string())?;
        row.count = Some(space.count());
        row.verdict = Some(cert.verdict);
        Ok(())
    })();
    row.error = result.err();
    row.seconds = start.elapsed().as_secs_f64();
    row
}

pub fn sweep(config: &RunConfig, params: &Params) -> CommandOutput {
    let ks = if config.sweep.k.is_empty() { vec![params.k] } else { config.sweep.k.clone() };
    let rows: Vec<SweepRow> = ks
        .iter()
        .flat_map(|&k| config.sweep.scales.iter().map(move |&s| (k, s)))
        .map(|(k, s)| sweep_row(config, params, k, s))
        .collect();
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    let table = Table {
        header: ["k", "scale", "delta", "epsilon", "order", "count", "verdict", "displacement", "max_rotation_rate", "error"]
            .map(String::from)
            .to_vec(),
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    r.scale.to_string(),
                    format!("{:e}", r.delta),
                    format!("{:e}", r.epsilon),
                    r.order.to_string(),
                    r.count.map(|c| c.to_string()).unwrap_or_default(),
                    r.verdict.map(|v| format!("{v:?}")).unwrap_or_default(),
                    fmt(r.displacement),
                    fmt(r.max_rotation_rate),
                    r.error.clone().unwrap_or_default(),
                ]
            })
            .collect(),
    };
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    CommandOutput {
        message: format!("{} sweep rows, {errors} with errors", rows.len()),
        results: json!({ "rows": rows }),
        checks: Vec::new(),
        status: if errors == 0 { Status::Success } else { Status::NumericalFailure },
        table: Some(table),
    }
}

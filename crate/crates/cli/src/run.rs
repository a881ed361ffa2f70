//! Command execution and artifact output.
//!
//! Per suite `<name>`: `<name>.suite.json`, and where data exists
//! `<name>.levels.csv` and `<name>.curve.csv`. Per run: `run_config.json`
//! and `summary.json`. Fuzz failures add `repro_<name>.json`, a sweep config
//! on the smallest failing shell subset.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::Context;
use monolab::field3d::{
    check_field, solve_conformal_laplace, write_snapshot, FieldCheck, PhiField, ScalarField3D,
};
use monolab::radial::{random_admissible, MetricConfig, Profile, RadialConformalMetric};
use monolab::report::{write_curve_csv, write_level_csv, CheckResult, CheckStatus, SuiteReport};
use monolab::schwarzschild::SchwarzschildSpec;
use monolab::suites::{metric_suite, schwarzschild_suite, SuiteRun, Tolerances};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{config_err, Command, FuzzDomain, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCheck {
    pub suite: String,
    pub check: String,
    pub worst_defect: Option<f64>,
    pub location_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    pub suites: usize,
    pub suites_passed: usize,
    pub suites_failed: usize,
    pub checks_passed: usize,
    pub checks_failed: usize,
    pub checks_skipped: usize,
    pub failures: Vec<FailedCheck>,
    #[serde(default)]
    pub repros: Vec<String>,
}

impl Summary {
    pub fn from_reports(command: &str, reports: &[SuiteReport]) -> Self {
        let mut s = Summary {
            command: command.to_string(),
            suites: reports.len(),
            ..Default::default()
        };
        for r in reports {
            if r.passed() {
                s.suites_passed += 1;
            } else {
                s.suites_failed += 1;
            }
            for c in &r.checks {
                match c.status {
                    CheckStatus::Pass => s.checks_passed += 1,
                    CheckStatus::Skipped => s.checks_skipped += 1,
                    CheckStatus::Fail => {
                        s.checks_failed += 1;
                        s.failures.push(FailedCheck {
                            suite: r.suite.clone(),
                            check: c.name.clone(),
                            worst_defect: c.worst_defect,
                            location_t: c.location_t,
                        });
                    }
                }
            }
        }
        s
    }

    pub fn passed(&self) -> bool {
        self.suites_failed == 0
    }

    fn print(&self) {
        println!(
            "{}: {} suites, {} passed, {} failed ({} checks passed, {} failed, {} skipped)",
            self.command,
            self.suites,
            self.suites_passed,
            self.suites_failed,
            self.checks_passed,
            self.checks_failed,
            self.checks_skipped
        );
        for f in &self.failures {
            let d = f
                .worst_defect
                .map(|v| format!("{v:.3e}"))
                .unwrap_or_else(|| "-".into());
            let t = f
                .location_t
                .map(|v| format!("{v}"))
                .unwrap_or_else(|| "-".into());
            println!("FAIL {}.{} defect {d} at t = {t}", f.suite, f.check);
        }
        for r in &self.repros {
            println!("repro written to {r}");
        }
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(create(path)?, value)?;
    Ok(())
}

/// A numerical error inside a suite is a failure of that suite.
fn error_report(name: &str, err: &monolab::Error) -> SuiteReport {
    let mut r = SuiteReport::new(name);
    r.push(CheckResult::new("error", CheckStatus::Fail, 0.0).with_detail(err.to_string()));
    r
}

fn emit_suite(dir: &Path, run: &SuiteRun) -> anyhow::Result<()> {
    let name = &run.report.suite;
    run.report
        .write_json(&dir.join(format!("{name}.suite.json")))?;
    if !run.levels.is_empty() {
        write_level_csv(
            create(&dir.join(format!("{name}.levels.csv")))?,
            &run.levels,
        )?;
    }
    if let Some(curve) = &run.curve {
        write_curve_csv(create(&dir.join(format!("{name}.curve.csv")))?, curve)?;
    }
    Ok(())
}

fn emit_result(
    dir: &Path,
    name: &str,
    result: monolab::Result<SuiteRun>,
) -> anyhow::Result<SuiteReport> {
    match result {
        Ok(run) => {
            emit_suite(dir, &run)?;
            Ok(run.report)
        }
        Err(e) => {
            let r = error_report(name, &e);
            r.write_json(&dir.join(format!("{name}.suite.json")))?;
            Ok(r)
        }
    }
}

/// Runs the configured command; returns the summary, already written.
pub fn execute(config: &RunConfig) -> anyhow::Result<Summary> {
    config.validate()?;
    let dir = &config.out;
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    if config.command != Command::Report {
        write_json(&dir.join("run_config.json"), config)?;
    }
    let mut repros = Vec::new();
    let reports = match config.command {
        Command::VerifySchwarzschild => verify_schwarzschild(config)?,
        Command::Sweep => sweep(config)?,
        Command::Fuzz => fuzz(config, &mut repros)?,
        Command::Solve3d => solve3d(config)?,
        Command::Report => collect_reports(dir)?,
    };
    let mut summary = Summary::from_reports(config.command.name(), &reports);
    summary.repros = repros;
    write_json(&dir.join("summary.json"), &summary)?;
    summary.print();
    Ok(summary)
}

fn verify_schwarzschild(config: &RunConfig) -> anyhow::Result<Vec<SuiteReport>> {
    let s = &config.schwarzschild;
    let mut specs = Vec::new();
    for &m in &s.masses {
        specs.push(SchwarzschildSpec::new(m, s.r0).map_err(|e| config_err(e.to_string()))?);
    }
    if s.two_ended {
        for &m in s.masses.iter().filter(|&&m| m > 0.0) {
            specs.push(SchwarzschildSpec::two_ended(m).map_err(|e| config_err(e.to_string()))?);
        }
    }
    specs
        .iter()
        .map(|&spec| {
            let name = if spec.is_two_ended() {
                format!("schwarzschild_m{}_two_ended", spec.m)
            } else {
                format!("schwarzschild_m{}_r{}", spec.m, spec.r0)
            };
            emit_result(
                &config.out,
                &name,
                schwarzschild_suite(spec, &config.tolerances),
            )
        })
        .collect()
}

fn sweep(config: &RunConfig) -> anyhow::Result<Vec<SuiteReport>> {
    let (name, metric) = match (&config.metric, config.seed) {
        (Some(m), _) => (
            "sweep".to_string(),
            RadialConformalMetric::from_config(m.clone()).map_err(|e| config_err(e.to_string()))?,
        ),
        (None, Some(seed)) => {
            let spec = config.fuzz.metric_spec(seed);
            (
                format!("sweep_seed{seed}"),
                random_admissible(&spec).map_err(|e| config_err(e.to_string()))?,
            )
        }
        (None, None) => unreachable!("validated"),
    };
    let grid = config.t_grid.points();
    Ok(vec![emit_result(
        &config.out,
        &name,
        metric_suite(&name, &metric, &grid, &config.tolerances),
    )?])
}

struct FuzzCase {
    seed: u64,
    name: String,
    metric: Option<MetricConfig>,
    run: monolab::Result<SuiteRun>,
}

fn fuzz_case(config: &RunConfig, seed: u64) -> FuzzCase {
    let domain = match config.fuzz.domain {
        FuzzDomain::Exterior => "exterior",
        FuzzDomain::Punctured => "punctured",
    };
    let name = format!("fuzz_{domain}_seed{seed}");
    let metric = match random_admissible(&config.fuzz.metric_spec(seed)) {
        Ok(m) => m,
        Err(e) => {
            return FuzzCase {
                seed,
                name,
                metric: None,
                run: Err(e),
            }
        }
    };
    let grid = config.t_grid.points();
    let run = metric_suite(&name, &metric, &grid, &config.tolerances);
    FuzzCase {
        seed,
        name,
        metric: Some(metric.config().clone()),
        run,
    }
}

fn fuzz(config: &RunConfig, repros: &mut Vec<String>) -> anyhow::Result<Vec<SuiteReport>> {
    let seeds = config.fuzz.seeds;
    let cases: Vec<_> = (seeds.first..=seeds.last)
        .into_par_iter()
        .map(|seed| fuzz_case(config, seed))
        .collect();
    let grid = config.t_grid.points();
    let mut reports = Vec::with_capacity(cases.len());
    for FuzzCase {
        seed,
        name,
        metric,
        run,
    } in cases
    {
        let failed = !matches!(&run, Ok(r) if r.report.passed());
        let mut run = run;
        if let Ok(r) = &mut run {
            r.report.seed = Some(seed);
        }
        let report = emit_result(&config.out, &name, run)?;
        if failed {
            if let Some(metric) = metric {
                let small = minimize(metric, |m| fails(m, &grid, &config.tolerances));
                let repro = RunConfig {
                    metric: Some(small),
                    seed: None,
                    out: config.out.join(format!("repro_{name}")),
                    ..RunConfig {
                        command: Command::Sweep,
                        ..config.clone()
                    }
                };
                let path = config.out.join(format!("repro_{name}.json"));
                write_json(&path, &repro)?;
                repros.push(path.display().to_string());
            }
        }
        reports.push(report);
    }
    Ok(reports)
}

fn fails(metric: &MetricConfig, grid: &[f64], tol: &Tolerances) -> bool {
    let Ok(m) = RadialConformalMetric::from_config(metric.clone()) else {
        return false;
    };
    !matches!(metric_suite("repro", &m, grid, tol), Ok(r) if r.report.passed())
}

/// Drops shells one at a time while the failure persists.
pub fn minimize(
    mut metric: MetricConfig,
    still_fails: impl Fn(&MetricConfig) -> bool,
) -> MetricConfig {
    loop {
        let Profile::ShellSuperposition { core, shells } = &metric.profile else {
            return metric;
        };
        let smaller = (0..shells.len()).find_map(|i| {
            let mut rest = shells.clone();
            rest.remove(i);
            let candidate = MetricConfig {
                profile: Profile::ShellSuperposition {
                    core: *core,
                    shells: rest,
                },
                ..metric.clone()
            };
            still_fails(&candidate).then_some(candidate)
        });
        match smaller {
            Some(m) => metric = m,
            None => return metric,
        }
    }
}

fn field_name(field: &PhiField) -> String {
    match field {
        PhiField::Flat => "field_flat".into(),
        PhiField::Schwarzschild { mass } => format!("field_schwarzschild_m{mass}"),
        PhiField::PointShells { shells } => format!("field_shells{}", shells.len()),
    }
}

fn field_report(
    name: &str,
    f: &ScalarField3D,
    check: &FieldCheck,
    config: &RunConfig,
) -> SuiteReport {
    let mut report = SuiteReport::new(name);
    let fit = &check.fit;
    let closed = match &config.field.field {
        PhiField::Flat => Some(f.r0),
        PhiField::Schwarzschild { mass } => Some(f.r0 + 0.5 * mass),
        PhiField::PointShells { .. } => None,
    };
    if let Some(c) = closed {
        report.push(
            CheckResult::from_defect(
                "capacity",
                (fit.capacity / c - 1.0).abs(),
                None,
                config.field.tol_capacity,
            )
            .with_detail(format!("c = {:.9e}, closed form {c:.9e}", fit.capacity)),
        );
    }
    for r in check.results("field") {
        report.push(r);
    }
    report.push(
        CheckResult::new(
            "solver_residual",
            CheckStatus::from_bool(f.residual <= config.field.solve.tol),
            config.field.solve.tol,
        )
        .with_detail(format!(
            "{:.3e} after {} iterations, m/c = {:.9}",
            f.residual,
            f.iterations,
            fit.ratio()
        )),
    );
    report
}

fn solve3d(config: &RunConfig) -> anyhow::Result<Vec<SuiteReport>> {
    let fr = &config.field;
    let name = field_name(&fr.field);
    let dir = &config.out;
    let f = match solve_conformal_laplace(&fr.field, fr.solve) {
        Ok(f) => f,
        Err(e @ monolab::Error::BadExcision { .. }) => return Err(config_err(e.to_string())),
        Err(e) => {
            let r = error_report(&name, &e);
            r.write_json(&dir.join(format!("{name}.suite.json")))?;
            return Ok(vec![r]);
        }
    };
    write_snapshot(create(&dir.join(format!("{name}.snapshot.bin")))?, &f)?;
    let check = match check_field(&f, &fr.t_grid, fr.coarea, fr.tol_estimator) {
        Ok(c) => c,
        Err(e) => {
            let r = error_report(&name, &e);
            r.write_json(&dir.join(format!("{name}.suite.json")))?;
            return Ok(vec![r]);
        }
    };
    write_json(&dir.join(format!("{name}.fit.json")), &check.fit)?;
    let levels: Vec<_> = check.samples.iter().map(|s| s.level_sample()).collect();
    write_level_csv(create(&dir.join(format!("{name}.levels.csv")))?, &levels)?;
    write_curve_csv(
        create(&dir.join(format!("{name}.curve.csv")))?,
        &check.curve,
    )?;
    let report = field_report(&name, &f, &check, config);
    report.write_json(&dir.join(format!("{name}.suite.json")))?;
    Ok(vec![report])
}

fn collect_reports(dir: &Path) -> anyhow::Result<Vec<SuiteReport>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| config_err(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(".suite.json"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(config_err(format!("no suite results in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| SuiteReport::read_json(p).map_err(|e| config_err(format!("{}: {e}", p.display()))))
        .collect()
}

//! Command execution and artifact writing.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use ladder_ent::analysis::{compare_exact_rvb_with, fit_scaling, odd_even_report, CompareOptions, ComparisonRecord, ScalingFit};
use ladder_ent::rvb::{build_rvb_enumerated, build_rvb_recursive, RecursionCache, MAX_RVB_STATE_SITES};
use ladder_ent::{
    build_ladder, compute_ggm, ground_state, Error, GgmResult, HamiltonianSpec, LadderGeometry, LanczosOptions, Result,
    StateVector, Strategy,
};

use crate::checks::{self, CheckOutcome};
use crate::config::{Command, Model, RunConfig, Target};

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub legs: usize,
    pub rungs: usize,
    pub boundary: String,
    pub n: usize,
    pub model: String,
    pub delta: f64,
    pub energy: Option<f64>,
    pub ggm: f64,
    pub lambda_sq: f64,
    pub strategy: String,
    pub argmax_sites: String,
    pub degeneracy_warning: bool,
}

/// A geometry left out of a scan, with the reason.
#[derive(Debug, Clone, Serialize)]
pub struct Skip {
    pub legs: usize,
    pub rungs: usize,
    pub reason: String,
}

/// Everything a run produced, before it is written out.
#[derive(Debug, Default)]
pub struct Report {
    pub rows: Vec<Row>,
    pub records: Vec<(String, Value)>,
    pub skipped: Vec<Skip>,
    pub comparisons: Vec<ComparisonRecord>,
    pub checks: Vec<CheckOutcome>,
    pub extra: BTreeMap<String, Value>,
    pub text_files: Vec<(String, String)>,
}

impl Report {
    /// `validate` found an oracle mismatch.
    pub fn failed_checks(&self) -> bool {
        self.checks.iter().any(|c| !c.passed)
    }
}

fn lanczos_options(cfg: &RunConfig) -> LanczosOptions {
    LanczosOptions {
        tol: cfg.tol,
        seed: cfg.seed,
        ..LanczosOptions::default()
    }
}

/// Geometries of the config's grid, minus the ones that cannot exist.
fn geometries(cfg: &RunConfig, rvb: bool) -> (Vec<LadderGeometry>, Vec<Skip>) {
    let mut keep = Vec::new();
    let mut skipped = Vec::new();
    for &legs in &cfg.legs {
        for &rungs in &cfg.rungs {
            let skip = |reason: String| Skip { legs, rungs, reason };
            let g = match build_ladder(legs, rungs, cfg.boundary) {
                Ok(g) => g,
                Err(e) => {
                    skipped.push(skip(e.to_string()));
                    continue;
                }
            };
            if rvb {
                let reason = if rungs % 2 == 1 {
                    Some("RVB states need an even number of rungs")
                } else if g.n() % 2 == 1 {
                    Some("odd number of sites has no dimer covering")
                } else if !g.is_bipartite() {
                    Some("not bipartite")
                } else {
                    None
                };
                if let Some(r) = reason {
                    skipped.push(skip(r.into()));
                    continue;
                }
            }
            keep.push(g);
        }
    }
    (keep, skipped)
}

fn sites_text(r: &GgmResult) -> String {
    r.argmax.sites().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";")
}

fn record_name(prefix: &str, g: &LadderGeometry) -> String {
    format!("{prefix}_{}_L{}_M{}", g.boundary(), g.legs(), g.rungs())
}

fn row(g: &LadderGeometry, model: Model, delta: f64, energy: Option<f64>, ggm: &GgmResult, deg: bool) -> Row {
    Row {
        legs: g.legs(),
        rungs: g.rungs(),
        boundary: g.boundary().to_string(),
        n: g.n(),
        model: model.as_str().into(),
        delta,
        energy,
        ggm: ggm.value,
        lambda_sq: ggm.lambda_sq,
        strategy: ggm.strategy.to_string(),
        argmax_sites: sites_text(ggm),
        degeneracy_warning: deg,
    }
}

fn exact_entry(g: &LadderGeometry, cfg: &RunConfig) -> Result<(Row, Value)> {
    let spec = HamiltonianSpec::new(g.clone(), cfg.j, cfg.delta)?;
    let gs = ground_state(&spec, &lanczos_options(cfg))?;
    let ggm = compute_ggm(&gs.state, cfg.strategy, Some(g))?;
    let record = json!({
        "legs": g.legs(), "rungs": g.rungs(), "boundary": g.boundary(), "n": g.n(),
        "model": "exact", "j": cfg.j, "delta": cfg.delta,
        "energy": gs.energy, "iterations": gs.iterations, "residual": gs.residual,
        "degeneracy_warning": gs.degeneracy_warning, "next_energy": gs.next_energy,
        "ggm": ggm,
    });
    Ok((row(g, Model::Exact, cfg.delta, Some(gs.energy), &ggm, gs.degeneracy_warning), record))
}

fn rvb_entry(g: &LadderGeometry, cfg: &RunConfig, model: Model, cache: &RecursionCache) -> Result<(Row, Value)> {
    let energy_of = |psi: &StateVector| -> Result<f64> {
        HamiltonianSpec::new(g.clone(), cfg.j, cfg.delta)?.operator().expectation(psi)
    };
    let (ggm, energy, coverings) = if model == Model::Rvb || g.n() <= MAX_RVB_STATE_SITES {
        let state = if model == Model::Rvb {
            build_rvb_enumerated(g)?
        } else {
            build_rvb_recursive(g)?
        };
        let psi = state.normalized()?;
        (compute_ggm(&psi, cfg.strategy, Some(g))?, Some(energy_of(&psi)?), Some(state.covering_count))
    } else {
        if cfg.strategy != Strategy::Restricted2xL {
            return Err(Error::Resource(format!(
                "{} is too large for an explicit state; use the restricted strategy",
                g.label()
            )));
        }
        (cache.restricted_ggm(g)?, None, None)
    };
    let record = json!({
        "legs": g.legs(), "rungs": g.rungs(), "boundary": g.boundary(), "n": g.n(),
        "model": model.as_str(), "j": cfg.j, "delta": cfg.delta,
        "energy": energy, "covering_count": coverings, "ggm": ggm,
    });
    Ok((row(g, model, cfg.delta, energy, &ggm, false), record))
}

fn model_rows(cfg: &RunConfig, model: Model, report: &mut Report) -> Result<()> {
    let (geoms, skipped) = geometries(cfg, model != Model::Exact);
    report.skipped.extend(skipped);
    let cache = RecursionCache::new();
    let results: Vec<Result<(Row, Value)>> = geoms
        .par_iter()
        .map(|g| match model {
            Model::Exact => exact_entry(g, cfg),
            _ => rvb_entry(g, cfg, model, &cache),
        })
        .collect();
    for (g, r) in geoms.iter().zip(results) {
        let (row, rec) = r?;
        report.rows.push(row);
        report.records.push((record_name(model.as_str(), g), rec));
    }
    report.rows.sort_by(|a, b| (a.legs, a.rungs, &a.boundary).cmp(&(b.legs, b.rungs, &b.boundary)));
    Ok(())
}

fn compare(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let (geoms, skipped) = geometries(cfg, true);
    report.skipped.extend(skipped);
    let opts = CompareOptions {
        delta_e_per_site: cfg.delta_e_per_site,
        strategy: cfg.strategy,
        lanczos: lanczos_options(cfg),
    };
    let results: Vec<Result<ComparisonRecord>> = geoms.par_iter().map(|g| compare_exact_rvb_with(g, cfg.j, &opts)).collect();
    for (g, r) in geoms.iter().zip(results) {
        let rec = r?;
        report.records.push((record_name("compare", g), serde_json::to_value(&rec)?));
        report.comparisons.push(rec);
    }
    if let Some(best) = report.comparisons.iter().max_by(|a, b| a.fidelity.total_cmp(&b.fidelity)) {
        report.extra.insert("max_fidelity".into(), json!(best.fidelity));
    }
    if let Some(best) = report.comparisons.iter().min_by(|a, b| a.delta_e.total_cmp(&b.delta_e)) {
        report.extra.insert("min_delta_e".into(), json!(best.delta_e));
    }
    Ok(())
}

/// Fit points per `(legs, boundary, model)`: even rung counts from
/// `min_rungs` up.
pub fn fit_groups(rows: &[Row], min_rungs: usize) -> BTreeMap<(usize, String, String), Vec<(usize, f64)>> {
    let mut groups: BTreeMap<(usize, String, String), Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.rungs % 2 == 0 && r.rungs >= min_rungs) {
        groups
            .entry((r.legs, r.boundary.clone(), r.model.clone()))
            .or_default()
            .push((r.n, r.ggm));
    }
    groups
}

fn fit(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let rows: Vec<Row> = match &cfg.input {
        Some(path) => read_rows(path)?,
        None => {
            model_rows(cfg, cfg.model, report)?;
            report.rows.clone()
        }
    };
    let mut fits_json = Vec::new();
    let mut by_model: BTreeMap<(String, String), BTreeMap<usize, ScalingFit>> = BTreeMap::new();
    for ((legs, boundary, model), points) in fit_groups(&rows, cfg.fit_min_rungs) {
        let entry = match fit_scaling(&points, cfg.sign.hint(legs)) {
            Ok(f) => {
                let v = json!({"legs": legs, "boundary": boundary, "model": model, "fit": f});
                by_model.entry((boundary, model)).or_default().insert(legs, f);
                v
            }
            Err(e) => json!({
                "legs": legs, "boundary": boundary, "model": model,
                "error": {"category": e.category(), "message": e.to_string()},
            }),
        };
        fits_json.push(entry);
    }
    report.extra.insert("fits".into(), Value::Array(fits_json));
    let mut parity = Vec::new();
    for ((boundary, model), fits) in &by_model {
        match odd_even_report(fits) {
            Ok(r) => {
                report
                    .text_files
                    .push((format!("parity_{model}_{boundary}.txt"), r.to_text()));
                parity.push(json!({"boundary": boundary, "model": model, "report": r}));
            }
            Err(e) => parity.push(json!({"boundary": boundary, "model": model, "error": e.to_string()})),
        }
    }
    report.extra.insert("parity".into(), Value::Array(parity));
    Ok(())
}

fn validate(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let opts = lanczos_options(cfg);
    let want = |t: Target| cfg.what == t || cfg.what == Target::All;
    if want(Target::Spectral) {
        report.checks.push(checks::spectral_oracle(cfg.max_spins, &opts)?);
    }
    if want(Target::RvbRecursion) {
        report.checks.extend(checks::rvb_recursion_oracle(cfg.max_spins)?);
    }
    if want(Target::Restricted) {
        report.checks.push(checks::restricted_soundness(cfg.max_spins, &opts)?);
    }
    if want(Target::Identities) {
        let (outcome, all) = checks::identity_survey(cfg.max_spins)?;
        report.checks.push(outcome);
        report.extra.insert("identities".into(), serde_json::to_value(all)?);
    }
    Ok(())
}

/// Runs the configured command in a pool of `cfg.jobs` threads.
pub fn execute(cfg: &RunConfig) -> Result<Report> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Resource(e.to_string()))?;
    pool.install(|| {
        let mut report = Report::default();
        match cfg.command {
            Command::ExactGgm => model_rows(cfg, Model::Exact, &mut report)?,
            Command::RvbGgm | Command::Scan => model_rows(cfg, cfg.model, &mut report)?,
            Command::Compare => compare(cfg, &mut report)?,
            Command::Fit => fit(cfg, &mut report)?,
            Command::Validate => validate(cfg, &mut report)?,
        }
        Ok(report)
    })
}

pub fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| Error::Format(e.to_string())))
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub const RESULTS_HEADER: &str = "legs,rungs,boundary,n,model,delta,energy,ggm,lambda_sq,strategy,argmax_sites,degeneracy_warning";

/// Writes the report's artifacts under `out`; returns their relative paths.
pub fn write_artifacts(out: &Path, report: &Report) -> Result<Vec<String>> {
    let mut written = Vec::new();
    if !report.rows.is_empty() {
        write_csv(&out.join("results.csv"), &report.rows)?;
        written.push("results.csv".into());
        let mut plots: BTreeMap<String, Vec<&Row>> = BTreeMap::new();
        for r in &report.rows {
            plots
                .entry(format!("ggm_{}_{}_L{}.dat", r.model, r.boundary, r.legs))
                .or_default()
                .push(r);
        }
        fs::create_dir_all(out.join("plot"))?;
        for (name, rows) in plots {
            let mut text = String::from("# n ggm\n");
            for r in rows {
                text.push_str(&format!("{} {}\n", r.n, r.ggm));
            }
            fs::write(out.join("plot").join(&name), text)?;
            written.push(format!("plot/{name}"));
        }
    }
    if !report.comparisons.is_empty() {
        write_csv(&out.join("comparisons.csv"), &report.comparisons)?;
        written.push("comparisons.csv".into());
    }
    if !report.records.is_empty() {
        fs::create_dir_all(out.join("records"))?;
        for (name, rec) in &report.records {
            fs::write(out.join("records").join(format!("{name}.json")), serde_json::to_string_pretty(rec)?)?;
            written.push(format!("records/{name}.json"));
        }
    }
    if !report.checks.is_empty() {
        let v = json!({"checks": report.checks, "identities": report.extra.get("identities")});
        fs::write(out.join("validate.json"), serde_json::to_string_pretty(&v)?)?;
        written.push("validate.json".into());
    }
    if let Some(f) = report.extra.get("fits") {
        let v = json!({"fits": f, "parity": report.extra.get("parity")});
        fs::write(out.join("fits.json"), serde_json::to_string_pretty(&v)?)?;
        written.push("fits.json".into());
    }
    for (name, text) in &report.text_files {
        fs::write(out.join(name), text)?;
        written.push(name.clone());
    }
    Ok(written)
}

pub fn config_hash(cfg: &RunConfig) -> String {
    Sha256::digest(cfg.hash_text().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Manifest contents; written for every run, failed or not.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: String,
    pub config_hash: String,
    pub wall_time_s: f64,
    pub status: String,
    pub error_category: Option<String>,
    pub error: Option<String>,
    pub skipped: Vec<Skip>,
    pub outputs: Vec<String>,
    pub summary: BTreeMap<String, Value>,
}

pub struct RunStatus {
    pub exit_code: i32,
    pub error_json: Option<String>,
}

/// Executes `cfg` and writes every artifact plus `manifest.json` into
/// `cfg.out`, creating it if needed.
pub fn run_to_dir(cfg: &RunConfig) -> RunStatus {
    let start = Instant::now();
    let out: PathBuf = cfg.out.clone();
    if let Err(e) = fs::create_dir_all(&out) {
        let text = json!({"category": "io", "message": e.to_string()}).to_string();
        return RunStatus {
            exit_code: 3,
            error_json: Some(text),
        };
    }
    let result = execute(cfg).and_then(|report| {
        let outputs = write_artifacts(&out, &report)?;
        Ok((report, outputs))
    });
    let mut manifest = Manifest {
        tool: "ladder-ent",
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command.as_str().into(),
        config: cfg.to_text(),
        config_hash: config_hash(cfg),
        wall_time_s: 0.0,
        status: "ok".into(),
        error_category: None,
        error: None,
        skipped: Vec::new(),
        outputs: Vec::new(),
        summary: BTreeMap::new(),
    };
    let mut status = RunStatus {
        exit_code: 0,
        error_json: None,
    };
    match result {
        Ok((report, outputs)) => {
            manifest.skipped = report.skipped.clone();
            manifest.outputs = outputs;
            manifest.summary = report
                .extra
                .iter()
                .filter(|(k, _)| !matches!(k.as_str(), "fits" | "parity" | "identities"))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            if report.failed_checks() {
                manifest.status = "failed-checks".into();
                status.exit_code = 1;
            }
        }
        Err(e) => {
            let err = json!({"category": e.category(), "message": e.to_string()});
            manifest.status = "error".into();
            manifest.error_category = Some(e.category().into());
            manifest.error = Some(e.to_string());
            let text = serde_json::to_string(&err).unwrap_or_default();
            let _ = fs::write(out.join("error.json"), &text);
            status.exit_code = 3;
            status.error_json = Some(text);
        }
    }
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    if let Ok(text) = serde_json::to_string_pretty(&manifest) {
        let _ = fs::write(out.join("manifest.json"), text);
    }
    status
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(legs: usize, rungs: usize, ggm: f64) -> Row {
        Row {
            legs,
            rungs,
            boundary: "periodic".into(),
            n: legs * rungs,
            model: "rvb".into(),
            delta: 1.0,
            energy: None,
            ggm,
            lambda_sq: 1.0 - ggm,
            strategy: "restricted".into(),
            argmax_sites: "0;1".into(),
            degeneracy_warning: false,
        }
    }

    #[test]
    fn fit_groups_drop_odd_and_small_rungs() {
        let rows: Vec<Row> = (2..=9).map(|m| row(2, m, 0.1 * m as f64)).chain([row(1, 8, 0.3)]).collect();
        let g = fit_groups(&rows, 4);
        assert_eq!(g.len(), 2);
        let two = &g[&(2, "periodic".to_string(), "rvb".to_string())];
        assert_eq!(two.iter().map(|p| p.0).collect::<Vec<_>>(), vec![8, 12, 16]);
    }

    #[test]
    fn rvb_geometries_skip_odd_rungs_and_short_rings() {
        let mut cfg = RunConfig::new(Command::RvbGgm);
        cfg.legs = vec![2];
        cfg.rungs = vec![2, 3, 4];
        let (keep, skipped) = geometries(&cfg, true);
        assert_eq!(keep.len(), 1);
        assert_eq!(skipped.iter().map(|s| s.rungs).collect::<Vec<_>>(), vec![2, 3]);
        let (keep, _) = geometries(&cfg, false);
        assert_eq!(keep.len(), 2);
    }

    #[test]
    fn csv_round_trip_keeps_blank_energy() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut rows = vec![row(1, 4, 0.25), row(2, 4, 0.3)];
        rows[1].energy = Some(-2.5);
        write_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), RESULTS_HEADER);
        assert_eq!(read_rows(&path).unwrap(), rows);
    }

    #[test]
    fn config_hash_ignores_output_location() {
        let mut a = RunConfig::new(Command::Scan);
        a.legs = vec![2];
        a.rungs = vec![4];
        let mut b = a.clone();
        b.out = "elsewhere".into();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.rungs = vec![6];
        assert_ne!(config_hash(&a), config_hash(&b));
    }
}

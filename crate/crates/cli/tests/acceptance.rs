//! Acceptance criteria 1 to 9. Each test prints one `PASS`/`FAIL` line.
//!
//! The tests share one lock so that wall-time limits are measured without
//! other criteria competing for the same cores.

use std::io::Write;
use std::process::Command as Process;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use ladder_ent::analysis::fit_scaling;
use ladder_ent::{build_ladder, compute_ggm, ground_state, Boundary, HamiltonianSpec, LanczosOptions, Strategy};
use ladder_ent_cli::checks;
use ladder_ent_cli::config::{Command, Model, RunConfig, SignRule};
use ladder_ent_cli::run::{execute, fit_groups, Row};

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Written to the stderr handle directly: the harness only captures the
/// print macros, so the line shows up without `--nocapture`.
fn verdict(id: u32, name: &str, ok: bool, detail: String) {
    let line = format!("criterion {id} ({name}): {} {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

fn within(elapsed: Duration, secs: u64) -> bool {
    elapsed <= Duration::from_secs(secs)
}

fn scan(model: Model, legs: &[usize], rungs: &[usize], boundary: Boundary) -> Vec<Row> {
    let mut cfg = RunConfig::new(Command::Scan);
    cfg.model = model;
    cfg.legs = legs.to_vec();
    cfg.rungs = rungs.to_vec();
    cfg.boundary = boundary;
    cfg.validate().unwrap();
    execute(&cfg).unwrap().rows
}

/// Consecutive even-rung GGM values per leg count, and whether every step
/// moves in the wanted direction (ties allowed).
fn monotone(rows: &[Row], legs: usize, up: bool) -> (bool, Vec<(usize, f64)>) {
    let series: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| r.legs == legs && r.rungs % 2 == 0)
        .map(|r| (r.rungs, r.ggm))
        .collect();
    let ok = series.len() >= 3
        && series.windows(2).all(|w| {
            let d = w[1].1 - w[0].1;
            if up {
                d >= -1e-12
            } else {
                d <= 1e-12
            }
        });
    (ok, series)
}

fn show(series: &[(usize, f64)]) -> String {
    series.iter().map(|(m, g)| format!("M={m}:{g:.5}")).collect::<Vec<_>>().join(" ")
}

#[test]
fn criterion_1_singlet_baseline() {
    let _g = serial();
    let t = Instant::now();
    let g = build_ladder(1, 2, Boundary::Open).unwrap();
    let gs = ground_state(&HamiltonianSpec::heisenberg(g.clone()), &LanczosOptions::default()).unwrap();
    let ggm = compute_ggm(&gs.state, Strategy::Full, Some(&g)).unwrap().value;
    let elapsed = t.elapsed();
    let ok = (ggm - 0.5).abs() <= 1e-12 && elapsed < Duration::from_secs(1);
    verdict(1, "singlet baseline", ok, format!("ggm={ggm:.15} time={elapsed:.2?}"));
}

#[test]
fn criterion_2_spectral_oracle() {
    let _g = serial();
    let t = Instant::now();
    let out = checks::spectral_oracle(12, &LanczosOptions::default()).unwrap();
    let elapsed = t.elapsed();
    let ok = out.passed && out.cases > 0 && within(elapsed, 120);
    verdict(
        2,
        "spectral oracle",
        ok,
        format!("cases={} worst={:.2e} time={elapsed:.1?} failures={:?}", out.cases, out.worst, out.failures),
    );
}

#[test]
fn criterion_3_rvb_recursion_oracle() {
    let _g = serial();
    let t = Instant::now();
    let outs = checks::rvb_recursion_oracle(20).unwrap();
    let elapsed = t.elapsed();
    let ok = outs.iter().all(|o| o.passed && o.cases > 0) && within(elapsed, 600);
    let detail = outs
        .iter()
        .map(|o| format!("{}: cases={} worst={:.2e} {:?}", o.name, o.cases, o.worst, o.failures))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(3, "rvb recursion oracle", ok, format!("{detail}; time={elapsed:.1?}"));
}

#[test]
fn criterion_4_odd_leg_trend() {
    let _g = serial();
    let even = |max_n: usize, legs: usize| -> Vec<usize> { (4..=max_n / legs).step_by(2).collect() };
    let mut ok = true;
    let mut detail = Vec::new();
    for legs in [1, 3] {
        for model in [Model::Exact, Model::Rvb] {
            let rows = scan(model, &[legs], &even(24, legs), Boundary::PeriodicAlongLegs);
            let (up, series) = monotone(&rows, legs, true);
            ok &= up;
            detail.push(format!("L={legs} {}: {}", model.as_str(), show(&series)));
        }
    }
    verdict(4, "odd legs nondecreasing", ok, detail.join(" | "));
}

#[test]
fn criterion_5_even_leg_trend() {
    let _g = serial();
    let rungs: Vec<usize> = (4..=12).step_by(2).collect();
    let mut ok = true;
    let mut detail = Vec::new();
    for model in [Model::Exact, Model::Rvb] {
        let rows = scan(model, &[2], &rungs, Boundary::PeriodicAlongLegs);
        let (down, series) = monotone(&rows, 2, false);
        ok &= down;
        detail.push(format!("L=2 {}: {}", model.as_str(), show(&series)));
    }
    verdict(5, "even legs nonincreasing", ok, detail.join(" | "));
}

#[test]
fn criterion_6_ansatz_quality() {
    let _g = serial();
    let t = Instant::now();
    let mut records = Vec::new();
    for boundary in [Boundary::Open, Boundary::PeriodicAlongLegs] {
        for (legs, max_rungs) in [(2, 8), (3, 5)] {
            let mut cfg = RunConfig::new(Command::Compare);
            cfg.legs = vec![legs];
            cfg.rungs = (2..=max_rungs).collect();
            cfg.boundary = boundary;
            records.extend(execute(&cfg).unwrap().comparisons);
        }
    }
    let elapsed = t.elapsed();
    let max_f = records.iter().map(|r| r.fidelity).fold(f64::NAN, f64::max);
    let min_de = records.iter().map(|r| r.delta_e).fold(f64::NAN, f64::min);
    let table = records
        .iter()
        .map(|r| format!("{}x{} {}: F={:.4} dE={:.4}", r.legs, r.rungs, r.boundary, r.fidelity, r.delta_e))
        .collect::<Vec<_>>()
        .join(", ");
    let ok = max_f >= 0.88 && min_de <= 0.05 && within(elapsed, 1800);
    verdict(
        6,
        "ansatz quality",
        ok,
        format!("max F={max_f:.4} min dE={min_de:.4} time={elapsed:.1?} [{table}]"),
    );
}

#[test]
fn criterion_7_restricted_soundness() {
    let _g = serial();
    let out = checks::restricted_soundness(16, &LanczosOptions::default()).unwrap();
    let ok = out.passed && out.cases > 0;
    verdict(
        7,
        "restricted strategy soundness",
        ok,
        format!("cases={} worst={:.3e} violations={:?}", out.cases, out.worst, out.notes),
    );
}

#[test]
fn criterion_8_scaling_fits() {
    let _g = serial();
    let truth = |n: usize| 0.40 + 0.30 * (n as f64).powf(-1.2);
    let points: Vec<(usize, f64)> = [8, 12, 16, 20, 24, 32].iter().map(|&n| (n, truth(n))).collect();
    let f = fit_scaling(&points, None).unwrap();
    let synthetic = (f.g_c - 0.40).abs() <= 1e-6 && (f.k - 0.30).abs() <= 1e-6 && (f.x - 1.2).abs() <= 1e-6;
    let mut detail = vec![format!(
        "synthetic G_c={:.9} k={:.9} x={:.9} sign={}",
        f.g_c,
        f.k,
        f.x,
        f.sign.symbol()
    )];

    // RVB ladders up to 20 rungs, as in the large-ladder scaling study. The
    // smallest sizes sit outside the power-law regime, so fits start at
    // M = 8; the all-sizes fits are printed for comparison.
    let mut cfg = RunConfig::new(Command::Fit);
    cfg.model = Model::RvbRecursive;
    cfg.legs = vec![1, 2, 3, 4];
    cfg.rungs = (4..=20).step_by(2).collect();
    cfg.boundary = Boundary::PeriodicAlongLegs;
    cfg.sign = SignRule::LegParity;
    cfg.fit_min_rungs = 8;
    cfg.validate().unwrap();
    let report = execute(&cfg).unwrap();
    for ((legs, _, _), pts) in fit_groups(&report.rows, 4) {
        let all = fit_scaling(&pts, cfg.sign.hint(legs));
        println!("all sizes, L={legs}: {:?}", all.map(|f| (f.g_c, f.x, f.residual)));
    }
    let mut real = true;
    for ((legs, _, _), pts) in fit_groups(&report.rows, cfg.fit_min_rungs) {
        match fit_scaling(&pts, cfg.sign.hint(legs)) {
            Ok(f) => {
                real &= f.converged && f.residual < 1e-3;
                detail.push(format!(
                    "L={legs}: G_c={:.5} k={:.4e} x={:.4} sign={} rms={:.2e} converged={}",
                    f.g_c,
                    f.k,
                    f.x,
                    f.sign.symbol(),
                    f.residual,
                    f.converged
                ));
            }
            Err(e) => {
                real = false;
                detail.push(format!("L={legs}: {e}"));
            }
        }
    }
    let parity = report.text_files.iter().find(|(name, _)| name.starts_with("parity_"));
    let emitted = parity.is_some_and(|(_, text)| !text.is_empty());
    if let Some((_, text)) = parity {
        println!("{text}");
    }
    let ok = synthetic && real && emitted;
    verdict(8, "scaling fits", ok, format!("{} parity_report={emitted}", detail.join("; ")));
}

#[test]
fn criterion_9_determinism() {
    let _g = serial();
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_ladder-ent");
    let mut csvs = Vec::new();
    for (i, jobs) in ["1", "2"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let status = Process::new(bin)
            .args(["scan", "--model", "exact", "--legs", "1,2,3", "--rungs", "2..6"])
            .args(["--boundary", "open", "--seed", "7", "--jobs", jobs])
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        csvs.push(std::fs::read(out.join("results.csv")).unwrap());
    }
    let ok = csvs[0] == csvs[1] && !csvs[0].is_empty();
    verdict(9, "determinism", ok, format!("csv bytes={} identical={}", csvs[0].len(), csvs[0] == csvs[1]));
}

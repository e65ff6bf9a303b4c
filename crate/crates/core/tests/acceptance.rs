//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use lsm_core::stability::trend_correlation;
use lsm_core::{
    design_matrix, european_price, fit_loglog_slope, gram_at_zero, lsm_price, reproduce_figure, simulate,
    verify_proposition_one, BasisSet, Family, FigureConfig, FigureId, LsmSettings, Payoff, RatePlan, Scheme,
    SdeModel, Solver, TimeGrid, TimeWindow,
};

use common::{random_well_conditioned, rel_err, run_grade, GRADES};

type Outcome = Result<String, String>;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const DESK_PATHS: usize = 5000;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lsm_bin() -> &'static str {
    env!("CARGO_BIN_EXE_lsm")
}

fn ac1_proposition_one() -> Outcome {
    let mut checked = 0;
    for fam in Family::ALL {
        for k in [2, 3, 4] {
            for x0 in [0.5, 1.0, 2.0] {
                for n in [10, 1000] {
                    let r = verify_proposition_one(&BasisSet::new(fam, k).unwrap(), x0, n).map_err(|e| e.to_string())?;
                    ensure(r.rank == 1, || format!("{fam} K={k} x0={x0} N={n}: rank {}", r.rank))?;
                    let rel = (r.singular_values[0] - r.expected_leading).abs() / r.expected_leading;
                    ensure(rel <= 1e-10, || format!("{fam} K={k} x0={x0} N={n}: leading sv rel err {rel:e}"))?;
                    ensure(r.kappa.is_infinite(), || format!("{fam} K={k} x0={x0} N={n}: kappa {}", r.kappa))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} configurations: rank 1, sigma_1 = sqrt(N sum f^2), kappa = inf"))
}

fn ac2_gram_equivalence() -> Outcome {
    let mut worst_entry = 0.0f64;
    let mut worst_eig = 0.0f64;
    for fam in Family::ALL {
        for k in [2, 3, 4] {
            for x0 in [0.5, 1.0, 2.0] {
                for n in [10usize, 1000] {
                    let basis = BasisSet::new(fam, k).unwrap();
                    let grid = TimeGrid::new(1.0, 2).unwrap();
                    let model = SdeModel::lognormal(0.0, 0.2, x0).unwrap();
                    let ps = simulate(&model, &grid, n, Scheme::Euler, 0).unwrap();
                    let a = design_matrix(&basis, &ps, 0).unwrap();
                    let ata = a.entries().tr_mul(a.entries());
                    let g = gram_at_zero(&basis, x0).unwrap() * n as f64;
                    for (x, y) in ata.iter().zip(g.iter()) {
                        let rel = if *y == 0.0 { x.abs() } else { (x - y).abs() / y.abs() };
                        worst_entry = worst_entry.max(rel);
                        ensure(rel <= 1e-12, || format!("{fam} K={k} x0={x0} N={n}: entry rel err {rel:e}"))?;
                    }
                    let energy: f64 = basis.evaluate(x0).unwrap().iter().map(|v| v * v).sum();
                    let mut eig: Vec<f64> = g.symmetric_eigenvalues().iter().copied().collect();
                    eig.sort_by(|a, b| b.total_cmp(a));
                    let tol = 1e-8 * n as f64;
                    let dev0 = (eig[0] - n as f64 * energy).abs();
                    worst_eig = worst_eig.max(dev0);
                    ensure(dev0 <= tol, || format!("{fam} K={k} x0={x0} N={n}: top eigenvalue off by {dev0:e}"))?;
                    for e in &eig[1..] {
                        worst_eig = worst_eig.max(e.abs());
                        ensure(e.abs() <= tol, || format!("{fam} K={k} x0={x0} N={n}: zero eigenvalue {e:e}"))?;
                    }
                }
            }
        }
    }
    Ok(format!("max entry rel err {worst_entry:.1e}, max eigenvalue dev {worst_eig:.1e}"))
}

/// Spearman <= -0.95 over (0.009, 0.2] and kappa(0.01)/kappa(0.99) >= 1e3, every seed.
fn figure_trend(id: FigureId) -> Outcome {
    let window = TimeWindow::new(0.009, 0.2).unwrap();
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for seed in SEEDS {
        let cfg = FigureConfig::preset(id).with_paths(DESK_PATHS).with_seed(seed);
        let scan = reproduce_figure(&cfg).map_err(|e| e.to_string())?;
        let rho = trend_correlation(&scan, window).map_err(|e| e.to_string())?;
        let ratio = scan.kappa_near(0.01).unwrap() / scan.kappa_near(0.99).unwrap();
        lines.push(format!("seed {seed}: rho {rho:.4}, ratio {ratio:.1}"));
        if rho > -0.95 {
            failures.push(format!("seed {seed}: spearman {rho:.4} > -0.95"));
        }
        if !(ratio >= 1e3) {
            failures.push(format!("seed {seed}: kappa(0.01)/kappa(0.99) = {ratio:.1} < 1e3"));
        }
    }
    if failures.is_empty() {
        Ok(lines.join("; "))
    } else {
        Err(format!("{} [{}]", failures.join("; "), lines.join("; ")))
    }
}

fn ac5_slope() -> Outcome {
    let window = TimeWindow::new(0.009, 0.2).unwrap();
    let cfg = FigureConfig::preset(FigureId::Fig1).with_paths(DESK_PATHS);
    let scan = reproduce_figure(&cfg).map_err(|e| e.to_string())?;
    let fit = fit_loglog_slope(&scan, window).map_err(|e| e.to_string())?;
    ensure((-1.3..=-0.7).contains(&fit.slope), || format!("slope {} outside [-1.3, -0.7]", fit.slope))?;
    Ok(format!("slope {:.4} over {} points", fit.slope, fit.points_used))
}

fn ac6_solver_agreement() -> Outcome {
    let mut worst = 0.0f64;
    for (a, b) in random_well_conditioned(6, 100, 200, 3, 1e3) {
        let ne = lsm_core::solve_normal_equations(&a, &b).map_err(|e| e.to_string())?;
        let qr = lsm_core::solve_qr(&a, &b).map_err(|e| e.to_string())?;
        let svd = lsm_core::solve_svd(&a, &b, None).map_err(|e| e.to_string())?;
        for (x, y) in [(&ne, &qr), (&ne, &svd), (&qr, &svd)] {
            let e = rel_err(&x.coefficients, &y.coefficients);
            worst = worst.max(e);
            ensure(e <= 1e-8, || format!("{} vs {}: rel err {e:e}", x.solver, y.solver))?;
        }
    }
    Ok(format!("100 instances, worst pairwise rel err {worst:.1e}"))
}

fn ac7_normal_equation_degradation() -> Outcome {
    let outcomes: Vec<_> = GRADES.iter().map(|&d| run_grade(d)).collect();
    let mut summary = Vec::new();
    for o in &outcomes {
        ensure(o.svd_ok, || format!("svd failed at delta {}", o.delta))?;
        summary.push(format!(
            "delta {:e}: kappa {:.1e}, qr {:.1e}, normal {}",
            o.delta,
            o.kappa,
            o.qr_err,
            o.normal_err.map_or("singular".to_string(), |e| format!("{e:.1e}"))
        ));
    }
    let returned: Vec<f64> = outcomes.iter().filter_map(|o| o.normal_err).collect();
    ensure(returned.windows(2).all(|w| w[1] >= w[0]), || format!("normal error not monotone: {returned:?}"))?;
    let grade = outcomes
        .iter()
        .rev()
        .find(|o| o.normal_err.is_some())
        .ok_or("normal equations never returned")?;
    let ne = grade.normal_err.unwrap();
    let qr = grade.qr_err.max(f64::EPSILON);
    ensure(ne >= 10.0 * qr, || format!("at delta {}: normal {ne:e} < 10 x qr {qr:e}", grade.delta))?;
    let last = outcomes.last().unwrap();
    ensure(last.normal_err.is_none(), || format!("normal equations did not raise at delta {}", last.delta))?;
    Ok(summary.join("; "))
}

fn ac8_four_path_fixture() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let paths = dir.path().join("fixture.csv");
    std::fs::write(
        &paths,
        "path_index,t_0,t_1,t_2\n0,1,1.1,1.2\n1,1,0.9,0.8\n2,1,1.0,0.7\n3,1,0.8,1.0\n",
    )
    .map_err(|e| e.to_string())?;
    let config = dir.path().join("fixture.json");
    std::fs::write(
        &config,
        r#"{"payoff": {"kind": "put", "strike": 1.1}, "rate": {"r": 0}, "basis": {"family": "monomial", "K": 2},
            "solver": {"name": "qr", "itm_only": false}, "grid": {"T": 1}}"#,
    )
    .map_err(|e| e.to_string())?;
    let out = Command::new(lsm_bin())
        .args(["price", "--config"])
        .arg(&config)
        .arg("--paths-file")
        .arg(&paths)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let value: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("value: "))
        .ok_or("no value line")?
        .parse()
        .map_err(|e| format!("{e}"))?;
    // exact dynamic program: alpha = 0.39, beta = -0.2, path 4 exercises, mean(0, .3, .4, .3)
    let oracle = 0.25;
    ensure((value - oracle).abs() <= 1e-12, || format!("value {value} vs oracle {oracle}"))?;
    Ok(format!("value {value} (oracle 1/4)"))
}

fn ac9_dominance() -> Outcome {
    let model = SdeModel::lognormal(0.0, 0.15, 1.0).unwrap();
    let grid = TimeGrid::new(1.0, 50).unwrap();
    let payoff = Payoff::put(1.1).unwrap();
    let basis = BasisSet::monomial(3).unwrap();
    let rate = RatePlan::constant(0.0).unwrap();
    let mut lines = Vec::new();
    for seed in SEEDS {
        let ps = simulate(&model, &grid, 20_000, Scheme::Milstein, seed).map_err(|e| e.to_string())?;
        let (euro, euro_se) = european_price(&ps, &payoff, &rate).map_err(|e| e.to_string())?;
        let gap = |itm_only: bool| -> Result<(f64, f64), String> {
            let settings = LsmSettings { itm_only, ..LsmSettings::new(Solver::TruncatedSvd) };
            let est = lsm_price(&ps, &payoff, &basis, &rate, &settings).map_err(|e| e.to_string())?;
            let combined = (est.standard_error.powi(2) + euro_se.powi(2)).sqrt();
            Ok((est.value, (est.value - euro) / combined))
        };
        // desk practice regresses on in-the-money paths; the all-paths gap is reported alongside
        let (desk, desk_z) = gap(true)?;
        let (_, all_z) = gap(false)?;
        ensure(desk_z >= -3.0, || format!("seed {seed}: bermudan {desk} < european {euro} ({desk_z:.2} se)"))?;
        lines.push(format!("seed {seed}: {desk:.5} vs {euro:.5} ({desk_z:+.2} se, all-paths {all_z:+.2} se)"));
    }
    Ok(lines.join("; "))
}

fn run_cli(threads: usize, args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(lsm_bin())
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RAYON_NUM_THREADS", threads.to_string())
        .env_remove("LSM_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
    std::fs::read(out).map_err(|e| e.to_string())
}

fn ac10_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut sizes = Vec::new();
    for args in [
        &["simulate", "--figure", "fig1", "--paths", "5000", "--seed", "42"][..],
        &["scan", "--figure", "fig2", "--paths", "5000", "--seed", "42"][..],
    ] {
        let mut outputs = Vec::new();
        for (i, threads) in [1usize, 1, 8, 8].into_iter().enumerate() {
            outputs.push(run_cli(threads, args, &dir.path().join(format!("{}-{i}.csv", args[0])))?);
        }
        ensure(outputs.windows(2).all(|w| w[0] == w[1]), || format!("{} output differs across runs", args[0]))?;
        sizes.push(format!("{}: {} bytes", args[0], outputs[0].len()));
    }
    Ok(format!("identical over 1- and 8-thread runs ({})", sizes.join(", ")))
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    limit: Duration,
    check: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: "AC1", name: "proposition-1 analytic check", limit: Duration::from_secs(1), check: ac1_proposition_one },
        Criterion { id: "AC2", name: "gram-matrix equivalence", limit: Duration::from_secs(1), check: ac2_gram_equivalence },
        Criterion { id: "AC3", name: "figure-1 trend", limit: Duration::from_secs(30), check: || figure_trend(FigureId::Fig1) },
        Criterion { id: "AC4", name: "figure-2 trend", limit: Duration::from_secs(30), check: || figure_trend(FigureId::Fig2) },
        Criterion { id: "AC5", name: "log-log slope", limit: Duration::from_secs(30), check: ac5_slope },
        Criterion { id: "AC6", name: "solver agreement", limit: Duration::from_secs(5), check: ac6_solver_agreement },
        Criterion { id: "AC7", name: "normal-equations degradation", limit: Duration::from_secs(5), check: ac7_normal_equation_degradation },
        Criterion { id: "AC8", name: "4-path fixture via cli", limit: Duration::from_secs(1), check: ac8_four_path_fixture },
        Criterion { id: "AC9", name: "bermudan dominates european", limit: Duration::from_secs(60), check: ac9_dominance },
        Criterion { id: "AC10", name: "determinism across thread counts", limit: Duration::from_secs(30), check: ac10_determinism },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => Err(format!("took {elapsed:.2?}, limit {:?} ({detail})", c.limit)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("[PASS] {} {} ({elapsed:.2?}): {detail}", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {} {} ({elapsed:.2?}): {why}", c.id, c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

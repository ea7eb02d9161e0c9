//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails or exceeds its time budget.

mod common;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nonlocal_core::diagnostics::{
    check_entropy, check_l1_contraction, check_max_principle, check_ordering, check_tvd, l1_distance, total_variation,
};
use nonlocal_core::flux::LocalFlux;
use nonlocal_core::harness::{refine_fixed_delta, refine_joint_limit, Problem, StudyOptions, StudyReport};
use nonlocal_core::io;
use nonlocal_core::scheme::step_three_point;
use nonlocal_core::{
    compute_weights, step, step_conservative_form, Boundary, GridState, Kernel, OutputSchedule, Profile, SchemeConfig,
    Solver, TwoPointFlux, Workers,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{max_ratio, random_boundary, random_bv, random_flux, state};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn weight_normalization() -> Outcome {
    let mut rng = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let profile = Profile::ALL[rng.random_range(0..3)];
        let delta = log_uniform(&mut rng, 1e-3, 1.0);
        let dx = log_uniform(&mut rng, 1e-4, 0.5);
        let w = compute_weights(&Kernel::new(delta, profile).unwrap(), dx).unwrap();
        worst = worst.max((w.moment() - 1.0).abs());
        if w.weights.iter().any(|&x| x < 0.0) {
            return outcome(false, "negative weight");
        }
    }
    outcome(worst <= 1e-12, format!("max |dx sum k W_k - 1| = {worst:.2e} (tol 1e-12)"))
}

fn local_reduction() -> Outcome {
    let mut rng = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(8..=128);
        let dx = 1.0 / n as f64;
        let delta = dx * rng.random_range(0.05..0.999);
        let flux = random_flux(&mut rng);
        let w = compute_weights(&Kernel::new(delta, Profile::ALL[rng.random_range(0..3)]).unwrap(), dx).unwrap();
        let u = state(random_bv(&mut rng, n, -1.0, 1.0), dx, random_boundary(&mut rng));
        let dt = rng.random_range(0.1..=1.0) * max_ratio(&flux) * dx;
        let a = step(&u, &w, &flux, dt).unwrap();
        let b = step_three_point(&u, &flux, dt);
        for (x, y) in a.values.iter().zip(&b.values) {
            worst = worst.max((x - y).abs());
        }
    }
    outcome(worst <= 1e-13, format!("max cell difference = {worst:.2e} over 200 steps (tol 1e-13)"))
}

fn conservative_form() -> Outcome {
    let mut rng = rng(3);
    let mut worst = 0.0f64;
    let mut r_max = 0;
    for i in 0..200 {
        let r = if i == 0 { 64 } else { rng.random_range(1..=64usize) };
        let n = rng.random_range((2 * r).max(16)..=4 * r + 64);
        let dx = 1.0 / n as f64;
        let delta = dx * (r as f64 + rng.random_range(0.0..0.999));
        let flux = random_flux(&mut rng);
        let w = compute_weights(&Kernel::new(delta, Profile::ALL[rng.random_range(0..3)]).unwrap(), dx).unwrap();
        r_max = r_max.max(w.r);
        let u = state(random_bv(&mut rng, n, -1.0, 1.0), dx, random_boundary(&mut rng));
        let dt = rng.random_range(0.1..=1.0) * max_ratio(&flux) * dx;
        let a = step(&u, &w, &flux, dt).unwrap();
        let b = step_conservative_form(&u, &w, &flux, dt).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            worst = worst.max((x - y).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max cell difference = {worst:.2e}, r up to {r_max} (tol 1e-12)"))
}

fn stepwise(u0: &GridState, w: &nonlocal_core::QuadratureWeights, flux: &TwoPointFlux, dt: f64, steps: usize) -> Vec<GridState> {
    let mut out = vec![u0.clone()];
    for _ in 0..steps {
        let next = step(out.last().unwrap(), w, flux, dt).unwrap();
        out.push(next);
    }
    out
}

fn max_principle_tvd() -> Outcome {
    let mut rng = rng(4);
    let n = 256;
    let dx = 1.0 / n as f64;
    let steps = 40;
    let (mut worst_mp, mut worst_tv) = (0.0f64, 0.0f64);
    let mut detected = [0usize; 3];
    for _ in 0..100 {
        let values = random_bv(&mut rng, n, -1.0, 1.0);
        let boundary = random_boundary(&mut rng);
        let flux = random_flux(&mut rng);
        for (slot, r) in [1usize, 4, 16].into_iter().enumerate() {
            let delta = dx * (r as f64 + rng.random_range(0.0..0.999));
            let kernel = Kernel::new(delta, Profile::ALL[rng.random_range(0..3)]).unwrap();
            let u0 = state(values.clone(), dx, boundary);
            let config = SchemeConfig { kernel, flux, mesh_ratio: 1.0, final_time: 0.0, safety: 1.0 };
            let limit = config.max_mesh_ratio(u0.min(), u0.max()).unwrap().min(1e3);
            let solver = Solver::new(SchemeConfig { mesh_ratio: limit, final_time: steps as f64 * limit * dx, ..config }, dx)
                .unwrap()
                .with_workers(Workers::Serial)
                .unwrap();
            let traj = solver.run(u0.clone(), &OutputSchedule::EveryStep).unwrap();
            let mp = check_max_principle(&traj);
            let tv = check_tvd(&traj);
            worst_mp = worst_mp.max(mp.violation);
            worst_tv = worst_tv.max(tv.violation);
            if !(mp.passed && tv.passed) {
                return outcome(false, format!("violation with r = {r}: max principle {:.2e}, tvd {:.2e}", mp.violation, tv.violation));
            }

            // Negative control: twice the admissible step, unchecked driver.
            if limit < 1e3 {
                let bad = nonlocal_core::Trajectory::new(stepwise(&u0, &solver.weights, &flux, 2.0 * limit * dx, steps));
                if !check_max_principle(&bad).passed || !check_tvd(&bad).passed {
                    detected[slot] += 1;
                }
            }
        }
    }
    let passed = detected.iter().sum::<usize>() > 0;
    outcome(
        passed,
        format!(
            "300 runs clean (max principle {worst_mp:.1e}, tvd {worst_tv:.1e}); 2x CFL flagged {}/{}/{} runs for r = 1/4/16",
            detected[0], detected[1], detected[2]
        ),
    )
}

fn contraction_ordering() -> Outcome {
    let mut rng = rng(5);
    let n = 128;
    let dx = 1.0 / n as f64;
    let steps = 100;
    let (mut worst_l1, mut worst_order) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let u: Vec<f64> = random_bv(&mut rng, n, -1.0, 1.0);
        let bump = random_bv(&mut rng, n, 0.0, 0.5);
        let v: Vec<f64> = u.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let w_free = random_bv(&mut rng, n, -1.0, 1.0);
        let flux = random_flux(&mut rng);
        let r = rng.random_range(1..=16usize);
        let kernel = Kernel::new(dx * (r as f64 + 0.5), Profile::ALL[rng.random_range(0..3)]).unwrap();
        let base = SchemeConfig { kernel, flux, mesh_ratio: 1.0, final_time: 0.0, safety: 1.0 };
        let ratio = 0.95 * base.max_mesh_ratio(-1.0, 1.5).unwrap().min(2.0);
        let solver = Solver::new(SchemeConfig { mesh_ratio: ratio, final_time: steps as f64 * ratio * dx, ..base }, dx)
            .unwrap()
            .with_workers(Workers::Serial)
            .unwrap();
        let run = |values: Vec<f64>| solver.run(state(values, dx, Boundary::Periodic), &OutputSchedule::EveryStep).unwrap();
        let (tu, tv, tw) = (run(u), run(v), run(w_free));
        let ordered = check_ordering(&tu, &tv).unwrap();
        let c1 = check_l1_contraction(&tu, &tv).unwrap();
        let c2 = check_l1_contraction(&tu, &tw).unwrap();
        worst_order = worst_order.max(ordered.violation);
        worst_l1 = worst_l1.max(c1.violation).max(c2.violation);
        if !(ordered.passed && ordered.note.is_none() && c1.passed && c2.passed) {
            return outcome(false, format!("ordering {:.2e}, contraction {:.2e}/{:.2e}", ordered.violation, c1.violation, c2.violation));
        }
    }
    outcome(true, format!("50 ordered + 50 free pairs, 100 steps: L1 growth {worst_l1:.1e}, order violation {worst_order:.1e}"))
}

fn entropy_inequality() -> Outcome {
    let dx = 1.0 / 128.0;
    let families = [
        TwoPointFlux::godunov(LocalFlux::Burgers),
        TwoPointFlux::lax_friedrichs(LocalFlux::Burgers, 1.0).unwrap(),
        TwoPointFlux::engquist_osher(LocalFlux::Burgers),
    ];
    let mut worst = 0.0f64;
    let mut runs = 0;
    for flux in families {
        for problem in [Problem::burgers_shock(), Problem::burgers_rarefaction()] {
            for delta in [0.5 * dx, 0.05] {
                let u0 = problem.initial_state(dx).unwrap();
                let base = SchemeConfig { kernel: Kernel::new(delta, Profile::Uniform).unwrap(), flux, mesh_ratio: 1.0, final_time: 0.5, safety: 0.9 };
                let ratio = 0.9 * base.max_mesh_ratio(u0.min(), u0.max()).unwrap();
                let solver = Solver::new(SchemeConfig { mesh_ratio: ratio, ..base }, dx).unwrap();
                let traj = solver.run(u0, &OutputSchedule::EveryStep).unwrap();
                let report = check_entropy(&traj, &solver.weights, &flux).unwrap();
                worst = worst.max(report.violation);
                runs += 1;
                if !report.passed {
                    return outcome(
                        false,
                        format!("{} {} delta {delta}: residual {:.2e} at step {:?}", flux.family.key(), problem.kind.key(), report.violation, report.step),
                    );
                }
            }
        }
    }
    outcome(true, format!("{runs} runs x 17 constants, worst residual {worst:.2e} (tol 1e-10 scaled)"))
}

fn one_step_bound() -> Outcome {
    let n = 1024;
    let dx = 1.0 / n as f64;
    let plateaus = [0.8, -0.4, 0.3, 1.0, -0.9, 0.1, 0.6, -0.2];
    let steps: Vec<f64> = (0..n).map(|j| plateaus[j / 128]).collect();
    // Plateaus with a smooth ripple on top, so the data is not piecewise constant.
    let rippled: Vec<f64> = (0..n)
        .map(|j| 0.8 * plateaus[j / 128] + 0.2 * (2.0 * std::f64::consts::PI * 3.0 * (j as f64 + 0.5) * dx).sin())
        .collect();
    let flux = TwoPointFlux::godunov(LocalFlux::Burgers);
    let dt = 0.4 * dx;
    let mut passed = true;
    let mut detail = Vec::new();
    for (label, values) in [("plateaus", steps), ("rippled", rippled)] {
        let u = state(values, dx, Boundary::Periodic);
        let tv = total_variation(&u);
        let mut constants = Vec::new();
        for r in [1usize, 4, 16, 64] {
            let w = compute_weights(&Kernel::new(r as f64 * dx, Profile::Uniform).unwrap(), dx).unwrap();
            let h = step(&u, &w, &flux, dt).unwrap();
            constants.push(l1_distance(&h, &u).unwrap() / (dt * tv));
        }
        let hi = constants.iter().cloned().fold(f64::MIN, f64::max);
        let lo = constants.iter().cloned().fold(f64::MAX, f64::min);
        let spread = hi / lo;
        passed &= lo > 0.0 && spread < 2.0;
        let list: Vec<String> = constants.iter().map(|c| format!("{c:.4}")).collect();
        detail.push(format!("{label} C(r=1/4/16/64) = {}, spread {spread:.3}", list.join("/")));
    }
    outcome(passed, format!("{} (< 2)", detail.join("; ")))
}

fn shock_config(delta: f64) -> SchemeConfig {
    SchemeConfig {
        kernel: Kernel::new(delta, Profile::Uniform).unwrap(),
        flux: TwoPointFlux::godunov(LocalFlux::Burgers),
        mesh_ratio: 0.5,
        final_time: 0.5,
        safety: 0.9,
    }
}

fn format_errors(report: &StudyReport) -> String {
    report.errors().iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" > ")
}

fn fixed_delta_regime() -> Outcome {
    let options = StudyOptions { window: Some((-0.5, 1.5)), ..StudyOptions::default() };
    let report = refine_fixed_delta(&Problem::burgers_shock(), &shock_config(0.1), 1.0 / 64.0, 4, &options).unwrap();
    let d = report.errors();
    let ratios: Vec<f64> = d.windows(2).map(|w| w[0] / w[1]).collect();
    let passed = d.len() == 3 && report.monotone && ratios.iter().all(|&q| q >= 1.3) && report.invariants_passed;
    let q: Vec<String> = ratios.iter().map(|q| format!("{q:.2}")).collect();
    outcome(passed, format!("Cauchy distances {}; ratios {} (>= 1.3)", format_errors(&report), q.join(", ")))
}

fn joint_limit_regime() -> Outcome {
    let options = |w| StudyOptions { window: Some(w), ..StudyOptions::default() };
    let shock = refine_joint_limit(&Problem::burgers_shock(), &shock_config(1.0 / 32.0), 2.0, 1.0 / 64.0, 4, &options((-0.5, 1.5))).unwrap();
    let config = SchemeConfig { mesh_ratio: 0.4, ..shock_config(1.0 / 32.0) };
    let fan = refine_joint_limit(&Problem::burgers_rarefaction(), &config, 2.0, 1.0 / 64.0, 4, &options((-1.0, 1.0))).unwrap();
    let mid = fan.levels.last().unwrap().origin_value;
    let passed = shock.monotone && fan.monotone && mid.abs() <= 0.05 && shock.invariants_passed && fan.invariants_passed;
    outcome(
        passed,
        format!("shock {}; rarefaction {}; midpoint {mid:.3e} (|.| <= 0.05)", format_errors(&shock), format_errors(&fan)),
    )
}

const DETERMINISM_CONFIG: &str = r#"
[kernel]
profile = "triangular"
delta = 0.05

[flux]
local = "burgers"
family = "engquist_osher"

[problem]
name = "burgers_shock"

[grid]
dx = 0.015625

[scheme]
T = 0.25
lambda = 0.5

[study]
levels = 3
"#;

fn run_cli(dir: &Path, config: &Path, args: &[&str], threads: &str) -> Vec<(String, Vec<u8>)> {
    let out = dir.join(format!("out_{}_{}", args[0], threads));
    let status = Command::new(env!("CARGO_BIN_EXE_nonlocal"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(&out)
        .arg("--threads")
        .arg(threads)
        .output()
        .expect("spawn cli");
    assert!(status.status.success(), "cli failed: {}", String::from_utf8_lossy(&status.stderr));
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    fs::remove_dir_all(&out).unwrap();
    files
}

fn determinism() -> Outcome {
    // Library level: every worker setting, twice each, large enough to take the parallel path.
    let problem = Problem::burgers_rarefaction();
    let config = SchemeConfig { mesh_ratio: 0.4, final_time: 0.1, ..shock_config(0.03125) };
    let dx = 1.0 / 1024.0;
    let mut outputs = Vec::new();
    for workers in [Workers::Serial, Workers::Threads(1), Workers::Threads(4), Workers::Global] {
        for _ in 0..2 {
            let solver = Solver::new(config, dx).unwrap().with_workers(workers).unwrap();
            let traj = solver.run(problem.initial_state(dx).unwrap(), &OutputSchedule::uniform(0.1, 3)).unwrap();
            let options = StudyOptions { workers, ..StudyOptions::default() };
            let study = refine_fixed_delta(&Problem::burgers_shock(), &shock_config(0.1), 1.0 / 32.0, 3, &options).unwrap();
            let json = serde_json::to_string(&study).unwrap();
            outputs.push((io::solution_csv(&traj), io::study_csv(&study), json));
        }
    }
    let lib_ok = outputs.windows(2).all(|w| w[0] == w[1]);

    // Command line: repeated runs and thread counts, compared byte for byte.
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.toml");
    fs::write(&config_path, DETERMINISM_CONFIG).unwrap();
    let mut cli = Vec::new();
    for threads in ["1", "4", "1", "0"] {
        let mut files = run_cli(dir.path(), &config_path, &["run"], threads);
        files.extend(run_cli(dir.path(), &config_path, &["study"], threads));
        cli.push(files);
    }
    let names: Vec<&str> = cli[0].iter().map(|(n, _)| n.as_str()).collect();
    let cli_ok = cli.windows(2).all(|w| w[0] == w[1]) && names.len() == 5;
    outcome(
        lib_ok && cli_ok,
        format!("library: 8 runs identical = {lib_ok}; cli files {names:?} identical over 4 runs = {cli_ok}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        ("weight normalization", weight_normalization, Duration::from_secs(1)),
        ("local reduction", local_reduction, Duration::from_secs(1)),
        ("conservative form", conservative_form, Duration::from_secs(5)),
        ("max principle + tvd", max_principle_tvd, Duration::from_secs(30)),
        ("l1 contraction + ordering", contraction_ordering, Duration::from_secs(30)),
        ("cell entropy inequality", entropy_inequality, Duration::from_secs(30)),
        ("one-step l1/bv bound", one_step_bound, Duration::from_secs(30)),
        ("fixed-delta refinement", fixed_delta_regime, Duration::from_secs(120)),
        ("joint-limit refinement", joint_limit_regime, Duration::from_secs(120)),
        ("determinism", determinism, Duration::from_secs(10)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let passed = result.passed && in_time;
        if !passed {
            failed += 1;
        }
        println!(
            "AC{:<2} {} {:<26} [{:.2}s / {}s] {}",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            name,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            result.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so that every line is printed. The
//! process fails if any criterion fails, except those listed in
//! `KNOWN_UNATTAINABLE`, which still print FAIL together with the reason.

use std::path::Path;
use std::time::{Duration, Instant};

use distdp::app::run;
use distdp::config::{Algo, RunConfig};
use distdp_core::checks::{verify_settled, verify_trajectory, Check};
use distdp_core::dpflow::{
    build, build_centralized, build_v1, build_v2, consensus_error, integrate, integrate_with,
    max_increase, tracking_error, Method,
};
use distdp_core::linops::max_abs_diff;
use distdp_core::random::{random_problem, RandomSpec};
use distdp_core::tolerances::*;
use distdp_core::{CommGraph, MultiAgentProblem, Vector};

/// Criteria that cannot be met as stated, with the measured reason.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    1,
    "the slowest drift mode is -0.00356, so at T = 200 the state is still ~0.54 from the limit; \
     the same run passes at the preset horizon (see note)",
)];

const SWEEP: u64 = 50;

struct Outcome {
    passed: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn from_checks(checks: &[Check]) -> Self {
        let failed: Vec<String> = checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.to_string())
            .collect();
        let worst = checks
            .iter()
            .map(|c| format!("{} {:.2e}", c.name, c.measured))
            .collect::<Vec<_>>()
            .join(", ");
        Outcome {
            passed: failed.is_empty(),
            detail: if failed.is_empty() {
                worst
            } else {
                failed.join("; ")
            },
            notes: Vec::new(),
        }
    }
}

fn preset(algo: Algo) -> RunConfig {
    let mut c = RunConfig::from_toml("preset = \"paper-sec5\"").expect("preset loads");
    c.algo = algo;
    c
}

fn preset_problem() -> MultiAgentProblem {
    preset(Algo::V2).problem
}

fn preset_trajectory(algo: Algo) -> distdp_core::dpflow::Trajectory {
    let c = preset(algo);
    let flow = build(&c.problem, algo.kind());
    integrate_with(
        &flow,
        &c.initial_state(),
        c.dt,
        c.t_final,
        Method::from(c.method),
        c.decimation,
    )
    .unwrap()
}

fn criterion_1() -> Outcome {
    let prob = preset_problem();
    let flow = build_centralized(&prob);
    let target = prob.centralized_solution().unwrap().repeat(prob.n_agents());
    let start = Instant::now();
    let traj = integrate(&flow, &Vector::zeros(flow.dim()), 0.01, 200.0, Method::Rk4).unwrap();
    let elapsed = start.elapsed();
    let err = max_abs_diff(traj.final_state(), &target);
    let mut out = Outcome::from_checks(&[
        Check::at_most("limit error at T=200", err, CENTRAL_LIMIT),
        Check::below("runtime s", elapsed.as_secs_f64(), 1.0),
    ]);
    let c = preset(Algo::Central);
    let long = integrate_with(
        &flow,
        &Vector::zeros(flow.dim()),
        0.01,
        c.t_final,
        Method::Rk4,
        1000,
    )
    .unwrap();
    out.notes.push(format!(
        "at the preset horizon T = {} the limit error is {:.3e}",
        c.t_final,
        max_abs_diff(long.final_state(), &target)
    ));
    out
}

fn named(checks: &[Check], names: &[&str]) -> Vec<Check> {
    checks
        .iter()
        .filter(|c| names.contains(&c.name.as_str()))
        .cloned()
        .collect()
}

fn criterion_2() -> Outcome {
    let prob = preset_problem();
    let c = preset(Algo::V1);
    let v = verify_trajectory(&prob, &preset_trajectory(Algo::V1), c.dt).unwrap();
    let mut out = Outcome::from_checks(&named(
        &v.checks,
        &[
            "theta_pairwise_agreement",
            "theta_limit",
            "w_linear_equation",
        ],
    ));
    out.notes
        .extend(v.notes.iter().map(|(n, x)| format!("{n} = {x:.3e}")));
    out
}

fn criterion_3() -> Outcome {
    let prob = preset_problem();
    let traj = preset_trajectory(Algo::V2);
    let theta_c = prob.centralized_solution().unwrap();
    let flow = traj.flow();
    let w = flow.slice(traj.final_state(), "w").unwrap();
    let w_err = (0..flow.agents())
        .map(|i| max_abs_diff(flow.agent(w, i), &theta_c))
        .fold(0.0, f64::max);
    let e = tracking_error(&traj, "w", &theta_c).unwrap();
    let (e0, et) = (e[0].1, e[e.len() - 1].1);
    let half = e.len() / 2;
    let rise = e[half..]
        .windows(2)
        .map(|p| p[1].1 - p[0].1)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out = Outcome::from_checks(&[
        Check::at_most("w vs theta_c", w_err, CONSENSUS_LIMIT),
        Check::below("e_T / e_0", et / e0, TRACKING_RATIO),
        Check::at_most("max e_t increase over final half", rise.max(0.0), 0.0),
    ]);
    let c = consensus_error(&traj, "w").unwrap();
    out.notes.push(format!(
        "e_0 = {e0:.6e}, e_T = {et:.3e}, final w consensus error {:.3e}",
        c[c.len() - 1].1
    ));
    out
}

fn sweep() -> (Vec<(u64, Vec<Check>)>, Duration) {
    let spec = RandomSpec::default();
    let start = Instant::now();
    let results = (0..SWEEP)
        .map(|seed| {
            (
                seed,
                verify_settled(&random_problem(&spec, seed), 0.01).unwrap(),
            )
        })
        .collect();
    (results, start.elapsed())
}

fn criterion_4(results: &[(u64, Vec<Check>)], elapsed: Duration) -> Outcome {
    let mut checks = Vec::new();
    let mut worst = 0.0f64;
    for (seed, cs) in results {
        for c in cs
            .iter()
            .filter(|c| c.name == "v1_theta_limit" || c.name == "v2_w_limit")
        {
            worst = worst.max(c.measured);
            if !c.passed {
                checks.push(Check {
                    name: format!("seed {seed} {}", c.name),
                    ..c.clone()
                });
            }
        }
    }
    checks.push(Check::at_most(
        format!("worst of {} limits", 2 * results.len()),
        worst,
        RANDOM_LIMIT,
    ));
    checks.push(Check::below("runtime s", elapsed.as_secs_f64(), 20.0));
    Outcome::from_checks(&checks)
}

fn criterion_5(results: &[(u64, Vec<Check>)]) -> Outcome {
    let mut margin = f64::NEG_INFINITY;
    let mut abscissa = f64::NEG_INFINITY;
    for (_, cs) in results {
        for c in cs {
            match c.name.as_str() {
                "spectral_inequality" => margin = margin.max(c.measured),
                "v2_theta_drift_hurwitz" => abscissa = abscissa.max(c.measured),
                _ => {}
            }
        }
    }
    Outcome::from_checks(&[
        Check::at_most(
            "max eigenvalue of M + M^T - 2(gamma-1) Phi^T D Phi",
            margin,
            SPECTRAL_INEQUALITY,
        ),
        Check::below("max real eigenvalue of v2 theta drift", abscissa, 0.0),
    ])
}

fn criterion_6() -> Outcome {
    let prob = preset_problem();
    let mut checks = Vec::new();
    for algo in [Algo::Central, Algo::V1, Algo::V2] {
        let traj = preset_trajectory(algo);
        let report = distdp_core::dpflow::equilibrium(&prob, algo.kind()).unwrap();
        for m in distdp_core::dpflow::lyapunov_series(&traj, &report).unwrap() {
            let from = if m.name == "V_wv" {
                m.values.len() / 2
            } else {
                0
            };
            checks.push(Check::at_most(
                format!("{} {}", algo.kind().name(), m.name),
                max_increase(&m.values, from).max(0.0),
                LYAPUNOV_SLACK,
            ));
        }
    }
    Outcome::from_checks(&checks)
}

fn read_csvs(dir: &Path) -> Vec<Vec<u8>> {
    ["trajectory.csv", "metrics.csv", "equilibrium.csv"]
        .iter()
        .map(|f| std::fs::read(dir.join(f)).unwrap())
        .collect()
}

fn criterion_7() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let configs = [
        "preset = \"paper-sec5\"\n",
        "preset = \"paper-sec5\"\nalgo = \"v1\"\nt_final = 100.0\ninit = { random = 7 }\n",
        "preset = \"paper-sec5\"\nalgo = \"central\"\nmethod = \"euler\"\nt_final = 50.0\ndecimation = 1\n",
    ];
    let mut checks = Vec::new();
    for (k, text) in configs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let mut cfg = RunConfig::from_toml(text).unwrap();
            cfg.output_dir = tmp.path().join(format!("c{k}_r{rep}"));
            run(&cfg).unwrap();
            outputs.push(read_csvs(&cfg.output_dir));
        }
        let differing = outputs[0]
            .iter()
            .zip(&outputs[1])
            .filter(|(a, b)| a != b)
            .count();
        checks.push(Check::at_most(
            format!("config {k} differing files"),
            differing as f64,
            0.0,
        ));
    }
    Outcome::from_checks(&checks)
}

fn criterion_8() -> Outcome {
    let full = preset_problem();
    let mut checks = Vec::new();
    for (idx, r) in full.rewards().iter().enumerate() {
        let prob =
            MultiAgentProblem::new(full.core().clone(), vec![r.clone()], CommGraph::edgeless(1))
                .unwrap();
        let central = build_centralized(&prob);
        let q = prob.n_features();
        let reference = integrate(&central, &Vector::zeros(q), 0.01, 200.0, Method::Rk4).unwrap();
        for flow in [build_v1(&prob), build_v2(&prob)] {
            let a = flow.a();
            let mut mismatches = 0usize;
            for i in 0..q {
                for j in 0..flow.dim() {
                    let want = if j < q { central.a()[(i, j)] } else { 0.0 };
                    mismatches += usize::from(a[(i, j)] != want);
                }
                mismatches += usize::from(flow.b()[i] != central.b()[i]);
            }
            let traj =
                integrate(&flow, &Vector::zeros(flow.dim()), 0.01, 200.0, Method::Rk4).unwrap();
            let diff = traj
                .states()
                .iter()
                .zip(reference.states())
                .map(|(x, y)| max_abs_diff(&x[..q], y))
                .fold(0.0, f64::max);
            let name = flow.kind().name();
            checks.push(Check::at_most(
                format!("R{} {name} theta-row drift mismatches", idx + 1),
                mismatches as f64,
                0.0,
            ));
            checks.push(Check::at_most(
                format!("R{} {name} theta trajectory difference", idx + 1),
                diff,
                0.0,
            ));
        }
    }
    Outcome::from_checks(&checks)
}

type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let total = Instant::now();
    let (results, sweep_time) = sweep();
    let criteria: Vec<Criterion> = vec![
        (
            1,
            "centralized flow reaches the closed-form solution (T = 200, < 1 s)",
            Box::new(criterion_1),
        ),
        (
            2,
            "version 1 consensus and equilibrium equation",
            Box::new(criterion_2),
        ),
        (
            3,
            "version 2 consensus and decreasing tracking error",
            Box::new(criterion_3),
        ),
        (
            4,
            "random instances: distributed limits equal the centralized solution",
            Box::new(|| criterion_4(&results, sweep_time)),
        ),
        (
            5,
            "random instances: spectral inequality and Hurwitz theta drift",
            Box::new(|| criterion_5(&results)),
        ),
        (
            6,
            "Lyapunov monitors are non-increasing",
            Box::new(criterion_6),
        ),
        (
            7,
            "repeated runs give byte-identical CSV files",
            Box::new(criterion_7),
        ),
        (
            8,
            "single agent: distributed flows reproduce the centralized flow",
            Box::new(criterion_8),
        ),
    ];

    let mut unexpected = 0;
    for (id, title, f) in &criteria {
        let o = f();
        let known = KNOWN_UNATTAINABLE.iter().find(|(k, _)| k == id);
        println!(
            "{} criterion {id}: {title} [{}]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        for n in &o.notes {
            println!("    note: {n}");
        }
        if !o.passed {
            match known {
                Some((_, why)) => println!("    known unattainable: {why}"),
                None => unexpected += 1,
            }
        }
    }
    println!(
        "acceptance finished in {:.2} s",
        total.elapsed().as_secs_f64()
    );
    if unexpected > 0 {
        println!("{unexpected} criterion/criteria failed");
        std::process::exit(1);
    }
}

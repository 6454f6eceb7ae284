//! Acceptance criteria, one line each. Exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use franka_ik::cli::{bench, median, verify, LockTarget, VerifyReport};
use franka_ik::model::{default_geometry, forward_kinematics, FrankaGeometry};
use franka_ik::oracle::{dh_forward_kinematics, fd_jacobian, sample_configurations};
use franka_ik::screw::{jacobian_from_axes, rank};
use franka_ik::solvers::{solve_q6, solve_q7, SingularityKind, MAX_SOLUTIONS};

use common::*;

const SEED: u64 = 42;
const N: usize = 2000;
const EQ1: Option<f64> = Some(std::f64::consts::FRAC_PI_2);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn golden_case1(g: &FrankaGeometry) -> Outcome {
    let pose = case1_pose();
    let q7 = CASE1_Q7_DEG.to_radians();
    let set = solve_q7(&pose, q7, g, EQ1).unwrap();
    let mut times: Vec<f64> = (0..200)
        .map(|_| {
            let t = Instant::now();
            let _ = std::hint::black_box(solve_q7(&pose, q7, g, EQ1));
            t.elapsed().as_secs_f64() * 1e6
        })
        .collect();
    let us = median(&mut times);
    let errs: Vec<f64> = CASE1_ROWS.iter().map(|r| best_match_deg(&set, r)).collect();
    let pass = set.singularity.kind == SingularityKind::Type1
        && set.len() == 4
        && errs.iter().all(|&e| e < TABLE_TOL_DEG)
        && us < 1000.0;
    outcome(
        pass,
        format!(
            "kind={:?} solutions={} row errors={:.4}/{:.4} deg runtime median={us:.1} us",
            set.singularity.kind,
            set.len(),
            errs[0],
            errs[1]
        ),
    )
}

fn golden_case2(g: &FrankaGeometry) -> Outcome {
    let set = solve_q6(&case2_pose(), CASE2_Q6_DEG.to_radians(), g, EQ1, 0.0).unwrap();
    let errs: Vec<f64> = CASE2_ROWS.iter().map(|r| best_match_deg(&set, r)).collect();
    let pass = set.singularity.kind == SingularityKind::Type2
        && !set.requested_param_honored
        && set.len() == 8
        && errs.iter().all(|&e| e < TABLE_TOL_DEG);
    outcome(
        pass,
        format!(
            "kind={:?} honored={} solutions={} row1 error={:.4} deg row5 error={:.4} deg",
            set.singularity.kind,
            set.requested_param_honored,
            set.len(),
            errs[0],
            errs[1]
        ),
    )
}

fn round_trip(q7: &VerifyReport, swivel: &VerifyReport, elapsed: Duration) -> Outcome {
    let pos = q7.pos_err_median.max(swivel.pos_err_median);
    let rot = q7.rot_err_median.max(swivel.rot_err_median);
    let pass = q7.success_rate() >= 0.995
        && swivel.recovered == swivel.n
        && pos <= 1e-6
        && rot <= 1e-6
        && elapsed.as_secs_f64() < 60.0;
    outcome(
        pass,
        format!(
            "q7 {}/{} swivel {}/{} median pos={pos:.2e} m rot={rot:.2e} rad time={:.1} s",
            q7.recovered,
            q7.n,
            swivel.recovered,
            swivel.n,
            elapsed.as_secs_f64()
        ),
    )
}

fn cardinality(reports: &[VerifyReport]) -> Outcome {
    let pass = reports.iter().all(|r| r.max_solutions <= MAX_SOLUTIONS && r.solver_errors == 0);
    let detail: Vec<String> = reports.iter().map(|r| format!("{} max={}", r.lock, r.max_solutions)).collect();
    outcome(pass, detail.join(" "))
}

fn jacobian(g: &FrankaGeometry) -> Outcome {
    let mut worst: f64 = 0.0;
    for q in sample_configurations(100, SEED, g) {
        let (pose, axes) = forward_kinematics(&q, g);
        let dev = (jacobian_from_axes(&axes, &pose.position) - fd_jacobian(&q, g, 1e-6)).amax();
        worst = worst.max(dev);
    }
    let type1 = deg(&CASE1_ROWS[0]);
    let (p1, a1) = forward_kinematics(&type1, g);
    let rank1 = rank(&jacobian_from_axes(&a1, &p1.position), 1e-8);
    let set2 = solve_q6(&case2_pose(), CASE2_Q6_DEG.to_radians(), g, EQ1, 0.0).unwrap();
    let ranks2: Vec<usize> = (0..set2.len()).map(|i| rank(&set2.jacobian(i), 1e-8)).collect();
    let pass = worst < 1e-6 && rank1 == 6 && !ranks2.is_empty() && ranks2.iter().all(|&r| r == 6);
    outcome(
        pass,
        format!("max FD deviation={worst:.2e} type1 rank={rank1} type2 ranks={ranks2:?}"),
    )
}

fn fk_cross_check(g: &FrankaGeometry) -> Outcome {
    let mut worst: f64 = 0.0;
    for q in sample_configurations(10_000, SEED, g) {
        let (a, _) = forward_kinematics(&q, g);
        let b = dh_forward_kinematics(&q, g);
        worst = worst
            .max((a.rotation - b.rotation).amax())
            .max((a.position - b.position).amax());
    }
    outcome(worst < 1e-12, format!("10000 configurations, max entry deviation={worst:.2e}"))
}

fn type2_invariance(g: &FrankaGeometry) -> Outcome {
    let pose = case2_pose();
    let sets: Vec<_> = [150.0f64, 193.489, 300.0]
        .iter()
        .map(|v| solve_q6(&pose, v.to_radians(), g, EQ1, 0.0).unwrap())
        .collect();
    let mut worst: f64 = 0.0;
    let mut same_len = true;
    for s in &sets[1..] {
        same_len &= s.len() == sets[0].len();
        for (a, b) in s.solutions.iter().zip(&sets[0].solutions) {
            worst = worst.max(joint_distance(&a.q, &b.q));
        }
    }
    let pass = same_len && !sets[0].is_empty() && worst <= 1e-9;
    outcome(pass, format!("solutions={} max difference={worst:.2e} rad", sets[0].len()))
}

fn timing(g: &FrankaGeometry) -> Outcome {
    let joints = bench(LockTarget::Q7, N, SEED, false, g);
    let jac = bench(LockTarget::Q7, N, SEED, true, g);
    let swivel = bench(LockTarget::Swivel, 500, SEED, false, g);
    for r in [&joints, &jac, &swivel] {
        println!("    {}", r.line());
    }
    let pass = jac.median_us <= 2.0 * joints.median_us;
    outcome(
        pass,
        format!(
            "q7 jacobian median {:.2} us vs joints median {:.2} us (limit 2x)",
            jac.median_us, joints.median_us
        ),
    )
}

fn main() {
    let g = default_geometry();
    let start = Instant::now();
    let q7 = verify(LockTarget::Q7, N, SEED, &g);
    let swivel = verify(LockTarget::Swivel, N, SEED, &g);
    let elapsed = start.elapsed();
    let q6 = verify(LockTarget::Q6, N, SEED, &g);
    let q4 = verify(LockTarget::Q4, N, SEED, &g);
    for r in [&q7, &q6, &q4, &swivel] {
        println!("    {}", r.line());
    }

    let results = [
        ("golden case 1 (type-1, q7 locked)", golden_case1(&g)),
        ("golden case 2 (type-2, q6 locked)", golden_case2(&g)),
        ("round-trip completeness", round_trip(&q7, &swivel, elapsed)),
        ("cardinality bound", cardinality(&[q7.clone(), q6, q4, swivel.clone()])),
        ("jacobian correctness", jacobian(&g)),
        ("FK cross-check", fk_cross_check(&g)),
        ("type-2 invariance", type2_invariance(&g)),
        ("timing (jacobian vs joints)", timing(&g)),
    ];

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

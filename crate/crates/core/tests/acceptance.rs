//! End-to-end acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use biharm::forcing::{trace_value, ForcingOrder};
use biharm::ibvp::{
    build_forcing_config, determinant, mass_balance_terms, neumann_entry, IbvpSolver, SolveParams, DEFAULT_DET_FLOOR,
};
use biharm::kernel::mellin_check;
use biharm::norms::{estimate_ratio_suite, EstimateKind, SobolevIndex, SuiteConfig};
use biharm::profiles::{build_profile, interior_relative_error, Profile};
use biharm::propagator::GridSpec;
use biharm::reference::{cn_solve, FdGrid};
use biharm::special::constant_m;
use biharm::verification::{
    b0_identity, check_grid, cn_manufactured, derivative_relation_error, jump_errors, semigroup_error,
    trace_value_error,
};
use biharm::{Error, Result, C64};
use std::time::{Duration, Instant};

// independently frozen reference values
const B0: (f64, f64) = (0.266_554_830_338_112_026, -0.110_410_625_842_105_334);
const M: (f64, f64) = (2.613_125_929_752_753_06, 1.082_392_200_292_393_97);
const A_THIRD: (f64, f64) = (1.214_267_009_235_119_3, 0.159_861_284_503_780_92);
const B_THIRD: (f64, f64) = (0.353_553_390_593_273_76, -0.094_734_345_490_752_999);
const DET_ABS: f64 = 0.366_025_403_784_438_65;

fn c(v: (f64, f64)) -> C64 {
    C64::new(v.0, v.1)
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn halves(coarse: f64, fine: f64) -> bool {
    fine <= 0.5 * coarse || coarse.max(fine) <= 1e-12
}

fn b0_identity_check() -> Result<Outcome> {
    let start = Instant::now();
    let cmp = b0_identity(1e-12)?;
    let elapsed = start.elapsed();
    let frozen = (C64::new(cmp.computed_re, cmp.computed_im) - c(B0)).norm();
    outcome(
        cmp.abs_error <= 1e-8 && frozen <= 1e-8 && elapsed < Duration::from_secs(5),
        format!("|error| {:.2e}, vs frozen {frozen:.2e}, {:.2} s", cmp.abs_error, elapsed.as_secs_f64()),
    )
}

fn mellin_identity() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for l in [0.05, 0.1, 0.2, 0.25, 0.3, 0.35] {
        worst = worst.max(mellin_check(l, 1e-10)?.relative_error());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-5 && elapsed < Duration::from_secs(60),
        format!("max relative error {worst:.2e}, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn trace_values() -> Result<Outcome> {
    let g = check_grid()?;
    let mut ok = true;
    let mut parts = Vec::new();
    for l in [-1.0, 0.0, 0.25, 1.0 / 3.0] {
        let (e1, e2) = (trace_value_error(l, g)?, trace_value_error(l, g.refined())?);
        ok &= e1 <= 1e-3 && halves(e1, e2);
        parts.push(format!("λ={l:.3}: {e1:.1e}→{e2:.1e}"));
    }
    let a0 = (trace_value(ForcingOrder::new(0.0)?)? - 1.0).norm();
    let a13 = (trace_value(ForcingOrder::new(1.0 / 3.0)?)? - c(A_THIRD)).norm();
    ok &= a0 <= 1e-10 && a13 <= 1e-12;
    outcome(ok, format!("{}; |a(0)−1| {a0:.1e}", parts.join(", ")))
}

fn jump_identity() -> Result<Outcome> {
    let g = check_grid()?;
    let m = (constant_m() - c(M)).norm();
    let (l1, r1) = jump_errors(g)?;
    let (l2, r2) = jump_errors(g.refined())?;
    outcome(
        m <= 1e-12 && l1.max(r1) <= 5e-2 && l2 < l1 && r2 < r1,
        format!("left {l1:.2e}→{l2:.2e}, right {r1:.2e}→{r2:.2e}"),
    )
}

fn derivative_relation() -> Result<Outcome> {
    let g = check_grid()?;
    let mut ok = true;
    let mut parts = Vec::new();
    for k in 1..=3 {
        let (e1, e2) = (derivative_relation_error(k, g)?, derivative_relation_error(k, g.refined())?);
        ok &= e1 <= 1e-4 && e2 < e1;
        parts.push(format!("k={k}: {e1:.1e}→{e2:.1e}"));
    }
    outcome(ok, parts.join(", "))
}

fn fractional_semigroup() -> Result<Outcome> {
    let ns = [65, 129, 257];
    let errs = ns.iter().map(|&n| semigroup_error(n)).collect::<Result<Vec<_>>>()?;
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let constant = errs.iter().zip(ns).map(|(e, n)| e * ((n - 1) as f64).powi(2)).fold(0.0, f64::max);
    outcome(
        orders.iter().all(|o| *o >= 1.8),
        format!(
            "errors {}, observed orders {orders:.2?}, C = {constant:.2e}",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" → ")
        ),
    )
}

fn manufactured_linear_ibvp() -> Result<Outcome> {
    let start = Instant::now();
    let grid = GridSpec::new(20.0, 512, 1.0, 257)?;
    let p = build_profile(Profile::ManufacturedLinear, grid, 1.0)?;
    let solver = IbvpSolver::new(grid, build_forcing_config(0.0, 1.0 / 3.0, 0.0, 0.45)?, SolveParams::default())?;
    let sol = solver.picard_solve(&p.data)?;
    let oracle = p.oracle.expect("manufactured data carry their solution");
    let err = interior_relative_error(&sol.u, &oracle, 0.0, 10.0)?;
    let d = &sol.diagnostics;
    let elapsed = start.elapsed();
    outcome(
        err <= 1e-4 && d.dirichlet_error <= 1e-4 && d.neumann_error <= 1e-4 && elapsed < Duration::from_secs(120),
        format!(
            "interior {err:.2e}, plug-back {:.2e} / {:.2e}, {:.1} s",
            d.dirichlet_error,
            d.neumann_error,
            elapsed.as_secs_f64()
        ),
    )
}

fn nonlinear_distance(nx: usize, nt: usize) -> Result<(f64, f64)> {
    let grid = GridSpec::new(20.0, nx, 1.0, nt)?;
    let data = build_profile(Profile::ModulatedRamp, grid, 1.0)?.data;
    let params = SolveParams { lambda_nl: 1.0, ..SolveParams::default() };
    let solver = IbvpSolver::new(grid, build_forcing_config(0.0, 1.0 / 3.0, 0.0, 0.45)?, params)?;
    let sol = solver.picard_solve(&data)?;
    let worst_ratio = sol.diagnostics.contraction_ratios().into_iter().fold(0.0, f64::max);
    // same spacing on a longer interval, so nothing reaches the clamped end
    let fd = FdGrid::new(100.0, (100.0 / grid.dx()).round() as usize, 1.0, nt)?;
    let reference = cn_solve(&data, 1.0, fd)?.sample_onto(grid)?;
    Ok((interior_relative_error(&sol.u, &reference, 0.0, 10.0)?, worst_ratio))
}

fn nonlinear_cross_validation() -> Result<Outcome> {
    let start = Instant::now();
    let (e1, r1) = nonlinear_distance(512, 257)?;
    let (e2, r2) = nonlinear_distance(1024, 513)?;
    let elapsed = start.elapsed();
    outcome(
        e1 <= 1e-2 && e2 < e1 && r1.max(r2) <= 0.5 && elapsed < Duration::from_secs(600),
        format!("distance {e1:.2e}→{e2:.2e}, max ratio {:.2e}, {:.0} s", r1.max(r2), elapsed.as_secs_f64()),
    )
}

fn contraction_behaviour() -> Result<Outcome> {
    let grid = GridSpec::new(20.0, 256, 1.0, 129)?;
    let params = SolveParams { lambda_nl: 1.0, ..SolveParams::default() };
    let solver = IbvpSolver::new(grid, build_forcing_config(0.0, 1.0 / 3.0, 0.0, 0.45)?, params)?;
    let small = solver.picard_solve(&build_profile(Profile::ModulatedRamp, grid, 0.5)?.data)?;
    let late: Vec<f64> =
        small.diagnostics.iterations.iter().filter(|r| r.iteration > 2).filter_map(|r| r.ratio).collect();
    let small_ok = small.diagnostics.converged && !late.is_empty() && late.iter().all(|r| *r <= 0.5);
    let mut lost_at = None;
    for amp in [1.0, 2.0, 3.0, 4.0, 6.0, 8.0] {
        let data = build_profile(Profile::ModulatedRamp, grid, amp)?.data;
        match solver.picard_solve(&data) {
            Err(Error::Divergence(_)) => {
                lost_at = Some(amp);
                break;
            }
            Ok(s) if !s.diagnostics.converged => {
                lost_at = Some(amp);
                break;
            }
            Ok(_) => {}
            Err(e) => return Err(e),
        }
    }
    outcome(
        small_ok && lost_at.is_some(),
        format!(
            "ratios after iteration 2 at amplitude 0.5: max {:.2e}; contraction lost at amplitude {lost_at:?}",
            late.iter().copied().fold(0.0, f64::max)
        ),
    )
}

fn mass_balance() -> Result<Outcome> {
    let grid = GridSpec::new(20.0, 512, 1.0, 257)?;
    let solver = IbvpSolver::new(grid, build_forcing_config(0.0, 1.0 / 3.0, 0.0, 0.45)?, SolveParams::default())?;
    let mut worst: f64 = 0.0;
    for profile in [Profile::GaussianPulse, Profile::ModulatedRamp, Profile::ManufacturedLinear] {
        let sol = solver.picard_solve(&build_profile(profile, grid, 1.0)?.data)?;
        worst = worst.max(mass_balance_terms(&sol.u, grid.horizon).residual());
    }
    let (_, m1) = cn_manufactured(1024, 257)?;
    let (_, m2) = cn_manufactured(2048, 513)?;
    let order = (m1 / m2).log2();
    outcome(
        worst <= 1e-3 && order >= 1.8,
        format!("linear residual max {worst:.2e}; reference {m1:.2e}→{m2:.2e} (order {order:.2})"),
    )
}

fn determinant_admissibility() -> Result<Outcome> {
    let o = ForcingOrder::new;
    let det = determinant(o(0.0)?, o(1.0 / 3.0)?)?.norm();
    let b13 = (neumann_entry(o(1.0 / 3.0)?)? - c(B_THIRD)).norm();
    let mut ok = det > DEFAULT_DET_FLOOR && (det - DET_ABS).abs() < 1e-12 && b13 < 1e-12;
    let mut diag: f64 = 0.0;
    for l in [-2.5, -1.0, -0.5, 0.0, 0.25, 1.0 / 3.0, 0.45] {
        diag = diag.max(determinant(o(l)?, o(l)?)?.norm());
    }
    ok &= diag <= 1e-14;
    // poles raise errors exactly on 1 − 4ℤ and 2 − 4ℤ over a quarter-spaced scan
    let mut poles_exact = true;
    for k in -15i32..=40 {
        let l = k as f64 / 4.0;
        let a_pole = (k - 4).rem_euclid(16) == 0;
        let b_pole = (k - 8).rem_euclid(16) == 0;
        poles_exact &= matches!(trace_value(o(l)?), Err(Error::Pole { .. })) == a_pole;
        poles_exact &= matches!(neumann_entry(o(l)?), Err(Error::Pole { .. })) == b_pole;
    }
    ok &= poles_exact;
    outcome(ok, format!("|det A(0, 1/3)| {det:.6}, max |det A(λ, λ)| {diag:.1e}, pole sets exact: {poles_exact}"))
}

fn estimate_ratio_suites() -> Result<Outcome> {
    let idx = SobolevIndex::new(0.0, 0.45);
    let cfg = SuiteConfig::default();
    let mut worst = (0.0, "");
    for kind in EstimateKind::ALL {
        let r = estimate_ratio_suite(kind, 8, idx, &cfg)?;
        if r.growth > worst.0 {
            worst = (r.growth, kind.name());
        }
    }
    outcome(worst.0 <= 1.10, format!("largest growth {:.4} ({})", worst.0, worst.1))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 12] = [
        ("b0_identity", b0_identity_check),
        ("mellin_identity", mellin_identity),
        ("trace_values", trace_values),
        ("jump_identity", jump_identity),
        ("derivative_relation", derivative_relation),
        ("fractional_semigroup", fractional_semigroup),
        ("manufactured_linear_ibvp", manufactured_linear_ibvp),
        ("nonlinear_cross_validation", nonlinear_cross_validation),
        ("contraction_behaviour", contraction_behaviour),
        ("mass_balance", mass_balance),
        ("determinant_admissibility", determinant_admissibility),
        ("estimate_ratio_suites", estimate_ratio_suites),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!passed);
        println!("[{:>2}] {} {name}: {detail}", i + 1, if passed { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

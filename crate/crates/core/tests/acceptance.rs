//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use delta_jacobi::correspond::{verify_kappa, SingleDelta};
use delta_jacobi::criteria::{kosmir, var_indices, Status};
use delta_jacobi::jacobi::{build_b1, build_b2, build_gauge, build_tilde_b, Triplet};
use delta_jacobi::linalg::CMat;
use delta_jacobi::model::{generate, CouplingFamily, GapFamily, HermitianMatrix, InteractionData, SequenceFamily};
use delta_jacobi::spectral::{
    assemble_fem, assemble_fem_elements, count_below, deficiency_estimate, eigenvalues_by_bisection, inertia,
    secular_real_roots, BlockTridiagonal, Boundary,
};
use delta_jacobi::weyl::{derivative_constant, herglotz_scan, m_regularized};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{dense_eigenvalues, random_block_tridiagonal, random_data, to_nalgebra, C64};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit, format!("runtime {:.2} s exceeds {limit} s", elapsed.as_secs_f64()))
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Leading 4×4 p-block corner of B₁ as displayed.
fn b1_corner(d1: f64, d2: f64, lambda1: &CMat, p: usize) -> CMat {
    let mut m = CMat::zeros(4 * p, 4 * p);
    let s = |v: f64| CMat::scalar(p, v);
    m.set_block(0, p, &s(-d1.powi(-2)));
    m.set_block(p, 0, &s(-d1.powi(-2)));
    m.set_block(p, p, &s(-d1.powi(-2)));
    m.set_block(p, 2 * p, &s(d1.powf(-1.5) * d2.powf(-0.5)));
    m.set_block(2 * p, p, &s(d1.powf(-1.5) * d2.powf(-0.5)));
    m.set_block(2 * p, 2 * p, &lambda1.scale(1.0 / d2));
    m.set_block(2 * p, 3 * p, &s(-d2.powi(-2)));
    m.set_block(3 * p, 2 * p, &s(-d2.powi(-2)));
    m.set_block(3 * p, 3 * p, &s(-d2.powi(-2)));
    m
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = rng.gen_range(1..=3);
        let n = rng.gen_range(2..=20);
        let data = random_data(&mut rng, p, n);
        let b1 = build_b1(&data, n).map_err(|e| e.to_string())?;
        let corner = b1_corner(data.d(1), data.d(2), data.lambda(1).as_mat(), p);
        for i in 0..4 * p {
            for j in 0..4 * p {
                worst = worst.max(rel(b1[(i, j)], corner[(i, j)]));
            }
        }
        // dense R⁻¹(B̃ − Q)R⁻¹ with nalgebra
        let g = build_gauge(&data, n, Triplet::Triplet1).map_err(|e| e.to_string())?;
        let tilde = to_nalgebra(&build_tilde_b(&data, n).map_err(|e| e.to_string())?);
        let q = to_nalgebra(&g.q_dense());
        let r = to_nalgebra(&g.r_dense());
        let r_inv = r.try_inverse().ok_or("R not invertible")?;
        let oracle: DMatrix<C64> = &r_inv * (tilde - q) * &r_inv;
        for i in 0..oracle.nrows() {
            for j in 0..oracle.ncols() {
                worst = worst.max(rel(b1[(i, j)], oracle[(i, j)]));
            }
        }
    }
    check(worst <= 1e-12, format!("max relative deviation {worst:.3e}"))?;
    within(start.elapsed(), 5.0)?;
    Ok(format!("200 data sets, max relative deviation {worst:.2e}, {:.2} s", start.elapsed().as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let x = vec![0.0, 0.1, 0.6, 1.6, 3.6, 6.6];
    let lam = vec![CMat::scalar(1, -1.0), CMat::scalar(1, 2.0), CMat::zeros(1, 1), CMat::scalar(1, 0.5)];
    let data = InteractionData::new(x, lam, 1).map_err(|e| e.to_string())?;
    let mut worst_ratio = 0.0f64;
    for triplet in [Triplet::Triplet1, Triplet::Triplet2] {
        let c = derivative_constant(triplet);
        for k in 1..=data.intervals() {
            for m in 2..=8 {
                let z = -(10f64.powi(-m));
                let v = m_regularized(&data, k, Complex64::new(z, 0.0), triplet).map_err(|e| e.to_string())?;
                let ratio = v.value.spectral_norm() / (10.0 * z.abs() * c);
                worst_ratio = worst_ratio.max(ratio);
            }
        }
    }
    check(worst_ratio <= 1.0, format!("‖M_k(z)‖ / (10|z|C) reached {worst_ratio:.3}"))?;

    let mut grid = Vec::with_capacity(400);
    for i in 0..20 {
        for j in 0..20 {
            let re = -20.0 + 40.0 * i as f64 / 19.0;
            let im = 10f64.powf(-3.0 + 5.0 * j as f64 / 19.0);
            grid.push(Complex64::new(re, im));
        }
    }
    let mut min_eig = f64::INFINITY;
    for triplet in [Triplet::Triplet1, Triplet::Triplet2] {
        let report = herglotz_scan(&data, triplet, &grid);
        check(report.passed(), format!("Herglotz scan failed for {triplet:?}: {} failures", report.failures))?;
        check(report.samples.len() == 400 * data.intervals(), "sample count")?;
        min_eig = min_eig.min(report.worst_min_eig);
    }
    check(min_eig >= -1e-10, format!("min eig(Im M) = {min_eig:.3e}"))?;
    Ok(format!("worst ‖M_k‖/(10|z|C) = {worst_ratio:.3}, min eig(Im M) over 400-point grid = {min_eig:.2e}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let data = InteractionData::new(vec![0.0, PI], vec![], 1).map_err(|e| e.to_string())?;
    let counts = [250, 500, 1000, 2000];
    let mut errors = Vec::new();
    for &ne in &counts {
        let fem = assemble_fem_elements(&data, 1, Boundary::Dirichlet, Boundary::Dirichlet, vec![ne]).map_err(|e| e.to_string())?;
        let eig = fem.eigenvalues(0.0, 12.0, 3, Some(1e-13)).map_err(|e| e.to_string())?;
        check(eig.len() == 3, format!("found {} eigenvalues below 12", eig.len()))?;
        errors.push(eig.iter().zip([1.0, 4.0, 9.0]).map(|(e, x)| (e - x).abs() / x).collect::<Vec<f64>>());
    }
    let mut ratios = Vec::new();
    for w in errors.windows(2) {
        for j in 0..3 {
            ratios.push(w[0][j] / w[1][j]);
        }
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    check(lo >= 3.5 && hi <= 4.5, format!("halving ratios in [{lo:.3}, {hi:.3}]"))?;
    let last = errors.last().unwrap().iter().copied().fold(0.0, f64::max);
    check(last <= 1e-4, format!("relative error {last:.3e} at 2000 elements"))?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("ratios in [{lo:.3}, {hi:.3}], error {last:.2e} at 2000 elements, {:.2} s", start.elapsed().as_secs_f64()))
}

fn criterion_4() -> Outcome {
    let n = 200;
    let fam = SequenceFamily::new(1, GapFamily::Constant { c: 1.0 }, CouplingFamily::Zero).map_err(|e| e.to_string())?;
    let b = build_b2(&generate(&fam, n + 1).map_err(|e| e.to_string())?, n).map_err(|e| e.to_string())?;
    let t = BlockTridiagonal::from_jacobi(&b);
    let below = count_below(&t, -1e-8).map_err(|e| e.to_string())?;
    let below_top = count_below(&t, 2.0 + 1e-8).map_err(|e| e.to_string())?;
    check(below == 0 && below_top == n, format!("counts {below} below −1e−8 and {below_top} below 2+1e−8"))?;
    let eig = eigenvalues_by_bisection(&t, -1e-8, 2.0 + 1e-8, n, Some(1e-13)).map_err(|e| e.to_string())?;
    check(eig.len() == n, format!("bisection found {} eigenvalues", eig.len()))?;
    let worst = eig
        .iter()
        .enumerate()
        .map(|(j, e)| (e - (1.0 - ((j + 1) as f64 * PI / (n + 1) as f64).cos())).abs())
        .fold(0.0, f64::max);
    check(worst <= 1e-10, format!("max deviation from 1 − cos(jπ/(N+1)) is {worst:.3e}"))?;
    Ok(format!("N = 200, spectrum in [0, 2], max deviation {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let source = SingleDelta { at: 1.0, length: 10.0, strength: HermitianMatrix::scalar(1, -1.0) };
    let mesh = [0.05, 0.02, 0.01];
    let report = verify_kappa(&source, &[4, 8, 16], &mesh, 4).map_err(|e| e.to_string())?;
    for row in &report.rows {
        check(
            row.neumann.kappa_b == 1 && row.neumann.kappa_h == Some(1),
            format!("N = {}: κ₋(B) = {}, κ₋(H) = {:?}", row.n, row.neumann.kappa_b, row.neumann.kappa_h),
        )?;
        check(row.neumann.trace.levels.iter().all(|l| l.n_minus == 1), format!("N = {}: mesh trace not constant", row.n))?;
    }
    check(report.agreement, "agreement flag not set")?;

    let data = delta_jacobi::model::single_delta_partition(1.0, 10.0, 16, HermitianMatrix::scalar(1, -1.0)).map_err(|e| e.to_string())?;
    let roots = secular_real_roots(&data, 16, Boundary::Neumann, -10.0, -1e-9, 4000).map_err(|e| e.to_string())?;
    check(roots.len() == 1, format!("{} negative secular roots", roots.len()))?;
    let fem = assemble_fem(&data, 16, Boundary::Neumann, Boundary::Dirichlet, 0.01).map_err(|e| e.to_string())?;
    let eig = fem.eigenvalues(-10.0, 0.0, 2, Some(1e-13)).map_err(|e| e.to_string())?;
    check(eig.len() == 1, format!("{} negative FEM eigenvalues", eig.len()))?;
    let diff = (eig[0] - roots[0]).abs();
    check(diff <= 1e-4, format!("secular root {} vs FEM {} differ by {diff:.3e}", roots[0], eig[0]))?;
    within(start.elapsed(), 30.0)?;
    Ok(format!("κ₋ = 1 on both sides for N ∈ {{4, 8, 16}}, secular root {:.8} vs FEM {:.8}, {:.2} s", roots[0], eig[0], start.elapsed().as_secs_f64()))
}

fn criterion_6() -> Outcome {
    let fam = SequenceFamily::new(
        2,
        GapFamily::PowerLaw { c: 1.0, gamma: 1.0 },
        CouplingFamily::DiagonalAffine { a: vec![-2.0, -4.0], b: vec![-1.0, -4.0], rho: vec![0.0, 0.0] },
    )
    .map_err(|e| e.to_string())?;
    let v = var_indices(&fam, 1).map_err(|e| e.to_string())?;
    check(v.status == Status::Holds && v.deficiency == Some(1), format!("var_indices: {:?} {:?}", v.status, v.deficiency))?;

    let block = fam.coordinates(0..1).ok_or("coordinate restriction failed")?;
    let k11 = kosmir(&block);
    check(k11.status == Status::Holds, "kosmir on the 11-block does not hold")?;
    let sums = &k11.witness.parts[2].witness.partial_sums;
    let (first, last) = (sums.first().ok_or("no partial sums")?.value, sums.last().unwrap().value);
    check((last - first).abs() <= 1e-9, format!("(alpha) partial sums drift from {first:.3e} to {last:.3e}"))?;

    let coord = v.witness.parts.last().ok_or("no coordinate verdict")?;
    let m = coord.witness.bounds.iter().find(|b| b.label == "M").ok_or("no bound M")?.value;
    let tail = coord.witness.bounds.iter().find(|b| b.label == "tail limit").ok_or("no tail limit")?.value;
    check(m == 0.0 && tail == 0.0, format!("M = {m}, tail limit = {tail}"))?;

    let data = generate(&fam, 402).map_err(|e| e.to_string())?;
    let est = deficiency_estimate(&build_b2(&data, 401).map_err(|e| e.to_string())?, Complex64::i(), 400).map_err(|e| e.to_string())?;
    check(est.decaying == 1 && est.gap >= 0.1, format!("estimator: {} decaying, gap {:.3}", est.decaying, est.gap))?;
    Ok(format!("n± = 1 from var_indices, M = 0, estimator 1 decaying direction (exponents {:.3}, {:.3}; gap {:.3})", est.exponents[0], est.exponents[1], est.gap))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut shifts_checked = 0usize;
    for case in 0..500 {
        let p = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=30);
        let b = random_block_tridiagonal(&mut rng, p, n);
        let eig = dense_eigenvalues(&b.to_dense());
        let (lo, hi) = (eig[0] - 1.0, eig[eig.len() - 1] + 1.0);
        let mut taken = 0;
        while taken < 100 {
            let s = rng.gen_range(lo..hi);
            if eig.iter().any(|e| (e - s).abs() <= 1e-8) {
                continue;
            }
            taken += 1;
            let expected = eig.iter().filter(|&&e| e < s).count();
            let t = inertia(&b, s).map_err(|e| format!("case {case}: {e}"))?;
            check(
                t.n_minus == expected && t.n_zero == 0 && t.total() == b.order(),
                format!("case {case} (p = {p}, N = {n}) shift {s}: {:?} vs {expected} below", t),
            )?;
        }
        shifts_checked += taken;
    }
    Ok(format!("500 matrices, {shifts_checked} shifts, all counts equal"))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_delta-jacobi")).args(args).output().map_err(|e| e.to_string())?;
    check(out.status.code() == Some(0), format!("`{}` exited with {:?}: {}", args.join(" "), out.status.code(), String::from_utf8_lossy(&out.stderr)))?;
    Ok(out.stdout)
}

fn criterion_8() -> Outcome {
    let commands: Vec<Vec<&str>> = vec![
        vec!["build", "--family", "power-law", "--gamma", "1", "--N", "10"],
        vec!["build", "--matrix", "b1", "--seed", "5", "--p", "2", "--N", "4"],
        vec!["weyl", "--seed", "3", "--p", "2", "--N", "5", "--z", "0,1", "--z", "-3,0.01", "--scan", "10"],
        vec!["criteria", "--example", "kosmir-paper"],
        vec!["criteria", "--example", "kosmir-paper", "--format", "json"],
        vec!["spectrum", "--lambda-scalar", "-1", "--at", "1", "--N", "6", "--lo", "-2", "--hi", "1", "--h", "0.05,0.02"],
        vec!["compare", "--task", "kappa", "--lambda-scalar", "-1", "--at", "1", "--N", "4,8,16", "--workers", "3"],
        vec!["compare", "--task", "indices", "--example", "kosmir-scalar", "--horizon", "200"],
    ];
    for cmd in &commands {
        let a = run_cli(cmd)?;
        let b = run_cli(cmd)?;
        check(!a.is_empty() && a == b, format!("`{}` output differs between runs", cmd.join(" ")))?;
    }
    // worker count and config round trip leave the bytes unchanged
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("run.json");
    let base = ["compare", "--lambda-scalar", "-1", "--at", "1", "--N", "4,8"];
    let dumped = run_cli(&[&base[..], &["--dump-config"]].concat())?;
    std::fs::write(&cfg, &dumped).map_err(|e| e.to_string())?;
    let one = run_cli(&[&base[..], &["--workers", "1"]].concat())?;
    let many = run_cli(&[&base[..], &["--workers", "4"]].concat())?;
    let from_cfg = run_cli(&["compare", "--config", cfg.to_str().unwrap()])?;
    check(one == many && one == from_cfg, "worker count or config round trip changed the report")?;
    let emit = dir.path().join("b2.json");
    run_cli(&["build", "--family", "power-law", "--gamma", "1", "--N", "10", "--emit", emit.to_str().unwrap()])?;
    let first = std::fs::read(&emit).map_err(|e| e.to_string())?;
    run_cli(&["build", "--family", "power-law", "--gamma", "1", "--N", "10", "--emit", emit.to_str().unwrap()])?;
    check(first == std::fs::read(&emit).map_err(|e| e.to_string())?, "emitted artifact differs")?;
    Ok(format!("{} commands byte-identical across runs, worker counts and config round trip", commands.len() + 2))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("gauge identity", criterion_1),
        ("Weyl limits and Herglotz scan", criterion_2),
        ("Dirichlet spectrum anchor", criterion_3),
        ("free-case spectrum", criterion_4),
        ("kappa correspondence", criterion_5),
        ("mixed-index example end to end", criterion_6),
        ("inertia oracle equivalence", criterion_7),
        ("CLI determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

//! End-to-end acceptance suite. Every criterion prints one PASS/FAIL line; the
//! test fails if any criterion fails.

mod common;

use std::io::Write;
use std::time::Instant;

use finsec_core::analyzer::{
    fsm_check, gk_one_sided, h_eta_image, n_eta_matrix, w_image, AnalyzerConfig, Checkpoint, Condition, GkClass,
    OperatorExpr, Side, Verdict, WIndex,
};
use finsec_core::geometry::{
    arc_contains, arc_point, conjugate, f_param, lens_contains, triple_curve, winding_about_origin, CircularArc,
};
use finsec_core::numerics::{
    cond_sweep, convolution_oracle, discretize, empirical_spectrum, homomorphism_probe, solve_fsm, Grid, GridPolicy,
    ProbeConfig, ProbeTarget,
};
use finsec_core::symbols::{PcsoSymbol, StepFunction};
use finsec_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{c, chi_minus_plus_g1, lens_polygon, paired_const, point_in_polygon, polygon_distance, random_expr, random_fiber};

type Outcome = Result<String, String>;

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion_1_geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let s = rng.gen_range(1.05..8.0);
        ensure(f_param(s, 0.0).unwrap().norm() < 1e-12, format!("f_param({s}, 0) != 0"))?;
        ensure((f_param(s, 1.0).unwrap() - 1.0).norm() < 1e-12, format!("f_param({s}, 1) != 1"))?;
        let arc = CircularArc::new(c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)), c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)), s)
            .unwrap();
        let mu = rng.gen_range(0.0..=1.0);
        let z = arc_point(&arc, mu).unwrap();
        ensure(arc_contains(&arc, z, 1e-9), format!("arc round trip failed at s={s}, mu={mu}"))?;
    }
    let mut disagreements = 0;
    for p in [1.5, 2.0, 3.0, 4.0] {
        let poly = lens_polygon(p, 4000);
        for i in 0..200 {
            for j in 0..200 {
                let z = c(-1.0 + 3.0 * i as f64 / 199.0, -1.5 + 3.0 * j as f64 / 199.0);
                let closed = lens_contains(p, z, 1e-9).unwrap();
                ensure(closed == lens_contains(conjugate(p), z, 1e-9).unwrap(), format!("p/q asymmetry at {z}"))?;
                if closed != point_in_polygon(&poly, z) && polygon_distance(&poly, z) > 1e-6 {
                    disagreements += 1;
                }
            }
        }
    }
    ensure(disagreements == 0, format!("{disagreements} lens disagreements outside the boundary band"))?;
    Ok("200 arc round trips, 4x200x200 lens points agree".into())
}

fn criterion_2_winding() -> Outcome {
    let tol = 1e-9;
    let z = c(0.3, -0.7);
    for p in [1.5, 2.0, 3.0] {
        ensure(winding_about_origin(&triple_curve(p, z, z, z).unwrap(), tol).unwrap() == 0, "degenerate curve")?;
    }
    let w = winding_about_origin(&triple_curve(2.0, c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)).unwrap(), tol).unwrap();
    ensure(w == 0, format!("wind c_2(1,2,3) = {w}"))?;
    let tri = [c(1.0, 0.0), c(-1.0, 1.0), c(-1.0, -1.0)];
    // p = 2 arcs are straight: the curve is the triangle itself
    let area2: f64 = (0..3).map(|k| (tri[k].conj() * tri[(k + 1) % 3]).im).sum();
    let contains = point_in_polygon(&tri, c(0.0, 0.0));
    let oracle = if contains { area2.signum() as i64 } else { 0 };
    let w = winding_about_origin(&triple_curve(2.0, tri[0], tri[1], tri[2]).unwrap(), tol).unwrap();
    ensure(w == oracle && w == 1, format!("wind c_2(1,-1+i,-1-i) = {w}, oracle {oracle}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut done = 0;
    while done < 50 {
        let p = rng.gen_range(1.2..5.0);
        let v: Vec<C64> = (0..3).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let curve = triple_curve(p, v[0], v[1], v[2]).unwrap();
        let Ok(w) = winding_about_origin(&curve, 1e-6) else { continue };
        for k in 1..3 {
            ensure(winding_about_origin(&curve.rotated(k), 1e-6).unwrap() == w, "rotation changed the winding")?;
        }
        ensure(winding_about_origin(&curve.reversed(), 1e-6).unwrap() == -w, "reversal did not negate the winding")?;
        done += 1;
    }
    Ok("special triples and 50 random rotation/reversal checks".into())
}

fn criterion_3_spectrum_pq() -> Outcome {
    let n = 100;
    let mut worst = 0;
    for p in [2.0, 4.0] {
        let lam = |i: usize, j: usize| c(-0.5 + 2.0 * i as f64 / (n - 1) as f64, -1.0 + 2.0 * j as f64 / (n - 1) as f64);
        let lens: Vec<Vec<bool>> =
            (0..n).map(|i| (0..n).map(|j| lens_contains(p, lam(i, j), 1e-9).unwrap()).collect()).collect();
        let mut bad = vec![];
        for i in 0..n {
            for j in 0..n {
                let l = lam(i, j);
                let r = gk_one_sided(p, 0.0, f64::INFINITY, &StepFunction::constant(1.0 - l), &StepFunction::constant(-l), 1e-9)
                    .map_err(|e| e.to_string())?;
                if (r.class != GkClass::Invertible) != lens[i][j] {
                    bad.push((i, j));
                }
            }
        }
        // a disagreement is tolerated only if the lens indicator changes within 2 pixels
        for (i, j) in bad {
            let near_boundary = (i.saturating_sub(2)..=(i + 2).min(n - 1))
                .any(|a| (j.saturating_sub(2)..=(j + 2).min(n - 1)).any(|b| lens[a][b] != lens[i][j]));
            if !near_boundary {
                worst += 1;
            }
        }
    }
    ensure(worst == 0, format!("{worst} disagreements away from the boundary"))?;
    Ok("non-invertibility region of P - lambda I matches the lens for p = 2, 4".into())
}

fn criterion_4_symbol_maps() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_branch: f64 = 0.0;
    let mut worst_fs: f64 = 0.0;
    let mut worst_hom: f64 = 0.0;
    let lens_point = |rng: &mut ChaCha8Rng| {
        let s = rng.gen_range(1.5..3.0);
        arc_point(&CircularArc::new(c(0.0, 0.0), c(1.0, 0.0), s).unwrap(), rng.gen_range(0.0..=1.0)).unwrap()
    };
    for _ in 0..100 {
        let items: Vec<OperatorExpr> = (0..rng.gen_range(2..4)).map(|_| random_expr(&mut rng, 3, true)).collect();
        let eta = rng.gen_range(-2.0..2.0);
        for (whole, op) in [(OperatorExpr::Sum(items.clone()), "sum"), (OperatorExpr::Prod(items.clone()), "prod")] {
            for i in WIndex::ALL {
                let parts: Vec<OperatorExpr> = items.iter().map(|e| w_image(e, i)).collect();
                let rebuilt = if op == "sum" { OperatorExpr::Sum(parts) } else { OperatorExpr::Prod(parts) };
                ensure(w_image(&whole, i) == rebuilt, format!("W_{} is not a homomorphism on a {op}", i.as_i8()))?;
            }
            let parts: Vec<OperatorExpr> = items.iter().map(|e| h_eta_image(e, eta)).collect();
            let rebuilt = if op == "sum" { OperatorExpr::Sum(parts) } else { OperatorExpr::Prod(parts) };
            ensure(h_eta_image(&whole, eta) == rebuilt, format!("H_eta is not a homomorphism on a {op}"))?;

            let fiber = random_fiber(&mut rng);
            for side in [Side::Minus, Side::Plus] {
                let x = lens_point(&mut rng);
                let n = n_eta_matrix(&whole, &fiber, side).map_err(|e| e.to_string())?;
                let ms: Vec<_> = items.iter().map(|e| n_eta_matrix(e, &fiber, side).unwrap().eval(x)).collect();
                let combined = ms.iter().skip(1).fold(ms[0], |acc, m| {
                    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
                    for a in 0..2 {
                        for b in 0..2 {
                            out[a][b] = if op == "sum" {
                                acc[a][b] + m[a][b]
                            } else {
                                acc[a][0] * m[0][b] + acc[a][1] * m[1][b]
                            };
                        }
                    }
                    out
                });
                let got = n.eval(x);
                let scale = 1.0 + got.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
                for a in 0..2 {
                    for b in 0..2 {
                        worst_hom = worst_hom.max((got[a][b] - combined[a][b]).norm() / scale);
                    }
                }
                let d = n.det(x);
                let flipped = n.with_branch_flipped().det(x);
                worst_branch = worst_branch.max((d - flipped).norm() / (1.0 + d.norm()));
            }
        }
        // det N(PAP+Q) = [N(A)]_11 for A free of (P_tau)
        let a = random_expr(&mut rng, 3, false);
        let fiber = random_fiber(&mut rng);
        let fs = OperatorExpr::finite_section(a.clone());
        for side in [Side::Minus, Side::Plus] {
            let x = lens_point(&mut rng);
            let lhs = n_eta_matrix(&fs, &fiber, side).unwrap().det(x);
            let rhs = n_eta_matrix(&a, &fiber, side).unwrap().eval(x)[0][0];
            worst_fs = worst_fs.max((lhs - rhs).norm() / (1.0 + rhs.norm()));
        }
    }
    ensure(worst_hom < 1e-12, format!("N_eta homomorphism defect {worst_hom:e}"))?;
    ensure(worst_branch < 1e-12, format!("branch flip changed det by {worst_branch:e}"))?;
    ensure(worst_fs < 1e-12, format!("finite section identity defect {worst_fs:e}"))?;
    Ok(format!("100 random ASTs; N defect {worst_hom:.1e}, branch {worst_branch:.1e}, section identity {worst_fs:.1e}"))
}

fn criterion_5_paired() -> Outcome {
    let cfg = AnalyzerConfig::default();
    let p = 2.0;
    let r1 = fsm_check(&paired_const(1.0, 1.0), p, &cfg).map_err(|e| e.to_string())?;
    ensure(r1.verdict == Verdict::Stable, format!("(i) verdict {:?}", r1.verdict))?;
    let a2 = paired_const(1.0, -1.0);
    let r2 = fsm_check(&a2, p, &cfg).map_err(|e| e.to_string())?;
    ensure(r2.verdict == Verdict::Stable, format!("(ii) verdict {:?}", r2.verdict))?;
    let taus = [10.0, 20.0, 40.0, 80.0];
    let policy = GridPolicy { n: 1024, ..Default::default() };
    let s2 = cond_sweep(&a2, &taus, p, &policy).map_err(|e| e.to_string())?;
    ensure(s2.cond_ratio < 3.0, format!("(ii) cond ratio {}", s2.cond_ratio))?;

    let a3 = chi_minus_plus_g1();
    let r3 = fsm_check(&a3, p, &cfg).map_err(|e| e.to_string())?;
    ensure(r3.verdict == Verdict::Unstable, format!("(iii) verdict {:?}", r3.verdict))?;
    // g₁(0) = 0, so a(0+) = 0 and H_0 fails as well; the lens witness is the
    // definitive condition (c) record
    let at0 = r3.records.iter().any(|r| r.condition == Condition::B && r.checkpoint == Checkpoint::Eta { eta: 0.0 } && !r.passed);
    ensure(at0, "(iii) expected H_0 to fail since a(0+) = 0")?;
    let lens = r3
        .records
        .iter()
        .find(|r| r.condition == Condition::C && !r.passed && r.definitive)
        .ok_or("(iii) no definitive lens failure")?;
    let x = lens.witness.ok_or("(iii) lens failure without x")?;
    ensure((x - 0.5).norm() < 1e-6, format!("(iii) witness x = {x}"))?;
    match &lens.checkpoint {
        Checkpoint::Fiber { fiber, .. } => {
            ensure((fiber["g1"] + 1.0).norm() < 1e-9, format!("(iii) witness fiber {fiber:?}"))?;
        }
        other => return Err(format!("(iii) witness at {other:?}")),
    }
    let s3 = cond_sweep(&a3, &taus, p, &policy).map_err(|e| e.to_string())?;
    let sig: Vec<f64> = s3.records.iter().map(|r| r.sigma_min).collect();
    ensure(s3.sigma_drop >= 10.0, format!("(iii) sigma_min {} drops only {:.2}x", sci(&sig), s3.sigma_drop))?;
    Ok(format!("(ii) cond ratio {:.3}; (iii) witness x = {x:.3}, sigma_min drop {:.1}x", s2.cond_ratio, s3.sigma_drop))
}

fn criterion_6_spectrum_cloud() -> Outcome {
    let grid = Grid::new(20.0, 512, 4).map_err(|e| e.to_string())?;
    let plus = OperatorExpr::Mult(StepFunction::chi_plus());
    let minus = OperatorExpr::Mult(StepFunction::chi_minus());
    let op = OperatorExpr::sum(vec![
        OperatorExpr::prod(vec![plus.clone(), OperatorExpr::conv(PcsoSymbol::from(StepFunction::chi_minus())), plus]),
        OperatorExpr::prod(vec![minus.clone(), OperatorExpr::conv(PcsoSymbol::from(StepFunction::chi_plus())), minus]),
    ]);
    let m = discretize(&op, &grid).map_err(|e| e.to_string())?;
    let ev = empirical_spectrum(&m).map_err(|e| e.to_string())?;
    let dist = |z: C64| if (0.0..=1.0).contains(&z.re) { z.im.abs() } else { (z - z.re.clamp(0.0, 1.0)).norm() };
    let close = ev.iter().filter(|z| dist(**z) <= 0.15).count() as f64 / ev.len() as f64;
    ensure(close >= 0.95, format!("only {:.1}% of eigenvalues near [0,1]", 100.0 * close))?;
    Ok(format!("{:.1}% of {} eigenvalues within 0.15 of [0,1]", 100.0 * close, ev.len()))
}

fn criterion_7_oracles() -> Outcome {
    let grid = Grid::new(20.0, 512, 4).map_err(|e| e.to_string())?;
    let b = PcsoSymbol::from(StepFunction::chi_minus());
    let fft = discretize(&OperatorExpr::conv(b.clone()), &grid).map_err(|e| e.to_string())?;
    let quad = convolution_oracle(&b, &grid).map_err(|e| e.to_string())?;
    let rel = fft.rel_diff(&quad);
    ensure(rel < 0.05, format!("chi_- transform vs quadrature {rel:.3}"))?;
    let k = PcsoSymbol::constant(c(2.0, -1.0));
    let fft = discretize(&OperatorExpr::conv(k.clone()), &grid).map_err(|e| e.to_string())?;
    let exact = convolution_oracle(&k, &grid).map_err(|e| e.to_string())?;
    let rel_c = fft.rel_diff(&exact);
    ensure(rel_c < 1e-10, format!("constant symbol {rel_c:e}"))?;
    Ok(format!("chi_- {:.2}% Frobenius, constant {rel_c:.1e}", 100.0 * rel))
}

fn criterion_8_probes() -> Outcome {
    let base = Grid::new(8.0, 1024, 4).map_err(|e| e.to_string())?;
    let bump = |cen: f64, r: f64| {
        base.sample(|x| {
            let u = (x - cen) / r;
            if u.abs() < 1.0 {
                c((-1.0 / (1.0 - u * u)).exp(), 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    };
    let vs = vec![bump(0.0, 5.0), bump(-1.0, 2.0)];
    let taus = vec![10.0, 20.0, 40.0, 80.0];
    let cfg = ProbeConfig { base, taus, p: 2.0 };
    for i in WIndex::ALL {
        let r = homomorphism_probe(&OperatorExpr::ProjSeq, ProbeTarget::W(i), &cfg, &vs).map_err(|e| e.to_string())?;
        ensure(r.monotone && r.last() < 1e-8, format!("(P_tau) W_{}: {}", i.as_i8(), sci(&r.deviations)))?;
    }
    let b = OperatorExpr::conv(PcsoSymbol::from(StepFunction::two_piece(0.5, c(1.0, 0.0), c(-2.0, 1.0))));
    let r = homomorphism_probe(&b, ProbeTarget::H(0.5), &cfg, &vs).map_err(|e| e.to_string())?;
    ensure(r.monotone && r.last() < 0.05, format!("W0(b) H_0.5: {}", sci(&r.deviations)))?;
    Ok(format!("exact masks; W0(b) at its jump {}", sci(&r.deviations)))
}

fn criterion_9_convergence() -> Outcome {
    let a = paired_const(1.0, -1.0);
    let taus = [5.0, 10.0, 20.0, 40.0, 80.0];
    let policy = GridPolicy { n: 1024, ..Default::default() };
    let f = |x: f64| c((-x * x / 50.0).exp(), 0.0);
    let st = solve_fsm(&a, &f, &taus, 2.0, &policy).map_err(|e| e.to_string())?;
    let res = st.final_residual();
    ensure(res < 1e-6, format!("final residual {res:e}"))?;
    let d = st.diffs();
    let tail = &d[d.len() - 3..];
    ensure(tail.windows(2).all(|w| w[1] < w[0]), format!("differences {}", sci(&d)))?;
    Ok(format!("residual {res:.1e}, differences {}", sci(&d)))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 geometry", criterion_1_geometry),
        ("2 winding", criterion_2_winding),
        ("3 spectrum of P - lambda", criterion_3_spectrum_pq),
        ("4 symbol maps", criterion_4_symbol_maps),
        ("5 paired operators", criterion_5_paired),
        ("6 spectrum cloud", criterion_6_spectrum_cloud),
        ("7 oracle equivalence", criterion_7_oracles),
        ("8 strong-limit probes", criterion_8_probes),
        ("9 FSM convergence", criterion_9_convergence),
    ];
    let mut failed = vec![];
    // written straight to stdout so the lines show up without --nocapture
    let mut out = std::io::stdout().lock();
    for (name, run) in criteria {
        let t = Instant::now();
        let res = run();
        let secs = t.elapsed().as_secs_f64();
        match &res {
            Ok(msg) => writeln!(out, "PASS criterion {name} ({secs:.1}s): {msg}").unwrap(),
            Err(msg) => {
                writeln!(out, "FAIL criterion {name} ({secs:.1}s): {msg}").unwrap();
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

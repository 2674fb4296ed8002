use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use finsec_core::analyzer::{analyze_stability, fsm_check, Checkpoint, NormalForm, OperatorExpr, StabilityReport, Verdict};
use finsec_core::geometry::triple_curve;
use finsec_core::numerics::{
    cond_sweep, discretize, discretize_sequence, empirical_spectrum, solve_fsm, ConvergenceRecord, Grid, SweepRecord,
};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::config::{Config, Mode};
use crate::plot::{curve_points, lens_boundary, lens_distance, point_rows, write_csv, Svg};
use crate::report::{ConvergenceSummary, Environment, ReportDocument, SpectrumSummary, SweepSummary};
use crate::CliError;

/// Command line overrides of the configuration.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub mode: Option<Mode>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

pub struct Outcome {
    /// 0 when a verdict or table was produced, 1 when the verdict is inconclusive.
    pub exit_code: i32,
    pub summary: String,
    pub report: ReportDocument,
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct SweepRow {
    tau: f64,
    n: usize,
    sigma_min: f64,
    cond2: f64,
    condp: f64,
}

#[derive(Serialize)]
struct ConvergenceRow {
    tau: f64,
    diff_norm: Option<f64>,
    residual: f64,
}

struct Artifacts<'a> {
    dir: &'a Path,
    names: Vec<String>,
}

impl Artifacts<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.names.push(name.to_string());
        self.dir.join(name)
    }
}

pub fn run(mut cfg: Config, opts: &RunOptions) -> Result<Outcome, CliError> {
    if let Some(m) = opts.mode {
        cfg.mode = m;
    }
    if let Some(s) = opts.seed {
        cfg.grid.seed = s;
    }
    let out_dir = opts.out.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("finsec-out"));
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::Output(out_dir.display().to_string(), e.to_string()))?;
    let expr = cfg.build_expression()?;
    let mut art = Artifacts { dir: &out_dir, names: vec![] };
    let mut summary = String::new();
    let mut doc = ReportDocument {
        environment: Environment {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.grid.seed,
            threads: opts.threads,
            thresholds: cfg.tolerances.clone(),
        },
        mode: cfg.mode,
        config: cfg.clone(),
        stability: None,
        sweep: None,
        convergence: None,
        spectrum: None,
        artifacts: vec![],
    };
    let mut exit_code = 0;
    match cfg.mode {
        Mode::Analyze | Mode::Fsm => {
            let acfg = cfg.analyzer_config();
            let rep = if cfg.mode == Mode::Analyze {
                analyze_stability(&expr, cfg.p, &acfg)?
            } else {
                fsm_check(&expr, cfg.p, &acfg)?
            };
            summarize_stability(&mut summary, &rep);
            lens_plot(&mut art, cfg.p, &rep)?;
            if rep.paired {
                paired_curves(&mut art, &mut summary, &expr, cfg.p)?;
            }
            if rep.verdict == Verdict::Inconclusive {
                exit_code = 1;
            }
            doc.stability = Some(rep);
        }
        Mode::Simulate => {
            let res = cond_sweep(&expr, &cfg.tau_list, cfg.p, &cfg.grid)?;
            let rows: Vec<SweepRow> = res
                .records
                .iter()
                .map(|r| SweepRow { tau: r.tau, n: r.n, sigma_min: r.sigma_min, cond2: r.cond2, condp: r.condp })
                .collect();
            write_csv(&art.path("sweep.csv"), &rows)?;
            sweep_plot(&res.records).write(&art.path("sweep.svg"))?;
            let t = &cfg.tolerances;
            let singular_taus: Vec<f64> = res.records.iter().filter(|r| r.singular).map(|r| r.tau).collect();
            // a singular section makes both ratios meaningless (inf/inf), so it decides on its own
            let s = SweepSummary {
                bounded: singular_taus.is_empty() && res.cond_ratio < t.cond_ratio,
                degenerating: !singular_taus.is_empty() || res.sigma_drop >= t.sigma_drop,
                singular_taus,
                result: res,
            };
            if s.singular_taus.is_empty() {
                let _ = writeln!(
                    summary,
                    "cond2 ratio {:.3} ({}), sigma_min drop {:.3}x ({})",
                    s.result.cond_ratio,
                    if s.bounded { "bounded" } else { "growing" },
                    s.result.sigma_drop,
                    if s.degenerating { "degenerating" } else { "not degenerating" }
                );
            } else {
                let _ = writeln!(summary, "singular sections at tau = {:?}", s.singular_taus);
            }
            doc.sweep = Some(s);
            if let Some(rhs) = &cfg.rhs {
                doc.convergence = Some(match solve_fsm(&expr, &|x| rhs.eval(x), &cfg.tau_list, cfg.p, &cfg.grid) {
                    Ok(mut study) => {
                        let rows: Vec<ConvergenceRow> = study
                            .records
                            .iter()
                            .map(|r: &ConvergenceRecord| ConvergenceRow { tau: r.tau, diff_norm: r.diff_norm, residual: r.residual })
                            .collect();
                        write_csv(&art.path("convergence.csv"), &rows)?;
                        let _ = writeln!(summary, "final residual {:.3e}", study.final_residual());
                        study.solutions.clear();
                        ConvergenceSummary::Solved { study }
                    }
                    Err(e) => {
                        let _ = writeln!(summary, "truncated solve failed: {e}");
                        ConvergenceSummary::Failed { error: e.to_string() }
                    }
                });
            }
        }
        Mode::Spectrum => {
            let tau = *cfg.tau_list.last().expect("validated non-empty");
            let (m, grid) = if expr.contains_proj_seq() {
                let grid = cfg.grid.grid_for(tau)?;
                (discretize_sequence(&expr, tau, &grid)?, grid)
            } else {
                let grid = Grid::new(tau, cfg.grid.n, cfg.grid.padding)?;
                (discretize(&expr, &grid)?, grid)
            };
            let ev = empirical_spectrum(&m)?;
            let boundary = lens_boundary(cfg.p, 256)?;
            let d = cfg.tolerances.spectrum_distance;
            let near = ev.iter().filter(|z| lens_distance(cfg.p, &boundary, **z) <= d).count() as f64 / ev.len().max(1) as f64;
            write_csv(&art.path("spectrum.csv"), &point_rows(&ev))?;
            write_csv(&art.path("lens.csv"), &point_rows(&boundary))?;
            Svg::new(format!("eigenvalues and lens, p = {}", cfg.p))
                .line(boundary, "steelblue")
                .dots(ev.clone(), "firebrick", 1.5)
                .write(&art.path("spectrum.svg"))?;
            let _ = writeln!(summary, "{} eigenvalues, {:.1}% within {d} of the lens", ev.len(), 100.0 * near);
            doc.spectrum = Some(SpectrumSummary { tau, n: grid.n, eigenvalues: ev.len(), distance: d, near_lens: near });
        }
    }
    art.names.push("report.json".into());
    doc.artifacts = art.names.clone();
    let path = out_dir.join("report.json");
    std::fs::write(&path, doc.to_json()).map_err(|e| CliError::Output(path.display().to_string(), e.to_string()))?;
    Ok(Outcome { exit_code, summary, report: doc, out_dir })
}

fn summarize_stability(out: &mut String, rep: &StabilityReport) {
    let verdict = match (rep.finite_section, rep.verdict) {
        (true, Verdict::Stable) => "finite section method applies",
        (true, Verdict::Unstable) => "finite section method does not apply",
        (false, Verdict::Stable) => "stable",
        (false, Verdict::Unstable) => "unstable",
        (_, Verdict::Inconclusive) if rep.leaning_stable => "inconclusive (every check passed, some only numerically)",
        (_, Verdict::Inconclusive) => "inconclusive",
    };
    let _ = writeln!(out, "verdict: {verdict}");
    let failed = rep.records.iter().filter(|r| !r.passed).count();
    let _ = writeln!(out, "{} checks, {failed} failed", rep.records.len());
    if let Some(w) = &rep.witness {
        let _ = write!(out, "witness: condition {:?} at {}", w.condition, checkpoint_label(&w.checkpoint));
        if let Some(x) = w.x {
            let _ = write!(out, ", x = {x}");
        }
        out.push('\n');
    }
}

fn checkpoint_label(c: &Checkpoint) -> String {
    match c {
        Checkpoint::W { index } => format!("W_{index}"),
        Checkpoint::Eta { eta } => format!("H_eta, eta = {eta}"),
        Checkpoint::EtaRange { from, to, points } => format!("H_eta on {points} points in [{from}, {to}]"),
        Checkpoint::Fiber { fiber, side } => format!("fiber {fiber:?}, side {side:?}"),
    }
}

/// Lens boundary, with every lens witness of a failed condition (c) marked.
fn lens_plot(art: &mut Artifacts, p: f64, rep: &StabilityReport) -> Result<(), CliError> {
    let boundary = lens_boundary(p, 256)?;
    write_csv(&art.path("lens.csv"), &point_rows(&boundary))?;
    let witnesses: Vec<C64> = rep.records.iter().filter_map(|r| r.witness).collect();
    let mut svg = Svg::new(format!("lens p = {}", p)).line(boundary, "steelblue");
    if !witnesses.is_empty() {
        svg = svg.dots(witnesses, "firebrick", 3.0);
    }
    svg.write(&art.path("lens.svg"))
}

/// The curves through 1, a(η-)/a(η+), b(η-)/b(η+) at every jump of a paired operator.
fn paired_curves(art: &mut Artifacts, summary: &mut String, expr: &OperatorExpr, p: f64) -> Result<(), CliError> {
    let Some(s) = NormalForm::new(expr)?.half_line_blocks() else { return Ok(()) };
    let (a, b) = (&s[0][0], &s[1][1]);
    let mut jumps: Vec<f64> = a.jumps().into_iter().chain(b.jumps()).collect();
    jumps.sort_by(|x, y| x.total_cmp(y));
    jumps.dedup();
    for (k, eta) in jumps.iter().enumerate() {
        let (am, ap) = a.one_sided_limits(*eta);
        let (bm, bp) = b.one_sided_limits(*eta);
        if ap.norm() == 0.0 || bp.norm() == 0.0 {
            let _ = writeln!(summary, "eta = {eta}: a or b vanishes, no curve");
            continue;
        }
        let curve = triple_curve(p, C64::new(1.0, 0.0), am / ap, bm / bp)?;
        let pts = curve_points(&curve, 128);
        write_csv(&art.path(&format!("curve_{k}.csv")), &point_rows(&pts))?;
        let svg = if pts.len() == 1 {
            Svg::new(format!("eta = {eta} (single point)")).dots(pts, "steelblue", 4.0)
        } else {
            Svg::new(format!("eta = {eta}")).line(pts, "steelblue")
        };
        svg.cross(C64::new(0.0, 0.0)).write(&art.path(&format!("curve_{k}.svg")))?;
    }
    Ok(())
}

/// σ_min and cond₂ against τ on log scales, both normalised into the unit square.
fn sweep_plot(records: &[SweepRecord]) -> Svg {
    let n = records.len().max(2) as f64 - 1.0;
    let series = |f: &dyn Fn(&SweepRecord) -> f64| -> Vec<C64> {
        let ys: Vec<f64> = records.iter().map(|r| f(r).log10()).collect();
        let lo = ys.iter().cloned().filter(|y| y.is_finite()).fold(f64::INFINITY, f64::min);
        let hi = ys.iter().cloned().filter(|y| y.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        ys.iter().enumerate().map(|(k, y)| C64::new(k as f64 / n, (y - lo) / span)).collect()
    };
    let s = series(&|r| r.sigma_min);
    let c = series(&|r| r.cond2);
    Svg::new("log sigma_min (red) and log cond2 (blue) against tau index")
        .line(s.clone(), "firebrick")
        .dots(s, "firebrick", 2.5)
        .line(c.clone(), "steelblue")
        .dots(c, "steelblue", 2.5)
}

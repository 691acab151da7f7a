use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::experiment::config::ExperimentSpec;
use crate::experiment::output::{fmt_f64, ManifestEntry, OutputDir};
use crate::follower::{verify_saddle, DenseOracle, LeaderControl, OptimalitySystem, RobustParams};
use crate::hum::{HumResult, HumSettings, LeaderProblem, ProbeReport};
use crate::pde::{h10_norm, hminus1_norm, Forcing, Side, SpaceTimeField, SpatialGrid, ThetaScheme, TimeGrid};
use crate::follower::presets::vanishing_log_amplitude;
use crate::weights::{admissibility, log_weighted_separable};

/// Outcome of one check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: &'static str,
    pub status: Status,
    pub reason: String,
}

impl Verdict {
    fn check(name: &'static str, ok: bool, reason: String) -> Self {
        Self { name, status: if ok { Status::Pass } else { Status::Fail }, reason }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSummary {
    pub iterations: usize,
    pub residual: f64,
    pub contraction_ratio: Option<f64>,
    pub costs: Vec<f64>,
    pub control_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HumSummary {
    pub epsilon: f64,
    pub terminal_residual: f64,
    pub internal_residual: f64,
    pub free_residual: f64,
    pub cg_iterations: usize,
    pub functional_value: f64,
    pub leader_norm: f64,
}

/// Everything produced by [`run_experiment`]. Timings are reported here and never written to CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub timings: Vec<(&'static str, Duration)>,
    pub reference: SaddleSummary,
    pub hum: HumSummary,
    pub verdicts: Vec<Verdict>,
    pub manifest: Vec<ManifestEntry>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fail)
    }
}

fn rng_for(spec: &ExperimentSpec, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(spec.output.seed);
    r.set_stream(stream);
    r
}

/// Runs a stage and, if it fails, still writes the manifest of the files produced so far.
fn staged<T>(out: &mut Option<OutputDir>, f: impl FnOnce(&mut OutputDir) -> Result<T>) -> Result<T> {
    let dir = out.as_mut().expect("output directory is open");
    match f(dir) {
        Ok(v) => Ok(v),
        Err(e) => {
            if let Some(d) = out.take() {
                let _ = d.finish();
            }
            Err(e)
        }
    }
}

fn leader_rows(sys: &OptimalitySystem, h: &LeaderControl) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let time = sys.time();
    match h {
        LeaderControl::Boundary(b) => (
            vec!["t [time]", "h_left [state]", "h_right [state]"],
            (0..time.n_levels()).map(|k| vec![fmt_f64(time.t(k)), fmt_f64(b[Side::Left][k]), fmt_f64(b[Side::Right][k])]).collect(),
        ),
        LeaderControl::Distributed(f) => (vec!["t [time]", "x [length]", "h [state/time]"], field_rows(f)),
    }
}

fn field_rows(f: &SpaceTimeField) -> Vec<Vec<String>> {
    let (space, time) = (f.space(), f.time());
    let mut rows = Vec::with_capacity(space.n_nodes() * time.n_levels());
    for k in 0..time.n_levels() {
        for (i, v) in f.level(k).iter().enumerate() {
            rows.push(vec![fmt_f64(time.t(k)), fmt_f64(space.x(i)), fmt_f64(*v)]);
        }
    }
    rows
}

/// Reference saddle solve with `h = 0`, HUM synthesis, re-solve with the synthesized leader and
/// verification; writes the CSV files and the manifest into the output directory.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunReport> {
    let mut out = Some(OutputDir::create(&spec.output.dir)?);
    let mut timings = Vec::new();
    let sys = OptimalitySystem::new(spec.scenario.clone(), spec.robust)?;
    let (space, time) = (sys.space(), sys.time());

    let t0 = Instant::now();
    let zero = sys.zero_leader();
    let reference = staged(&mut out, |_| sys.solve(&zero))?;
    let costs = staged(&mut out, |_| sys.evaluate_functional(&reference.controls, &zero, &reference.state, sys.data()))?;
    timings.push(("reference saddle", t0.elapsed()));
    let reference_summary = SaddleSummary {
        iterations: reference.iterations,
        residual: reference.residual,
        contraction_ratio: reference.contraction_ratio(),
        costs,
        control_max: reference.controls.max_abs(),
    };

    let t0 = Instant::now();
    let problem = LeaderProblem::new(sys.clone(), spec.hum)?;
    let hum: HumResult = staged(&mut out, |_| problem.minimize())?;
    timings.push(("hum synthesis", t0.elapsed()));
    let hum_summary = HumSummary {
        epsilon: spec.hum.epsilon,
        terminal_residual: hum.terminal_residual,
        internal_residual: hum.internal_residual,
        free_residual: hminus1_norm(&space, reference.state.terminal())?,
        cg_iterations: hum.cg_iterations,
        functional_value: hum.functional_value,
        leader_norm: problem.leader_norm_sq(&hum.leader)?.sqrt(),
    };

    let t0 = Instant::now();
    let mut verdicts = Vec::new();
    let mut rng = rng_for(spec, 1);
    let report = staged(&mut out, |_| verify_saddle(&sys, &hum.equilibrium, &hum.leader, sys.data(), spec.output.perturbations, &mut rng))?;
    verdicts.push(Verdict::check(
        "equilibrium",
        report.passed(1e-8),
        match &report.offending {
            Some(o) => o.clone(),
            None => format!(
                "{} perturbations, gradient {:.3e}, directional {:.3e}",
                report.perturbations, report.gradient_relative, report.directional_relative
            ),
        },
    ));
    let cert_gap = (hum.terminal_residual - hum.internal_residual).abs();
    verdicts.push(Verdict::check(
        "certificate",
        cert_gap <= 1e-8 * hum.terminal_residual.max(f64::MIN_POSITIVE) || cert_gap == 0.0,
        format!("independent {:.6e}, internal {:.6e}", hum.terminal_residual, hum.internal_residual),
    ));
    let predicted = spec.hum.epsilon * h10_norm(&space, &hum.terminal);
    let law_gap = (hum.terminal_residual - predicted).abs();
    let law_tol = 1e-6 * hum.terminal_residual + spec.hum.cg_tol * hum_summary.free_residual;
    verdicts.push(Verdict::check(
        "epsilon_law",
        law_gap <= law_tol,
        format!("residual {:.6e}, epsilon * |phi_T| {:.6e}", hum.terminal_residual, predicted),
    ));
    let scale = hum.functional_trace.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    let monotone = hum.functional_trace.windows(2).all(|w| w[1] <= w[0] + 64.0 * f64::EPSILON * scale);
    verdicts.push(Verdict::check("cg_monotone", monotone, format!("{} iterations", hum.cg_iterations)));
    let n = spec.scenario.time.n_steps();
    let masks: Vec<Vec<f64>> = spec.scenario.geometry.observations().iter().map(|r| r.mask(&space)).collect::<Result<_>>()?;
    // Every observation set carries the same time profile; the largest set decides.
    let area = masks.iter().map(|m| m.iter().sum::<f64>()).fold(0.0, f64::max) * space.dx();
    let adm = admissibility(&[n, 2 * n, 4 * n], |k| {
        let time = TimeGrid::new(spec.scenario.time.horizon(), k)?;
        log_weighted_separable(&spec.weights, time, area.ln(), vanishing_log_amplitude(spec.data.target, spec.data.kappa, time.horizon()))
    });
    verdicts.push(match adm {
        Ok(a) => Verdict::check(
            "target_admissibility",
            a.admissible,
            format!("log weighted integrals {:?}", a.log_integrals.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()),
        ),
        Err(e) => Verdict { name: "target_admissibility", status: Status::Skipped, reason: e.to_string() },
    });
    timings.push(("verification", t0.elapsed()));

    let summary_rows: Vec<Vec<String>> = [
        ("reference_iterations", reference_summary.iterations as f64),
        ("reference_picard_residual", reference_summary.residual),
        ("reference_contraction_ratio", reference_summary.contraction_ratio.unwrap_or(0.0)),
        ("reference_control_max", reference_summary.control_max),
        ("epsilon", hum_summary.epsilon),
        ("free_terminal_residual_hminus1", hum_summary.free_residual),
        ("terminal_residual_hminus1", hum_summary.terminal_residual),
        ("internal_residual_hminus1", hum_summary.internal_residual),
        ("cg_iterations", hum_summary.cg_iterations as f64),
        ("functional_value", hum_summary.functional_value),
        ("leader_norm", hum_summary.leader_norm),
        ("equilibrium_iterations", hum.equilibrium.iterations as f64),
        ("saddle_worst_min_violation", report.worst_min_violation),
        ("saddle_worst_max_violation", report.worst_max_violation),
        ("saddle_gradient_relative", report.gradient_relative),
    ]
    .into_iter()
    .chain(reference_summary.costs.iter().enumerate().map(|(j, c)| (if j == 0 { "reference_cost_1" } else { "reference_cost_2" }, *c)))
    .map(|(k, v)| vec![k.to_owned(), fmt_f64(v)])
    .collect();

    staged(&mut out, |o| {
        o.write_csv("summary.csv", &["quantity", "value"], &summary_rows)?;
        let rows: Vec<Vec<String>> =
            verdicts.iter().map(|v| vec![v.name.to_owned(), v.status.as_str().to_owned(), v.reason.clone()]).collect();
        o.write_csv("verdicts.csv", &["check", "status", "reason"], &rows)?;
        let rows: Vec<Vec<String>> = hum
            .residual_trace
            .iter()
            .zip(&hum.functional_trace)
            .enumerate()
            .map(|(i, (r, f))| vec![i.to_string(), fmt_f64(*r), fmt_f64(*f)])
            .collect();
        o.write_csv("hum_trace.csv", &["iteration", "relative_residual [-]", "functional [state^2]"], &rows)?;
        let (header, rows) = leader_rows(&sys, &hum.leader);
        o.write_csv("leader.csv", &header, &rows)?;
        let rows: Vec<Vec<String>> = (0..space.n_nodes())
            .map(|i| {
                vec![
                    fmt_f64(space.x(i)),
                    fmt_f64(reference.state.terminal()[i]),
                    fmt_f64(hum.equilibrium.state.terminal()[i]),
                    fmt_f64(hum.terminal[i]),
                ]
            })
            .collect();
        o.write_csv("terminal_state.csv", &["x [length]", "y_free_T [state]", "y_T [state]", "phi_T [adjoint]"], &rows)?;
        let rows: Vec<Vec<String>> = (0..time.n_levels())
            .map(|k| {
                let y = hum.equilibrium.state.level(k);
                vec![fmt_f64(time.t(k)), fmt_f64(hminus1_norm(&space, y).unwrap_or(f64::NAN))]
            })
            .collect();
        o.write_csv("state_norm.csv", &["t [time]", "y_hminus1 [state]"], &rows)?;
        Ok(())
    })?;
    let manifest = out.take().expect("output directory is open").finish()?;
    Ok(RunReport { timings, reference: reference_summary, hum: hum_summary, verdicts, manifest })
}

/// Error of the θ-scheme against `e^{-π²t} sin(πx)` on one grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatRow {
    pub n_interior: usize,
    pub n_steps: usize,
    pub dx: f64,
    pub max_error: f64,
    /// Observed order against the previous row.
    pub order: Option<f64>,
}

/// Crank–Nicolson on `(0, 1) × (0, horizon)` with `dt ≈ dx` for each interior node count.
pub fn heat_order_study(ladder: &[usize], horizon: f64) -> Result<Vec<HeatRow>> {
    let mut rows: Vec<HeatRow> = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let space = SpatialGrid::new(1.0, n)?;
        let n_steps = (horizon / space.dx()).round().max(2.0) as usize;
        let time = TimeGrid::new(horizon, n_steps)?;
        let scheme = ThetaScheme::crank_nicolson(space, time)?;
        let y0: Vec<f64> = (0..space.n_nodes()).map(|i| (PI * space.x(i)).sin()).collect();
        let u = scheme.solve_forward(&y0, &Forcing::zeros(space, time))?;
        let exact = SpaceTimeField::from_fn(space, time, |x, t| (-PI * PI * t).exp() * (PI * x).sin());
        let max_error = u.sub(&exact).max_abs();
        let order = rows.last().map(|p| (p.max_error / max_error).ln() / (p.dx / space.dx()).ln());
        rows.push(HeatRow { n_interior: n, n_steps, dx: space.dx(), max_error, order });
    }
    Ok(rows)
}

/// One penalization level of the ε sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsRow {
    pub epsilon: f64,
    pub terminal_residual: f64,
    pub cg_iterations: usize,
    pub leader_norm: f64,
    /// Residual at the previous ε divided by this one.
    pub ratio: Option<f64>,
}

/// Runs HUM for every ε of the ladder on the scenario grid.
pub fn epsilon_sweep(spec: &ExperimentSpec) -> Result<Vec<EpsRow>> {
    let sys = OptimalitySystem::new(spec.scenario.clone(), spec.robust)?;
    let problem = LeaderProblem::new(sys, spec.hum)?;
    let mut rows: Vec<EpsRow> = Vec::with_capacity(spec.epsilon_ladder.len());
    for &eps in &spec.epsilon_ladder {
        let p = problem.with_epsilon(eps)?;
        let r = p.minimize()?;
        let ratio = rows.last().map(|prev| prev.terminal_residual / r.terminal_residual);
        rows.push(EpsRow {
            epsilon: eps,
            terminal_residual: r.terminal_residual,
            cg_iterations: r.cg_iterations,
            leader_norm: p.leader_norm_sq(&r.leader)?.sqrt(),
            ratio,
        });
    }
    Ok(rows)
}

/// Dense-oracle comparison on one rung of the refinement ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRow {
    pub n_interior: usize,
    pub n_steps: usize,
    pub unknowns: usize,
    /// Max-norm gap between the fixed point and the dense solve; `None` when too large to assemble.
    pub discrepancy: Option<f64>,
}

/// Time steps paired with `n` interior nodes in the studies (`dt ≈ dx`).
pub fn matched_steps(spec: &ExperimentSpec, n: usize) -> usize {
    let dx = spec.scenario.space.length() / (n + 1) as f64;
    (spec.scenario.time.horizon() / dx).round().max(2.0) as usize
}

pub fn oracle_study(spec: &ExperimentSpec) -> Result<Vec<OracleRow>> {
    let mut rows = Vec::with_capacity(spec.grid.ladder.len());
    let mut rng = rng_for(spec, 2);
    for &n in &spec.grid.ladder {
        let k = matched_steps(spec, n);
        let cfg = spec.scenario_on(n, k)?;
        let oracle = DenseOracle::new(cfg.clone(), spec.robust)?;
        let unknowns = oracle.n_unknowns();
        let discrepancy = if unknowns <= spec.grid.oracle_max_unknowns {
            let sys = oracle.system();
            let h = random_leader(sys, &mut rng);
            let fixed = sys.solve(&h)?;
            let dense = oracle.solve(&h, &cfg.data)?;
            let gap = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            Some(gap(&fixed.controls.to_vec(), &dense.controls.to_vec()).max(gap(fixed.state.values(), dense.state.values())))
        } else {
            None
        };
        rows.push(OracleRow { n_interior: n, n_steps: k, unknowns, discrepancy });
    }
    Ok(rows)
}

/// Leader control with standard normal entries on its support.
pub fn random_leader(sys: &OptimalitySystem, rng: &mut ChaCha8Rng) -> LeaderControl {
    use rand_distr::{Distribution, StandardNormal};
    let mut h = sys.zero_leader();
    match &mut h {
        LeaderControl::Distributed(f) => {
            f.values_mut().iter_mut().for_each(|v| *v = StandardNormal.sample(rng));
            *f = f.masked(sys.omega_mask());
        }
        LeaderControl::Boundary(b) => {
            for s in sys.config().geometry.leader_boundary().sides() {
                b[s].values_mut().iter_mut().for_each(|v| *v = StandardNormal.sample(rng));
            }
        }
    }
    h
}

/// Tables of the convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub heat: Vec<HeatRow>,
    pub epsilon: Vec<EpsRow>,
    pub oracle: Vec<OracleRow>,
    pub manifest: Vec<ManifestEntry>,
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn eps_rows(rows: &[EpsRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![fmt_f64(r.epsilon), fmt_f64(r.terminal_residual), r.cg_iterations.to_string(), fmt_f64(r.leader_norm), opt(r.ratio)]
        })
        .collect()
}

const EPS_HEADER: [&str; 5] = ["epsilon [-]", "terminal_residual_hminus1 [state]", "cg_iterations", "leader_norm [state]", "ratio_to_previous [-]"];

/// Heat-solver orders on the ladder (horizon 0.5), the ε sweep and the dense-oracle column.
pub fn convergence_study(spec: &ExperimentSpec) -> Result<ConvergenceTable> {
    let mut out = Some(OutputDir::create(&spec.output.dir)?);
    let heat = staged(&mut out, |_| heat_order_study(&spec.grid.ladder, 0.5))?;
    let epsilon = staged(&mut out, |_| epsilon_sweep(spec))?;
    let oracle = staged(&mut out, |_| oracle_study(spec))?;
    staged(&mut out, |o| {
        let rows: Vec<Vec<String>> = heat
            .iter()
            .map(|r| vec![r.n_interior.to_string(), r.n_steps.to_string(), fmt_f64(r.dx), fmt_f64(r.max_error), opt(r.order)])
            .collect();
        o.write_csv("heat_convergence.csv", &["n_interior", "n_steps", "dx [length]", "max_error [state]", "observed_order [-]"], &rows)?;
        o.write_csv("eps_sweep.csv", &EPS_HEADER, &eps_rows(&epsilon))?;
        let rows: Vec<Vec<String>> = oracle
            .iter()
            .map(|r| vec![r.n_interior.to_string(), r.n_steps.to_string(), r.unknowns.to_string(), opt(r.discrepancy)])
            .collect();
        o.write_csv("oracle.csv", &["n_interior", "n_steps", "unknowns", "max_discrepancy [state]"], &rows)
    })?;
    let manifest = out.take().expect("output directory is open").finish()?;
    Ok(ConvergenceTable { heat, epsilon, oracle, manifest })
}

/// Runs the ε sweep alone and writes `eps_sweep.csv`.
pub fn sweep_eps(spec: &ExperimentSpec) -> Result<(Vec<EpsRow>, Vec<ManifestEntry>)> {
    let mut out = Some(OutputDir::create(&spec.output.dir)?);
    let rows = staged(&mut out, |_| epsilon_sweep(spec))?;
    staged(&mut out, |o| o.write_csv("eps_sweep.csv", &EPS_HEADER, &eps_rows(&rows)))?;
    Ok((rows, out.take().expect("output directory is open").finish()?))
}

/// Probe at the configured `(ℓ, γ)` and at twice those values.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeStudy {
    pub base: ProbeReport,
    pub doubled: ProbeReport,
    pub manifest: Vec<ManifestEntry>,
}

pub fn probe_study(spec: &ExperimentSpec) -> Result<ProbeStudy> {
    let mut out = Some(OutputDir::create(&spec.output.dir)?);
    let run = |params: RobustParams| -> Result<ProbeReport> {
        let sys = OptimalitySystem::new(spec.scenario.clone(), params)?;
        let p = LeaderProblem::new(sys, HumSettings { ..spec.hum })?;
        p.observability_probe(spec.output.probe_samples, &mut rng_for(spec, 3))
    };
    let base = staged(&mut out, |_| run(spec.robust))?;
    let doubled = staged(&mut out, |_| run(RobustParams { ell: 2.0 * spec.robust.ell, gamma: 2.0 * spec.robust.gamma, ..spec.robust }))?;
    staged(&mut out, |o| {
        let mut rows = Vec::new();
        for (label, rep) in [("base", &base), ("doubled", &doubled)] {
            for (i, s) in rep.samples.iter().enumerate() {
                rows.push(vec![label.to_owned(), i.to_string(), fmt_f64(s.lhs), fmt_f64(s.rhs), fmt_f64(s.ratio)]);
            }
        }
        o.write_csv("probe_samples.csv", &["params", "sample", "lhs [adjoint^2]", "rhs [adjoint^2]", "ratio [-]"], &rows)?;
        let rows: Vec<Vec<String>> = [("base", &base, spec.robust.ell, spec.robust.gamma), ("doubled", &doubled, 2.0 * spec.robust.ell, 2.0 * spec.robust.gamma)]
            .into_iter()
            .map(|(label, r, l, g)| {
                vec![
                    label.to_owned(),
                    fmt_f64(l),
                    fmt_f64(g),
                    fmt_f64(r.min),
                    fmt_f64(r.median),
                    fmt_f64(r.max),
                    r.argmax.to_string(),
                    fmt_f64(r.refined_max()),
                    r.skipped.to_string(),
                ]
            })
            .collect();
        o.write_csv(
            "probe_summary.csv",
            &["params", "ell", "gamma", "min_ratio", "median_ratio", "max_ratio", "argmax", "refined_max_ratio", "skipped"],
            &rows,
        )
    })?;
    Ok(ProbeStudy { base, doubled, manifest: out.take().expect("output directory is open").finish()? })
}

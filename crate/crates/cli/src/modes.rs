use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nlwave::fields::{div_e, em_energy, maxwell_residual, synthesize_b, synthesize_e, EnergyReport, WaveContext};
use nlwave::grid::{Field6, Grid2D};
use nlwave::io::{load_field6, write_field6, write_profiles_csv};
use nlwave::operators::{discrete_wavenumber, symbol_eigenvalues};
use nlwave::orlicz::{
    check_delta2, check_f_conditions, check_nabla2, complementary, default_condition_grid, growth_sandwich, log_grid,
    make_kerr_nonlinearity, NonlinearityKind,
};
use nlwave::te_ode::{find_nodal, NodalSolution};
use nlwave::variational::{
    action_j, higher_state_search, kerr_rescale, measure_state, mountain_pass_search, CriticalPoint, TmProblem,
};

use crate::{CliError, Echo, Run};

/// Relative agreement demanded of a re-measured certification number.
pub const ROUND_TRIP_TOL: f64 = 1e-12;

fn field_bytes(u: &Field6<f64>, k: f64) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_field6(&mut buf, u, k)?;
    Ok(buf)
}

// ---------------------------------------------------------------- te-shoot

#[derive(Serialize)]
struct TeSolution {
    n: usize,
    slope_star: f64,
    residual: f64,
    zeros: usize,
    deriv_zeros: usize,
    zero_locations: Vec<f64>,
    branches: Vec<f64>,
    profile: String,
}

#[derive(Serialize)]
struct TeFailure {
    n: usize,
    message: String,
}

#[derive(Serialize)]
struct TeSummary<'a> {
    config: &'a Echo,
    solutions: Vec<TeSolution>,
    failures: Vec<TeFailure>,
}

fn te_csv(sol: &NodalSolution<f64>, step: f64, run: &Run) -> Vec<u8> {
    let prob = run.echo.config.te.problem();
    let traj = &sol.trajectory;
    let mut out = String::from("r,beta,dbeta\n");
    let end = traj.r_end();
    let count = (end / step).floor() as usize;
    for i in 0..=count {
        let r = (i as f64 * step).min(end);
        let [b, db] = if r <= traj.r[0] {
            prob.series(sol.slope_star, r)
        } else {
            let (b, db, _) = traj.eval(r);
            [b, db]
        };
        out.push_str(&format!("{r:e},{b:e},{db:e}\n"));
    }
    out.into_bytes()
}

pub fn te_shoot(run: &Run) -> Result<(), CliError> {
    let te = &run.echo.config.te;
    if te.n.is_empty() {
        return Err(CliError::validation("te.n lists no nodal counts".into()));
    }
    if !(te.csv_step > 0.0) {
        return Err(CliError::validation(format!("te.csv_step must be positive, got {}", te.csv_step)));
    }
    let prob = te.problem();
    run.progress(format!("shooting for n = {:?}", te.n));
    let results: Vec<_> = te.n.par_iter().map(|&n| (n, find_nodal(n, &prob))).collect();
    let mut solutions = Vec::new();
    let mut failures = Vec::new();
    let mut first_err = None;
    for (n, res) in results {
        match res {
            Ok(sol) => {
                let name = format!("te_n{n}.csv");
                run.write_bytes(&name, &te_csv(&sol, te.csv_step, run))?;
                run.progress(format!("n = {n}: slope {:.10}, residual {:.2e}", sol.slope_star, sol.residual));
                solutions.push(TeSolution {
                    n,
                    slope_star: sol.slope_star,
                    residual: sol.residual,
                    zeros: sol.zeros,
                    deriv_zeros: sol.deriv_zeros,
                    zero_locations: sol.zero_locations.clone(),
                    branches: sol.branches.clone(),
                    profile: name,
                });
            }
            Err(e) => {
                failures.push(TeFailure { n, message: e.to_string() });
                first_err.get_or_insert(CliError::from(e));
            }
        }
    }
    run.write_json("te_summary.json", &TeSummary { config: &run.echo, solutions, failures })?;
    first_err.map_or(Ok(()), Err)
}

// ---------------------------------------------------------------- tm-solve

/// The numbers `verify` must reproduce.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Certification {
    pub action: f64,
    pub grad_norm: f64,
    pub v_norm: f64,
    pub cerami_residual: f64,
    pub maxwell_residual: f64,
    pub kkt: f64,
    pub tau_fraction: f64,
    pub spectral_tail: f64,
    pub lattice_symmetry: f64,
    pub energy_bound: f64,
    pub certified: bool,
}

impl Certification {
    fn of(cp: &CriticalPoint<f64>) -> Self {
        Self {
            action: cp.action,
            grad_norm: cp.grad_norm,
            v_norm: cp.v_norm,
            cerami_residual: cp.cerami_residual,
            maxwell_residual: cp.maxwell_residual,
            kkt: cp.kkt,
            tau_fraction: cp.tau_fraction,
            spectral_tail: cp.spectral_tail,
            lattice_symmetry: cp.lattice_symmetry,
            energy_bound: cp.energy_bound,
            certified: cp.certified,
        }
    }

    fn values(&self) -> [(&'static str, f64); 10] {
        [
            ("action", self.action),
            ("grad_norm", self.grad_norm),
            ("v_norm", self.v_norm),
            ("cerami_residual", self.cerami_residual),
            ("maxwell_residual", self.maxwell_residual),
            ("kkt", self.kkt),
            ("tau_fraction", self.tau_fraction),
            ("spectral_tail", self.spectral_tail),
            ("lattice_symmetry", self.lattice_symmetry),
            ("energy_bound", self.energy_bound),
        ]
    }
}

#[derive(Debug, Serialize)]
struct FieldChecks {
    b_branch: String,
    b_warning: Option<String>,
    /// `max|B₃| / max|B|` over all sampled windows and times.
    b3_ratio: f64,
    max_b: f64,
    /// `max|∇·E_v| / max|E_v|` for the field built from the `V` part alone.
    div_v_relative: f64,
}

#[derive(Debug, Serialize)]
struct RescaleCheck {
    lambda: f64,
    maxwell_residual: f64,
    /// `λ J_λ(u/√λ) / J(u) - 1`.
    action_deviation: f64,
    residual_deviation: f64,
}

#[derive(Debug, Serialize)]
struct StateSummary {
    label: String,
    file: String,
    profiles: String,
    certification: Certification,
    fields: FieldChecks,
    energy: Vec<EnergyReport>,
    kerr_rescale: Vec<RescaleCheck>,
    search_log: Vec<String>,
}

#[derive(Serialize)]
struct TmSummary<'a> {
    config: &'a Echo,
    status: &'static str,
    requested_states: usize,
    states: Vec<StateSummary>,
    log: Vec<String>,
}

pub fn build_problem(echo: &Echo) -> Result<TmProblem<f64>, CliError> {
    let c = &echo.config;
    let (k, omega, v, nl) = (c.k()?, c.omega()?, c.permittivity()?, c.nonlinearity()?);
    let grid = Grid2D::square(c.grid.n, c.grid.half_width)?;
    let conditions = default_condition_grid();
    let d2 = check_delta2(&nl.phi, &conditions)?;
    let n2 = check_nabla2(&nl.phi, &conditions)?;
    if !d2.holds || !n2.holds {
        return Err(CliError::validation(format!(
            "the N-function of the nonlinearity fails Δ₂ ({}) or ∇₂ ({})",
            d2.holds, n2.holds
        )));
    }
    Ok(TmProblem::new(grid, k, omega, v, nl)?)
}

fn field_checks(prob: &TmProblem<f64>, u: &Field6<f64>, v: &Field6<f64>, echo: &Echo) -> Result<FieldChecks, CliError> {
    let en = &echo.config.energy;
    let (mut b3, mut bmax, mut div, mut emax) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut branch, mut warning) = (String::new(), None);
    for &a in &en.a {
        let ctx = WaveContext::new(prob.k, prob.omega, a)?;
        for &tf in &en.t_fractions {
            let t = tf * ctx.period();
            let b = synthesize_b(u, &ctx, a, t);
            branch = format!("{:?}", b.branch).to_lowercase();
            if b.warning.is_some() {
                warning = b.warning.clone();
            }
            b3 = b3.max(b.field.max_abs_component(2));
            bmax = bmax.max(b.field.max_abs());
            div = div_e(v, &ctx, a, t).iter().fold(div, |m, x| m.max(x.abs()));
            emax = emax.max(synthesize_e(v, &ctx, a, t).max_abs());
        }
    }
    let tiny = f64::MIN_POSITIVE;
    Ok(FieldChecks { b_branch: branch, b_warning: warning, b3_ratio: b3 / bmax.max(tiny), max_b: bmax, div_v_relative: div / emax.max(tiny) })
}

fn energies(prob: &TmProblem<f64>, u: &Field6<f64>, echo: &Echo) -> Result<Vec<EnergyReport>, CliError> {
    let en = &echo.config.energy;
    let mut out = Vec::new();
    for &a in &en.a {
        let ctx = WaveContext::new(prob.k, prob.omega, a)?;
        for &tf in &en.t_fractions {
            out.push(em_energy(prob, u, &ctx, tf * ctx.period())?);
        }
    }
    Ok(out)
}

fn rescale_checks(prob: &TmProblem<f64>, cp: &CriticalPoint<f64>, echo: &Echo) -> Result<Vec<RescaleCheck>, CliError> {
    let NonlinearityKind::Kerr { omega, chi3 } = prob.nonlinearity.kind else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for &lambda in &echo.config.solver.rescale_lambdas {
        let nl = make_kerr_nonlinearity(omega, chi3 * lambda)?;
        let scaled = TmProblem::new(prob.grid, prob.k, prob.omega, prob.permittivity.kind, nl)?;
        let u = kerr_rescale(&cp.state.u, lambda)?;
        let res = maxwell_residual(&scaled, &u)?;
        let j = action_j(&scaled, &u)?;
        out.push(RescaleCheck {
            lambda,
            maxwell_residual: res,
            action_deviation: lambda * j / cp.action - 1.0,
            residual_deviation: (res - cp.maxwell_residual).abs(),
        });
    }
    Ok(out)
}

pub fn tm_solve(run: &Run) -> Result<(), CliError> {
    let echo = &run.echo;
    let prob = build_problem(echo)?;
    let sc = &echo.config.solver;
    if sc.states == 0 {
        return Err(CliError::validation("solver.states must be at least 1".into()));
    }
    let opts = sc.options(echo.seed);
    run.progress(format!("tm-solve on {}² grid, {} state(s)", prob.grid.n1(), sc.states));
    let (states, log) = if sc.states == 1 {
        let cp = mountain_pass_search(&prob, &opts)?;
        let log = vec![format!("state 1 (mountain pass): J = {:e}", cp.action)];
        (vec![cp], log)
    } else {
        let o = higher_state_search(&prob, &opts, sc.states)?;
        (o.states, o.log)
    };
    for l in &log {
        run.progress(l);
    }
    let summaries: Vec<Result<StateSummary, CliError>> = states
        .par_iter()
        .enumerate()
        .map(|(i, cp)| {
            let file = format!("state_{}.f6", i + 1);
            let profiles = format!("state_{}_profiles.csv", i + 1);
            run.write_bytes(&file, &field_bytes(&cp.state.u, prob.k)?)?;
            let p = &cp.profiles;
            let mut csv = Vec::new();
            write_profiles_csv(
                &mut csv,
                &["alpha", "gamma", "alpha_tilde", "gamma_tilde"],
                &[&p.alpha, &p.gamma, &p.alpha_tilde, &p.gamma_tilde],
            )?;
            run.write_bytes(&profiles, &csv)?;
            Ok(StateSummary {
                label: cp.label.clone(),
                file,
                profiles,
                certification: Certification::of(cp),
                fields: field_checks(&prob, &cp.state.u, &cp.state.v, echo)?,
                energy: energies(&prob, &cp.state.u, echo)?,
                kerr_rescale: rescale_checks(&prob, cp, echo)?,
                search_log: cp.log.clone(),
            })
        })
        .collect();
    let states_out = summaries.into_iter().collect::<Result<Vec<_>, _>>()?;
    let all_certified = states_out.iter().all(|s| s.certification.certified);
    let complete = states_out.len() >= sc.states;
    let status = if all_certified && complete { "certified" } else { "incomplete" };
    run.write_json(
        "summary.json",
        &TmSummary { config: echo, status, requested_states: sc.states, states: states_out, log: log.clone() },
    )?;
    if !complete {
        let mut e = CliError::non_convergence(format!("found {} of {} requested states", states.len(), sc.states));
        e.log = log;
        return Err(e);
    }
    if !all_certified {
        return Err(CliError::non_convergence("at least one state failed certification".into()));
    }
    run.progress("all states certified");
    Ok(())
}

// ---------------------------------------------------------------- verify

#[derive(Deserialize)]
struct StoredState {
    label: String,
    file: String,
    certification: Certification,
}

#[derive(Deserialize)]
struct StoredSummary {
    config: Echo,
    states: Vec<StoredState>,
}

#[derive(Serialize)]
struct Mismatch {
    quantity: &'static str,
    stored: f64,
    recomputed: f64,
}

#[derive(Serialize)]
struct VerifiedState {
    label: String,
    certification: Certification,
    max_relative_deviation: f64,
    mismatches: Vec<Mismatch>,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    config: &'a Echo,
    input: String,
    tolerance: f64,
    states: Vec<VerifiedState>,
}

fn rel_dev(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn verify(run: &Run) -> Result<(), CliError> {
    let input = run
        .echo
        .config
        .verify
        .input
        .as_ref()
        .map(PathBuf::from)
        .ok_or_else(|| CliError::validation("missing required parameter `verify.input`".into()))?;
    let text = std::fs::read_to_string(input.join("summary.json"))
        .map_err(|e| CliError::validation(format!("cannot read {}/summary.json: {e}", input.display())))?;
    let stored: StoredSummary =
        serde_json::from_str(&text).map_err(|e| CliError::validation(format!("stored summary does not parse: {e}")))?;
    let prob = build_problem(&stored.config)?;
    let opts = stored.config.config.solver.options(stored.config.seed);
    let mut states = Vec::new();
    for s in &stored.states {
        let (u, k) = load_field6(&input.join(&s.file))?;
        if k != prob.k {
            return Err(CliError::validation(format!("{} was stored with k = {k}, config has k = {}", s.file, prob.k)));
        }
        u.grid().check_same(&prob.grid)?;
        let cp = measure_state(&prob, &u, &opts, &s.label, Vec::new())?;
        let now = Certification::of(&cp);
        let mut worst = 0.0f64;
        let mut mismatches = Vec::new();
        for ((name, a), (_, b)) in s.certification.values().into_iter().zip(now.values()) {
            let d = rel_dev(a, b);
            worst = worst.max(d);
            if !(d <= ROUND_TRIP_TOL) {
                mismatches.push(Mismatch { quantity: name, stored: a, recomputed: b });
            }
        }
        run.progress(format!("{}: J = {:e}, max deviation {:.1e}, certified {}", s.label, now.action, worst, now.certified));
        states.push(VerifiedState { label: s.label.clone(), certification: now, max_relative_deviation: worst, mismatches });
    }
    let consistent = states.iter().all(|s| s.mismatches.is_empty() && s.certification.certified == stored_flag(&stored, &s.label));
    let certified = states.iter().all(|s| s.certification.certified);
    run.write_json(
        "verify.json",
        &VerifyReport { config: &run.echo, input: input.display().to_string(), tolerance: ROUND_TRIP_TOL, states },
    )?;
    if !consistent {
        return Err(CliError::validation("stored certification numbers are not reproduced".into()));
    }
    if !certified {
        return Err(CliError::non_convergence("stored solution does not pass certification".into()));
    }
    Ok(())
}

fn stored_flag(stored: &StoredSummary, label: &str) -> bool {
    stored.states.iter().find(|s| s.label == label).is_some_and(|s| s.certification.certified)
}

// ---------------------------------------------------------------- spectrum

#[derive(Serialize)]
struct SpectrumK {
    k: f64,
    rows: usize,
    /// Largest `|λ - expected| / (1 + expected)` over all rows.
    max_deviation: f64,
    table: String,
}

#[derive(Serialize)]
struct SpectrumSummary<'a> {
    config: &'a Echo,
    h: f64,
    tables: Vec<SpectrumK>,
}

pub fn spectrum(run: &Run) -> Result<(), CliError> {
    let c = &run.echo.config;
    let mut ks = vec![c.k()?];
    for &k in &c.spectrum.extra_k {
        if !k.is_finite() || k == 0.0 {
            return Err(CliError::validation(format!("spectrum.extra_k entries must be finite and nonzero, got {k}")));
        }
        ks.push(k);
    }
    let m = c.spectrum.points;
    if m < 2 {
        return Err(CliError::validation(format!("spectrum.points must be at least 2, got {m}")));
    }
    let grid = Grid2D::<f64>::square(c.grid.n, c.grid.half_width)?;
    let h = grid.h();
    let freqs: Vec<f64> = (0..m)
        .map(|i| (i as f64 - (m / 2) as f64) * 2.0 * std::f64::consts::PI / (m as f64 * h))
        .collect();
    let tables: Vec<(SpectrumK, Vec<u8>)> = ks
        .par_iter()
        .enumerate()
        .map(|(idx, &k)| {
            let mut csv = String::from("xi1,xi2,xi_d1,xi_d2,shadow,ev1,ev2,ev3,ev4,ev5,ev6\n");
            let mut dev = 0.0f64;
            for &x1 in &freqs {
                for &x2 in &freqs {
                    let xd = [discrete_wavenumber(x1, h), discrete_wavenumber(x2, h)];
                    let shadow = xd[0] * xd[0] + xd[1] * xd[1] + k * k;
                    let ev = symbol_eigenvalues(xd, k);
                    for (i, &l) in ev.iter().enumerate() {
                        let expect = if i < 2 { 0.0 } else { shadow };
                        dev = dev.max((l - expect).abs() / (1.0 + expect));
                    }
                    let evs: Vec<String> = ev.iter().map(|v| format!("{v:e}")).collect();
                    csv.push_str(&format!("{x1:e},{x2:e},{:e},{:e},{shadow:e},{}\n", xd[0], xd[1], evs.join(",")));
                }
            }
            let table = format!("spectrum_{idx}.csv");
            (SpectrumK { k, rows: m * m, max_deviation: dev, table }, csv.into_bytes())
        })
        .collect();
    let mut out = Vec::new();
    for (s, csv) in tables {
        run.write_bytes(&s.table, &csv)?;
        run.progress(format!("k = {}: max deviation {:.2e}", s.k, s.max_deviation));
        out.push(s);
    }
    run.write_json("summary.json", &SpectrumSummary { config: &run.echo, h, tables: out })
}

// ---------------------------------------------------------------- orlicz-check

#[derive(Serialize)]
struct OrliczReport<'a> {
    config: &'a Echo,
    delta2: bool,
    delta2_k: f64,
    delta2_kappa: f64,
    nabla2: bool,
    nabla2_kappa_prime: f64,
    growth_sandwich: Option<(f64, f64)>,
    /// `max |Ψ(Φ'(t)) - (tΦ'(t) - Φ(t))| / (1 + tΦ'(t))` on a log grid.
    young_residual: f64,
    f0: bool,
    f1: bool,
    f2: bool,
    f3: bool,
    radial: bool,
    ar_gap_min: f64,
    gamma: f64,
    samples: usize,
}

pub fn orlicz_check(run: &Run) -> Result<(), CliError> {
    let nl = run.echo.config.nonlinearity()?;
    let phi = &nl.phi;
    let grid = default_condition_grid();
    let d2 = check_delta2(phi, &grid)?;
    let n2 = check_nabla2(phi, &grid)?;
    let mut young = 0.0f64;
    for t in log_grid(1e-3, 1e3, 61) {
        let d = phi.deriv(t)?;
        let lhs = complementary(phi, d)?;
        let rhs = t * d - phi.eval(t)?;
        young = young.max((lhs - rhs).abs() / (1.0 + t * d));
    }
    let samples = 2000;
    let f = check_f_conditions(&nl, samples, run.echo.seed)?;
    let report = OrliczReport {
        config: &run.echo,
        delta2: d2.holds,
        delta2_k: d2.k_const,
        delta2_kappa: d2.kappa,
        nabla2: n2.holds,
        nabla2_kappa_prime: n2.kappa_prime,
        growth_sandwich: growth_sandwich(phi),
        young_residual: young,
        f0: f.f0,
        f1: f.f1,
        f2: f.f2,
        f3: f.f3,
        radial: f.radial,
        ar_gap_min: f.ar_gap_min,
        gamma: nl.gamma,
        samples,
    };
    run.write_json("orlicz_report.json", &report)?;
    run.progress(format!("Δ₂ {} (K = {:.6}), ∇₂ {}, (F0)-(F3) {}", d2.holds, d2.k_const, n2.holds, f.all()));
    if !(d2.holds && n2.holds && f.all()) {
        return Err(CliError::validation("the configured nonlinearity violates Δ₂, ∇₂ or (F0)-(F3)".into()));
    }
    Ok(())
}

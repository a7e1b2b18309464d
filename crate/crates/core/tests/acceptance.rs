//! Acceptance criteria at desk scale. Every criterion prints one PASS/FAIL
//! line; the test fails if any criterion fails.
//!
//! Trajectories are shared between criteria whenever the setups coincide:
//! one lid-driven reference serves the feedback-strength and observation
//! sweeps, and one droplet reference serves both synchronization tests.

mod common;

use std::io::Write;
use std::time::Instant;

use common::*;
use nsch_da::diagnostics::{energies, sync_errors, StepRecord};
use nsch_da::error::{RunError, SchemeError, SolveError};
use nsch_da::experiments::config::Nudging;
use nsch_da::experiments::runner::LedgerStats;
use nsch_da::experiments::{
    build_spaces, indistinguishable_pair, make_initial_state, observation, preset, Ensemble, RunConfig, Scale, Which,
};
use nsch_da::fem::{assemble_mass, l2_norm, Field};
use nsch_da::mesh::SideSet;
use nsch_da::model::PhysicalParams;
use nsch_da::scheme::{NudgeSources, Scheme, SimState};

struct Report {
    failures: Vec<String>,
    ledger: LedgerStats,
    ledger_runs: Vec<String>,
}

impl Report {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        let line = format!("[{}] {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        writeln!(std::io::stdout(), "{line}").unwrap();
        if !pass {
            self.failures.push(line);
        }
    }

    fn absorb(&mut self, run: &str, ens: &Ensemble) {
        for s in ens.references.iter().map(|r| &r.stats).chain(ens.members.iter().map(|m| &m.stats)) {
            let l = &mut self.ledger;
            l.steps += s.steps;
            l.min_dissipation = l.min_dissipation.min(s.min_dissipation);
            l.max_ratio = l.max_ratio.max(s.max_ratio);
        }
        self.ledger_runs.push(run.to_string());
    }
}

fn sci(xs: &[f64]) -> String {
    let v: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", v.join(", "))
}

fn gains(cfg: &RunConfig, alpha: f64) -> PhysicalParams {
    cfg.physical_with(Nudging::uniform(alpha))
}

fn ensemble(cfg: &RunConfig) -> (Ensemble, SimState, SimState) {
    let sp = build_spaces(cfg.mesh.n_fine).unwrap();
    let r = make_initial_state(cfg, Which::Reference, &sp).unwrap();
    let a = make_initial_state(cfg, Which::Assimilated, &sp).unwrap();
    (Ensemble::new(sp, cfg.params.clone(), cfg.scheme_config()), r, a)
}

fn is_singular(e: &RunError) -> bool {
    matches!(e, RunError::Scheme(SchemeError::Solver { source: SolveError::SingularSystem(_), .. }))
}

fn skew(rep: &mut Report) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [4, 8] {
        for seed in 0..8u64 {
            let a = noise(1000 + seed, 2 * (2 * n + 1) * (2 * n + 1));
            for (_, b, sp) in transport_operators(n, &a) {
                for k in 0..4 {
                    worst = worst.max(skew_defect(&b, &sp, &noise(seed * 16 + k, sp.dof_count())));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    rep.check(
        "skew-symmetry",
        worst <= 1e-12 && secs < 10.0,
        format!("max |r'Br|/|r|_M^2 = {worst:.3e} (<= 1e-12), {secs:.2} s (< 10 s)"),
    );
}

fn uniqueness_zero_data(rep: &mut Report) {
    let cfg = preset(1, Scale::Desk).unwrap();
    let sp = build_spaces(8).unwrap();
    let sc = Scheme::new(sp.clone(), cfg.params.clone(), cfg.scheme_config());
    let s = SimState::zero(&sp);
    let z = NudgeSources::zero(&sp);
    let m = |f: &Field| f.coeffs().iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let (phi, xi) = sc.ch_step(&s, &z.g_phi).unwrap();
    let zeta = sc.psi_step(&s, &phi, &z.g_psi).unwrap();
    let v = sc.ns_step(&s, &phi, &xi, &zeta, &z.g_u).unwrap();
    let pi = sc.pressure_correction(&s, &v).unwrap();
    let worst = [&phi, &xi, &zeta, &v, &pi].iter().map(|f| m(f)).fold(0.0, f64::max);
    rep.check(
        "uniqueness (zero data)",
        worst <= 1e-10,
        format!("max |substep output| = {worst:.3e} on n=8 (<= 1e-10)"),
    );
}

fn observation_order(rep: &mut Report) {
    let e = observation_errors(&[8, 16, 32]);
    let o = orders(&e);
    rep.check(
        "observation order",
        o.iter().all(|&x| x >= 1.9),
        format!("errors {}, orders {o:.3?} (>= 1.9)", sci(&e)),
    );
}

fn mass_conservation(rep: &mut Report) {
    let cfg = preset(1, Scale::Desk).unwrap();
    let sp = build_spaces(cfg.mesh.n_fine).unwrap();
    // the drift bound is tighter than 100 solves at the default tolerance
    let mut sc_cfg = cfg.scheme_config();
    sc_cfg.tol = 1e-12;
    let sc = Scheme::new(sp.clone(), cfg.params.clone(), sc_cfg);
    let mass = |f: &Field| -> f64 { f.space().mean_vector().iter().zip(f.coeffs()).map(|(a, b)| a * b).sum() };
    let mut s = make_initial_state(&cfg, Which::Reference, &sp).unwrap();
    let g = Field::zeros(&sp.scalar);
    let m0 = mass(&s.phi);
    for _ in 0..100 {
        let (phi, xi) = sc.ch_step(&s, &g).unwrap();
        s.phi = phi;
        s.xi = xi;
        s.n += 1;
    }
    let drift = (mass(&s.phi) - m0).abs();
    rep.check(
        "mass conservation (alpha = 0)",
        drift <= 1e-10,
        format!("|int phi(100) - int phi(0)| = {drift:.3e} (<= 1e-10)"),
    );

    let op = observation(&sp, cfg.mesh.n_obs).unwrap();
    let reference = make_initial_state(&cfg, Which::Reference, &sp).unwrap();
    let mut s = make_initial_state(&cfg, Which::Assimilated, &sp).unwrap();
    s.v = Field::zeros(&sp.velocity);
    let mut p = cfg.physical();
    p.alpha_u = 0.0;
    p.alpha_psi = 0.0;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let nudge = NudgeSources::build(&op, &p, &reference, &s).unwrap();
        let (phi, xi) = sc.ch_step(&s, &nudge.g_phi).unwrap();
        worst = worst.max((mass(&phi) - mass(&s.phi) - cfg.time.dt * mass(&nudge.g_phi)).abs());
        s.phi = phi;
        s.xi = xi;
        s.n += 1;
    }
    rep.check(
        "mass law (alpha_phi > 0)",
        worst <= 1e-10,
        format!("max |d int phi - dt int g_phi| over 20 steps = {worst:.3e} (<= 1e-10)"),
    );
}

fn dissipation(rep: &mut Report) {
    let cfg = preset(1, Scale::Desk).unwrap();
    let (mut ens, r, _) = ensemble(&cfg);
    ens.add_reference("reference", r);
    let p = cfg.params.clone();
    let e0 = energies(&ens.references[0].state, &p).total;
    let mut prev = e0;
    let mut worst_rise = f64::NEG_INFINITY;
    let start = Instant::now();
    let mut failure = None;
    for _ in 0..cfg.steps() {
        if let Err(e) = ens.step() {
            failure = Some(e.to_string());
            break;
        }
        let e = energies(&ens.references[0].state, &p).total;
        worst_rise = worst_rise.max(e - prev);
        prev = e;
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failure.is_none() && prev < e0 && worst_rise <= 0.01 * e0 && secs <= 600.0;
    rep.check(
        "dissipation",
        pass,
        format!(
            "E_tot(0) = {e0:.6e}, E_tot(T) = {prev:.6e}, max step increase {:.3e} E_tot(0) (<= 1e-2), runtime {secs:.0} s (<= 600 s){}",
            worst_rise / e0,
            failure.map(|f| format!(", failed: {f}")).unwrap_or_default()
        ),
    );
    rep.absorb("test 1 reference", &ens);
}

/// Tests 1 and 2 share the droplet reference; each has a nudged run and an
/// unnudged control. Runs to `t = 10`.
fn synchronization(rep: &mut Report) {
    let t1 = preset(1, Scale::Desk).unwrap();
    let t2 = preset(2, Scale::Desk).unwrap();
    let (mut ens, r, a1) = ensemble(&t1);
    let a2 = make_initial_state(&t2, Which::Assimilated, ens.spaces()).unwrap();
    let op = observation(ens.spaces(), t1.mesh.n_obs).unwrap();
    let i = ens.add_reference("reference", r);
    ens.add_member("test 1", i, op.clone(), gains(&t1, 1.0), a1.clone());
    ens.add_member("test 1 control", i, op.clone(), gains(&t1, 0.0), a1);
    ens.add_member("test 2", i, op.clone(), gains(&t2, 1.0), a2.clone());
    ens.add_member("test 2 control", i, op, gains(&t2, 0.0), a2);
    let initial = ens.records();
    let steps = (10.0 / t1.time.dt).round() as usize;
    let mut failure = None;
    for n in 1..=steps {
        if let Err(e) = ens.step() {
            let within = n <= 200;
            rep.check(
                "uniqueness (200-step run)",
                !(within && is_singular(&e)),
                format!("step {n}: {e}"),
            );
            failure = Some(e.to_string());
            break;
        }
        if n == 200 {
            rep.check(
                "uniqueness (200-step run)",
                true,
                "200 steps of the test 1 twin run without SingularSystem".into(),
            );
        }
    }
    let last = ens.records();
    let ratio = |k: usize, f: fn(&StepRecord) -> f64| f(&last[k]) / f(&initial[k]);
    let e_phi = |r: &StepRecord| r.errors.e_phi;
    let e_u = |r: &StepRecord| r.errors.e_u;
    for (test, da, control) in [("test 1", 0, 1), ("test 2", 2, 3)] {
        let (rp, ru, rc) = (ratio(da, e_phi), ratio(da, e_u), ratio(control, e_phi));
        let pass = failure.is_none() && rp <= 1e-2 && ru <= 1e-2 && rc >= 1e-1;
        rep.check(
            &format!("synchronization {test}"),
            pass,
            format!(
                "e_phi(10)/e_phi(0) = {rp:.3e} (<= 1e-2), e_u(10)/e_u(0) = {ru:.3e} (<= 1e-2), control e_phi ratio = {rc:.3e} (>= 1e-1){}",
                failure.as_ref().map(|f| format!(", failed: {f}")).unwrap_or_default()
            ),
        );
    }
    rep.absorb("tests 1-2", &ens);
}

/// Tests 3, 5 and 6 share the lid-driven reference; the `alpha = 1`,
/// `n_obs = 16` run is Test 3 and a member of both sweeps.
fn sweeps(rep: &mut Report) {
    let cfg = preset(5, Scale::Desk).unwrap();
    let (mut ens, r, a) = ensemble(&cfg);
    let i = ens.add_reference("reference", r);
    let sp = ens.spaces().clone();
    let op16 = observation(&sp, 16).unwrap();
    ens.add_member("alpha 1, n_obs 16", i, op16.clone(), gains(&cfg, 1.0), a.clone());
    ens.add_member("alpha 0.1", i, op16.clone(), gains(&cfg, 0.1), a.clone());
    ens.add_member("alpha 0.01", i, op16, gains(&cfg, 0.01), a.clone());
    ens.add_member("n_obs 8", i, observation(&sp, 8).unwrap(), gains(&cfg, 1.0), a.clone());
    ens.add_member("n_obs 4", i, observation(&sp, 4).unwrap(), gains(&cfg, 1.0), a);
    let mut failure = None;
    for _ in 0..cfg.steps() {
        if let Err(e) = ens.step() {
            failure = Some(e.to_string());
            break;
        }
    }
    let e: Vec<f64> = ens.records().iter().map(|r| r.errors.e_u).collect();
    let tail = failure.map(|f| format!(", failed: {f}")).unwrap_or_default();
    let ok = tail.is_empty();
    rep.check(
        "feedback strength (test 5)",
        ok && e[2] > e[1] && e[1] > e[0],
        format!("e_u(20) for alpha 0.01, 0.1, 1: {:.3e}, {:.3e}, {:.3e} (strictly decreasing){tail}", e[2], e[1], e[0]),
    );
    rep.check(
        "observation resolution (test 6)",
        ok && e[4] > e[3] && e[3] > e[0],
        format!("e_u(20) for n_obs 4, 8, 16: {:.3e}, {:.3e}, {:.3e} (strictly decreasing){tail}", e[4], e[3], e[0]),
    );
    rep.absorb("tests 3, 5, 6", &ens);
}

fn indistinguishable(rep: &mut Report) {
    let cfg = preset(4, Scale::Desk).unwrap();
    let eps = cfg.test4.unwrap().epsilon;
    let (mut ens, naive, a) = ensemble(&cfg);
    let op = observation(ens.spaces(), cfg.mesh.n_obs).unwrap();
    let (p1, p2) = indistinguishable_pair(&op, &naive.phi, eps).unwrap();
    let seen = l2_norm(&op.observe_difference(&p1, &p2).unwrap());
    let apart = l2_norm(&p1.lin_comb(1.0, &p2, -1.0).unwrap());
    rep.check(
        "test 4 construction",
        seen <= 1e-10 && apart >= 1e-3,
        format!("|I_H(phi1 - phi2)| = {seen:.3e} (<= 1e-10), |phi1 - phi2| = {apart:.3e} (>= 1e-3)"),
    );
    let (mut r1, mut r2) = (naive.clone(), naive);
    r1.phi = p1;
    r2.phi = p2;
    let i1 = ens.add_reference("ref1", r1);
    let i2 = ens.add_reference("ref2", r2);
    ens.add_member("da1", i1, op.clone(), cfg.physical(), a.clone());
    ens.add_member("da2", i2, op, cfg.physical(), a);
    let initial = ens.records();
    let half = (10.0 / cfg.time.dt).round() as usize;
    let mut worst_overlap: f64 = 0.0;
    let mut failure = None;
    for n in 1..=cfg.steps() {
        if let Err(e) = ens.step() {
            failure = Some(e.to_string());
            break;
        }
        if n >= half {
            let refs = sync_errors(&ens.references[0].state, &ens.references[1].state).unwrap().e_phi;
            let das = sync_errors(&ens.members[0].state, &ens.members[1].state).unwrap().e_phi;
            worst_overlap = worst_overlap.max((refs - das).abs() / refs);
        }
    }
    let last = ens.records();
    let decay: Vec<f64> = (0..2).map(|k| last[k].errors.e_phi / initial[k].errors.e_phi).collect();
    let tail = failure.map(|f| format!(", failed: {f}")).unwrap_or_default();
    let ok = tail.is_empty();
    rep.check(
        "test 4 synchronization",
        ok && decay.iter().all(|&d| d < 1e-2),
        format!("e_phi(20)/e_phi(0) for Ref1-DA1, Ref2-DA2: {:.3e}, {:.3e} (< 1e-2){tail}", decay[0], decay[1]),
    );
    rep.check(
        "test 4 overlap",
        ok && worst_overlap <= 0.1,
        format!("max_(t >= 10) |Ref1-Ref2| vs |DA1-DA2| relative gap = {worst_overlap:.3e} (<= 0.1){tail}"),
    );
    rep.absorb("test 4", &ens);
}

fn ledger(rep: &mut Report) {
    let l = rep.ledger;
    rep.check(
        "ledger",
        l.min_dissipation >= -1e-12 && l.max_ratio.is_finite(),
        format!(
            "min D = {:.3e} (>= -1e-12), max ratio = {:.6e} (finite) over {} trajectory steps of {}",
            l.min_dissipation,
            l.max_ratio,
            l.steps,
            rep.ledger_runs.join("; ")
        ),
    );
}

fn fem_oracles(rep: &mut Report) {
    let s = space(1, 1, 1, SideSet::EMPTY);
    let nq = s.tab().nq();
    let w: Vec<f64> = (0..2 * nq).map(|k| if k < nq { 1.0 } else { 0.0 }).collect();
    let m = assemble_mass(&s, Some(&w)).unwrap();
    let d = s.element_dofs(0);
    let area = s.mesh().geometry(0).area;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let want = area / 12.0 * if i == j { 2.0 } else { 1.0 };
            worst = worst.max((m.get(d[i], d[j]) - want).abs() / want);
        }
    }
    rep.check(
        "P1 element mass",
        worst <= 4.0 * f64::EPSILON,
        format!("max relative deviation from (A/12)[[2,1,1],[1,2,1],[1,1,2]] = {worst:.1e}"),
    );
    let sizes = [8, 16, 32, 64];
    for (name, e) in [("Poisson", poisson_errors(1, &sizes)), ("Neumann-Poisson", neumann_errors(1, &sizes))] {
        let o = orders(&e);
        rep.check(
            &format!("{name} convergence"),
            o.iter().all(|&x| x >= 1.9),
            format!("P1 L2 errors {}, orders {o:.3?} (>= 1.9)", sci(&e)),
        );
    }
}

#[test]
fn acceptance() {
    let mut rep = Report {
        failures: Vec::new(),
        ledger: LedgerStats::default(),
        ledger_runs: Vec::new(),
    };
    skew(&mut rep);
    uniqueness_zero_data(&mut rep);
    observation_order(&mut rep);
    mass_conservation(&mut rep);
    fem_oracles(&mut rep);
    dissipation(&mut rep);
    synchronization(&mut rep);
    sweeps(&mut rep);
    indistinguishable(&mut rep);
    ledger(&mut rep);
    assert!(rep.failures.is_empty(), "failed criteria:\n{}", rep.failures.join("\n"));
}

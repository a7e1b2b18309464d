//! Config-driven twin experiments: presets, initial data, the lockstep
//! runner and its CSV/VTK outputs.

pub mod config;
pub mod initial;
pub mod output;
pub mod presets;
pub mod runner;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::diagnostics::sync_errors;
use crate::error::RunError;
use crate::observation::ObservationOperator;

pub use config::{load_config, Nudging, RunConfig, Sweep};
pub use initial::{make_initial_state, Which};
pub use output::{CsvWriter, RunSummary, CSV_HEADER};
pub use presets::{preset, Scale};
pub use runner::{build_spaces, indistinguishable_pair, observation, Ensemble};

use output::{fmt_float, write_state_vtk, MemberSummary};

pub const SEPARATION_HEADER: &str = "step,t,e_u_ref,e_phi_ref,e_psi_ref,e_u_da,e_phi_da,e_psi_da";

/// Runs the experiment described by `cfg`, writing into `out`. `progress`
/// receives `(step, steps)` after every step.
pub fn run(cfg: &RunConfig, out: &Path, progress: impl FnMut(usize, usize)) -> Result<RunSummary, RunError> {
    if cfg.test4.is_some() {
        run_test4(cfg, out, progress)
    } else {
        run_twin(cfg, out, progress)
    }
}

/// One reference and one assimilated trajectory per sweep value.
pub fn run_twin(cfg: &RunConfig, out: &Path, progress: impl FnMut(usize, usize)) -> Result<RunSummary, RunError> {
    cfg.validate()?;
    let spaces = build_spaces(cfg.mesh.n_fine)?;
    let reference = make_initial_state(cfg, Which::Reference, &spaces)?;
    let assimilated = make_initial_state(cfg, Which::Assimilated, &spaces)?;
    let variants: Vec<(String, usize, Nudging)> = match &cfg.sweep {
        None => vec![("twin".into(), cfg.mesh.n_obs, cfg.nudging)],
        Some(Sweep::Alpha { values }) => values
            .iter()
            .map(|&a| (format!("alpha_{a}"), cfg.mesh.n_obs, Nudging::uniform(a)))
            .collect(),
        Some(Sweep::NObs { values }) => values
            .iter()
            .map(|&n| (format!("nobs_{n}"), n, cfg.nudging))
            .collect(),
    };
    let mut ops: BTreeMap<usize, Arc<ObservationOperator>> = BTreeMap::new();
    for (_, n, _) in &variants {
        if !ops.contains_key(n) {
            ops.insert(*n, observation(&spaces, *n)?);
        }
    }
    let mut ens = Ensemble::new(spaces, cfg.params.clone(), cfg.scheme_config());
    let r = ens.add_reference("reference", reference);
    for (label, n, nudging) in variants {
        ens.add_member(label, r, ops[&n].clone(), cfg.physical_with(nudging), assimilated.clone());
    }
    drive(&mut ens, cfg, out, |_| Ok(()), progress)
}

/// Two references with observationally identical phases, each observed by
/// its own assimilated trajectory from a common start.
pub fn run_test4(cfg: &RunConfig, out: &Path, progress: impl FnMut(usize, usize)) -> Result<RunSummary, RunError> {
    cfg.validate()?;
    let epsilon = cfg
        .test4
        .ok_or_else(|| crate::error::ConfigError::Validation("missing [test4] block".into()))?
        .epsilon;
    let spaces = build_spaces(cfg.mesh.n_fine)?;
    let op = observation(&spaces, cfg.mesh.n_obs)?;
    let naive = make_initial_state(cfg, Which::Reference, &spaces)?;
    let (phi1, phi2) = indistinguishable_pair(&op, &naive.phi, epsilon)?;
    let assimilated = make_initial_state(cfg, Which::Assimilated, &spaces)?;
    let mut ens = Ensemble::new(spaces, cfg.params.clone(), cfg.scheme_config());
    let mut r1 = naive.clone();
    r1.phi = phi1;
    let mut r2 = naive;
    r2.phi = phi2;
    let i1 = ens.add_reference("ref1", r1);
    let i2 = ens.add_reference("ref2", r2);
    ens.add_member("ref1_da1", i1, op.clone(), cfg.physical(), assimilated.clone());
    ens.add_member("ref2_da2", i2, op, cfg.physical(), assimilated);
    fs::create_dir_all(out)?;
    let mut sep = BufWriter::new(File::create(out.join("separation.csv"))?);
    writeln!(sep, "{SEPARATION_HEADER}")?;
    let summary = drive(
        &mut ens,
        cfg,
        out,
        |e| {
            let refs = sync_errors(&e.references[0].state, &e.references[1].state)?;
            let das = sync_errors(&e.members[0].state, &e.members[1].state)?;
            let mut line = e.step_count().to_string();
            for v in [e.time(), refs.e_u, refs.e_phi, refs.e_psi, das.e_u, das.e_phi, das.e_psi] {
                line.push(',');
                line.push_str(&fmt_float(v));
            }
            writeln!(sep, "{line}")?;
            Ok(())
        },
        progress,
    );
    sep.flush()?;
    summary
}

/// Advances `ens` to `t_final`, writing a CSV per member, optional VTK
/// snapshots and `summary.txt`. `extra` is called on every recorded row.
/// Writers are flushed before a solver failure is returned.
fn drive(
    ens: &mut Ensemble,
    cfg: &RunConfig,
    out: &Path,
    mut extra: impl FnMut(&Ensemble) -> Result<(), RunError>,
    mut progress: impl FnMut(usize, usize),
) -> Result<RunSummary, RunError> {
    fs::create_dir_all(out)?;
    let steps = cfg.steps();
    let (every, vtk) = (cfg.output.csv_every, cfg.output.vtk_every);
    let mut writers = Vec::new();
    let mut summaries = Vec::new();
    for m in &ens.members {
        writers.push(CsvWriter::new(BufWriter::new(File::create(out.join(format!("{}.csv", m.label)))?))?);
    }
    let snapshot = |ens: &Ensemble| -> Result<(), RunError> {
        let n = ens.step_count();
        let states = ens
            .references
            .iter()
            .map(|r| (&r.label, &r.state))
            .chain(ens.members.iter().map(|m| (&m.label, &m.state)));
        for (label, s) in states {
            let f = BufWriter::new(File::create(out.join(format!("{label}_{n:06}.vtk")))?);
            write_state_vtk(s, f)?;
        }
        Ok(())
    };
    let mut record = |ens: &Ensemble, writers: &mut Vec<CsvWriter<BufWriter<File>>>, summaries: &mut Vec<MemberSummary>| {
        for (i, w) in writers.iter_mut().enumerate() {
            let r = ens.record(i);
            w.write(&r)?;
            match summaries.get_mut(i) {
                Some(s) => s.update(&r),
                None => summaries.push(MemberSummary::new(&ens.members[i].label, r)),
            }
        }
        extra(ens)
    };
    record(ens, &mut writers, &mut summaries)?;
    if vtk > 0 {
        snapshot(ens)?;
    }
    for n in 1..=steps {
        if let Err(e) = ens.step() {
            for w in &mut writers {
                w.flush()?;
            }
            return Err(e);
        }
        if n % every == 0 {
            record(ens, &mut writers, &mut summaries)?;
        }
        if vtk > 0 && n % vtk == 0 {
            snapshot(ens)?;
        }
        progress(n, steps);
    }
    for w in &mut writers {
        w.flush()?;
    }
    for (s, m) in summaries.iter_mut().zip(&ens.members) {
        s.ledger = m.stats;
    }
    let summary = RunSummary {
        steps,
        t_final: ens.time(),
        members: summaries,
        references: ens.references.iter().map(|r| (r.label.clone(), r.stats)).collect(),
    };
    fs::write(out.join("summary.txt"), summary.to_text())?;
    Ok(summary)
}

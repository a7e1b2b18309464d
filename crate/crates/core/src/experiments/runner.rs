use std::sync::Arc;

use crate::diagnostics::StepRecord;
use crate::error::{RunError, SchemeError};
use crate::fem::{Field, Space};
use crate::mesh::{build_uniform_mesh, SideSet};
use crate::model::PhysicalParams;
use crate::observation::{build_observation, ObservationOperator};
use crate::scheme::{stability_ledger, Ledger, NudgeSources, Scheme, SchemeConfig, SimState, Spaces};

/// Running extremes of the stability ledger of one trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerStats {
    pub steps: usize,
    pub min_dissipation: f64,
    pub max_ratio: f64,
    pub min_energy: f64,
    pub max_energy: f64,
}

impl Default for LedgerStats {
    fn default() -> Self {
        LedgerStats {
            steps: 0,
            min_dissipation: f64::INFINITY,
            max_ratio: f64::NEG_INFINITY,
            min_energy: f64::INFINITY,
            max_energy: f64::NEG_INFINITY,
        }
    }
}

impl LedgerStats {
    pub fn push(&mut self, l: &Ledger, dt: f64) {
        self.steps += 1;
        self.min_dissipation = self.min_dissipation.min(l.d);
        self.max_ratio = self.max_ratio.max(l.ratio(dt));
        for e in [l.e_prev, l.e_new] {
            self.min_energy = self.min_energy.min(e);
            self.max_energy = self.max_energy.max(e);
        }
    }
}

/// A trajectory advanced without feedback.
#[derive(Clone, Debug)]
pub struct Reference {
    pub label: String,
    pub state: SimState,
    pub last: Option<Ledger>,
    pub stats: LedgerStats,
}

/// A trajectory nudged towards one of the references.
#[derive(Clone, Debug)]
pub struct Member {
    pub label: String,
    pub reference: usize,
    pub observation: Arc<ObservationOperator>,
    /// Only the nudging gains are read.
    pub gains: PhysicalParams,
    pub state: SimState,
    pub last: Option<Ledger>,
    pub stats: LedgerStats,
}

/// References and assimilated trajectories advanced in lockstep on one mesh.
/// Nudging sources are built from the time-level-`n` states of both sides
/// before either is advanced.
#[derive(Debug)]
pub struct Ensemble {
    scheme: Scheme,
    pub references: Vec<Reference>,
    pub members: Vec<Member>,
}

pub fn build_spaces(n: usize) -> Result<Spaces, RunError> {
    Ok(Spaces::new(Arc::new(build_uniform_mesh(n)?)))
}

/// `I_H` from the simulation mesh onto P2 on an `n_obs` mesh.
pub fn observation(spaces: &Spaces, n_obs: usize) -> Result<Arc<ObservationOperator>, RunError> {
    let coarse = Space::new(Arc::new(build_uniform_mesh(n_obs)?), 2, 1, SideSet::EMPTY);
    Ok(Arc::new(build_observation(&spaces.scalar, &coarse)?))
}

impl Ensemble {
    /// `params` are the physical parameters; their nudging gains are ignored.
    pub fn new(spaces: Spaces, params: PhysicalParams, config: SchemeConfig) -> Self {
        Ensemble {
            scheme: Scheme::new(spaces, params.without_nudging(), config),
            references: Vec::new(),
            members: Vec::new(),
        }
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn spaces(&self) -> &Spaces {
        self.scheme.spaces()
    }

    pub fn add_reference(&mut self, label: impl Into<String>, state: SimState) -> usize {
        self.references.push(Reference {
            label: label.into(),
            state,
            last: None,
            stats: LedgerStats::default(),
        });
        self.references.len() - 1
    }

    /// Panics if `reference` is out of range.
    pub fn add_member(
        &mut self,
        label: impl Into<String>,
        reference: usize,
        observation: Arc<ObservationOperator>,
        gains: PhysicalParams,
        state: SimState,
    ) -> usize {
        assert!(reference < self.references.len(), "unknown reference {reference}");
        self.members.push(Member {
            label: label.into(),
            reference,
            observation,
            gains,
            state,
            last: None,
            stats: LedgerStats::default(),
        });
        self.members.len() - 1
    }

    /// Time level shared by all trajectories.
    pub fn step_count(&self) -> usize {
        self.references.first().map_or(0, |r| r.state.n)
    }

    pub fn time(&self) -> f64 {
        self.references.first().map_or(0.0, |r| r.state.t)
    }

    /// Advances every trajectory by one step.
    pub fn step(&mut self) -> Result<(), RunError> {
        let nudges = self
            .members
            .iter()
            .map(|m| NudgeSources::build(&m.observation, &m.gains, &self.references[m.reference].state, &m.state))
            .collect::<Result<Vec<_>, _>>()?;
        let zero = NudgeSources::zero(self.scheme.spaces());
        let (scheme, dt) = (&self.scheme, self.scheme.config().dt);
        let advance = |state: &mut SimState, nudge: &NudgeSources| -> Result<Ledger, SchemeError> {
            let new = scheme.advance(state, nudge)?;
            let ledger = stability_ledger(state, &new, nudge, scheme.params());
            *state = new;
            Ok(ledger)
        };
        for r in &mut self.references {
            let l = advance(&mut r.state, &zero)?;
            r.stats.push(&l, dt);
            r.last = Some(l);
        }
        for (m, g) in self.members.iter_mut().zip(&nudges) {
            let l = advance(&mut m.state, g)?;
            m.stats.push(&l, dt);
            m.last = Some(l);
        }
        Ok(())
    }

    /// Diagnostics of member `i` against its reference.
    pub fn record(&self, i: usize) -> StepRecord {
        let m = &self.members[i];
        StepRecord::new(&self.references[m.reference].state, &m.state, self.scheme.params(), m.last)
    }

    pub fn records(&self) -> Vec<StepRecord> {
        (0..self.members.len()).map(|i| self.record(i)).collect()
    }
}

/// Assimilated initial phase of the indistinguishable pair:
/// `phi +- epsilon (I_H phi - phi)`.
pub fn indistinguishable_pair(op: &ObservationOperator, phi: &Field, epsilon: f64) -> Result<(Field, Field), RunError> {
    let delta = op.observe(phi)?.lin_comb(1.0, phi, -1.0)?;
    Ok((phi.lin_comb(1.0, &delta, epsilon)?, phi.lin_comb(1.0, &delta, -epsilon)?))
}

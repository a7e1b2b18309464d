use std::fmt::Write as _;
use std::io::{self, Write};

use crate::diagnostics::StepRecord;
use crate::fem::Field;
use crate::scheme::SimState;

use super::runner::LedgerStats;

pub const CSV_HEADER: &str = "step,t,e_u,e_phi,e_psi,e_pi,Ekin_ref,Emix_ref,Eel_ref,Etot_ref,\
Ekin_da,Emix_da,Eel_da,Etot_da,mass_ref,mass_da,ledger_E,ledger_D,ledger_S";

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV line without the line feed. On the initial row `ledger_S` is
/// `NaN`: the source functional belongs to a step.
pub fn csv_row(r: &StepRecord) -> String {
    let s = r.ledger.map_or(f64::NAN, |l| l.s);
    let e = &r.errors;
    let (a, b) = (&r.reference, &r.assimilated);
    let values = [
        r.t,
        e.e_u,
        e.e_phi,
        e.e_psi,
        e.e_pi,
        a.kinetic,
        a.mixing,
        a.elastic,
        a.total,
        b.kinetic,
        b.mixing,
        b.elastic,
        b.total,
        r.mass_ref,
        r.mass_da,
        r.ledger_energy,
        r.ledger_dissipation,
        s,
    ];
    let mut line = r.n.to_string();
    for v in values {
        line.push(',');
        line.push_str(&fmt_float(v));
    }
    line
}

/// Streams step records in the CSV layout.
pub struct CsvWriter<W: Write> {
    out: W,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W) -> io::Result<Self> {
        out.write_all(CSV_HEADER.as_bytes())?;
        out.write_all(b"\n")?;
        Ok(CsvWriter { out })
    }

    pub fn write(&mut self, r: &StepRecord) -> io::Result<()> {
        self.out.write_all(csv_row(r).as_bytes())?;
        self.out.write_all(b"\n")
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Writes a state as a legacy ASCII VTK grid on the P2 nodes. Each triangle
/// is split into four through its edge midpoints; point `i` is P2 dof `i`.
/// The P1 pressure is evaluated at the midpoints.
pub fn write_state_vtk<W: Write>(s: &SimState, mut out: W) -> io::Result<()> {
    let space = s.phi.space();
    let mesh = space.mesh();
    let pts = space.dof_coordinates();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "state step={} t={}", s.n, fmt_float(s.t))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", pts.len())?;
    for p in pts {
        writeln!(out, "{} {} 0", p[0], p[1])?;
    }
    let nc = 4 * mesh.num_triangles();
    writeln!(out, "CELLS {} {}", nc, 4 * nc)?;
    for t in 0..mesh.num_triangles() {
        let d = space.element_dofs(t);
        for c in [[d[0], d[3], d[5]], [d[3], d[1], d[4]], [d[5], d[4], d[2]], [d[3], d[4], d[5]]] {
            writeln!(out, "3 {} {} {}", c[0], c[1], c[2])?;
        }
    }
    writeln!(out, "CELL_TYPES {nc}")?;
    for _ in 0..nc {
        writeln!(out, "5")?;
    }
    writeln!(out, "POINT_DATA {}", pts.len())?;
    let scalar = |out: &mut W, name: &str, f: &mut dyn FnMut(usize) -> f64| -> io::Result<()> {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for i in 0..pts.len() {
            writeln!(out, "{}", fmt_float(f(i)))?;
        }
        Ok(())
    };
    let vector = |out: &mut W, name: &str, f: &Field| -> io::Result<()> {
        writeln!(out, "VECTORS {name} double")?;
        let (x, y) = (f.component(0), f.component(1));
        for i in 0..pts.len() {
            writeln!(out, "{} {} 0", fmt_float(x[i]), fmt_float(y[i]))?;
        }
        Ok(())
    };
    scalar(&mut out, "phi", &mut |i| s.phi.coeffs()[i])?;
    scalar(&mut out, "xi", &mut |i| s.xi.coeffs()[i])?;
    scalar(&mut out, "pi", &mut |i| s.pi.eval_at(pts[i], 0))?;
    vector(&mut out, "v", &s.v)?;
    vector(&mut out, "zeta", &s.zeta)?;
    Ok(())
}

/// End-of-run figures of one assimilated trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct MemberSummary {
    pub label: String,
    pub initial: StepRecord,
    pub last: StepRecord,
    pub min_total_energy: f64,
    pub max_total_energy: f64,
    pub ledger: LedgerStats,
}

impl MemberSummary {
    pub fn new(label: &str, initial: StepRecord) -> Self {
        MemberSummary {
            label: label.to_string(),
            initial,
            last: initial,
            min_total_energy: initial.assimilated.total,
            max_total_energy: initial.assimilated.total,
            ledger: LedgerStats::default(),
        }
    }

    pub fn update(&mut self, r: &StepRecord) {
        self.last = *r;
        self.min_total_energy = self.min_total_energy.min(r.assimilated.total);
        self.max_total_energy = self.max_total_energy.max(r.assimilated.total);
    }
}

/// Outcome of a run.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RunSummary {
    pub steps: usize,
    pub t_final: f64,
    pub members: Vec<MemberSummary>,
    /// Label and ledger extremes of every reference.
    pub references: Vec<(String, LedgerStats)>,
}

impl RunSummary {
    /// Smallest dissipation functional over all steps of all trajectories.
    pub fn min_dissipation(&self) -> f64 {
        self.all_stats().map(|s| s.min_dissipation).fold(f64::INFINITY, f64::min)
    }

    /// Largest empirical ledger ratio over all steps of all trajectories.
    pub fn max_ratio(&self) -> f64 {
        self.all_stats().map(|s| s.max_ratio).fold(f64::NEG_INFINITY, f64::max)
    }

    fn all_stats(&self) -> impl Iterator<Item = &LedgerStats> {
        self.members.iter().map(|m| &m.ledger).chain(self.references.iter().map(|r| &r.1))
    }

    /// Human-readable report, one line per trajectory plus a ledger line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let f = fmt_float;
        writeln!(s, "steps={} t={}", self.steps, f(self.t_final)).unwrap();
        for m in &self.members {
            let (a, b) = (&m.initial.errors, &m.last.errors);
            writeln!(
                s,
                "{}: e_u={} e_phi={} e_psi={} (initial e_u={} e_phi={} e_psi={}) Etot_da in [{}, {}] min_D={} max_ratio={}",
                m.label,
                f(b.e_u),
                f(b.e_phi),
                f(b.e_psi),
                f(a.e_u),
                f(a.e_phi),
                f(a.e_psi),
                f(m.min_total_energy),
                f(m.max_total_energy),
                f(m.ledger.min_dissipation),
                f(m.ledger.max_ratio),
            )
            .unwrap();
        }
        for (label, l) in &self.references {
            writeln!(
                s,
                "{label}: ledger energy in [{}, {}] min_D={} max_ratio={}",
                f(l.min_energy),
                f(l.max_energy),
                f(l.min_dissipation),
                f(l.max_ratio),
            )
            .unwrap();
        }
        writeln!(s, "ledger: min_D={} max_ratio={}", f(self.min_dissipation()), f(self.max_ratio())).unwrap();
        s
    }
}

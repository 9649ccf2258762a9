//! Binds catalog cases to solvers: initialization, dispatch over systems and
//! dimensions, snapshots, error norms and convergence studies.

use std::cell::RefCell;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bc::{fill_ghosts_1d, Boundary, SideBc, StepObstacle};
use crate::cases::{BcSpec, Case, ExactFn, Model};
use crate::march::{integrate, FieldSummary, RunOptions, StepReport, Stepper};
use crate::meshstate::quadrature::{average_1d, average_2d};
use crate::meshstate::{dof_position, DofField1d, DofField2d, Family, Grid1d, Grid2d, State};
use crate::scheme::SchemeConfig;
use crate::solver1d::Solver1d;
use crate::solver2d::Solver2d;
use crate::systems::{Burgers, ConservationLaw, Euler, LinearAdvection};
use crate::Error;

/// Sub-cells per axis of the Gauss-Legendre rule used for averages.
pub const QUAD_PARTS: usize = 4;

/// Mesh, end time and scheme of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub cells: [usize; 2],
    pub t_end: f64,
    pub scheme: SchemeConfig,
    pub max_steps: Option<usize>,
}

impl RunSpec {
    /// Case defaults; `full` selects the publication-scale mesh and time.
    pub fn defaults(case: &Case, full: bool) -> Self {
        let mut scheme = case.scheme;
        scheme.cfl = case.cfl_for(scheme.point_update);
        RunSpec {
            cells: if full { case.full_cells } else { case.cells },
            t_end: if full { case.full_t_end } else { case.t_end },
            scheme,
            max_steps: None,
        }
    }

    /// Mesh with `n` cells along x and the case's aspect ratio.
    pub fn with_mesh(&self, case: &Case, n: usize) -> Self {
        let ny = if case.dim == 1 {
            1
        } else {
            (n * case.cells[1] + case.cells[0] / 2) / case.cells[0]
        };
        RunSpec { cells: [n, ny.max(1)], ..self.clone() }
    }
}

/// One DoF of a snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DofRecord {
    /// `avg`, `point` (1D) or `avg`, `fx`, `fy`, `corner` (2D).
    pub kind: String,
    pub i: isize,
    pub j: isize,
    pub x: f64,
    pub y: f64,
    /// Indices on the grid of half the mesh size.
    pub ih: isize,
    pub jh: isize,
    pub active: bool,
    pub values: Vec<f64>,
    /// Blending factor of the last stage: the point value's own factor, or
    /// the smallest factor of a cell's interfaces.
    pub theta: Option<f64>,
    /// Exact cell average or point value.
    pub exact: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub dim: usize,
    pub t: f64,
    pub cells: [usize; 2],
    pub dx: f64,
    pub dy: f64,
    pub components: Vec<String>,
    pub records: Vec<DofRecord>,
}

impl Snapshot {
    pub fn averages(&self) -> impl Iterator<Item = &DofRecord> {
        self.records.iter().filter(|r| r.kind == "avg")
    }

    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a DofRecord> + 'a {
        self.records.iter().filter(move |r| r.kind == kind)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    /// `sum |avg - exact avg| * cell area` over active cells, per component.
    pub l1: Vec<f64>,
    pub linf_avg: Vec<f64>,
    pub linf_points: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunOutcome {
    pub case: String,
    pub spec: RunSpec,
    pub t: f64,
    pub steps: Vec<StepReport>,
    pub initial: FieldSummary,
    pub snapshot: Snapshot,
    pub errors: Option<ErrorNorms>,
    pub notes: Vec<String>,
    pub wall_seconds: f64,
}

impl RunOutcome {
    pub fn final_summary(&self) -> &FieldSummary {
        self.steps.last().map(|s| &s.summary).unwrap_or(&self.initial)
    }

    pub fn total_halvings(&self) -> usize {
        self.steps.iter().map(|s| s.halvings).sum()
    }
}

/// A failed run with the steps accepted before the failure.
#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct RunFailure {
    pub error: Error,
    pub steps: Vec<StepReport>,
}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        RunFailure { error, steps: Vec::new() }
    }
}

/// Per-step callback. The snapshot is present every `every` steps.
pub struct Hooks<'a> {
    pub every: usize,
    pub on_step: &'a mut dyn FnMut(&StepReport, Option<Snapshot>),
}

pub fn primitives(model: Model, values: &[f64]) -> Option<(f64, [f64; 2], f64)> {
    let Model::Euler { gamma } = model else { return None };
    let rho = values[0];
    let u = values[1] / rho;
    let v = if values.len() == 4 { values[2] / rho } else { 0.0 };
    let e = values[values.len() - 1];
    Some((rho, [u, v], (gamma - 1.0) * (e - 0.5 * rho * (u * u + v * v))))
}

fn to_state<const M: usize>(v: &[f64]) -> State<M> {
    let mut s = State::zero();
    s.0.copy_from_slice(v);
    s
}

fn side_bc<const M: usize>(b: &BcSpec) -> SideBc<M> {
    match b {
        BcSpec::Periodic => SideBc::Periodic,
        BcSpec::Outflow => SideBc::Outflow,
        BcSpec::Reflective => SideBc::Reflective,
        BcSpec::Inflow(v) => SideBc::Inflow(to_state(v)),
        BcSpec::Exact(f) => {
            let f = f.clone();
            SideBc::Exact(Arc::new(move |x, y, t| to_state(&f(x, y, t).expect("closed-form boundary data"))))
        }
        BcSpec::Masked { inside, inner, outer } => SideBc::Masked {
            inside: inside.clone(),
            inner: Box::new(side_bc(inner)),
            outer: Box::new(side_bc(outer)),
        },
    }
}

fn boundary<const M: usize>(case: &Case) -> Boundary<M> {
    Boundary {
        x_lo: side_bc(&case.bc[0]),
        x_hi: side_bc(&case.bc[1]),
        y_lo: side_bc(&case.bc[2]),
        y_hi: side_bc(&case.bc[3]),
    }
}

fn check_admissible<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    u: State<M>,
    what: &str,
    at: (f64, f64),
) -> Result<(), Error> {
    if sys.is_admissible(&u) {
        Ok(())
    } else {
        Err(Error::Domain(format!("inadmissible initial {what} {:?} at {at:?}", u.0)))
    }
}

/// Point values sampled, averages by Gauss-Legendre quadrature.
pub fn init_1d<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    grid: &Grid1d,
    case: &Case,
) -> Result<DofField1d<M>, Error> {
    let f = |x: f64| to_state::<M>(&(case.init)(x, 0.0));
    let mut d = DofField1d::new(grid.n());
    for i in 0..grid.n() as isize {
        let v = average_1d(f, grid.node(i), grid.node(i + 1), QUAD_PARTS);
        check_admissible(sys, v, "average", (grid.center(i), 0.0))?;
        d.avg.set(i, v);
    }
    for k in 0..=grid.n() as isize {
        let v = f(grid.node(k));
        check_admissible(sys, v, "point value", (grid.node(k), 0.0))?;
        d.pts.set(k, v);
    }
    if matches!(case.bc[0], BcSpec::Periodic) {
        let n = grid.n() as isize;
        d.pts.set(n, d.pts.at(0));
    }
    Ok(d)
}

pub fn init_2d<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    grid: &Grid2d,
    case: &Case,
) -> Result<DofField2d<M>, Error> {
    let f = |x: f64, y: f64| to_state::<M>(&(case.init)(x, y));
    let mut d = DofField2d::new(grid.nx(), grid.ny());
    for fam in Family::ALL {
        let (n1, n2) = (d.family(fam).n1() as isize, d.family(fam).n2() as isize);
        for j in 0..n2 {
            for i in 0..n1 {
                let (x, y) = dof_position(grid, fam, i, j);
                let v = if fam == Family::Average {
                    let xr = (grid.x.node(i), grid.x.node(i + 1));
                    let yr = (grid.y.node(j), grid.y.node(j + 1));
                    average_2d(f, xr, yr, QUAD_PARTS)
                } else {
                    f(x, y)
                };
                check_admissible(sys, v, "value", (x, y))?;
                d.family_mut(fam).set(i, j, v);
            }
        }
    }
    // periodic duplicates take the low-side value so both copies agree
    let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
    let (px, py) = (matches!(case.bc[0], BcSpec::Periodic), matches!(case.bc[2], BcSpec::Periodic));
    for fam in Family::ALL {
        let f = d.family_mut(fam);
        let (n1, n2) = (f.n1() as isize, f.n2() as isize);
        if px && n1 == nx + 1 {
            for j in 0..n2 {
                f.set(nx, j, f.at(0, j));
            }
        }
        if py && n2 == ny + 1 {
            for i in 0..n1 {
                f.set(i, ny, f.at(i, 0));
            }
        }
    }
    if let Some(e) = case.point_energy {
        let (nx, ny) = (grid.nx(), grid.ny());
        if nx % 2 == 0 || ny % 2 == 0 {
            return Err(Error::Config(format!(
                "{} needs an odd number of cells per axis, got {nx}x{ny}",
                case.name
            )));
        }
        let (ic, jc) = ((nx / 2) as isize, (ny / 2) as isize);
        let density = e / grid.cell_area(ic, jc);
        for (fam, i, j) in [
            (Family::Average, ic, jc),
            (Family::FaceX, ic, jc),
            (Family::FaceX, ic + 1, jc),
            (Family::FaceY, ic, jc),
            (Family::FaceY, ic, jc + 1),
        ] {
            d.family_mut(fam).get_mut(i, j)[M - 1] = density;
        }
    }
    Ok(d)
}

fn names(case: &Case) -> Vec<String> {
    case.component_names().iter().map(|s| s.to_string()).collect()
}

/// Exact state or cell average; `None` once any evaluation fails.
struct ExactSampler<'a> {
    case: &'a Case,
    t: f64,
    failure: Option<String>,
}

impl ExactSampler<'_> {
    fn point(&mut self, x: f64, y: f64) -> Option<Vec<f64>> {
        let f = self.case.exact.as_ref()?;
        if self.failure.is_some() {
            return None;
        }
        match f(x, y, self.t) {
            Ok(v) => Some(v),
            Err(e) => {
                self.failure = Some(e.to_string());
                None
            }
        }
    }

    fn average(&mut self, xr: (f64, f64), yr: Option<(f64, f64)>) -> Option<Vec<f64>> {
        let f = self.case.exact.as_ref()?;
        if self.failure.is_some() {
            return None;
        }
        let res = match self.case.components() {
            1 => exact_average::<1>(f, self.t, xr, yr),
            3 => exact_average::<3>(f, self.t, xr, yr),
            _ => exact_average::<4>(f, self.t, xr, yr),
        };
        match res {
            Ok(v) => Some(v),
            Err(e) => {
                self.failure = Some(e);
                None
            }
        }
    }
}

fn exact_average<const M: usize>(
    f: &ExactFn,
    t: f64,
    xr: (f64, f64),
    yr: Option<(f64, f64)>,
) -> Result<Vec<f64>, String> {
    let err = RefCell::new(None);
    let eval = |x: f64, y: f64| match f(x, y, t) {
        Ok(v) => to_state::<M>(&v),
        Err(e) => {
            err.borrow_mut().get_or_insert(e.to_string());
            State([f64::NAN; M])
        }
    };
    let v = match yr {
        None => average_1d(|x| eval(x, 0.0), xr.0, xr.1, QUAD_PARTS),
        Some(yr) => average_2d(eval, xr, yr, QUAD_PARTS),
    };
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v.0.to_vec()),
    }
}

pub fn snapshot_1d<const M: usize>(case: &Case, grid: &Grid1d, u: &DofField1d<M>, t: f64, with_exact: bool) -> (Snapshot, Option<String>) {
    let mut ex = ExactSampler { case, t, failure: None };
    let mut records = Vec::with_capacity(2 * grid.n() + 1);
    for i in 0..grid.n() as isize {
        let exact = if with_exact { ex.average((grid.node(i), grid.node(i + 1)), None) } else { None };
        records.push(DofRecord {
            kind: "avg".into(),
            i,
            j: 0,
            x: grid.center(i),
            y: 0.0,
            ih: 2 * i + 1,
            jh: 0,
            active: true,
            values: u.avg.at(i).0.to_vec(),
            theta: None,
            exact,
        });
    }
    for k in 0..=grid.n() as isize {
        let exact = if with_exact { ex.point(grid.node(k), 0.0) } else { None };
        records.push(DofRecord {
            kind: "point".into(),
            i: k,
            j: 0,
            x: grid.node(k),
            y: 0.0,
            ih: 2 * k,
            jh: 0,
            active: true,
            values: u.pts.at(k).0.to_vec(),
            theta: None,
            exact,
        });
    }
    let snap = Snapshot {
        dim: 1,
        t,
        cells: [grid.n(), 1],
        dx: grid.dx(0),
        dy: 1.0,
        components: names(case),
        records,
    };
    (snap, ex.failure)
}

pub fn snapshot_2d<S: ConservationLaw<M>, const M: usize>(
    case: &Case,
    solver: &Solver2d<S, M>,
    u: &DofField2d<M>,
    t: f64,
    with_exact: bool,
) -> (Snapshot, Option<String>) {
    let grid = &solver.grid;
    let th = &solver.theta;
    let mut ex = ExactSampler { case, t, failure: None };
    let mut records = Vec::new();
    for fam in Family::ALL {
        let vals = u.family(fam);
        let act = solver.mask.family(fam);
        for j in 0..vals.n2() as isize {
            for i in 0..vals.n1() as isize {
                let (x, y) = dof_position(grid, fam, i, j);
                let (kind, ih, jh, theta) = match fam {
                    Family::Average => {
                        let m = th.x.at(i, j).min(th.x.at(i + 1, j)).min(th.y.at(i, j)).min(th.y.at(i, j + 1));
                        ("avg", 2 * i + 1, 2 * j + 1, m)
                    }
                    Family::FaceX => ("fx", 2 * i, 2 * j + 1, th.fx.at(i, j)),
                    Family::FaceY => ("fy", 2 * i + 1, 2 * j, th.fy.at(i, j)),
                    Family::Corner => ("corner", 2 * i, 2 * j, th.corner.at(i, j)),
                };
                let active = act.at(i, j);
                let exact = match (with_exact && active, fam) {
                    (false, _) => None,
                    (true, Family::Average) => {
                        ex.average((grid.x.node(i), grid.x.node(i + 1)), Some((grid.y.node(j), grid.y.node(j + 1))))
                    }
                    (true, _) => ex.point(x, y),
                };
                records.push(DofRecord {
                    kind: kind.into(),
                    i,
                    j,
                    x,
                    y,
                    ih,
                    jh,
                    active,
                    values: vals.at(i, j).0.to_vec(),
                    theta: Some(theta),
                    exact,
                });
            }
        }
    }
    let snap = Snapshot {
        dim: 2,
        t,
        cells: [grid.nx(), grid.ny()],
        dx: grid.x.dx(0),
        dy: grid.y.dx(0),
        components: names(case),
        records,
    };
    (snap, ex.failure)
}

/// Norms of the differences to the exact data stored in a snapshot.
pub fn error_norms(s: &Snapshot) -> Option<ErrorNorms> {
    let m = s.components.len();
    let mut n = ErrorNorms { l1: vec![0.0; m], linf_avg: vec![0.0; m], linf_points: vec![0.0; m] };
    let area = s.dx * s.dy;
    for r in s.records.iter().filter(|r| r.active) {
        let e = r.exact.as_ref()?;
        for c in 0..m {
            let d = (r.values[c] - e[c]).abs();
            if r.kind == "avg" {
                n.l1[c] += d * area;
                n.linf_avg[c] = n.linf_avg[c].max(d);
            } else {
                n.linf_points[c] = n.linf_points[c].max(d);
            }
        }
    }
    Some(n)
}

fn options(spec: &RunSpec) -> RunOptions {
    RunOptions { t_end: spec.t_end, max_steps: spec.max_steps, max_retries: spec.scheme.max_retries }
}

fn validate_spec(case: &Case, spec: &RunSpec) -> Result<(), Error> {
    if !(spec.t_end > 0.0 && spec.t_end.is_finite()) {
        return Err(Error::Config(format!("end time must be positive, got {}", spec.t_end)));
    }
    if case.dim == 1 && spec.cells[1] != 1 {
        return Err(Error::Config("1D cases take a single cell count".into()));
    }
    Ok(())
}

/// Marches `op`, keeping the accepted steps when the run fails.
fn drive<P: Stepper>(
    op: &mut P,
    u0: P::Field,
    spec: &RunSpec,
    hooks: &mut Option<Hooks<'_>>,
    snap: impl Fn(&P, &P::Field, f64) -> Snapshot,
) -> Result<(P::Field, f64, Vec<StepReport>, FieldSummary), RunFailure> {
    let mut steps = Vec::new();
    let res = integrate(op, u0, 0.0, options(spec), |rep, u, op| {
        steps.push(rep.clone());
        if let Some(h) = hooks.as_mut() {
            let s = (h.every > 0 && rep.step % h.every == 0).then(|| snap(op, u, rep.t));
            (h.on_step)(rep, s);
        }
    });
    match res {
        Ok(r) => Ok((r.u, r.t, r.steps, r.initial)),
        Err(error) => Err(RunFailure { error, steps }),
    }
}

fn finish(case: &Case, spec: &RunSpec, t: f64, steps: Vec<StepReport>, initial: FieldSummary, snap: (Snapshot, Option<String>), start: Instant) -> RunOutcome {
    let (snapshot, failure) = snap;
    let mut notes = Vec::new();
    if let Some(f) = failure {
        notes.push(format!("exact solution unavailable: {f}"));
    }
    let errors = if case.exact.is_some() { error_norms(&snapshot) } else { None };
    RunOutcome {
        case: case.name.to_string(),
        spec: spec.clone(),
        t,
        steps,
        initial,
        snapshot,
        errors,
        notes,
        wall_seconds: start.elapsed().as_secs_f64(),
    }
}

fn run1d<S: ConservationLaw<M>, const M: usize>(
    sys: S,
    case: &Case,
    spec: &RunSpec,
    mut hooks: Option<Hooks<'_>>,
) -> Result<RunOutcome, RunFailure> {
    let start = Instant::now();
    let grid = Grid1d::uniform(case.x.0, case.x.1, spec.cells[0])?;
    let u0 = init_1d(&sys, &grid, case)?;
    let mut solver = Solver1d::new(sys, grid.clone(), boundary(case), spec.scheme)?;
    let g = grid.clone();
    let (mut u, t, steps, initial) =
        drive(&mut solver, u0, spec, &mut hooks, |_, u, t| snapshot_1d(case, &g, u, t, false).0)?;
    fill_ghosts_1d(&solver.sys, &grid, &solver.bc, &mut u, t);
    let snap = snapshot_1d(case, &grid, &u, t, true);
    Ok(finish(case, spec, t, steps, initial, snap, start))
}

fn run2d<S: ConservationLaw<M>, const M: usize>(
    sys: S,
    case: &Case,
    spec: &RunSpec,
    mut hooks: Option<Hooks<'_>>,
) -> Result<RunOutcome, RunFailure> {
    let start = Instant::now();
    let grid = Grid2d::uniform(case.x, case.y, spec.cells[0], spec.cells[1])?;
    let u0 = init_2d(&sys, &grid, case)?;
    let obstacle = case.obstacle.map(|(x0, y_top)| StepObstacle {
        x0,
        y_top,
        fill: to_state((case.init)(case.x.0, case.y.0).as_slice()),
    });
    let mut solver = Solver2d::new(sys, grid, boundary(case), spec.scheme, obstacle)?;
    let (u, t, steps, initial) =
        drive(&mut solver, u0, spec, &mut hooks, |op, u, t| snapshot_2d(case, op, u, t, false).0)?;
    let snap = snapshot_2d(case, &solver, &u, t, true);
    Ok(finish(case, spec, t, steps, initial, snap, start))
}

/// Runs a case with the given mesh, end time and scheme.
pub fn run_with(case: &Case, spec: &RunSpec, hooks: Option<Hooks<'_>>) -> Result<RunOutcome, RunFailure> {
    validate_spec(case, spec)?;
    match (case.dim, case.model) {
        (1, Model::Advection(v)) => run1d(LinearAdvection { velocity: v }, case, spec, hooks),
        (1, Model::Burgers) => run1d(Burgers, case, spec, hooks),
        (1, Model::Euler { gamma }) => run1d(Euler::<3>::new(gamma)?, case, spec, hooks),
        (2, Model::Advection(v)) => run2d(LinearAdvection { velocity: v }, case, spec, hooks),
        (2, Model::Burgers) => run2d(Burgers, case, spec, hooks),
        (2, Model::Euler { gamma }) => run2d(Euler::<4>::new(gamma)?, case, spec, hooks),
        (d, _) => Err(Error::Config(format!("unsupported dimension {d}")).into()),
    }
}

pub fn run(case: &Case, spec: &RunSpec) -> Result<RunOutcome, RunFailure> {
    run_with(case, spec, None)
}

/// Fine-mesh solution used in place of an exact one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub format: u32,
    pub case: String,
    pub spec: RunSpec,
    /// Cell averages, x fastest.
    pub averages: Vec<Vec<f64>>,
}

pub const REFERENCE_FORMAT: u32 = 1;

/// Runs `spec` refined `factor` times with the LLF splitting and limiters.
pub fn compute_reference(case: &Case, spec: &RunSpec, factor: usize) -> Result<Reference, RunFailure> {
    let ny = if case.dim == 1 { 1 } else { spec.cells[1] * factor };
    let scheme = SchemeConfig {
        point_update: crate::splitting::PointUpdate::LlfFvs,
        cfl: case.cfl_for(crate::splitting::PointUpdate::LlfFvs),
        ..case.scheme
    };
    let fine = RunSpec { cells: [spec.cells[0] * factor, ny], scheme, ..spec.clone() };
    let out = run(case, &fine)?;
    Ok(Reference {
        format: REFERENCE_FORMAT,
        case: case.name.to_string(),
        spec: fine,
        averages: out.snapshot.averages().map(|r| r.values.clone()).collect(),
    })
}

/// `l1` distance between snapshot averages and reference averages restricted
/// to the snapshot mesh.
pub fn reference_errors(s: &Snapshot, r: &Reference) -> Result<Vec<f64>, Error> {
    let [nx, ny] = s.cells;
    let [fx, fy] = r.spec.cells;
    if fx % nx != 0 || fy % ny != 0 || (s.t - r.spec.t_end).abs() > 1e-12 * s.t.max(1.0) {
        return Err(Error::Config(format!(
            "reference {fx}x{fy} at t = {} does not match {nx}x{ny} at t = {}",
            r.spec.t_end, s.t
        )));
    }
    let (rx, ry) = (fx / nx, fy / ny);
    let m = s.components.len();
    let mut l1 = vec![0.0; m];
    for rec in s.averages().filter(|r| r.active) {
        let (i, j) = (rec.i as usize, rec.j as usize);
        for c in 0..m {
            let mut mean = 0.0;
            for b in 0..ry {
                for a in 0..rx {
                    mean += r.averages[(j * ry + b) * fx + i * rx + a][c];
                }
            }
            mean /= (rx * ry) as f64;
            l1[c] += (rec.values[c] - mean).abs() * s.dx * s.dy;
        }
    }
    Ok(l1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub cells: [usize; 2],
    pub l1: Vec<f64>,
    /// Observed order against the previous row.
    pub eoc: Vec<Option<f64>>,
    pub steps: usize,
    pub halvings: usize,
    pub wall_seconds: f64,
}

/// Runs every mesh of `meshes` (cells along x) on up to `threads` threads
/// and tabulates `l1` errors with observed orders.
pub fn convergence(
    case: &Case,
    base: &RunSpec,
    meshes: &[usize],
    threads: usize,
    reference: Option<&Reference>,
) -> Result<Vec<ConvergenceRow>, RunFailure> {
    if meshes.len() < 2 {
        return Err(Error::Config("a convergence study needs at least two meshes".into()).into());
    }
    if case.exact.is_none() && reference.is_none() {
        return Err(Error::Config(format!("{} has no exact solution; supply a reference", case.name)).into());
    }
    let results: Mutex<Vec<Option<Result<ConvergenceRow, RunFailure>>>> =
        Mutex::new((0..meshes.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let work = || loop {
        let k = next.fetch_add(1, Ordering::SeqCst);
        if k >= meshes.len() {
            break;
        }
        let spec = base.with_mesh(case, meshes[k]);
        let row = run(case, &spec).and_then(|o| {
            let l1 = match reference {
                Some(r) => reference_errors(&o.snapshot, r)?,
                None => {
                    o.errors.as_ref().map(|e| e.l1.clone()).ok_or_else(|| {
                        Error::Domain(format!("exact solution unavailable: {}", o.notes.join("; ")))
                    })?
                }
            };
            Ok(ConvergenceRow {
                cells: spec.cells,
                eoc: vec![None; l1.len()],
                l1,
                steps: o.steps.len(),
                halvings: o.total_halvings(),
                wall_seconds: o.wall_seconds,
            })
        });
        results.lock().expect("no poisoning")[k] = Some(row);
    };
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, meshes.len()) {
            s.spawn(work);
        }
    });
    let mut rows = Vec::new();
    for r in results.into_inner().expect("no poisoning") {
        rows.push(r.expect("every mesh visited")?);
    }
    for k in 1..rows.len() {
        let ratio = (rows[k].cells[0] as f64 / rows[k - 1].cells[0] as f64).ln();
        let eoc = rows[k - 1].l1.iter().zip(&rows[k].l1).map(|(a, b)| Some((a / b).ln() / ratio)).collect();
        rows[k].eoc = eoc;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{catalog, find};

    #[test]
    fn every_case_runs_ten_steps() {
        for case in catalog() {
            let mut spec = RunSpec::defaults(&case, false);
            spec.max_steps = Some(10);
            let out = run(&case, &spec).unwrap_or_else(|e| panic!("{}: {e}", case.name));
            assert_eq!(out.steps.len(), 10, "{}", case.name);
        }
    }

    #[test]
    fn projected_exact_data_has_tiny_error() {
        let case = find("vortex").unwrap();
        let spec = RunSpec { cells: [64, 64], t_end: 1e-300, max_steps: Some(0), ..RunSpec::defaults(&case, false) };
        let out = run(&case, &spec).unwrap();
        let e = out.errors.unwrap();
        assert!(e.l1.iter().all(|&v| v < 1e-10), "{e:?}");
    }

    #[test]
    fn constant_state_has_zero_error() {
        let mut case = find("advection1d").unwrap();
        case.init = Arc::new(|_, _| vec![0.25]);
        case.exact = Some(Arc::new(|_, _, _| Ok(vec![0.25])));
        let spec = RunSpec { cells: [16, 1], t_end: 0.5, ..RunSpec::defaults(&case, false) };
        let e = run(&case, &spec).unwrap().errors.unwrap();
        assert_eq!(e.l1, vec![0.0]);
        assert_eq!(e.linf_points, vec![0.0]);
    }

    #[test]
    fn snapshot_counts_and_half_grid_indices() {
        let case = find("sod1d").unwrap();
        let spec = RunSpec { max_steps: Some(2), ..RunSpec::defaults(&case, false) };
        let s = run(&case, &spec).unwrap().snapshot;
        assert_eq!(s.of_kind("avg").count(), 100);
        assert_eq!(s.of_kind("point").count(), 101);
        let case = find("sod2d").unwrap();
        let spec = RunSpec { max_steps: Some(2), ..RunSpec::defaults(&case, false) };
        let s = run(&case, &spec).unwrap().snapshot;
        assert_eq!(s.records.len(), 200 + 202 + 300 + 303);
        let c = s.of_kind("corner").find(|r| r.i == 3 && r.j == 1).unwrap();
        assert_eq!((c.ih, c.jh), (6, 2));
        let a = s.averages().find(|r| r.i == 3 && r.j == 1).unwrap();
        assert_eq!((a.ih, a.jh), (7, 3));
    }

    #[test]
    fn sedov_energy_sits_in_the_central_cell() {
        let case = find("sedov").unwrap();
        let sys = Euler::<4>::new(1.4).unwrap();
        let g = Grid2d::uniform(case.x, case.y, 11, 11).unwrap();
        let d = init_2d(&sys, &g, &case).unwrap();
        let e = 0.979264 / g.cell_area(5, 5);
        assert_eq!(d.avg.at(5, 5)[3], e);
        assert_eq!(d.fx.at(6, 5)[3], e);
        assert_eq!(d.fy.at(5, 5)[3], e);
        assert!((d.avg.at(4, 5)[3] - 1e-12).abs() < 1e-26);
        let g = Grid2d::uniform(case.x, case.y, 10, 10).unwrap();
        assert!(init_2d(&sys, &g, &case).is_err());
    }

    #[test]
    fn periodic_duplicates_agree_and_totals_hold() {
        // the vortex data is not exactly periodic at the domain edge
        let case = find("vortex").unwrap();
        let sys = Euler::<4>::new(1.4).unwrap();
        let g = Grid2d::uniform(case.x, case.y, 16, 16).unwrap();
        let d = init_2d(&sys, &g, &case).unwrap();
        for k in 0..=16 {
            assert_eq!(d.fx.at(16, k.min(15)), d.fx.at(0, k.min(15)));
            assert_eq!(d.fy.at(k.min(15), 16), d.fy.at(k.min(15), 0));
            assert_eq!(d.corner.at(k, 16), d.corner.at(k, 0));
            assert_eq!(d.corner.at(16, k), d.corner.at(0, k));
        }
        let spec = RunSpec { cells: [16, 16], max_steps: Some(20), ..RunSpec::defaults(&case, false) };
        let o = run(&case, &spec).unwrap();
        for (a, b) in o.initial.totals.iter().zip(&o.final_summary().totals) {
            assert!((a - b).abs() <= 1e-13 * a.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn advection_convergence_is_third_order() {
        let case = find("advection1d").unwrap();
        let mut spec = RunSpec::defaults(&case, false);
        spec.scheme = SchemeConfig::unlimited(spec.scheme.point_update, spec.scheme.cfl);
        let rows = convergence(&case, &spec, &[20, 40, 80], 3, None).unwrap();
        let eoc = rows[2].eoc[0].unwrap();
        assert!(eoc > 2.8, "{rows:?}");
    }

    #[test]
    fn reference_restriction_of_itself_is_exact() {
        let case = find("burgers1d").unwrap();
        let spec = RunSpec { cells: [20, 1], t_end: 0.05, ..RunSpec::defaults(&case, false) };
        let out = run(&case, &spec).unwrap();
        let r = Reference {
            format: REFERENCE_FORMAT,
            case: case.name.into(),
            spec: spec.clone(),
            averages: out.snapshot.averages().map(|r| r.values.clone()).collect(),
        };
        assert_eq!(reference_errors(&out.snapshot, &r).unwrap(), vec![0.0]);
    }

    #[test]
    fn unlimited_double_rarefaction_fails_with_negative_state() {
        let case = find("double_rarefaction").unwrap();
        let mut spec = RunSpec::defaults(&case, false);
        spec.scheme = SchemeConfig::unlimited(spec.scheme.point_update, spec.scheme.cfl);
        let f = run(&case, &spec).unwrap_err();
        assert!(matches!(f.error, Error::NegativeState { .. }), "{f}");
        assert_eq!(f.steps.len(), f.steps.last().map_or(0, |s| s.step));
    }
}

//! Catalog of test problems: domains, initial and boundary data, end times,
//! default scheme settings and reference solutions.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::bc::CoordPredicate;
use crate::exact::{gamma3_exact, gamma3_rho0, vortex_state, wrap, ExactRiemann};
use crate::scheme::{LimiterMode, SchemeConfig};
use crate::splitting::PointUpdate;
use crate::systems::SystemKind;
use crate::Error;

/// Governing equations of a case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    Advection([f64; 2]),
    Burgers,
    Euler { gamma: f64 },
}

impl Model {
    pub fn components(&self, dim: usize) -> usize {
        match self {
            Model::Euler { .. } => dim + 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> SystemKind {
        match self {
            Model::Euler { gamma } => SystemKind::Euler { gamma: *gamma },
            _ => SystemKind::Scalar,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Model::Advection(v) => format!("advection a=({}, {})", v[0], v[1]),
            Model::Burgers => "burgers".into(),
            Model::Euler { gamma } => format!("euler gamma={gamma}"),
        }
    }
}

/// Conserved state at `(x, y)`; 1D cases ignore `y`.
pub type InitFn = Arc<dyn Fn(f64, f64) -> Vec<f64> + Send + Sync>;
/// Conserved reference state at `(x, y, t)`.
pub type ExactFn = Arc<dyn Fn(f64, f64, f64) -> Result<Vec<f64>, Error> + Send + Sync>;

/// Boundary condition of one side before it is bound to a system.
#[derive(Clone)]
pub enum BcSpec {
    Periodic,
    Outflow,
    Reflective,
    Inflow(Vec<f64>),
    Exact(ExactFn),
    Masked {
        inside: CoordPredicate,
        inner: Box<BcSpec>,
        outer: Box<BcSpec>,
    },
}

impl BcSpec {
    pub fn label(&self) -> String {
        match self {
            BcSpec::Periodic => "periodic".into(),
            BcSpec::Outflow => "outflow".into(),
            BcSpec::Reflective => "reflective".into(),
            BcSpec::Inflow(s) => format!("inflow {s:?}"),
            BcSpec::Exact(_) => "exact".into(),
            BcSpec::Masked { inner, outer, .. } => format!("{} | {}", inner.label(), outer.label()),
        }
    }
}

#[derive(Clone)]
pub struct Case {
    pub name: &'static str,
    pub summary: &'static str,
    pub dim: usize,
    pub model: Model,
    pub x: (f64, f64),
    pub y: (f64, f64),
    /// Default (desk-scale) mesh; `[n, 1]` in 1D.
    pub cells: [usize; 2],
    pub t_end: f64,
    /// Publication-scale mesh and end time, used with `--full`.
    pub full_cells: [usize; 2],
    pub full_t_end: f64,
    pub scheme: SchemeConfig,
    /// CFL number used with the van Leer-Haenel splitting.
    pub vh_cfl: Option<f64>,
    pub init: InitFn,
    pub exact: Option<ExactFn>,
    /// `[x_lo, x_hi, y_lo, y_hi]`.
    pub bc: [BcSpec; 4],
    /// Step obstacle `(x0, y_top)`.
    pub obstacle: Option<(f64, f64)>,
    /// Total energy deposited in the central cell and its face values.
    pub point_energy: Option<f64>,
    /// Meshes of the default convergence study.
    pub convergence: Vec<usize>,
}

impl Case {
    /// Default CFL number for a point update.
    pub fn cfl_for(&self, pu: PointUpdate) -> f64 {
        match (pu, self.vh_cfl) {
            (PointUpdate::VhFvs, Some(c)) => c,
            _ => self.scheme.cfl,
        }
    }

    pub fn components(&self) -> usize {
        self.model.components(self.dim)
    }

    pub fn component_names(&self) -> Vec<&'static str> {
        match (self.model, self.dim) {
            (Model::Euler { .. }, 1) => vec!["rho", "rho_u", "E"],
            (Model::Euler { .. }, _) => vec!["rho", "rho_u", "rho_v", "E"],
            _ => vec!["u"],
        }
    }
}

/// Conserved Euler state in 1D (`v` dropped) or 2D.
pub fn euler_state(dim: usize, gamma: f64, rho: f64, u: f64, v: f64, p: f64) -> Vec<f64> {
    let e = p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v);
    if dim == 1 {
        vec![rho, rho * u, e]
    } else {
        vec![rho, rho * u, rho * v, e]
    }
}

fn scheme(cfl: f64, kappa: f64) -> SchemeConfig {
    SchemeConfig { cfl, kappa, ..SchemeConfig::default() }
}

fn riemann_case(
    name: &'static str,
    summary: &'static str,
    dim: usize,
    gamma: f64,
    left: (f64, f64, f64),
    right: (f64, f64, f64),
) -> Result<(InitFn, ExactFn), Error> {
    let rs = ExactRiemann::new(gamma, left, right)?;
    let _ = (name, summary);
    let init: InitFn = Arc::new(move |x, _| {
        let (r, u, p) = if x < 0.5 { left } else { right };
        euler_state(dim, gamma, r, u, 0.0, p)
    });
    let exact: ExactFn = Arc::new(move |x, _, t| {
        let (r, u, p) = if t > 0.0 {
            rs.sample((x - 0.5) / t)
        } else if x < 0.5 {
            left
        } else {
            right
        };
        Ok(euler_state(dim, gamma, r, u, 0.0, p))
    });
    Ok((init, exact))
}

fn sod1d() -> Case {
    let (init, exact) =
        riemann_case("sod1d", "", 1, 1.4, (1.0, 0.0, 1.0), (0.125, 0.0, 0.1)).expect("valid states");
    Case {
        name: "sod1d",
        summary: "Sod shock tube on [0,1]",
        dim: 1,
        model: Model::Euler { gamma: 1.4 },
        x: (0.0, 1.0),
        y: (0.0, 1.0),
        cells: [100, 1],
        t_end: 0.2,
        full_cells: [400, 1],
        full_t_end: 0.2,
        scheme: scheme(0.4, 0.0),
        vh_cfl: Some(0.1),
        init,
        exact: Some(exact),
        bc: [BcSpec::Outflow, BcSpec::Outflow, BcSpec::Periodic, BcSpec::Periodic],
        obstacle: None,
        point_energy: None,
        convergence: vec![100, 200, 400],
    }
}

fn leblanc() -> Case {
    let (init, exact) =
        riemann_case("leblanc", "", 1, 1.4, (2.0, 0.0, 1e9), (1e-3, 0.0, 1.0)).expect("valid states");
    Case {
        name: "leblanc",
        summary: "LeBlanc shock tube, pressure ratio 1e9",
        dim: 1,
        model: Model::Euler { gamma: 1.4 },
        x: (0.0, 1.0),
        y: (0.0, 1.0),
        cells: [600, 1],
        t_end: 5e-6,
        full_cells: [6000, 1],
        full_t_end: 5e-6,
        scheme: scheme(0.4, 10.0),
        vh_cfl: Some(0.1),
        init,
        exact: Some(exact),
        bc: [BcSpec::Outflow, BcSpec::Outflow, BcSpec::Periodic, BcSpec::Periodic],
        obstacle: None,
        point_energy: None,
        convergence: vec![600, 1200, 2400],
    }
}

fn double_rarefaction() -> Case {
    let (init, exact) =
        riemann_case("", "", 1, 1.4, (7.0, -1.0, 0.2), (7.0, 1.0, 0.2)).expect("valid states");
    Case {
        name: "double_rarefaction",
        summary: "Two rarefactions leaving a near-vacuum",
        dim: 1,
        model: Model::Euler { gamma: 1.4 },
        x: (0.0, 1.0),
        y: (0.0, 1.0),
        cells: [400, 1],
        t_end: 0.3,
        full_cells: [400, 1],
        full_t_end: 0.3,
        scheme: scheme(0.4, 0.0),
        vh_cfl: Some(0.1),
        init,
        exact: Some(exact),
        bc: [BcSpec::Outflow, BcSpec::Outflow, BcSpec::Periodic, BcSpec::Periodic],
        obstacle: None,
        point_energy: None,
        convergence: vec![100, 200, 400],
    }
}

fn blast_wave() -> Case {
    let g = 1.4;
    Case {
        name: "blast_wave",
        summary: "Interaction of two blast waves between reflective walls",
        dim: 1,
        model: Model::Euler { gamma: g },
        x: (0.0, 1.0),
        y: (0.0, 1.0),
        cells: [800, 1],
        t_end: 0.038,
        full_cells: [800, 1],
        full_t_end: 0.038,
        scheme: scheme(0.4, 1.0),
        vh_cfl: Some(0.1),
        init: Arc::new(move |x, _| {
            let p = if x < 0.1 {
                1000.0
            } else if x < 0.9 {
                0.01
            } else {
                100.0
            };
            euler_state(1, g, 1.0, 0.0, 0.0, p)
        }),
        exact: None,
        bc: [BcSpec::Reflective, BcSpec::Reflective, BcSpec::Periodic, BcSpec::Periodic],
        obstacle: None,
        point_energy: None,
        convergence: vec![],
    }
}

fn burgers1d() -> Case {
    let u0 = |x: f64| if x.abs() < 0.2 { 2.0 } else { -1.0 };
    Case {
        name: "burgers1d",
        summary: "Self-steepening shock of Burgers' equation from a square wave",
        dim: 1,
        model: Model::Burgers,
        x: (-1.0, 1.0),
        y: (0.0, 1.0),
        cells: [200, 1],
        t_end: 0.5,
        full_cells: [200, 1],
        full_t_end: 0.5,
        scheme: scheme(0.2, 0.0),
        vh_cfl: None,
        init: Arc::new(move |x, _| vec![u0(x)]),
        exact: None,
        bc: [BcSpec::Periodic, BcSpec::Periodic, BcSpec::Periodic, BcSpec::Periodic],
        obstacle: None,
        point_energy: None,
        convergence: vec![],
    }
}

fn advection1d() -> Case {
    Case {
        name: "advection1d",
        summary: "Smooth sine wave advected over one period",
        dim: 1,
        model: Model::Advection([1.0, 0.0]),
        x: (-1.0, 1.0),
        y: (0.0, 1.0),
        cells: [100, 1],
        t_end: 2.0,
        full_cells: [400, 1],
        full_t_end: 2.0,
        scheme: scheme(0.4, 0.0),
        vh_cfl: None,
        init: Arc::new(|x, _| vec![(PI * x).sin()]),
        exact: Some(Arc::new(|x, _, t| Ok(vec![(PI * (x - t)).sin()]))),
        bc: [BcSpec::Periodic, BcSpec::Periodic, BcSpec::Periodic, BcSpec::Periodic],
        obstacle: None,
        point_energy: None,
        convergence: vec![20, 40, 80, 160],
    }
}

fn gamma3_accuracy() -> Case {
    let (g, zeta) = (3.0, 1.0 - 1e-7);
    Case {
        name: "gamma3_accuracy",
        summary: "Smooth gamma = 3 flow with near-vacuum density 1e-7",
        dim: 1,
        model: Model::Euler { gamma: g },
        x: (-1.0, 1.0),
        y: (0.0, 1.0),
        cells: [80, 1],
        t_end: 0.1,
        full_cells: [320, 1],
        full_t_end: 0.1,
        scheme: scheme(0.18, 0.0),
        vh_cfl: Some(0.18),
        init: Arc::new(move |x, _| {
            let r = gamma3_rho0(zeta, x);
            euler_state(1, g, r, 0.0, 0.0, r.powi(3))
        }),
        exact: Some(Arc::new(move |x, _, t| {
            let (r, u, p) = gamma3_exact(zeta, x, t)?;
            Ok(euler_state(1, g, r, u, 0.0, p))
        })),
        bc: [BcSpec::Periodic, BcSpec::Periodic, BcSpec::Periodic, BcSpec::Periodic],
        obstacle: None,
        point_energy: None,
        convergence: vec![40, 80, 160, 320],
    }
}

fn advection2d() -> Case {
    let u0 = |x: f64, y: f64| {
        let r = ((x - 0.3).powi(2) + (y - 0.3).powi(2)).sqrt();
        if r < 0.2 {
            1.0 - (5.0 * r).abs()
        } else if (x - 0.7).abs().max((y - 0.7).abs()) < 0.2 {
            1.0
        } else {
            0.0
        }
    };
    Case {
        name: "advection2d",
        summary: "Cone and square advected diagonally; maximum principle test",
        dim: 2,
        model: Model::Advection([1.0, 1.0]),
        x: (0.0, 1.0),
        y: (0.0, 1.0),
        cells: [100, 100],
        t_end: 2.0,
        full_cells: [100, 100],
        full_t_end: 2.0,
        scheme: scheme(0.4, 0.0),
        vh_cfl: None,
        init: Arc::new(move |x, y| vec![u0(x, y)]),
        exact: Some(Arc::new(move |x, y, t| Ok(vec![u0(wrap(x - t, 0.0, 1.0), wrap(y - t, 0.0, 1.0))]))),
        bc: [BcSpec::Periodic, BcSpec::Periodic, BcSpec::Periodic, BcSpec::Periodic],
        obstacle: None,
        point_energy: None,
        convergence: vec![],
    }
}

fn burgers2d() -> Case {
    Case {
        name: "burgers2d",
        summary: "2D Burgers' equation steepening into shocks",
        dim: 2,
        model: Model::Burgers,
        x: (0.0, 1.0),
        y: (0.0, 1.0),
        cells: [100, 100],
        t_end: 0.3,
        full_cells: [100, 100],
        full_t_end: 0.3,
        scheme: scheme(0.2, 0.0),
        vh_cfl: None,
        init: Arc::new(|x, y| vec![0.5 + (2.0 * PI * (x + y)).sin()]),
        exact: None,
        bc: [BcSpec::Periodic, BcSpec::Periodic, BcSpec::Periodic, BcSpec::Periodic],
        obstacle: None,
        point_energy: None,
        convergence: vec![],
    }
}

fn vortex() -> Case {
    let (g, eps) = (1.4, 10.0828);
    let state = move |x: f64, y: f64| {
        let (r, v, p) = vortex_state(g, eps, x, y);
        euler_state(2, g, r, v[0], v[1], p)
    };
    Case {
        name: "vortex",
        summary: "Isentropic vortex with near-vacuum core",
        dim: 2,
        model: Model::Euler { gamma: g },
        x: (-5.0, 5.0),
        y: (-5.0, 5.0),
        cells: [64, 64],
        t_end: 1.0,
        full_cells: [256, 256],
        full_t_end: 1.0,
        scheme: scheme(0.2, 0.0),
        vh_cfl: None,
        init: Arc::new(state),
        exact: Some(Arc::new(move |x, y, t| Ok(state(wrap(x - t, -5.0, 10.0), wrap(y - t, -5.0, 10.0))))),
        bc: [BcSpec::Periodic, BcSpec::Periodic, BcSpec::Periodic, BcSpec::Periodic],
        obstacle: None,
        point_energy: None,
        convergence: vec![32, 64, 128],
    }
}

fn sod2d() -> Case {
    let (init, exact) =
        riemann_case("", "", 2, 1.4, (1.0, 0.0, 1.0), (0.125, 0.0, 0.1)).expect("valid states");
    Case {
        name: "sod2d",
        summary: "Sod shock tube along x on a 100x2 mesh",
        dim: 2,
        model: Model::Euler { gamma: 1.4 },
        x: (0.0, 1.0),
        y: (0.0, 1.0),
        cells: [100, 2],
        t_end: 0.2,
        full_cells: [100, 2],
        full_t_end: 0.2,
        scheme: scheme(0.2, 1.0),
        vh_cfl: Some(0.1),
        init,
        exact: Some(exact),
        bc: [BcSpec::Outflow, BcSpec::Outflow, BcSpec::Periodic, BcSpec::Periodic],
        obstacle: None,
        point_energy: None,
        convergence: vec![],
    }
}

fn sedov() -> Case {
    let g = 1.4;
    Case {
        name: "sedov",
        summary: "Sedov blast wave from a point energy release",
        dim: 2,
        model: Model::Euler { gamma: g },
        x: (-1.1, 1.1),
        y: (-1.1, 1.1),
        cells: [101, 101],
        t_end: 1.0,
        full_cells: [201, 201],
        full_t_end: 1.0,
        scheme: scheme(0.2, 0.5),
        vh_cfl: Some(0.1),
        init: Arc::new(move |_, _| vec![1.0, 0.0, 0.0, 1e-12]),
        exact: None,
        bc: [BcSpec::Outflow, BcSpec::Outflow, BcSpec::Outflow, BcSpec::Outflow],
        obstacle: None,
        point_energy: Some(0.979264),
        convergence: vec![],
    }
}

fn ffs() -> Case {
    let g = 1.4;
    let inflow = euler_state(2, g, 1.4, 3.0, 0.0, 1.0);
    let fill = inflow.clone();
    Case {
        name: "ffs",
        summary: "Mach 3 wind tunnel with a forward-facing step",
        dim: 2,
        model: Model::Euler { gamma: g },
        x: (0.0, 3.0),
        y: (0.0, 1.0),
        cells: [120, 40],
        t_end: 1.0,
        full_cells: [480, 160],
        full_t_end: 4.0,
        scheme: scheme(0.2, 1.0),
        vh_cfl: Some(0.1),
        init: Arc::new(move |_, _| fill.clone()),
        exact: None,
        bc: [BcSpec::Inflow(inflow), BcSpec::Outflow, BcSpec::Reflective, BcSpec::Reflective],
        obstacle: Some((0.6, 0.2)),
        point_energy: None,
        convergence: vec![],
    }
}

fn jet(name: &'static str, summary: &'static str, speed: f64, len: f64, cells: [usize; 2], t: (f64, f64)) -> Case {
    let g = 5.0 / 3.0;
    let ambient = euler_state(2, g, 0.5, 0.0, 0.0, 0.4127);
    let beam = euler_state(2, g, 5.0, speed, 0.0, 0.4127);
    let a = ambient.clone();
    Case {
        name,
        summary,
        dim: 2,
        model: Model::Euler { gamma: g },
        x: (0.0, len),
        y: (-0.25 * len, 0.25 * len),
        cells,
        t_end: t.0,
        full_cells: [400, 200],
        full_t_end: t.1,
        scheme: scheme(0.2, 1.0),
        vh_cfl: Some(0.1),
        init: Arc::new(move |_, _| a.clone()),
        exact: None,
        bc: [
            BcSpec::Masked {
                inside: Arc::new(|y: f64| y.abs() < 0.05),
                inner: Box::new(BcSpec::Inflow(beam)),
                outer: Box::new(BcSpec::Outflow),
            },
            BcSpec::Outflow,
            BcSpec::Outflow,
            BcSpec::Outflow,
        ],
        obstacle: None,
        point_energy: None,
        convergence: vec![],
    }
}

fn dmr() -> Case {
    let g = 1.4;
    let (s, c) = (PI / 6.0).sin_cos();
    let post = euler_state(2, g, 8.0, 8.25 * c, -8.25 * s, 116.5);
    let pre = euler_state(2, g, 1.4, 0.0, 0.0, 1.0);
    let shock: ExactFn = Arc::new(move |x, y, t| {
        Ok(if x < 1.0 / 6.0 + (y + 20.0 * t) / 3f64.sqrt() { post.clone() } else { pre.clone() })
    });
    let s0 = shock.clone();
    Case {
        name: "dmr",
        summary: "Double Mach reflection of a Mach 10 shock",
        dim: 2,
        model: Model::Euler { gamma: g },
        x: (0.0, 3.0),
        y: (0.0, 1.0),
        cells: [240, 80],
        t_end: 0.05,
        full_cells: [720, 240],
        full_t_end: 0.2,
        scheme: scheme(0.2, 1.0),
        vh_cfl: Some(0.1),
        init: Arc::new(move |x, y| s0(x, y, 0.0).expect("closed form")),
        exact: None,
        bc: [
            BcSpec::Exact(shock.clone()),
            BcSpec::Outflow,
            BcSpec::Masked {
                inside: Arc::new(|x: f64| x < 1.0 / 6.0),
                inner: Box::new(BcSpec::Exact(shock.clone())),
                outer: Box::new(BcSpec::Reflective),
            },
            BcSpec::Exact(shock),
        ],
        obstacle: None,
        point_energy: None,
        convergence: vec![],
    }
}

/// Every case, in presentation order.
pub fn catalog() -> Vec<Case> {
    vec![
        advection1d(),
        burgers1d(),
        sod1d(),
        leblanc(),
        blast_wave(),
        double_rarefaction(),
        gamma3_accuracy(),
        advection2d(),
        burgers2d(),
        vortex(),
        sod2d(),
        sedov(),
        ffs(),
        jet("jet80", "Mach 80 astrophysical jet", 30.0, 2.0, [100, 50], (0.02, 0.07)),
        jet("jet2000", "Mach 2000 astrophysical jet", 800.0, 1.0, [100, 50], (2e-4, 1e-3)),
        dmr(),
    ]
}

pub fn find(name: &str) -> Result<Case, Error> {
    catalog()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| {
            let names: Vec<_> = catalog().iter().map(|c| c.name).collect();
            Error::Config(format!("unknown case '{name}'; available: {}", names.join(", ")))
        })
}

/// Global or local maximum-principle limiting of both DoF families.
pub fn mp_scheme(base: SchemeConfig, avg: LimiterMode, pts: LimiterMode) -> SchemeConfig {
    SchemeConfig { average_limiter: avg, point_limiter: pts, ..base }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_findable() {
        let cat = catalog();
        for c in &cat {
            assert_eq!(cat.iter().filter(|d| d.name == c.name).count(), 1);
            assert_eq!(find(c.name).unwrap().name, c.name);
        }
        assert!(find("nope").is_err());
    }

    #[test]
    fn initial_data_has_the_right_length() {
        for c in catalog() {
            let v = (c.init)(0.5 * (c.x.0 + c.x.1), 0.5 * (c.y.0 + c.y.1));
            assert_eq!(v.len(), c.components(), "{}", c.name);
            if let Some(e) = &c.exact {
                assert_eq!(e(c.x.0, c.y.0, 0.0).unwrap().len(), c.components());
            }
        }
    }

    #[test]
    fn sod_states_and_dmr_shock_line() {
        let s = sod2d();
        assert_eq!((s.init)(0.2, 0.5), euler_state(2, 1.4, 1.0, 0.0, 0.0, 1.0));
        let d = dmr();
        let pre = euler_state(2, 1.4, 1.4, 0.0, 0.0, 1.0);
        assert_eq!((d.init)(1.0, 0.0), pre);
        assert_ne!((d.init)(0.1, 0.0), pre);
    }

    #[test]
    fn exact_solutions_start_from_initial_data() {
        for c in catalog() {
            if let Some(e) = &c.exact {
                for (a, b) in [(0.13, 0.37), (0.71, 0.8)] {
                    let (x, y) = (c.x.0 + a * (c.x.1 - c.x.0), c.y.0 + b * (c.y.1 - c.y.0));
                    let a = (c.init)(x, y);
                    let b = e(x, y, 0.0).unwrap();
                    for (p, q) in a.iter().zip(&b) {
                        assert!((p - q).abs() <= 1e-14 * p.abs().max(1.0), "{}", c.name);
                    }
                }
            }
        }
    }
}

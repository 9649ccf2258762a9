//! Boundary conditions: ghost DoF filling, reflective walls and the
//! forward-facing step obstacle.

use std::fmt;
use std::sync::Arc;

use crate::meshstate::quadrature::{average_1d, average_2d};
use crate::meshstate::{dof_position, DofField1d, DofField2d, Family, Field2, Grid1d, Grid2d, State, GHOST};
use crate::systems::{Axis, ConservationLaw};
use crate::Error;

/// Time-dependent state `f(x, y, t)`.
pub type PointFn<const M: usize> = Arc<dyn Fn(f64, f64, f64) -> State<M> + Send + Sync>;
/// Predicate on the coordinate along a boundary side.
pub type CoordPredicate = Arc<dyn Fn(f64) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum SideBc<const M: usize> {
    Periodic,
    /// Zeroth-order extrapolation.
    Outflow,
    /// Slip wall.
    Reflective,
    /// Fixed state.
    Inflow(State<M>),
    /// Prescribed time-dependent solution.
    Exact(PointFn<M>),
    /// `inner` where the predicate holds on the tangential coordinate,
    /// `outer` elsewhere.
    Masked {
        inside: CoordPredicate,
        inner: Box<SideBc<M>>,
        outer: Box<SideBc<M>>,
    },
}

impl<const M: usize> fmt::Debug for SideBc<M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SideBc::Periodic => write!(f, "periodic"),
            SideBc::Outflow => write!(f, "outflow"),
            SideBc::Reflective => write!(f, "reflective"),
            SideBc::Inflow(s) => write!(f, "inflow{:?}", s.0),
            SideBc::Exact(_) => write!(f, "exact"),
            SideBc::Masked { inner, outer, .. } => write!(f, "masked({inner:?} | {outer:?})"),
        }
    }
}

impl<const M: usize> SideBc<M> {
    /// The condition in force at tangential coordinate `s`.
    pub fn resolve(&self, s: f64) -> &SideBc<M> {
        match self {
            SideBc::Masked { inside, inner, outer } => {
                if inside(s) {
                    inner.resolve(s)
                } else {
                    outer.resolve(s)
                }
            }
            leaf => leaf,
        }
    }

    fn contains_periodic(&self) -> bool {
        match self {
            SideBc::Periodic => true,
            SideBc::Masked { inner, outer, .. } => {
                inner.contains_periodic() || outer.contains_periodic()
            }
            _ => false,
        }
    }

    pub fn label(&self) -> String {
        format!("{self:?}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    XLo,
    XHi,
    YLo,
    YHi,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::XLo, Side::XHi, Side::YLo, Side::YHi];

    pub fn axis(self) -> Axis {
        match self {
            Side::XLo | Side::XHi => Axis::X,
            Side::YLo | Side::YHi => Axis::Y,
        }
    }

    pub fn is_lo(self) -> bool {
        matches!(self, Side::XLo | Side::YLo)
    }
}

#[derive(Clone, Debug)]
pub struct Boundary<const M: usize> {
    pub x_lo: SideBc<M>,
    pub x_hi: SideBc<M>,
    pub y_lo: SideBc<M>,
    pub y_hi: SideBc<M>,
}

impl<const M: usize> Boundary<M> {
    pub fn all(bc: SideBc<M>) -> Self {
        Boundary {
            x_lo: bc.clone(),
            x_hi: bc.clone(),
            y_lo: bc.clone(),
            y_hi: bc,
        }
    }

    pub fn periodic() -> Self {
        Self::all(SideBc::Periodic)
    }

    pub fn side(&self, s: Side) -> &SideBc<M> {
        match s {
            Side::XLo => &self.x_lo,
            Side::XHi => &self.x_hi,
            Side::YLo => &self.y_lo,
            Side::YHi => &self.y_hi,
        }
    }

    /// Periodic sides must come in pairs and cannot be mixed with others.
    pub fn validate(&self, dim: usize) -> Result<(), Error> {
        let pairs: &[(Side, Side)] = if dim == 1 {
            &[(Side::XLo, Side::XHi)]
        } else {
            &[(Side::XLo, Side::XHi), (Side::YLo, Side::YHi)]
        };
        for &(a, b) in pairs {
            let (sa, sb) = (self.side(a), self.side(b));
            let pa = matches!(sa, SideBc::Periodic);
            let pb = matches!(sb, SideBc::Periodic);
            if pa != pb {
                return Err(Error::Config(format!(
                    "periodic boundary on {a:?} must be paired with {b:?}"
                )));
            }
            for s in [sa, sb] {
                if !matches!(s, SideBc::Periodic) && s.contains_periodic() {
                    return Err(Error::Config(
                        "periodic conditions cannot be masked".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Whether side `s` is a slip wall at tangential coordinate `coord`.
    #[inline]
    pub fn is_wall(&self, s: Side, coord: f64) -> bool {
        matches!(self.side(s).resolve(coord), SideBc::Reflective)
    }

    pub fn has_walls(&self) -> bool {
        fn walls<const M: usize>(b: &SideBc<M>) -> bool {
            match b {
                SideBc::Reflective => true,
                SideBc::Masked { inner, outer, .. } => walls(inner) || walls(outer),
                _ => false,
            }
        }
        Side::ALL.iter().any(|&s| walls(self.side(s)))
    }
}

/// Index layout of a DoF family along the normal of a side.
#[derive(Clone, Copy, PartialEq)]
enum Layout {
    /// Indexed like cells: interior `0..n`.
    Cell,
    /// Indexed like nodes: interior `0..=n`.
    Node,
}

enum Source {
    Copy(isize),
    Mirror(isize),
}

/// Destination and source indices along the normal for ghost layer `g`.
fn ghost_indices<const M: usize>(bc: &SideBc<M>, layout: Layout, lo: bool, n: isize, g: isize) -> (isize, Option<Source>) {
    match (layout, lo) {
        (Layout::Cell, true) => (
            -g,
            match bc {
                SideBc::Periodic => Some(Source::Copy(n - g)),
                SideBc::Outflow => Some(Source::Copy(0)),
                SideBc::Reflective => Some(Source::Mirror(g - 1)),
                _ => None,
            },
        ),
        (Layout::Cell, false) => (
            n - 1 + g,
            match bc {
                SideBc::Periodic => Some(Source::Copy(g - 1)),
                SideBc::Outflow => Some(Source::Copy(n - 1)),
                SideBc::Reflective => Some(Source::Mirror(n - g)),
                _ => None,
            },
        ),
        (Layout::Node, true) => (
            -g,
            match bc {
                SideBc::Periodic => Some(Source::Copy(n - g)),
                SideBc::Outflow => Some(Source::Copy(0)),
                SideBc::Reflective => Some(Source::Mirror(g)),
                _ => None,
            },
        ),
        (Layout::Node, false) => (
            n + g,
            match bc {
                SideBc::Periodic => Some(Source::Copy(g)),
                SideBc::Outflow => Some(Source::Copy(n)),
                SideBc::Reflective => Some(Source::Mirror(n - g)),
                _ => None,
            },
        ),
    }
}

/// Fills the ghost averages and point values of a 1D field at time `t`.
pub fn fill_ghosts_1d<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    grid: &Grid1d,
    bc: &Boundary<M>,
    dofs: &mut DofField1d<M>,
    t: f64,
) {
    let n = grid.n() as isize;
    for (side, lo) in [(Side::XLo, true), (Side::XHi, false)] {
        let leaf = bc.side(side).resolve(0.0);
        for g in 1..=GHOST as isize {
            let (d, src) = ghost_indices(leaf, Layout::Cell, lo, n, g);
            let v = match src {
                Some(Source::Copy(s)) => dofs.avg.at(s),
                Some(Source::Mirror(s)) => sys.mirror(&dofs.avg.at(s), Axis::X),
                None => match leaf {
                    SideBc::Inflow(s) => *s,
                    SideBc::Exact(f) => average_1d(|x| f(x, 0.0, t), grid.node(d), grid.node(d + 1), 1),
                    _ => unreachable!("masked sides are resolved"),
                },
            };
            dofs.avg.set(d, v);
            let (d, src) = ghost_indices(leaf, Layout::Node, lo, n, g);
            let v = match src {
                Some(Source::Copy(s)) => dofs.pts.at(s),
                Some(Source::Mirror(s)) => sys.mirror(&dofs.pts.at(s), Axis::X),
                None => match leaf {
                    SideBc::Inflow(s) => *s,
                    SideBc::Exact(f) => f(grid.node(d), 0.0, t),
                    _ => unreachable!("masked sides are resolved"),
                },
            };
            dofs.pts.set(d, v);
        }
    }
}

fn layout_along(fam: Family, axis: Axis) -> Layout {
    match (fam, axis) {
        (Family::Average, _) => Layout::Cell,
        (Family::Corner, _) => Layout::Node,
        (Family::FaceX, Axis::X) | (Family::FaceY, Axis::Y) => Layout::Node,
        (Family::FaceX, Axis::Y) | (Family::FaceY, Axis::X) => Layout::Cell,
    }
}

fn fill_family_side<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    grid: &Grid2d,
    field: &mut Field2<State<M>>,
    fam: Family,
    side: Side,
    bc: &SideBc<M>,
    t: f64,
) {
    let axis = side.axis();
    let layout = layout_along(fam, axis);
    let lo = side.is_lo();
    let (n, tangential) = match axis {
        // x-sides fill interior rows only; y-sides sweep every column so
        // that the ghost corners of the frame get values too
        Axis::X => (grid.nx() as isize, 0..field.n2() as isize),
        Axis::Y => (grid.ny() as isize, field.range1()),
    };
    for tg in tangential {
        for g in 1..=GHOST as isize {
            let probe = |d: isize| match axis {
                Axis::X => (d, tg),
                Axis::Y => (tg, d),
            };
            let leaf = {
                let (i, j) = probe(0);
                let (x, y) = dof_position(grid, fam, i, j);
                bc.resolve(if axis == Axis::X { y } else { x })
            };
            let (d, src) = ghost_indices(leaf, layout, lo, n, g);
            let (di, dj) = probe(d);
            let v = match src {
                Some(Source::Copy(s)) => {
                    let (si, sj) = probe(s);
                    field.at(si, sj)
                }
                Some(Source::Mirror(s)) => {
                    let (si, sj) = probe(s);
                    sys.mirror(&field.at(si, sj), axis)
                }
                None => match leaf {
                    SideBc::Inflow(s) => *s,
                    SideBc::Exact(f) => {
                        if fam == Family::Average {
                            average_2d(
                                |x, y| f(x, y, t),
                                (grid.x.node(di), grid.x.node(di + 1)),
                                (grid.y.node(dj), grid.y.node(dj + 1)),
                                1,
                            )
                        } else {
                            let (x, y) = dof_position(grid, fam, di, dj);
                            f(x, y, t)
                        }
                    }
                    _ => unreachable!("masked sides are resolved"),
                },
            };
            field.set(di, dj, v);
        }
    }
}

/// Fills every ghost DoF of a 2D field at time `t`.
pub fn fill_ghosts_2d<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    grid: &Grid2d,
    bc: &Boundary<M>,
    dofs: &mut DofField2d<M>,
    t: f64,
) {
    const FAMS: [Family; 4] = [Family::Average, Family::FaceX, Family::FaceY, Family::Corner];
    for side in Side::ALL {
        for fam in FAMS {
            fill_family_side(sys, grid, dofs.family_mut(fam), fam, side, bc.side(side), t);
        }
    }
}

/// Active-DoF flags; inactive DoFs lie inside an obstacle.
#[derive(Clone, Debug)]
pub struct ActiveMask {
    pub avg: Field2<bool>,
    pub fx: Field2<bool>,
    pub fy: Field2<bool>,
    pub corner: Field2<bool>,
}

impl ActiveMask {
    pub fn all(nx: usize, ny: usize) -> Self {
        ActiveMask {
            avg: Field2::new(nx, ny, true),
            fx: Field2::new(nx + 1, ny, true),
            fy: Field2::new(nx, ny + 1, true),
            corner: Field2::new(nx + 1, ny + 1, true),
        }
    }

    pub fn family(&self, f: Family) -> &Field2<bool> {
        match f {
            Family::Average => &self.avg,
            Family::FaceX => &self.fx,
            Family::FaceY => &self.fy,
            Family::Corner => &self.corner,
        }
    }
}

/// Solid block `{x >= x0, y <= y_top}` with slip walls on its front and top
/// faces. Both walls must lie on grid lines.
#[derive(Clone, Debug)]
pub struct StepObstacle<const M: usize> {
    pub x0: f64,
    pub y_top: f64,
    /// State stored in solid DoFs that have no fluid mirror image.
    pub fill: State<M>,
}

impl<const M: usize> StepObstacle<M> {
    /// Node indices `(k0, l0)` of the front and top walls.
    pub fn wall_nodes(&self, grid: &Grid2d) -> Result<(isize, isize), Error> {
        let find = |g: &Grid1d, v: f64, what: &str| {
            (0..=g.n() as isize)
                .find(|&k| (g.node(k) - v).abs() <= 1e-9 * g.length())
                .ok_or_else(|| Error::Mesh(format!("{what} wall at {v} is not on a grid line")))
        };
        Ok((find(&grid.x, self.x0, "front")?, find(&grid.y, self.y_top, "top")?))
    }

    pub fn mask(&self, grid: &Grid2d) -> Result<ActiveMask, Error> {
        let (k0, l0) = self.wall_nodes(grid)?;
        let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
        let fluid = |i: isize, j: isize| i < k0 || j >= l0;
        let in_dom = |i: isize, j: isize| i >= 0 && i < nx && j >= 0 && j < ny;
        let any_fluid = |cells: &[(isize, isize)]| {
            cells.iter().any(|&(i, j)| in_dom(i, j) && fluid(i, j))
        };
        let mut m = ActiveMask::all(nx as usize, ny as usize);
        for j in 0..ny {
            for i in 0..nx {
                m.avg.set(i, j, fluid(i, j));
            }
            for k in 0..=nx {
                m.fx.set(k, j, any_fluid(&[(k - 1, j), (k, j)]));
            }
        }
        for l in 0..=ny {
            for i in 0..nx {
                m.fy.set(i, l, any_fluid(&[(i, l - 1), (i, l)]));
            }
            for k in 0..=nx {
                m.corner.set(k, l, any_fluid(&[(k - 1, l - 1), (k, l - 1), (k - 1, l), (k, l)]));
            }
        }
        Ok(m)
    }

    /// Overwrites inactive DoFs by the mirror image of the fluid across the
    /// nearer wall.
    pub fn fill_solid<S: ConservationLaw<M>>(
        &self,
        sys: &S,
        grid: &Grid2d,
        mask: &ActiveMask,
        dofs: &mut DofField2d<M>,
    ) {
        let (k0, l0) = self.wall_nodes(grid).expect("validated at setup");
        for fam in [Family::Average, Family::FaceX, Family::FaceY, Family::Corner] {
            let act = mask.family(fam);
            let (n1, n2) = (act.n1() as isize, act.n2() as isize);
            for j in 0..n2 {
                for i in 0..n1 {
                    if act.at(i, j) {
                        continue;
                    }
                    let (x, y) = dof_position(grid, fam, i, j);
                    let axis = if x - self.x0 < self.y_top - y { Axis::X } else { Axis::Y };
                    let (si, sj) = match axis {
                        Axis::X => match layout_along(fam, Axis::X) {
                            Layout::Cell => (2 * k0 - 1 - i, j),
                            Layout::Node => (2 * k0 - i, j),
                        },
                        Axis::Y => match layout_along(fam, Axis::Y) {
                            Layout::Cell => (i, 2 * l0 - 1 - j),
                            Layout::Node => (i, 2 * l0 - j),
                        },
                    };
                    let ok = si >= 0 && si < n1 && sj >= 0 && sj < n2 && act.at(si, sj);
                    let v = if ok {
                        sys.mirror(&dofs.family(fam).at(si, sj), axis)
                    } else {
                        self.fill
                    };
                    dofs.family_mut(fam).set(i, j, v);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{Euler1d, Euler2d, LinearAdvection};

    fn numbered2d(nx: usize, ny: usize) -> DofField2d<4> {
        let mut d = DofField2d::new(nx, ny);
        let mut c = 0.0;
        for fam in [Family::Average, Family::FaceX, Family::FaceY, Family::Corner] {
            let f = d.family_mut(fam);
            for j in 0..f.n2() as isize {
                for i in 0..f.n1() as isize {
                    c += 1.0;
                    f.set(i, j, State([1.0 + c, c, -c, 1e3 + c]));
                }
            }
        }
        d
    }

    #[test]
    fn periodic_ghosts_wrap_all_families() {
        let e = Euler2d::new(1.4).unwrap();
        let g = Grid2d::uniform((0.0, 1.0), (0.0, 1.0), 4, 3).unwrap();
        let mut d = numbered2d(4, 3);
        // make the duplicated boundary points consistent
        for j in 0..3 {
            let v = d.fx.at(0, j);
            d.fx.set(4, j, v);
        }
        fill_ghosts_2d(&e, &g, &Boundary::periodic(), &mut d, 0.0);
        assert_eq!(d.avg.at(-1, 0), d.avg.at(3, 0));
        assert_eq!(d.avg.at(4, 2), d.avg.at(0, 2));
        assert_eq!(d.avg.at(-2, -2), d.avg.at(2, 1));
        assert_eq!(d.fx.at(-1, 1), d.fx.at(3, 1));
        assert_eq!(d.fx.at(5, 1), d.fx.at(1, 1));
        assert_eq!(d.corner.at(-2, 5), d.corner.at(2, 2));
        assert_eq!(d.fy.at(1, -1), d.fy.at(1, 2));
    }

    #[test]
    fn reflective_ghosts_mirror_normal_momentum() {
        let e = Euler2d::new(1.4).unwrap();
        let g = Grid2d::uniform((0.0, 1.0), (0.0, 1.0), 4, 4).unwrap();
        let mut d = numbered2d(4, 4);
        fill_ghosts_2d(&e, &g, &Boundary::all(SideBc::Reflective), &mut d, 0.0);
        assert_eq!(d.avg.at(-1, 2), e.mirror(&d.avg.at(0, 2), Axis::X));
        assert_eq!(d.avg.at(-2, 2), e.mirror(&d.avg.at(1, 2), Axis::X));
        assert_eq!(d.fx.at(-1, 2), e.mirror(&d.fx.at(1, 2), Axis::X));
        assert_eq!(d.fx.at(6, 2), e.mirror(&d.fx.at(2, 2), Axis::X));
        assert_eq!(d.corner.at(2, -2), e.mirror(&d.corner.at(2, 2), Axis::Y));
        assert_eq!(d.avg.at(2, 5), e.mirror(&d.avg.at(2, 2), Axis::Y));
    }

    #[test]
    fn masked_side_selects_by_coordinate() {
        let e = Euler2d::new(1.4).unwrap();
        let g = Grid2d::uniform((0.0, 1.0), (0.0, 1.0), 4, 4).unwrap();
        let jet = State([5.0, 1.0, 0.0, 10.0]);
        let bc = Boundary {
            x_lo: SideBc::Masked {
                inside: Arc::new(|y: f64| y < 0.5),
                inner: Box::new(SideBc::Inflow(jet)),
                outer: Box::new(SideBc::Outflow),
            },
            ..Boundary::all(SideBc::Outflow)
        };
        let mut d = numbered2d(4, 4);
        fill_ghosts_2d(&e, &g, &bc, &mut d, 0.0);
        assert_eq!(d.avg.at(-1, 0), jet);
        assert_eq!(d.avg.at(-1, 3), d.avg.at(0, 3));
        // corner at y = 0.5 is outside the strict inequality
        assert_eq!(d.corner.at(-1, 2), d.corner.at(0, 2));
        assert_eq!(d.corner.at(-1, 1), jet);
    }

    #[test]
    fn exact_ghosts_use_time() {
        let adv = LinearAdvection { velocity: [1.0, 0.0] };
        let g = Grid1d::uniform(0.0, 1.0, 4).unwrap();
        let f: PointFn<1> = Arc::new(|x, _y, t| State([x - t]));
        let bc = Boundary::all(SideBc::Exact(f));
        let mut d = DofField1d::<1>::new(4);
        fill_ghosts_1d(&adv, &g, &bc, &mut d, 0.5);
        assert!((d.pts.at(-1)[0] - (-0.25 - 0.5)).abs() < 1e-15);
        assert!((d.avg.at(4)[0] - (1.125 - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn one_d_reflective_and_outflow() {
        let e = Euler1d::new(1.4).unwrap();
        let g = Grid1d::uniform(0.0, 1.0, 3).unwrap();
        let mut d = DofField1d::<3>::new(3);
        for i in 0..3 {
            d.avg.set(i, State([1.0 + i as f64, 0.5, 3.0]));
        }
        for k in 0..4 {
            d.pts.set(k, State([1.0 + k as f64, 0.25, 3.0]));
        }
        let bc = Boundary { x_lo: SideBc::Reflective, x_hi: SideBc::Outflow, ..Boundary::periodic() };
        fill_ghosts_1d(&e, &g, &bc, &mut d, 0.0);
        assert_eq!(d.avg.at(-2), State([2.0, -0.5, 3.0]));
        assert_eq!(d.pts.at(-1), State([2.0, -0.25, 3.0]));
        assert_eq!(d.avg.at(4), d.avg.at(2));
        assert_eq!(d.pts.at(5), d.pts.at(3));
    }

    #[test]
    fn unpaired_periodic_is_rejected() {
        let bc = Boundary::<1> { x_hi: SideBc::Outflow, ..Boundary::periodic() };
        assert!(bc.validate(2).is_err());
        assert!(Boundary::<1>::periodic().validate(2).is_ok());
    }

    #[test]
    fn step_mask_and_solid_fill() {
        let e = Euler2d::new(1.4).unwrap();
        let g = Grid2d::uniform((0.0, 3.0), (0.0, 1.0), 15, 5).unwrap();
        let step = StepObstacle { x0: 0.6, y_top: 0.2, fill: State([1.4, 0.0, 0.0, 2.5]) };
        let m = step.mask(&g).unwrap();
        assert!(m.avg.at(2, 0));
        assert!(!m.avg.at(3, 0));
        assert!(m.avg.at(3, 1));
        // wall DoFs stay active, interior solid points do not
        assert!(m.fx.at(3, 0));
        assert!(!m.fx.at(4, 0));
        assert!(m.fy.at(5, 1));
        assert!(!m.fy.at(5, 0));
        assert!(m.corner.at(3, 0));
        assert!(!m.corner.at(4, 0));
        let mut d = numbered2d(15, 5);
        step.fill_solid(&e, &g, &m, &mut d);
        // cell (3, 0): centre (0.7, 0.1) is equidistant from both walls, the
        // top wall wins
        assert_eq!(d.avg.at(3, 0), e.mirror(&d.avg.at(3, 1), Axis::Y));
        assert_eq!(d.avg.at(8, 0), e.mirror(&d.avg.at(8, 1), Axis::Y));
        // face x at (0.8, 0.1) is nearer to the top wall
        assert_eq!(d.fx.at(4, 0), e.mirror(&d.fx.at(4, 1), Axis::Y));
        assert!(StepObstacle { x0: 0.65, ..step.clone() }.mask(&g).is_err());
    }
}

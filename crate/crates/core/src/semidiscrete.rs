//! High-order semi-discrete operators: cell-average updates through Simpson
//! fluxes and point-value updates through biased derivatives.

use crate::meshstate::{DofField1d, DofField2d, Field1, Field2, Grid1d, Grid2d, State};
use crate::reconstruct::{
    cell_center_1d, cell_center_2d, js_derivatives_1d, upwind_from_left, upwind_from_right,
};
use crate::splitting::{split_sw, split_vh, PointUpdate};
use crate::systems::{apply_split_jacobian, Axis, ConservationLaw};
use crate::Error;

/// Flux data of a point along one axis. `fp`/`fm` are only filled for the
/// Steger-Warming and van Leer-Haenel variants, `rho` only for LLF.
#[derive(Clone, Copy, Debug, Default)]
pub struct PointData<const M: usize> {
    pub f: State<M>,
    pub fp: State<M>,
    pub fm: State<M>,
    pub rho: f64,
}

#[inline]
fn point_data<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    kind: PointUpdate,
    u: &State<M>,
    axis: Axis,
) -> Result<PointData<M>, Error> {
    let f = sys.flux(u, axis);
    let mut d = PointData { f, ..Default::default() };
    match kind {
        PointUpdate::Js => {}
        PointUpdate::LlfFvs => d.rho = sys.spectral_radius(u, axis),
        PointUpdate::SwFvs => (d.fp, d.fm) = split_sw(sys, u, axis),
        PointUpdate::VhFvs => (d.fp, d.fm) = split_vh(sys, u, axis)?,
    }
    Ok(d)
}

/// Contribution `dF/dx` of one line through the target point `u[2]`. The
/// stencil is `left end, left middle, target, right middle, right end`.
#[inline]
fn line_term<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    kind: PointUpdate,
    axis: Axis,
    u: [&State<M>; 5],
    d: [&PointData<M>; 5],
    dxl: f64,
    dxr: f64,
) -> State<M> {
    match kind {
        PointUpdate::Js => {
            let dp = upwind_from_left(u[0], u[1], u[2], dxl);
            let dm = upwind_from_right(u[2], u[3], u[4], dxr);
            apply_split_jacobian(sys, u[2], axis, &dp, &dm)
        }
        PointUpdate::LlfFvs => {
            let alpha = d.iter().fold(0.0f64, |a, p| a.max(p.rho));
            let dfp = upwind_from_left(&d[0].f, &d[1].f, &d[2].f, dxl);
            let dfm = upwind_from_right(&d[2].f, &d[3].f, &d[4].f, dxr);
            let dup = upwind_from_left(u[0], u[1], u[2], dxl);
            let dum = upwind_from_right(u[2], u[3], u[4], dxr);
            (dfp + dfm) * 0.5 + (dup - dum) * (0.5 * alpha)
        }
        PointUpdate::SwFvs | PointUpdate::VhFvs => {
            upwind_from_left(&d[0].fp, &d[1].fp, &d[2].fp, dxl)
                + upwind_from_right(&d[2].fm, &d[3].fm, &d[4].fm, dxr)
        }
    }
}

/// LLF flux across a slip wall from the interior state `u`. `fluid_low` is
/// true when the fluid lies on the low-index side of the wall.
#[inline]
pub fn wall_flux<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    u: &State<M>,
    fluid_low: bool,
    axis: Axis,
) -> State<M> {
    let m = sys.mirror(u, axis);
    let (ul, ur) = if fluid_low { (*u, m) } else { (m, *u) };
    let alpha = sys.spectral_radius(u, axis).max(sys.spectral_radius(&m, axis));
    (sys.flux(&ul, axis) + sys.flux(&ur, axis)) * 0.5 - (ur - ul) * (0.5 * alpha)
}

/// Interface marker for slip walls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Wall {
    #[default]
    None,
    /// Fluid on the low-index side.
    FluidLow,
    /// Fluid on the high-index side.
    FluidHigh,
}

// ---------------------------------------------------------------------------
// 1D

/// Cell-center values of every cell whose interface values are available.
pub fn centers_1d<const M: usize>(dofs: &DofField1d<M>, out: &mut Field1<State<M>>) {
    let n = dofs.n() as isize;
    for i in -2..n + 2 {
        out.set(i, cell_center_1d(&dofs.pts.at(i), &dofs.avg.at(i), &dofs.pts.at(i + 1)));
    }
}

/// High-order interface fluxes `F(U_{k})`, `k = 0..=n`, with walls replaced
/// by the LLF flux against the mirrored cell-center value.
pub fn interface_fluxes_1d<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    dofs: &DofField1d<M>,
    centers: &Field1<State<M>>,
    walls: [bool; 2],
    out: &mut [State<M>],
) {
    let n = dofs.n();
    for k in 0..=n {
        out[k] = sys.flux(&dofs.pts.at(k as isize), Axis::X);
    }
    if walls[0] {
        out[0] = wall_flux(sys, &centers.at(0), false, Axis::X);
    }
    if walls[1] {
        out[n] = wall_flux(sys, &centers.at(n as isize - 1), true, Axis::X);
    }
}

/// `d(avg_i)/dt = -(F_{i+1/2} - F_{i-1/2}) / dx_i`.
pub fn average_rhs_1d<const M: usize>(grid: &Grid1d, fluxes: &[State<M>], out: &mut [State<M>]) {
    for i in 0..grid.n() {
        out[i] = (fluxes[i + 1] - fluxes[i]) * (-1.0 / grid.dx(i as isize));
    }
}

/// Time derivative of every interface point value, `out[k]` for
/// `k = 0..=n`.
pub fn point_rhs_1d<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    grid: &Grid1d,
    kind: PointUpdate,
    dofs: &DofField1d<M>,
    centers: &Field1<State<M>>,
    scratch: &mut Vec<PointData<M>>,
    out: &mut [State<M>],
) -> Result<(), Error> {
    let n = dofs.n() as isize;
    if kind == PointUpdate::Js {
        for k in 0..=n {
            let (dp, dm) = js_derivatives_1d(
                &dofs.pts.at(k - 1),
                &dofs.avg.at(k - 1),
                &dofs.pts.at(k),
                &dofs.avg.at(k),
                &dofs.pts.at(k + 1),
                grid.dx(k - 1),
                grid.dx(k),
            );
            out[k as usize] = -apply_split_jacobian(sys, &dofs.pts.at(k), Axis::X, &dp, &dm);
        }
        return Ok(());
    }
    // scratch holds points then centers for indices -1..=n+1 and -1..=n
    let np = (n + 3) as usize;
    scratch.clear();
    for k in -1..=n + 1 {
        scratch.push(point_data(sys, kind, &dofs.pts.at(k), Axis::X)?);
    }
    for i in -1..=n {
        scratch.push(point_data(sys, kind, &centers.at(i), Axis::X)?);
    }
    let pd = |k: isize| &scratch[(k + 1) as usize];
    let cd = |i: isize| &scratch[np + (i + 1) as usize];
    for k in 0..=n {
        let (cl, cr) = (centers.at(k - 1), centers.at(k));
        let (ul, u, ur) = (dofs.pts.at(k - 1), dofs.pts.at(k), dofs.pts.at(k + 1));
        let term = line_term(
            sys,
            kind,
            Axis::X,
            [&ul, &cl, &u, &cr, &ur],
            [pd(k - 1), cd(k - 1), pd(k), cd(k), pd(k + 1)],
            grid.dx(k - 1),
            grid.dx(k),
        );
        out[k as usize] = -term;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 2D

/// Cell-center values of every cell, ghosts included where the stencil
/// exists.
pub fn centers_2d<const M: usize>(dofs: &DofField2d<M>, out: &mut Field2<State<M>>) {
    let (nx, ny) = (dofs.nx() as isize, dofs.ny() as isize);
    for j in -2..ny + 2 {
        for i in -2..nx + 2 {
            let c = cell_center_2d(
                dofs.avg.get(i, j),
                [dofs.fx.get(i, j), dofs.fx.get(i + 1, j), dofs.fy.get(i, j), dofs.fy.get(i, j + 1)],
                [
                    dofs.corner.get(i, j),
                    dofs.corner.get(i + 1, j),
                    dofs.corner.get(i, j + 1),
                    dofs.corner.get(i + 1, j + 1),
                ],
            );
            out.set(i, j, c);
        }
    }
}

/// Flux data of one point family along both axes.
#[derive(Clone, Debug)]
pub struct FamilyCache<const M: usize> {
    pub x: Field2<PointData<M>>,
    pub y: Field2<PointData<M>>,
}

impl<const M: usize> FamilyCache<M> {
    fn new(n1: usize, n2: usize) -> Self {
        FamilyCache {
            x: Field2::new(n1, n2, PointData::default()),
            y: Field2::new(n1, n2, PointData::default()),
        }
    }

    fn fill<S: ConservationLaw<M>>(
        &mut self,
        sys: &S,
        kind: PointUpdate,
        values: &Field2<State<M>>,
    ) -> Result<(), Error> {
        for j in values.range2() {
            for i in values.range1() {
                let u = values.get(i, j);
                self.x.set(i, j, point_data(sys, kind, u, Axis::X)?);
                self.y.set(i, j, point_data(sys, kind, u, Axis::Y)?);
            }
        }
        Ok(())
    }
}

/// Flux data of all point values and cell centers.
#[derive(Clone, Debug)]
pub struct Cache2d<const M: usize> {
    pub center: FamilyCache<M>,
    pub fx: FamilyCache<M>,
    pub fy: FamilyCache<M>,
    pub corner: FamilyCache<M>,
}

impl<const M: usize> Cache2d<M> {
    pub fn new(nx: usize, ny: usize) -> Self {
        Cache2d {
            center: FamilyCache::new(nx, ny),
            fx: FamilyCache::new(nx + 1, ny),
            fy: FamilyCache::new(nx, ny + 1),
            corner: FamilyCache::new(nx + 1, ny + 1),
        }
    }

    pub fn build<S: ConservationLaw<M>>(
        &mut self,
        sys: &S,
        kind: PointUpdate,
        dofs: &DofField2d<M>,
        centers: &Field2<State<M>>,
    ) -> Result<(), Error> {
        self.center.fill(sys, kind, centers)?;
        self.fx.fill(sys, kind, &dofs.fx)?;
        self.fy.fill(sys, kind, &dofs.fy)?;
        self.corner.fill(sys, kind, &dofs.corner)?;
        Ok(())
    }
}

/// Slip-wall markers of all x-interfaces `(k, j)` and y-interfaces `(i, l)`.
#[derive(Clone, Debug)]
pub struct WallMap {
    pub x: Field2<Wall>,
    pub y: Field2<Wall>,
    pub any: bool,
}

impl WallMap {
    pub fn none(nx: usize, ny: usize) -> Self {
        WallMap {
            x: Field2::new(nx + 1, ny, Wall::None),
            y: Field2::new(nx, ny + 1, Wall::None),
            any: false,
        }
    }
}

/// Simpson fluxes through all x-interfaces (`fxo`, shape of `dofs.fx`) and
/// y-interfaces (`fyo`, shape of `dofs.fy`).
pub fn interface_fluxes_2d<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    dofs: &DofField2d<M>,
    centers: &Field2<State<M>>,
    cache: &Cache2d<M>,
    walls: &WallMap,
    fxo: &mut Field2<State<M>>,
    fyo: &mut Field2<State<M>>,
) {
    let (nx, ny) = (dofs.nx() as isize, dofs.ny() as isize);
    let sixth = 1.0 / 6.0;
    for j in 0..ny {
        for k in 0..=nx {
            let w = if walls.any { walls.x.at(k, j) } else { Wall::None };
            let f = match w {
                Wall::None => {
                    (cache.corner.x.get(k, j).f
                        + cache.fx.x.get(k, j).f * 4.0
                        + cache.corner.x.get(k, j + 1).f)
                        * sixth
                }
                Wall::FluidLow | Wall::FluidHigh => {
                    let low = w == Wall::FluidLow;
                    let i = if low { k - 1 } else { k };
                    (wall_flux(sys, dofs.fy.get(i, j), low, Axis::X)
                        + wall_flux(sys, centers.get(i, j), low, Axis::X) * 4.0
                        + wall_flux(sys, dofs.fy.get(i, j + 1), low, Axis::X))
                        * sixth
                }
            };
            fxo.set(k, j, f);
        }
    }
    for l in 0..=ny {
        for i in 0..nx {
            let w = if walls.any { walls.y.at(i, l) } else { Wall::None };
            let f = match w {
                Wall::None => {
                    (cache.corner.y.get(i, l).f
                        + cache.fy.y.get(i, l).f * 4.0
                        + cache.corner.y.get(i + 1, l).f)
                        * sixth
                }
                Wall::FluidLow | Wall::FluidHigh => {
                    let low = w == Wall::FluidLow;
                    let j = if low { l - 1 } else { l };
                    (wall_flux(sys, dofs.fx.get(i, j), low, Axis::Y)
                        + wall_flux(sys, centers.get(i, j), low, Axis::Y) * 4.0
                        + wall_flux(sys, dofs.fx.get(i + 1, j), low, Axis::Y))
                        * sixth
                }
            };
            fyo.set(i, l, f);
        }
    }
}

/// `d(avg)/dt` of every interior cell from interface fluxes.
pub fn average_rhs_2d<const M: usize>(
    grid: &Grid2d,
    fxi: &Field2<State<M>>,
    fyi: &Field2<State<M>>,
    out: &mut Field2<State<M>>,
) {
    for j in 0..grid.ny() as isize {
        let rdy = 1.0 / grid.y.dx(j);
        for i in 0..grid.nx() as isize {
            let rdx = 1.0 / grid.x.dx(i);
            let r = (fxi.at(i + 1, j) - fxi.at(i, j)) * (-rdx) - (fyi.at(i, j + 1) - fyi.at(i, j)) * rdy;
            out.set(i, j, r);
        }
    }
}

/// `dU/dt` at every interior corner.
pub fn corner_rhs_2d<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    grid: &Grid2d,
    kind: PointUpdate,
    dofs: &DofField2d<M>,
    cache: &Cache2d<M>,
    out: &mut Field2<State<M>>,
) {
    let (nx, ny) = (dofs.nx() as isize, dofs.ny() as isize);
    let (c, fx, fy) = (&dofs.corner, &dofs.fx, &dofs.fy);
    for l in 0..=ny {
        for k in 0..=nx {
            let tx = line_term(
                sys,
                kind,
                Axis::X,
                [c.get(k - 1, l), fy.get(k - 1, l), c.get(k, l), fy.get(k, l), c.get(k + 1, l)],
                [
                    cache.corner.x.get(k - 1, l),
                    cache.fy.x.get(k - 1, l),
                    cache.corner.x.get(k, l),
                    cache.fy.x.get(k, l),
                    cache.corner.x.get(k + 1, l),
                ],
                grid.x.dx(k - 1),
                grid.x.dx(k),
            );
            let ty = line_term(
                sys,
                kind,
                Axis::Y,
                [c.get(k, l - 1), fx.get(k, l - 1), c.get(k, l), fx.get(k, l), c.get(k, l + 1)],
                [
                    cache.corner.y.get(k, l - 1),
                    cache.fx.y.get(k, l - 1),
                    cache.corner.y.get(k, l),
                    cache.fx.y.get(k, l),
                    cache.corner.y.get(k, l + 1),
                ],
                grid.y.dx(l - 1),
                grid.y.dx(l),
            );
            out.set(k, l, -(tx + ty));
        }
    }
}

/// `dU/dt` at every interior x-face midpoint (vertical faces).
pub fn face_x_rhs_2d<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    grid: &Grid2d,
    kind: PointUpdate,
    dofs: &DofField2d<M>,
    centers: &Field2<State<M>>,
    cache: &Cache2d<M>,
    out: &mut Field2<State<M>>,
) {
    let (nx, ny) = (dofs.nx() as isize, dofs.ny() as isize);
    let fx = &dofs.fx;
    for j in 0..ny {
        let rdy = 1.0 / grid.y.dx(j);
        for k in 0..=nx {
            let tx = line_term(
                sys,
                kind,
                Axis::X,
                [fx.get(k - 1, j), centers.get(k - 1, j), fx.get(k, j), centers.get(k, j), fx.get(k + 1, j)],
                [
                    cache.fx.x.get(k - 1, j),
                    cache.center.x.get(k - 1, j),
                    cache.fx.x.get(k, j),
                    cache.center.x.get(k, j),
                    cache.fx.x.get(k + 1, j),
                ],
                grid.x.dx(k - 1),
                grid.x.dx(k),
            );
            let ty = (cache.corner.y.get(k, j + 1).f - cache.corner.y.get(k, j).f) * rdy;
            out.set(k, j, -(tx + ty));
        }
    }
}

/// `dU/dt` at every interior y-face midpoint (horizontal faces).
pub fn face_y_rhs_2d<S: ConservationLaw<M>, const M: usize>(
    sys: &S,
    grid: &Grid2d,
    kind: PointUpdate,
    dofs: &DofField2d<M>,
    centers: &Field2<State<M>>,
    cache: &Cache2d<M>,
    out: &mut Field2<State<M>>,
) {
    let (nx, ny) = (dofs.nx() as isize, dofs.ny() as isize);
    let fy = &dofs.fy;
    for l in 0..=ny {
        for i in 0..nx {
            let ty = line_term(
                sys,
                kind,
                Axis::Y,
                [fy.get(i, l - 1), centers.get(i, l - 1), fy.get(i, l), centers.get(i, l), fy.get(i, l + 1)],
                [
                    cache.fy.y.get(i, l - 1),
                    cache.center.y.get(i, l - 1),
                    cache.fy.y.get(i, l),
                    cache.center.y.get(i, l),
                    cache.fy.y.get(i, l + 1),
                ],
                grid.y.dx(l - 1),
                grid.y.dx(l),
            );
            let tx = (cache.corner.x.get(i + 1, l).f - cache.corner.x.get(i, l).f) * (1.0 / grid.x.dx(i));
            out.set(i, l, -(tx + ty));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bc::{fill_ghosts_1d, fill_ghosts_2d, Boundary};
    use crate::meshstate::quadrature::{average_1d, average_2d};
    use crate::meshstate::{dof_position, Family};
    use crate::systems::{Burgers, Euler2d, LinearAdvection};
    use std::f64::consts::PI;

    fn project_1d(g: &Grid1d, f: impl Fn(f64) -> f64) -> DofField1d<1> {
        let mut d = DofField1d::new(g.n());
        for i in 0..g.n() as isize {
            d.avg.set(i, average_1d(|x| State([f(x)]), g.node(i), g.node(i + 1), 1));
        }
        for k in 0..=g.n() as isize {
            d.pts.set(k, State([f(g.node(k))]));
        }
        d
    }

    fn project_2d<const M: usize>(g: &Grid2d, f: impl Fn(f64, f64) -> State<M>) -> DofField2d<M> {
        let mut d = DofField2d::new(g.nx(), g.ny());
        for j in 0..g.ny() as isize {
            for i in 0..g.nx() as isize {
                let a = average_2d(&f, (g.x.node(i), g.x.node(i + 1)), (g.y.node(j), g.y.node(j + 1)), 2);
                d.avg.set(i, j, a);
            }
        }
        for fam in Family::POINTS {
            let fld = d.family_mut(fam);
            for j in 0..fld.n2() as isize {
                for i in 0..fld.n1() as isize {
                    let (x, y) = dof_position(g, fam, i, j);
                    fld.set(i, j, f(x, y));
                }
            }
        }
        d
    }

    #[test]
    fn llf_line_term_matches_explicit_split() {
        // LLF via (F +- alpha U)/2 must equal the shortcut in line_term
        let e = Euler2d::new(1.4).unwrap();
        let us: Vec<State<4>> = (0..5)
            .map(|k| e.conserved(1.0 + 0.1 * k as f64, [0.3 - 0.2 * k as f64, 0.1], 1.0 + 0.05 * k as f64))
            .collect();
        let ds: Vec<PointData<4>> =
            us.iter().map(|u| point_data(&e, PointUpdate::LlfFvs, u, Axis::X).unwrap()).collect();
        let t = line_term(
            &e,
            PointUpdate::LlfFvs,
            Axis::X,
            [&us[0], &us[1], &us[2], &us[3], &us[4]],
            [&ds[0], &ds[1], &ds[2], &ds[3], &ds[4]],
            0.1,
            0.1,
        );
        let alpha = crate::splitting::llf_alpha(&e, &us, Axis::X);
        let sp: Vec<_> = us
            .iter()
            .map(|u| crate::splitting::split_llf(&e, u, alpha, Axis::X).unwrap())
            .collect();
        let r = upwind_from_left(&sp[0].0, &sp[1].0, &sp[2].0, 0.1)
            + upwind_from_right(&sp[2].1, &sp[3].1, &sp[4].1, 0.1);
        assert!((t - r).max_abs() < 1e-10 * r.max_abs().max(1.0));
    }

    #[test]
    fn one_d_rhs_exact_for_quadratic_advection() {
        // u = x^2 moving with speed 1: du/dt = -2x for points and
        // -(x_r^2 - x_l^2)/dx for averages
        let adv = LinearAdvection { velocity: [1.0, 0.0] };
        let g = Grid1d::uniform(-1.0, 2.0, 7).unwrap();
        let mut d = project_1d(&g, |x| x * x);
        // quadratic ghosts by extrapolation
        for k in [-2, -1, 8, 9] {
            d.pts.set(k, State([g.node(k).powi(2)]));
        }
        for i in [-2, -1, 7, 8] {
            d.avg.set(i, average_1d(|x| State([x * x]), g.node(i), g.node(i + 1), 1));
        }
        let mut c = Field1::new(7, State::zero());
        centers_1d(&d, &mut c);
        for kind in [PointUpdate::Js, PointUpdate::LlfFvs, PointUpdate::SwFvs] {
            let mut out = vec![State::zero(); 8];
            point_rhs_1d(&adv, &g, kind, &d, &c, &mut Vec::new(), &mut out).unwrap();
            for k in 0..=7 {
                let x = g.node(k as isize);
                assert!((out[k][0] + 2.0 * x).abs() < 1e-12, "{kind:?} k={k}: {}", out[k][0]);
            }
        }
        let mut fl = vec![State::zero(); 8];
        interface_fluxes_1d(&adv, &d, &c, [false, false], &mut fl);
        let mut ra = vec![State::zero(); 7];
        average_rhs_1d(&g, &fl, &mut ra);
        for i in 0..7 {
            let (a, b) = (g.node(i as isize), g.node(i as isize + 1));
            assert!((ra[i][0] + (b * b - a * a) / (b - a)).abs() < 1e-12);
        }
    }

    #[test]
    fn vh_rejected_for_scalar_in_point_rhs() {
        let g = Grid1d::uniform(0.0, 1.0, 4).unwrap();
        let mut d = project_1d(&g, |x| x);
        fill_ghosts_1d(&Burgers, &g, &Boundary::periodic(), &mut d, 0.0);
        let mut c = Field1::new(4, State::zero());
        centers_1d(&d, &mut c);
        let mut out = vec![State::zero(); 5];
        assert!(point_rhs_1d(&Burgers, &g, PointUpdate::VhFvs, &d, &c, &mut Vec::new(), &mut out).is_err());
    }

    #[test]
    fn two_d_rhs_exact_for_biquadratic_advection() {
        // q(x, y) = x^2 + x y - y^2 advected with (1, 2): dq/dt = -(2x + y) - 2(x - 2y)
        let adv = LinearAdvection { velocity: [1.0, 2.0] };
        let q = |x: f64, y: f64| State([x * x + x * y - y * y]);
        let dq = |x: f64, y: f64| -(2.0 * x + y) - 2.0 * (x - 2.0 * y);
        let g = Grid2d::uniform((0.0, 1.0), (-0.5, 0.5), 5, 4).unwrap();
        let mut d = project_2d(&g, q);
        // fill ghosts with the exact polynomial
        let bc = Boundary::all(crate::bc::SideBc::Exact(std::sync::Arc::new(move |x, y, _| q(x, y))));
        fill_ghosts_2d(&adv, &g, &bc, &mut d, 0.0);
        let mut c = Field2::new(5, 4, State::zero());
        centers_2d(&d, &mut c);
        for kind in [PointUpdate::Js, PointUpdate::LlfFvs, PointUpdate::SwFvs] {
            let mut cache = Cache2d::new(5, 4);
            cache.build(&adv, kind, &d, &c).unwrap();
            let mut out = Field2::new(6, 5, State::zero());
            corner_rhs_2d(&adv, &g, kind, &d, &cache, &mut out);
            for l in 0..=4 {
                for k in 0..=5 {
                    let (x, y) = dof_position(&g, Family::Corner, k, l);
                    assert!((out.at(k, l)[0] - dq(x, y)).abs() < 1e-11, "{kind:?}");
                }
            }
            let mut out = Field2::new(6, 4, State::zero());
            face_x_rhs_2d(&adv, &g, kind, &d, &c, &cache, &mut out);
            for j in 0..4 {
                for k in 0..=5 {
                    let (x, y) = dof_position(&g, Family::FaceX, k, j);
                    assert!((out.at(k, j)[0] - dq(x, y)).abs() < 1e-11, "{kind:?}");
                }
            }
            let mut out = Field2::new(5, 5, State::zero());
            face_y_rhs_2d(&adv, &g, kind, &d, &c, &cache, &mut out);
            for l in 0..=4 {
                for i in 0..5 {
                    let (x, y) = dof_position(&g, Family::FaceY, i, l);
                    assert!((out.at(i, l)[0] - dq(x, y)).abs() < 1e-11, "{kind:?}");
                }
            }
        }
        // averages: exact flux divergence of the biquadratic
        let mut cache = Cache2d::new(5, 4);
        cache.build(&adv, PointUpdate::Js, &d, &c).unwrap();
        let mut fxo = Field2::new(6, 4, State::zero());
        let mut fyo = Field2::new(5, 5, State::zero());
        interface_fluxes_2d(&adv, &d, &c, &cache, &WallMap::none(5, 4), &mut fxo, &mut fyo);
        let mut ra = Field2::new(5, 4, State::zero());
        average_rhs_2d(&g, &fxo, &fyo, &mut ra);
        for j in 0..4 {
            for i in 0..5 {
                let ex = average_2d(
                    |x, y| State([dq(x, y)]),
                    (g.x.node(i), g.x.node(i + 1)),
                    (g.y.node(j), g.y.node(j + 1)),
                    1,
                );
                assert!((ra.at(i, j)[0] - ex[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wall_flux_carries_only_pressure_terms() {
        let e = Euler2d::new(1.4).unwrap();
        let u = e.conserved(1.3, [0.4, -0.7], 2.0);
        let f = wall_flux(&e, &u, true, Axis::X);
        let (rho, vn, p) = (1.3, 0.4, 2.0);
        let alpha = e.spectral_radius(&u, Axis::X);
        let expect = State([0.0, rho * vn * vn + p + alpha * rho * vn, 0.0, 0.0]);
        assert!((f - expect).max_abs() < 1e-13);
        let g = wall_flux(&e, &e.mirror(&u, Axis::X), false, Axis::X);
        assert!((g - expect).max_abs() < 1e-13);
        let h = wall_flux(&e, &u, false, Axis::Y);
        assert!(h[0].abs() < 1e-15 && h[1].abs() < 1e-15 && h[3].abs() < 1e-15);
    }

    #[test]
    fn sine_rhs_converges() {
        // third-order accurate point derivatives on smooth data
        let adv = LinearAdvection { velocity: [1.0, 0.0] };
        let err = |n: usize| {
            let g = Grid1d::uniform(0.0, 1.0, n).unwrap();
            let mut d = project_1d(&g, |x| (2.0 * PI * x).sin());
            fill_ghosts_1d(&adv, &g, &Boundary::periodic(), &mut d, 0.0);
            let mut c = Field1::new(n, State::zero());
            centers_1d(&d, &mut c);
            let mut out = vec![State::zero(); n + 1];
            point_rhs_1d(&adv, &g, PointUpdate::LlfFvs, &d, &c, &mut Vec::new(), &mut out).unwrap();
            (0..=n)
                .map(|k| (out[k][0] + 2.0 * PI * (2.0 * PI * g.node(k as isize)).cos()).abs())
                .fold(0.0, f64::max)
        };
        let rate = (err(40) / err(80)).log2();
        assert!(rate > 1.9, "rate {rate}");
    }
}

//! Limited forward-Euler stage of the 2D Active Flux method.

use crate::bc::{fill_ghosts_2d, ActiveMask, Boundary, Side, StepObstacle};
use crate::bpaverage::{
    ducros_2d, jameson, limit_euler, limit_scalar, llf_flux, llf_low_order, sensor_blend, LowOrder,
    POSITIVITY_FLOOR,
};
use crate::bppoint::{scale_euler, scale_scalar};
use crate::march::{FieldSummary, Stepper};
use crate::meshstate::{DofField2d, Family, Field2, Grid2d, State};
use crate::scheme::{LimiterMode, SchemeConfig, StageStats};
use crate::semidiscrete::{
    average_rhs_2d, centers_2d, corner_rhs_2d, face_x_rhs_2d, face_y_rhs_2d, interface_fluxes_2d,
    Cache2d, Wall, WallMap,
};
use crate::systems::{euler_pressure, Axis, ConservationLaw, SystemKind};
use crate::Error;

const DT_SLACK: f64 = 1e-12;

/// Blending factors of the last stage: one per interface and one per point
/// value (1 means unlimited).
#[derive(Clone, Debug)]
pub struct Theta2d {
    pub x: Field2<f64>,
    pub y: Field2<f64>,
    pub corner: Field2<f64>,
    pub fx: Field2<f64>,
    pub fy: Field2<f64>,
}

impl Theta2d {
    fn new(nx: usize, ny: usize) -> Self {
        Theta2d {
            x: Field2::new(nx + 1, ny, 1.0),
            y: Field2::new(nx, ny + 1, 1.0),
            corner: Field2::new(nx + 1, ny + 1, 1.0),
            fx: Field2::new(nx + 1, ny, 1.0),
            fy: Field2::new(nx, ny + 1, 1.0),
        }
    }

    fn reset(&mut self) {
        for f in [&mut self.x, &mut self.y, &mut self.corner, &mut self.fx, &mut self.fy] {
            f.fill(1.0);
        }
    }
}

/// First-order point update and the largest `dt` keeping it admissible.
struct Fallback<const M: usize> {
    value: State<M>,
    /// `dt` bound of the fallback.
    dt_max: f64,
}

pub struct Solver2d<S, const M: usize> {
    pub sys: S,
    pub grid: Grid2d,
    pub bc: Boundary<M>,
    pub cfg: SchemeConfig,
    pub obstacle: Option<StepObstacle<M>>,
    pub mask: ActiveMask,
    walls: WallMap,
    centers: Field2<State<M>>,
    cache: Cache2d<M>,
    fxi: Field2<State<M>>,
    fyi: Field2<State<M>>,
    rhs_avg: Field2<State<M>>,
    rhs_c: Field2<State<M>>,
    rhs_fx: Field2<State<M>>,
    rhs_fy: Field2<State<M>>,
    lowx: Field2<LowOrder<M>>,
    lowy: Field2<LowOrder<M>>,
    /// Scalar bounds or Euler `(rho, p)` floors per cell.
    bounds: Field2<(f64, f64)>,
    /// `(phi1 along x, phi1 along y, phi2)` per cell.
    sensor: Field2<[f64; 3]>,
    pub theta: Theta2d,
    stats: StageStats,
}

impl<S: ConservationLaw<M>, const M: usize> Solver2d<S, M> {
    pub fn new(
        sys: S,
        grid: Grid2d,
        bc: Boundary<M>,
        cfg: SchemeConfig,
        obstacle: Option<StepObstacle<M>>,
    ) -> Result<Self, Error> {
        cfg.validate(sys.kind())?;
        bc.validate(2)?;
        let (nx, ny) = (grid.nx(), grid.ny());
        let mask = match &obstacle {
            Some(o) => o.mask(&grid)?,
            None => ActiveMask::all(nx, ny),
        };
        let walls = build_walls(&grid, &bc, obstacle.as_ref())?;
        Ok(Solver2d {
            sys,
            bc,
            cfg,
            obstacle,
            mask,
            walls,
            centers: Field2::new(nx, ny, State::zero()),
            cache: Cache2d::new(nx, ny),
            fxi: Field2::new(nx + 1, ny, State::zero()),
            fyi: Field2::new(nx, ny + 1, State::zero()),
            rhs_avg: Field2::new(nx, ny, State::zero()),
            rhs_c: Field2::new(nx + 1, ny + 1, State::zero()),
            rhs_fx: Field2::new(nx + 1, ny, State::zero()),
            rhs_fy: Field2::new(nx, ny + 1, State::zero()),
            lowx: Field2::new(nx + 1, ny, LowOrder::default()),
            lowy: Field2::new(nx, ny + 1, LowOrder::default()),
            bounds: Field2::new(nx, ny, (0.0, 0.0)),
            sensor: Field2::new(nx, ny, [0.0; 3]),
            theta: Theta2d::new(nx, ny),
            stats: StageStats::default(),
            grid,
        })
    }

    fn gamma(&self) -> Option<f64> {
        match self.sys.kind() {
            SystemKind::Euler { gamma } => Some(gamma),
            SystemKind::Scalar => None,
        }
    }

    fn nxy(&self) -> (isize, isize) {
        (self.grid.nx() as isize, self.grid.ny() as isize)
    }

    /// Calls `f` for every active interior DoF.
    fn for_active(&self, u: &DofField2d<M>, mut f: impl FnMut(Family, isize, isize, State<M>)) {
        for fam in Family::ALL {
            let act = self.mask.family(fam);
            let vals = u.family(fam);
            for j in 0..act.n2() as isize {
                for i in 0..act.n1() as isize {
                    if act.at(i, j) {
                        f(fam, i, j, vals.at(i, j));
                    }
                }
            }
        }
    }

    fn check_admissible(&self, u: &DofField2d<M>, t: f64) -> Result<(), Error> {
        let mut bad = None;
        self.for_active(u, |fam, i, j, v| {
            if bad.is_none() && !self.sys.is_admissible(&v) {
                bad = Some(format!("{fam:?} ({i}, {j}) = {:?}", v.0));
            }
        });
        let (nx, ny) = self.nxy();
        for j in -2..ny + 2 {
            for i in -2..nx + 2 {
                let v = u.avg.at(i, j);
                if bad.is_none() && !self.sys.is_admissible(&v) {
                    bad = Some(format!("ghost average ({i}, {j}) = {:?}", v.0));
                }
            }
        }
        match bad {
            Some(detail) => Err(Error::NegativeState { t, detail }),
            None => Ok(()),
        }
    }

    /// Extremes over active DoFs: first component and pressure.
    fn domain_extremes(&self, u: &DofField2d<M>) -> (f64, f64, f64) {
        let (mut lo, mut hi, mut p) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
        let g = self.gamma();
        self.for_active(u, |_, _, _, v| {
            lo = lo.min(v[0]);
            hi = hi.max(v[0]);
            if let Some(g) = g {
                p = p.min(euler_pressure(&v, g));
            }
        });
        (lo, hi, p)
    }

    fn fix_centers(&mut self, u: &DofField2d<M>, gamma: f64) {
        let (nx, ny) = self.nxy();
        for j in -2..ny + 2 {
            for i in -2..nx + 2 {
                let c = self.centers.at(i, j);
                let a = u.avg.at(i, j);
                let er = POSITIVITY_FLOOR.min(a[0]);
                let ep = POSITIVITY_FLOOR.min(euler_pressure(&a, gamma));
                if c[0] >= er && euler_pressure(&c, gamma) >= ep {
                    continue;
                }
                let (v, _) = scale_euler(&c, &a, er, ep, gamma);
                self.centers.set(i, j, v);
                self.stats.fixed_centers += 1;
            }
        }
    }

    fn cell_active(&self, i: isize, j: isize) -> bool {
        let (nx, ny) = self.nxy();
        i >= 0 && i < nx && j >= 0 && j < ny && self.mask.avg.at(i, j)
    }

    /// Replaces the high-order interface fluxes by limited ones and
    /// assembles the average right-hand side.
    fn limit_averages(&mut self, u: &DofField2d<M>, dt: f64) -> Result<(), Error> {
        let (nx, ny) = self.nxy();
        let sys = &self.sys;
        for j in -1..=ny {
            for k in -1..=nx + 1 {
                self.lowx.set(k, j, llf_low_order(sys, &u.avg.at(k - 1, j), &u.avg.at(k, j), Axis::X));
            }
        }
        for l in -1..=ny + 1 {
            for i in -1..=nx {
                self.lowy.set(i, l, llf_low_order(sys, &u.avg.at(i, l - 1), &u.avg.at(i, l), Axis::Y));
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                if !self.mask.avg.at(i, j) {
                    continue;
                }
                let ax = self.lowx.get(i, j).alpha + self.lowx.get(i + 1, j).alpha;
                let ay = self.lowy.get(i, j).alpha + self.lowy.get(i, j + 1).alpha;
                let need = 2.0 * dt * (ax / self.grid.x.dx(i)).max(ay / self.grid.y.dx(j));
                if need > 1.0 + DT_SLACK {
                    return Err(Error::StageRejected(format!(
                        "dt = {dt:e} exceeds the cell-average bound {:e} in cell ({i}, {j})",
                        dt / need
                    )));
                }
            }
        }
        let gamma = self.gamma();
        if gamma.is_some() {
            for (k, j, lo) in interfaces(nx, ny, Axis::X).map(|(k, j)| (k, j, self.lowx.get(k, j)))
                .chain(interfaces(nx, ny, Axis::Y).map(|(i, l)| (i, l, self.lowy.get(i, l))))
            {
                if !self.sys.is_admissible(&lo.tilde) {
                    return Err(Error::StageRejected(format!(
                        "intermediate state {:?} at ({k}, {j}) is not admissible",
                        lo.tilde.0
                    )));
                }
            }
        }

        let (glo, ghi, gp) = self.domain_extremes(u);
        let local = self.cfg.average_limiter == LimiterMode::Local;
        for j in -1..=ny {
            for i in -1..=nx {
                let tildes = [
                    self.lowx.get(i, j).tilde,
                    self.lowx.get(i + 1, j).tilde,
                    self.lowy.get(i, j).tilde,
                    self.lowy.get(i, j + 1).tilde,
                ];
                let b = match gamma {
                    None if local => {
                        let mut mn = u.avg.at(i, j)[0];
                        let mut mx = mn;
                        let nb = [u.avg.at(i - 1, j), u.avg.at(i + 1, j), u.avg.at(i, j - 1), u.avg.at(i, j + 1)];
                        for v in tildes.iter().chain(nb.iter()) {
                            mn = mn.min(v[0]);
                            mx = mx.max(v[0]);
                        }
                        (mn, mx)
                    }
                    None => (glo, ghi),
                    Some(g) => {
                        let mut r = POSITIVITY_FLOOR.min(glo);
                        let mut p = POSITIVITY_FLOOR.min(gp);
                        for v in &tildes {
                            r = r.min(v[0]);
                            p = p.min(euler_pressure(v, g));
                        }
                        (r, p)
                    }
                };
                self.bounds.set(i, j, b);
            }
        }

        let use_sensor = gamma.is_some() && self.cfg.kappa > 0.0;
        if let (true, Some(g)) = (use_sensor, gamma) {
            let vel = |v: &State<M>| (v[1] / v[0], v[2] / v[0]);
            for j in -1..=ny {
                for i in -1..=nx {
                    let p = |a: isize, b: isize| euler_pressure(&u.avg.at(a, b), g);
                    let phi1x = jameson(p(i - 1, j), p(i, j), p(i + 1, j));
                    let phi1y = jameson(p(i, j - 1), p(i, j), p(i, j + 1));
                    let (ue, ve) = vel(&u.avg.at(i + 1, j));
                    let (uw, vw) = vel(&u.avg.at(i - 1, j));
                    let (un, vn) = vel(&u.avg.at(i, j + 1));
                    let (us, vs) = vel(&u.avg.at(i, j - 1));
                    let hx = 2.0 / (self.grid.x.dx(i) + self.grid.x.dx(i + 1));
                    let hy = 2.0 / (self.grid.y.dx(j) + self.grid.y.dx(j + 1));
                    let div = (ue - uw) * hx + (vn - vs) * hy;
                    let curl = (ve - vw) * hx - (un - us) * hy;
                    self.sensor.set(i, j, [phi1x, phi1y, ducros_2d(div, curl)]);
                }
            }
        }

        self.theta.x.fill(1.0);
        self.theta.y.fill(1.0);
        for axis in Axis::BOTH {
            for (a, b) in interfaces(nx, ny, axis) {
                let (lo_cell, hi_cell) = match axis {
                    Axis::X => ((a - 1, b), (a, b)),
                    Axis::Y => ((a, b - 1), (a, b)),
                };
                if !self.cell_active(lo_cell.0, lo_cell.1) && !self.cell_active(hi_cell.0, hi_cell.1) {
                    continue;
                }
                let (lo, high) = match axis {
                    Axis::X => (self.lowx.at(a, b), self.fxi.at(a, b)),
                    Axis::Y => (self.lowy.at(a, b), self.fyi.at(a, b)),
                };
                let df = high - lo.flux;
                let bl = self.bounds.at(lo_cell.0, lo_cell.1);
                let bh = self.bounds.at(hi_cell.0, hi_cell.1);
                let (lim, th) = match gamma {
                    None => {
                        let d = limit_scalar(df[0], lo.alpha, lo.tilde[0], bl, bh);
                        let mut v = df;
                        v[0] = d;
                        (v, if df[0] != 0.0 { d / df[0] } else { 1.0 })
                    }
                    Some(g) => {
                        let (d, tp) = limit_euler(&df, lo.alpha, &lo.tilde, bl.0.min(bh.0), bl.1.min(bh.1), g);
                        let tr = if df[0] != 0.0 { d[0] / (df[0] * tp.max(f64::MIN_POSITIVE)) } else { 1.0 };
                        let mut th = tp * tr.clamp(0.0, 1.0);
                        let mut d = d;
                        if use_sensor {
                            let (sl, sh) = (self.sensor.at(lo_cell.0, lo_cell.1), self.sensor.at(hi_cell.0, hi_cell.1));
                            let c = if axis == Axis::X { 0 } else { 1 };
                            let ts = sensor_blend(self.cfg.kappa, (sl[c], sh[c]), (sl[2], sh[2]));
                            if ts < 1.0 && d.max_abs() > 0.0 {
                                self.stats.sensor_active += 1;
                            }
                            d = d * ts;
                            th *= ts;
                        }
                        (d, th)
                    }
                };
                if lim != df {
                    self.stats.limited_interfaces += 1;
                }
                let f = lo.flux + lim;
                match axis {
                    Axis::X => {
                        self.fxi.set(a, b, f);
                        self.theta.x.set(a, b, th);
                    }
                    Axis::Y => {
                        self.fyi.set(a, b, f);
                        self.theta.y.set(a, b, th);
                    }
                }
            }
        }
        average_rhs_2d(&self.grid, &self.fxi, &self.fyi, &mut self.rhs_avg);
        Ok(())
    }

    /// First-order LLF update of a point value from its neighbours along
    /// both axes; `hx`/`hy` are the divisors of the flux differences.
    #[allow(clippy::too_many_arguments)]
    fn fallback(
        &self,
        u: &State<M>,
        xn: (&State<M>, &State<M>),
        yn: (&State<M>, &State<M>),
        hx: f64,
        hy: f64,
        dt: f64,
    ) -> Fallback<M> {
        let sys = &self.sys;
        let r = |a: &State<M>, b: &State<M>, ax: Axis| sys.spectral_radius(a, ax).max(sys.spectral_radius(b, ax));
        let ax = r(xn.0, u, Axis::X) + r(u, xn.1, Axis::X);
        let ay = r(yn.0, u, Axis::Y) + r(u, yn.1, Axis::Y);
        let fx = llf_flux(sys, u, xn.1, Axis::X) - llf_flux(sys, xn.0, u, Axis::X);
        let fy = llf_flux(sys, u, yn.1, Axis::Y) - llf_flux(sys, yn.0, u, Axis::Y);
        let dt_max = 0.5 * (hx / ax).min(hy / ay);
        Fallback { value: *u - fx * (dt / hx) - fy * (dt / hy), dt_max }
    }

    fn limit_points(&mut self, u: &DofField2d<M>, dt: f64, out: &mut DofField2d<M>) -> Result<(), Error> {
        let (nx, ny) = self.nxy();
        let (glo, ghi, gp) = self.domain_extremes(u);
        let local = self.cfg.point_limiter == LimiterMode::Local;
        let gx = &self.grid.x;
        let gy = &self.grid.y;
        for fam in [Family::Corner, Family::FaceX, Family::FaceY] {
            let (n1, n2) = match fam {
                Family::Corner => (nx + 1, ny + 1),
                Family::FaceX => (nx + 1, ny),
                _ => (nx, ny + 1),
            };
            for j in 0..n2 {
                for i in 0..n1 {
                    if !self.mask.family(fam).at(i, j) {
                        continue;
                    }
                    let v = u.family(fam);
                    let c = v.at(i, j);
                    // x and y neighbours with the divisors of the fallback
                    let (xn, yn, hx, hy) = match fam {
                        Family::Corner => (
                            (v.at(i - 1, j), v.at(i + 1, j)),
                            (v.at(i, j - 1), v.at(i, j + 1)),
                            0.5 * (gx.dx(i - 1) + gx.dx(i)),
                            0.5 * (gy.dx(j - 1) + gy.dx(j)),
                        ),
                        Family::FaceX => (
                            (v.at(i - 1, j), v.at(i + 1, j)),
                            (u.corner.at(i, j), u.corner.at(i, j + 1)),
                            0.5 * (gx.dx(i - 1) + gx.dx(i)),
                            gy.dx(j),
                        ),
                        _ => (
                            (u.corner.at(i, j), u.corner.at(i + 1, j)),
                            (v.at(i, j - 1), v.at(i, j + 1)),
                            gx.dx(i),
                            0.5 * (gy.dx(j - 1) + gy.dx(j)),
                        ),
                    };
                    let fb = self.fallback(&c, (&xn.0, &xn.1), (&yn.0, &yn.1), hx, hy, dt);
                    if dt > fb.dt_max * (1.0 + DT_SLACK) {
                        return Err(Error::StageRejected(format!(
                            "dt = {dt:e} exceeds the point-value bound {:e} at {fam:?} ({i}, {j})",
                            fb.dt_max
                        )));
                    }
                    let low = fb.value;
                    let high = out.family(fam).at(i, j);
                    let (lim, th) = match self.gamma() {
                        None => {
                            let (mn, mx) = if local {
                                [xn.0, xn.1, yn.0, yn.1]
                                    .iter()
                                    .fold((c[0], c[0]), |(a, b), s| (a.min(s[0]), b.max(s[0])))
                            } else {
                                (glo, ghi)
                            };
                            let (val, th) = scale_scalar(high[0], low[0], mn, mx);
                            let mut s = high;
                            s[0] = val;
                            (s, th)
                        }
                        Some(g) => {
                            if !self.sys.is_admissible(&low) {
                                return Err(Error::StageRejected(format!(
                                    "first-order point update {:?} at {fam:?} ({i}, {j}) is not admissible",
                                    low.0
                                )));
                            }
                            let er = POSITIVITY_FLOOR.min(glo).min(low[0]);
                            let ep = POSITIVITY_FLOOR.min(gp).min(euler_pressure(&low, g));
                            scale_euler(&high, &low, er, ep, g)
                        }
                    };
                    if th < 1.0 {
                        self.stats.limited_points += 1;
                    }
                    out.family_mut(fam).set(i, j, lim);
                    let tf = match fam {
                        Family::Corner => &mut self.theta.corner,
                        Family::FaceX => &mut self.theta.fx,
                        _ => &mut self.theta.fy,
                    };
                    tf.set(i, j, th);
                }
            }
        }
        Ok(())
    }

    /// Ghost and solid values for time `t`.
    pub fn prepare(&self, u: &mut DofField2d<M>, t: f64) {
        fill_ghosts_2d(&self.sys, &self.grid, &self.bc, u, t);
        if let Some(o) = &self.obstacle {
            o.fill_solid(&self.sys, &self.grid, &self.mask, u);
        }
    }
}

/// Interior interfaces normal to `axis` as `(k, j)` or `(i, l)`.
fn interfaces(nx: isize, ny: isize, axis: Axis) -> impl Iterator<Item = (isize, isize)> {
    let (n1, n2) = match axis {
        Axis::X => (nx + 1, ny),
        Axis::Y => (nx, ny + 1),
    };
    (0..n2).flat_map(move |b| (0..n1).map(move |a| (a, b)))
}

/// Slip walls on domain sides and on obstacle faces.
fn build_walls<const M: usize>(
    grid: &Grid2d,
    bc: &Boundary<M>,
    obstacle: Option<&StepObstacle<M>>,
) -> Result<WallMap, Error> {
    let (nx, ny) = (grid.nx() as isize, grid.ny() as isize);
    let mut w = WallMap::none(nx as usize, ny as usize);
    for j in 0..ny {
        let y = grid.y.center(j);
        if bc.is_wall(Side::XLo, y) {
            w.x.set(0, j, Wall::FluidHigh);
        }
        if bc.is_wall(Side::XHi, y) {
            w.x.set(nx, j, Wall::FluidLow);
        }
    }
    for i in 0..nx {
        let x = grid.x.center(i);
        if bc.is_wall(Side::YLo, x) {
            w.y.set(i, 0, Wall::FluidHigh);
        }
        if bc.is_wall(Side::YHi, x) {
            w.y.set(i, ny, Wall::FluidLow);
        }
    }
    if let Some(o) = obstacle {
        let (k0, l0) = o.wall_nodes(grid)?;
        for j in 0..l0 {
            if k0 > 0 {
                w.x.set(k0, j, Wall::FluidLow);
            }
        }
        for i in k0..nx {
            if l0 < ny {
                w.y.set(i, l0, Wall::FluidHigh);
            }
        }
    }
    w.any = w.x.interior().any(|v| v != Wall::None) || w.y.interior().any(|v| v != Wall::None);
    Ok(w)
}

impl<S: ConservationLaw<M>, const M: usize> Stepper for Solver2d<S, M> {
    type Field = DofField2d<M>;

    fn euler_step(&mut self, u: &mut DofField2d<M>, t: f64, dt: f64) -> Result<DofField2d<M>, Error> {
        self.prepare(u, t);
        self.check_admissible(u, t)?;
        self.theta.reset();
        let (nx, ny) = self.nxy();
        centers_2d(u, &mut self.centers);
        if let Some(g) = self.gamma() {
            if self.cfg.any_limiter() {
                self.fix_centers(u, g);
            } else if self.cfg.point_update.is_fvs() {
                for j in -1..=ny {
                    for i in -1..=nx {
                        let c = self.centers.at(i, j);
                        if !self.sys.is_admissible(&c) {
                            return Err(Error::NegativeState {
                                t,
                                detail: format!("cell-center value ({i}, {j}) = {:?}", c.0),
                            });
                        }
                    }
                }
            }
        }
        let kind = self.cfg.point_update;
        self.cache.build(&self.sys, kind, u, &self.centers)?;
        interface_fluxes_2d(&self.sys, u, &self.centers, &self.cache, &self.walls, &mut self.fxi, &mut self.fyi);
        corner_rhs_2d(&self.sys, &self.grid, kind, u, &self.cache, &mut self.rhs_c);
        face_x_rhs_2d(&self.sys, &self.grid, kind, u, &self.centers, &self.cache, &mut self.rhs_fx);
        face_y_rhs_2d(&self.sys, &self.grid, kind, u, &self.centers, &self.cache, &mut self.rhs_fy);

        if self.cfg.average_limiter.is_on() {
            self.limit_averages(u, dt)?;
        } else {
            average_rhs_2d(&self.grid, &self.fxi, &self.fyi, &mut self.rhs_avg);
        }
        let mut out = u.clone();
        let updates: [(Family, &Field2<State<M>>); 4] = [
            (Family::Average, &self.rhs_avg),
            (Family::Corner, &self.rhs_c),
            (Family::FaceX, &self.rhs_fx),
            (Family::FaceY, &self.rhs_fy),
        ];
        for (fam, rhs) in updates {
            let act = self.mask.family(fam);
            let dst = out.family_mut(fam);
            for j in 0..act.n2() as isize {
                for i in 0..act.n1() as isize {
                    if act.at(i, j) {
                        let v = *dst.get(i, j) + rhs.at(i, j) * dt;
                        dst.set(i, j, v);
                    }
                }
            }
        }
        if self.cfg.point_limiter.is_on() {
            self.limit_points(u, dt, &mut out)?;
        }
        if self.cfg.fully_limited() && self.gamma().is_some() {
            let mut bad = None;
            self.for_active(&out, |fam, i, j, v| {
                if bad.is_none() && !self.sys.is_admissible(&v) {
                    bad = Some(format!("{fam:?} ({i}, {j}) = {:?} at t = {t}", v.0));
                }
            });
            if let Some(b) = bad {
                return Err(Error::BoundViolation(b));
            }
        }
        Ok(out)
    }

    fn stable_dt(&mut self, u: &mut DofField2d<M>, t: f64) -> Result<f64, Error> {
        self.prepare(u, t);
        let (hx, hy) = (self.grid.x.min_dx(), self.grid.y.min_dx());
        let mut smax: f64 = 0.0;
        let mut bad = None;
        self.for_active(u, |_, _, _, v| {
            let s = self.sys.spectral_radius(&v, Axis::X) / hx + self.sys.spectral_radius(&v, Axis::Y) / hy;
            if !s.is_finite() && bad.is_none() {
                bad = Some(format!("no finite wave speed for {:?}", v.0));
            }
            smax = smax.max(s);
        });
        if let Some(detail) = bad {
            return Err(Error::NegativeState { t, detail });
        }
        Ok(if smax > 0.0 { self.cfg.cfl / smax } else { f64::INFINITY })
    }

    fn summary(&self, u: &DofField2d<M>) -> FieldSummary {
        let (lo, hi, p) = self.domain_extremes(u);
        let mut tot = State::<M>::zero();
        for j in 0..self.grid.ny() as isize {
            for i in 0..self.grid.nx() as isize {
                if self.mask.avg.at(i, j) {
                    tot += u.avg.at(i, j) * self.grid.cell_area(i, j);
                }
            }
        }
        FieldSummary {
            totals: tot.0.to_vec(),
            min_value: lo,
            max_value: hi,
            min_pressure: self.gamma().map(|_| p),
        }
    }

    fn take_stats(&mut self) -> StageStats {
        std::mem::take(&mut self.stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bc::SideBc;
    use crate::march::{advance_with_retry, integrate, RunOptions};
    use crate::meshstate::dof_position;
    use crate::meshstate::quadrature::average_2d;
    use crate::splitting::PointUpdate;
    use crate::systems::{Burgers, Euler2d, LinearAdvection};
    use std::f64::consts::PI;

    fn init<const M: usize>(g: &Grid2d, f: impl Fn(f64, f64) -> State<M>) -> DofField2d<M> {
        let mut d = DofField2d::new(g.nx(), g.ny());
        for fam in Family::ALL {
            let (n1, n2) = {
                let v = d.family(fam);
                (v.n1() as isize, v.n2() as isize)
            };
            for j in 0..n2 {
                for i in 0..n1 {
                    let v = if fam == Family::Average {
                        average_2d(&f, (g.x.node(i), g.x.node(i + 1)), (g.y.node(j), g.y.node(j + 1)), 1)
                    } else {
                        let (x, y) = dof_position(g, fam, i, j);
                        f(x, y)
                    };
                    d.family_mut(fam).set(i, j, v);
                }
            }
        }
        d
    }

    fn opts(t_end: f64) -> RunOptions {
        RunOptions { t_end, max_steps: None, max_retries: 20 }
    }

    fn sine_error(n: usize, kind: PointUpdate) -> f64 {
        let adv = LinearAdvection { velocity: [1.0, 1.0] };
        let g = Grid2d::uniform((0.0, 1.0), (0.0, 1.0), n, n).unwrap();
        let f = |x: f64, y: f64| State([(2.0 * PI * (x + y)).sin()]);
        let mut s = Solver2d::new(adv, g.clone(), Boundary::periodic(), SchemeConfig::unlimited(kind, 0.3), None).unwrap();
        let r = integrate(&mut s, init(&g, f), 0.0, opts(0.5), |_, _, _| {}).unwrap();
        let exact = init(&g, f);
        let mut e = 0.0;
        for j in 0..n as isize {
            for i in 0..n as isize {
                e += (r.u.avg.at(i, j)[0] - exact.avg.at(i, j)[0]).abs() * g.cell_area(i, j);
            }
        }
        e
    }

    #[test]
    fn advection_is_third_order() {
        for kind in [PointUpdate::Js, PointUpdate::LlfFvs, PointUpdate::SwFvs] {
            let rate = (sine_error(10, kind) / sine_error(20, kind)).log2();
            assert!(rate > 2.6, "{kind:?}: {rate}");
        }
    }

    #[test]
    fn limited_square_wave_respects_bounds_and_mass() {
        let adv = LinearAdvection { velocity: [1.0, 0.5] };
        let g = Grid2d::uniform((0.0, 1.0), (0.0, 1.0), 20, 20).unwrap();
        let f = |x: f64, y: f64| State([if (x - 0.5).abs() < 0.2 && (y - 0.5).abs() < 0.2 { 1.0 } else { 0.0 }]);
        let u0 = init(&g, f);
        let mut s = Solver2d::new(adv, g.clone(), Boundary::periodic(), SchemeConfig::default(), None).unwrap();
        let m0 = s.summary(&u0).totals[0];
        let r = integrate(&mut s, u0, 0.0, opts(0.3), |_, _, _| {}).unwrap();
        let sm = s.summary(&r.u);
        assert!(sm.min_value >= -1e-13 && sm.max_value <= 1.0 + 1e-13, "{sm:?}");
        assert!((sm.totals[0] - m0).abs() < 1e-13);
        assert_eq!(r.u.corner.at(0, 3), r.u.corner.at(20, 3));
        assert_eq!(r.u.fx.at(0, 7), r.u.fx.at(20, 7));
    }

    #[test]
    fn burgers_limited_global_bounds() {
        let g = Grid2d::uniform((0.0, 1.0), (0.0, 1.0), 16, 16).unwrap();
        let f = |x: f64, y: f64| State([0.25 + 0.5 * (2.0 * PI * (x + y)).sin()]);
        let mut cfg = SchemeConfig::default();
        cfg.average_limiter = LimiterMode::Global;
        cfg.point_limiter = LimiterMode::Global;
        let mut s = Solver2d::new(Burgers, g.clone(), Boundary::periodic(), cfg, None).unwrap();
        let r = integrate(&mut s, init(&g, f), 0.0, opts(0.3), |_, _, _| {}).unwrap();
        let sm = s.summary(&r.u);
        assert!(sm.min_value >= -0.25 - 1e-12 && sm.max_value <= 0.75 + 1e-12, "{sm:?}");
    }

    #[test]
    fn uniform_flow_past_walls_stays_uniform_at_rest() {
        let e = Euler2d::new(1.4).unwrap();
        let rest = e.conserved(1.0, [0.0, 0.0], 1.0);
        let g = Grid2d::uniform((0.0, 1.0), (0.0, 1.0), 10, 10).unwrap();
        let obs = StepObstacle { x0: 0.6, y_top: 0.2, fill: rest };
        let bc = Boundary::all(SideBc::Reflective);
        let mut s = Solver2d::new(e, g.clone(), bc, SchemeConfig::default(), Some(obs)).unwrap();
        let r = integrate(&mut s, init(&g, |_, _| rest), 0.0, opts(0.1), |_, _, _| {}).unwrap();
        s.for_active(&r.u, |fam, i, j, v| {
            assert!((v - rest).max_abs() < 1e-13, "{fam:?} {i} {j} {:?}", v.0);
        });
    }

    #[test]
    fn oversized_step_is_halved_twice() {
        let adv = LinearAdvection { velocity: [1.0, 0.0] };
        let g = Grid2d::uniform((0.0, 1.0), (0.0, 1.0), 10, 10).unwrap();
        let mut s = Solver2d::new(adv, g.clone(), Boundary::periodic(), SchemeConfig::default(), None).unwrap();
        let mut u = init(&g, |_, _| State([1.0]));
        // the binding constraint is dt <= dx / 4 = 0.025
        let out = advance_with_retry(&mut s, &mut u, 0.0, 0.1, 20).unwrap();
        assert_eq!(out.halvings, 2);
    }

    #[test]
    fn blast_with_limiters_stays_positive() {
        let e = Euler2d::new(1.4).unwrap();
        let g = Grid2d::uniform((-1.0, 1.0), (-1.0, 1.0), 20, 20).unwrap();
        let f = move |x: f64, y: f64| {
            let p = if x * x + y * y < 0.04 { 1e4 } else { 1e-6 };
            e.conserved(1.0, [0.0, 0.0], p)
        };
        let mut cfg = SchemeConfig::default();
        cfg.cfl = 0.2;
        cfg.kappa = 1.0;
        let mut s = Solver2d::new(e, g.clone(), Boundary::all(SideBc::Outflow), cfg, None).unwrap();
        let r = integrate(&mut s, init(&g, f), 0.0, opts(1e-3), |_, _, _| {}).unwrap();
        s.for_active(&r.u, |_, _, _, v| assert!(e.is_admissible(&v)));
    }
}

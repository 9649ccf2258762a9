//! Limited forward-Euler stage of the 1D Active Flux method.

use crate::bc::{fill_ghosts_1d, Boundary, SideBc};
use crate::bpaverage::{
    ducros_1d, jameson, limit_euler, limit_scalar, llf_flux, llf_low_order, sensor_blend, LowOrder,
    POSITIVITY_FLOOR,
};
use crate::bppoint::{scale_euler, scale_scalar};
use crate::march::{FieldSummary, Stepper};
use crate::meshstate::{DofField1d, Field1, Grid1d, State};
use crate::scheme::{LimiterMode, SchemeConfig, StageStats};
use crate::semidiscrete::{average_rhs_1d, centers_1d, interface_fluxes_1d, point_rhs_1d, PointData};
use crate::systems::{euler_pressure, Axis, ConservationLaw, SystemKind};
use crate::Error;

/// Relative slack accepted when checking time-step constraints.
const DT_SLACK: f64 = 1e-12;

pub struct Solver1d<S, const M: usize> {
    pub sys: S,
    pub grid: Grid1d,
    pub bc: Boundary<M>,
    pub cfg: SchemeConfig,
    walls: [bool; 2],
    periodic: bool,
    centers: Field1<State<M>>,
    fluxes: Vec<State<M>>,
    avg_rhs: Vec<State<M>>,
    pt_rhs: Vec<State<M>>,
    pdata: Vec<PointData<M>>,
    low: Vec<LowOrder<M>>,
    /// Per-cell bounds for indices `-1..=n` (stored shifted by one).
    bounds: Vec<(f64, f64)>,
    floors: Vec<(f64, f64)>,
    stats: StageStats,
}

/// Shift for arrays covering cells `-1..=n`.
const SH: isize = 1;

impl<S: ConservationLaw<M>, const M: usize> Solver1d<S, M> {
    pub fn new(sys: S, grid: Grid1d, bc: Boundary<M>, cfg: SchemeConfig) -> Result<Self, Error> {
        cfg.validate(sys.kind())?;
        bc.validate(1)?;
        let n = grid.n();
        let walls = [
            matches!(bc.x_lo.resolve(0.0), SideBc::Reflective),
            matches!(bc.x_hi.resolve(0.0), SideBc::Reflective),
        ];
        let periodic = matches!(bc.x_lo, SideBc::Periodic);
        Ok(Solver1d {
            sys,
            walls,
            periodic,
            centers: Field1::new(n, State::zero()),
            fluxes: vec![State::zero(); n + 1],
            avg_rhs: vec![State::zero(); n],
            pt_rhs: vec![State::zero(); n + 1],
            pdata: Vec::with_capacity(2 * n + 8),
            low: vec![LowOrder::default(); n + 1],
            bounds: vec![(0.0, 0.0); n + 2],
            floors: vec![(0.0, 0.0); n + 2],
            stats: StageStats::default(),
            grid,
            bc,
            cfg,
        })
    }

    fn gamma(&self) -> Option<f64> {
        match self.sys.kind() {
            SystemKind::Euler { gamma } => Some(gamma),
            SystemKind::Scalar => None,
        }
    }

    fn check_admissible(&self, u: &DofField1d<M>, t: f64) -> Result<(), Error> {
        let n = self.grid.n() as isize;
        for i in -2..n + 2 {
            let v = u.avg.at(i);
            if !self.sys.is_admissible(&v) {
                return Err(Error::NegativeState {
                    t,
                    detail: format!("cell average {i} = {:?}", v.0),
                });
            }
        }
        for k in -2..=n + 2 {
            let v = u.pts.at(k);
            if !self.sys.is_admissible(&v) {
                return Err(Error::NegativeState {
                    t,
                    detail: format!("point value {k} = {:?}", v.0),
                });
            }
        }
        Ok(())
    }

    /// Pulls inadmissible cell-center values towards the cell average.
    fn fix_centers(&mut self, u: &DofField1d<M>, gamma: f64) {
        let n = self.grid.n() as isize;
        for i in -2..n + 2 {
            let c = self.centers.at(i);
            let a = u.avg.at(i);
            let er = POSITIVITY_FLOOR.min(a[0]);
            let ep = POSITIVITY_FLOOR.min(euler_pressure(&a, gamma));
            if c[0] >= er && euler_pressure(&c, gamma) >= ep {
                continue;
            }
            let (v, _) = scale_euler(&c, &a, er, ep, gamma);
            self.centers.set(i, v);
            self.stats.fixed_centers += 1;
        }
    }

    /// Global extremes of the first component and of the pressure over the
    /// interior DoFs.
    fn domain_extremes(&self, u: &DofField1d<M>) -> (f64, f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut pmin = f64::INFINITY;
        for v in u.interior_values() {
            lo = lo.min(v[0]);
            hi = hi.max(v[0]);
            if let Some(g) = self.gamma() {
                pmin = pmin.min(euler_pressure(&v, g));
            }
        }
        (lo, hi, pmin)
    }

    fn ghost_bounds(&self, b: &mut [(f64, f64)]) {
        let n = self.grid.n() as isize;
        let at = |i: isize| (i + SH) as usize;
        if self.periodic {
            b[at(-1)] = b[at(n - 1)];
            b[at(n)] = b[at(0)];
        } else {
            b[at(-1)] = b[at(0)];
            b[at(n)] = b[at(n - 1)];
        }
    }

    fn limit_averages(&mut self, u: &DofField1d<M>, dt: f64, out: &mut DofField1d<M>) -> Result<(), Error> {
        let n = self.grid.n() as isize;
        let at = |i: isize| (i + SH) as usize;
        for k in 0..=n {
            self.low[k as usize] = llf_low_order(&self.sys, &u.avg.at(k - 1), &u.avg.at(k), Axis::X);
        }
        for i in 0..n {
            let a = self.low[i as usize].alpha + self.low[i as usize + 1].alpha;
            if dt * a > self.grid.dx(i) * (1.0 + DT_SLACK) {
                return Err(Error::StageRejected(format!(
                    "dt = {dt:e} exceeds the cell-average bound {:e} in cell {i}",
                    self.grid.dx(i) / a
                )));
            }
        }
        let (glo, ghi, gp) = self.domain_extremes(u);
        match self.gamma() {
            None => {
                for i in 0..n {
                    let b = if self.cfg.average_limiter == LimiterMode::Local {
                        let vals = [
                            u.avg.at(i)[0],
                            u.avg.at(i - 1)[0],
                            u.avg.at(i + 1)[0],
                            self.low[i as usize].tilde[0],
                            self.low[i as usize + 1].tilde[0],
                        ];
                        vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
                    } else {
                        (glo, ghi)
                    };
                    self.bounds[at(i)] = b;
                }
                let mut b = std::mem::take(&mut self.bounds);
                self.ghost_bounds(&mut b);
                self.bounds = b;
            }
            Some(g) => {
                for lo in &self.low {
                    if !self.sys.is_admissible(&lo.tilde) {
                        return Err(Error::StageRejected(format!(
                            "intermediate state {:?} is not admissible",
                            lo.tilde.0
                        )));
                    }
                }
                let er = POSITIVITY_FLOOR.min(glo);
                let ep = POSITIVITY_FLOOR.min(gp);
                for i in 0..n {
                    let (tl, tr) = (&self.low[i as usize].tilde, &self.low[i as usize + 1].tilde);
                    let r = er.min(tl[0]).min(tr[0]);
                    let p = ep.min(euler_pressure(tl, g)).min(euler_pressure(tr, g));
                    self.floors[at(i)] = (r, p);
                }
                let mut b = std::mem::take(&mut self.floors);
                self.ghost_bounds(&mut b);
                self.floors = b;
            }
        }

        // sensor per cell -1..=n
        let sensor = match self.gamma() {
            Some(g) if self.cfg.kappa > 0.0 => {
                let mut s = vec![(0.0, 0.0); (n + 2) as usize];
                for i in -1..=n {
                    let (am, a, ap) = (u.avg.at(i - 1), u.avg.at(i), u.avg.at(i + 1));
                    let phi1 = jameson(euler_pressure(&am, g), euler_pressure(&a, g), euler_pressure(&ap, g));
                    let phi2 = ducros_1d(am[1] / am[0], ap[1] / ap[0]);
                    s[at(i)] = (phi1, phi2);
                }
                Some(s)
            }
            _ => None,
        };

        for k in 0..=n {
            let lo = self.low[k as usize];
            let df = self.fluxes[k as usize] - lo.flux;
            let lim = match self.gamma() {
                None => {
                    let d = limit_scalar(df[0], lo.alpha, lo.tilde[0], self.bounds[at(k - 1)], self.bounds[at(k)]);
                    if d != df[0] {
                        self.stats.limited_interfaces += 1;
                    }
                    let mut v = df;
                    v[0] = d;
                    v
                }
                Some(g) => {
                    let (fl, fr) = (self.floors[at(k - 1)], self.floors[at(k)]);
                    let (d, th) = limit_euler(&df, lo.alpha, &lo.tilde, fl.0.min(fr.0), fl.1.min(fr.1), g);
                    if th < 1.0 || d[0] != df[0] {
                        self.stats.limited_interfaces += 1;
                    }
                    match &sensor {
                        Some(s) => {
                            let (a, b) = (s[at(k - 1)], s[at(k)]);
                            let ts = sensor_blend(self.cfg.kappa, (a.0, b.0), (a.1, b.1));
                            if ts < 1.0 {
                                self.stats.sensor_active += 1;
                            }
                            d * ts
                        }
                        None => d,
                    }
                }
            };
            self.fluxes[k as usize] = lo.flux + lim;
        }
        for i in 0..n {
            let r = (self.fluxes[i as usize + 1] - self.fluxes[i as usize]) * (dt / self.grid.dx(i));
            out.avg.set(i, u.avg.at(i) - r);
        }
        Ok(())
    }

    fn limit_points(&mut self, u: &DofField1d<M>, dt: f64, out: &mut DofField1d<M>) -> Result<(), Error> {
        let n = self.grid.n() as isize;
        let sys = &self.sys;
        let alpha = |a: &State<M>, b: &State<M>| {
            sys.spectral_radius(a, Axis::X).max(sys.spectral_radius(b, Axis::X))
        };
        for k in 0..=n {
            let (ul, uc, ur) = (u.pts.at(k - 1), u.pts.at(k), u.pts.at(k + 1));
            let h = self.grid.dx(k - 1) + self.grid.dx(k);
            let a = alpha(&ul, &uc) + alpha(&uc, &ur);
            if 2.0 * dt * a > h * (1.0 + DT_SLACK) {
                return Err(Error::StageRejected(format!(
                    "dt = {dt:e} exceeds the point-value bound {:e} at point {k}",
                    h / (2.0 * a)
                )));
            }
        }
        let (glo, ghi, gp) = self.domain_extremes(u);
        for k in 0..=n {
            let (ul, uc, ur) = (u.pts.at(k - 1), u.pts.at(k), u.pts.at(k + 1));
            let mu = 2.0 * dt / (self.grid.dx(k - 1) + self.grid.dx(k));
            let low = uc - (llf_flux(sys, &uc, &ur, Axis::X) - llf_flux(sys, &ul, &uc, Axis::X)) * mu;
            let high = out.pts.at(k);
            let (v, th) = match self.gamma() {
                None => {
                    let (mn, mx) = if self.cfg.point_limiter == LimiterMode::Local {
                        (ul[0].min(uc[0]).min(ur[0]), ul[0].max(uc[0]).max(ur[0]))
                    } else {
                        (glo, ghi)
                    };
                    let (v, th) = scale_scalar(high[0], low[0], mn, mx);
                    let mut s = high;
                    s[0] = v;
                    (s, th)
                }
                Some(g) => {
                    if !sys.is_admissible(&low) {
                        return Err(Error::StageRejected(format!(
                            "first-order point update {:?} at {k} is not admissible",
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
            out.pts.set(k, v);
        }
        Ok(())
    }
}

impl<S: ConservationLaw<M>, const M: usize> Stepper for Solver1d<S, M> {
    type Field = DofField1d<M>;

    fn euler_step(&mut self, u: &mut DofField1d<M>, t: f64, dt: f64) -> Result<DofField1d<M>, Error> {
        fill_ghosts_1d(&self.sys, &self.grid, &self.bc, u, t);
        self.check_admissible(u, t)?;
        let n = self.grid.n();
        centers_1d(u, &mut self.centers);
        if let Some(g) = self.gamma() {
            if self.cfg.any_limiter() {
                self.fix_centers(u, g);
            } else if self.cfg.point_update.is_fvs() {
                for i in -1..=n as isize {
                    let c = self.centers.at(i);
                    if !self.sys.is_admissible(&c) {
                        return Err(Error::NegativeState {
                            t,
                            detail: format!("cell-center value {i} = {:?}", c.0),
                        });
                    }
                }
            }
        }
        interface_fluxes_1d(&self.sys, u, &self.centers, self.walls, &mut self.fluxes);
        point_rhs_1d(
            &self.sys,
            &self.grid,
            self.cfg.point_update,
            u,
            &self.centers,
            &mut self.pdata,
            &mut self.pt_rhs,
        )?;
        let mut out = u.clone();
        for k in 0..=n {
            out.pts.set(k as isize, u.pts.at(k as isize) + self.pt_rhs[k] * dt);
        }
        if self.cfg.average_limiter.is_on() {
            self.limit_averages(u, dt, &mut out)?;
        } else {
            average_rhs_1d(&self.grid, &self.fluxes, &mut self.avg_rhs);
            for i in 0..n {
                out.avg.set(i as isize, u.avg.at(i as isize) + self.avg_rhs[i] * dt);
            }
        }
        if self.cfg.point_limiter.is_on() {
            self.limit_points(u, dt, &mut out)?;
        }
        if self.cfg.fully_limited() && self.gamma().is_some() {
            for v in out.interior_values() {
                if !self.sys.is_admissible(&v) {
                    return Err(Error::BoundViolation(format!(
                        "state {:?} left the admissible set at t = {t}",
                        v.0
                    )));
                }
            }
        }
        Ok(out)
    }

    fn stable_dt(&mut self, u: &mut DofField1d<M>, t: f64) -> Result<f64, Error> {
        fill_ghosts_1d(&self.sys, &self.grid, &self.bc, u, t);
        let mut smax: f64 = 0.0;
        for v in u.interior_values() {
            let r = self.sys.spectral_radius(&v, Axis::X);
            if !r.is_finite() {
                return Err(Error::NegativeState {
                    t,
                    detail: format!("no finite wave speed for {:?}", v.0),
                });
            }
            smax = smax.max(r);
        }
        Ok(if smax > 0.0 {
            self.cfg.cfl * self.grid.min_dx() / smax
        } else {
            f64::INFINITY
        })
    }

    fn summary(&self, u: &DofField1d<M>) -> FieldSummary {
        let (lo, hi, p) = self.domain_extremes(u);
        FieldSummary {
            totals: u.total(&self.grid).0.to_vec(),
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
    use crate::march::{advance_with_retry, integrate, RunOptions};
    use crate::meshstate::quadrature::average_1d;
    use crate::splitting::PointUpdate;
    use crate::systems::{Burgers, Euler1d, LinearAdvection};
    use std::f64::consts::PI;

    fn init<const M: usize>(g: &Grid1d, f: impl Fn(f64) -> State<M>) -> DofField1d<M> {
        let mut d = DofField1d::new(g.n());
        for i in 0..g.n() as isize {
            d.avg.set(i, average_1d(&f, g.node(i), g.node(i + 1), 1));
        }
        for k in 0..=g.n() as isize {
            d.pts.set(k, f(g.node(k)));
        }
        d
    }

    fn sine_error(n: usize, kind: PointUpdate) -> f64 {
        let adv = LinearAdvection { velocity: [1.0, 0.0] };
        let g = Grid1d::uniform(0.0, 1.0, n).unwrap();
        let f = |x: f64| State([(2.0 * PI * x).sin()]);
        let u0 = init(&g, f);
        let mut s = Solver1d::new(adv, g.clone(), Boundary::periodic(), SchemeConfig::unlimited(kind, 0.4)).unwrap();
        let r = integrate(&mut s, u0, 0.0, RunOptions { t_end: 1.0, max_steps: None, max_retries: 20 }, |_, _, _| {}).unwrap();
        let exact = init(&g, f);
        (0..n as isize).map(|i| (r.u.avg.at(i)[0] - exact.avg.at(i)[0]).abs() / n as f64).sum()
    }

    #[test]
    fn advection_is_third_order() {
        for kind in [PointUpdate::Js, PointUpdate::LlfFvs, PointUpdate::SwFvs] {
            let rate = (sine_error(20, kind) / sine_error(40, kind)).log2();
            assert!(rate > 2.7, "{kind:?}: {rate}");
        }
    }

    #[test]
    fn periodic_duplicate_points_stay_identical() {
        let g = Grid1d::uniform(-1.0, 1.0, 16).unwrap();
        let u0 = init(&g, |x| State([if x.abs() < 0.5 { 1.0 } else { 0.0 }]));
        let mut s = Solver1d::new(Burgers, g, Boundary::periodic(), SchemeConfig::default()).unwrap();
        let r = integrate(&mut s, u0, 0.0, RunOptions { t_end: 0.3, max_steps: None, max_retries: 20 }, |_, _, _| {}).unwrap();
        assert_eq!(r.u.pts.at(0), r.u.pts.at(16));
        for v in r.u.interior_values() {
            assert!(v[0] >= -1e-12 && v[0] <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn mass_is_conserved() {
        let g = Grid1d::uniform(0.0, 1.0, 32).unwrap();
        let u0 = init(&g, |x| State([0.5 + (2.0 * PI * x).sin()]));
        let m0 = u0.total(&g)[0];
        let mut s = Solver1d::new(Burgers, g.clone(), Boundary::periodic(), SchemeConfig::default()).unwrap();
        let r = integrate(&mut s, u0, 0.0, RunOptions { t_end: 0.3, max_steps: None, max_retries: 20 }, |_, _, _| {}).unwrap();
        assert!((r.u.total(&g)[0] - m0).abs() < 1e-13);
    }

    #[test]
    fn oversized_step_is_halved_twice() {
        let adv = LinearAdvection { velocity: [1.0, 0.0] };
        let g = Grid1d::uniform(0.0, 1.0, 10).unwrap();
        let u0 = init(&g, |_| State([1.0]));
        let mut s = Solver1d::new(adv, g, Boundary::periodic(), SchemeConfig::default()).unwrap();
        // the point constraint gives dt <= (2 dx) / (2 * 2) = dx / 2
        let mut u = u0.clone();
        let out = advance_with_retry(&mut s, &mut u, 0.0, 4.0 * 0.05, 20).unwrap();
        assert_eq!(out.halvings, 2);
        assert_eq!(out.dt, 0.05);
    }

    #[test]
    fn unlimited_euler_reports_negative_state() {
        let e = Euler1d::new(1.4).unwrap();
        let g = Grid1d::uniform(0.0, 1.0, 50).unwrap();
        let u0 = init(&g, |x| if x < 0.5 { e.conserved(7.0, [-2.0, 0.0], 0.2) } else { e.conserved(7.0, [2.0, 0.0], 0.2) });
        let bc = Boundary::all(SideBc::Outflow);
        let mut s = Solver1d::new(e, g, bc, SchemeConfig::unlimited(PointUpdate::LlfFvs, 0.4)).unwrap();
        let r = integrate(&mut s, u0, 0.0, RunOptions { t_end: 0.3, max_steps: None, max_retries: 20 }, |_, _, _| {});
        assert!(matches!(r.err().unwrap(), Error::NegativeState { .. }));
    }
}

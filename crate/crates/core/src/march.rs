//! Third-order strong-stability-preserving Runge-Kutta time marching with
//! time-step halving on rejected stages.

use serde::{Deserialize, Serialize};

use crate::meshstate::DofVector;
use crate::scheme::StageStats;
use crate::Error;

/// Snapshot of a field used in step reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldSummary {
    /// Domain integrals of the conserved variables.
    pub totals: Vec<f64>,
    /// Extremes of the first component over every DoF.
    pub min_value: f64,
    pub max_value: f64,
    /// Extremes of pressure (Euler only).
    pub min_pressure: Option<f64>,
}

/// A semi-discretization that can take limited forward-Euler steps.
pub trait Stepper {
    type Field: DofVector;

    /// One forward-Euler step of length `dt` from `u` at time `t`. Ghost
    /// values of `u` are refreshed in place.
    fn euler_step(&mut self, u: &mut Self::Field, t: f64, dt: f64) -> Result<Self::Field, Error>;

    /// Largest step allowed by the CFL condition.
    fn stable_dt(&mut self, u: &mut Self::Field, t: f64) -> Result<f64, Error>;

    fn summary(&self, u: &Self::Field) -> FieldSummary;

    /// Counters accumulated since the last call.
    fn take_stats(&mut self) -> StageStats;
}

/// `U1 = FE(Un)`, `U2 = 3/4 Un + 1/4 FE(U1)`, `Un+1 = 1/3 Un + 2/3 FE(U2)`.
/// Stage times are `t`, `t + dt` and `t + dt/2`.
pub fn ssp_rk3_step<P: Stepper>(
    op: &mut P,
    u: &mut P::Field,
    t: f64,
    dt: f64,
) -> Result<P::Field, Error> {
    let mut u1 = op.euler_step(u, t, dt)?;
    let mut u2 = op.euler_step(&mut u1, t + dt, dt)?;
    u2.scale_add(0.25, u, 0.75);
    let mut u3 = op.euler_step(&mut u2, t + 0.5 * dt, dt)?;
    u3.scale_add(2.0 / 3.0, u, 1.0 / 3.0);
    Ok(u3)
}

pub struct StepOutcome<F> {
    pub u: F,
    pub dt: f64,
    pub halvings: usize,
}

/// Attempts a step of size `dt`, halving it after every retryable
/// rejection. The input state is left untouched apart from ghost values.
pub fn advance_with_retry<P: Stepper>(
    op: &mut P,
    u: &mut P::Field,
    t: f64,
    dt: f64,
    max_retries: usize,
) -> Result<StepOutcome<P::Field>, Error> {
    let mut dt = dt;
    let mut last = String::new();
    for halvings in 0..=max_retries {
        match ssp_rk3_step(op, u, t, dt) {
            Ok(v) => return Ok(StepOutcome { u: v, dt, halvings }),
            Err(e) if e.is_retryable() => {
                last = e.to_string();
                op.take_stats();
                dt *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::RetriesExhausted {
        retries: max_retries,
        t,
        last,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub halvings: usize,
    pub summary: FieldSummary,
    pub stats: StageStats,
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub t_end: f64,
    /// Stop after this many steps even if `t_end` is not reached.
    pub max_steps: Option<usize>,
    pub max_retries: usize,
}

pub struct RunResult<F> {
    pub u: F,
    pub t: f64,
    pub steps: Vec<StepReport>,
    pub initial: FieldSummary,
}

/// Marches from `t0` to `opts.t_end`. `observer` sees every accepted step
/// together with the stepper.
pub fn integrate<P: Stepper>(
    op: &mut P,
    u0: P::Field,
    t0: f64,
    opts: RunOptions,
    mut observer: impl FnMut(&StepReport, &P::Field, &P),
) -> Result<RunResult<P::Field>, Error> {
    let mut u = u0;
    let mut t = t0;
    let initial = op.summary(&u);
    let mut steps = Vec::new();
    op.take_stats();
    while t < opts.t_end {
        if opts.max_steps.is_some_and(|m| steps.len() >= m) {
            break;
        }
        let mut dt = op.stable_dt(&mut u, t)?;
        let remaining = opts.t_end - t;
        let last = dt >= remaining * (1.0 - 1e-12);
        if last {
            dt = remaining;
        }
        let out = advance_with_retry(op, &mut u, t, dt, opts.max_retries)?;
        t = if last && out.halvings == 0 { opts.t_end } else { t + out.dt };
        u = out.u;
        let rep = StepReport {
            step: steps.len() + 1,
            t,
            dt: out.dt,
            halvings: out.halvings,
            summary: op.summary(&u),
            stats: op.take_stats(),
        };
        observer(&rep, &u, &*op);
        steps.push(rep);
    }
    Ok(RunResult { u, t, steps, initial })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `du/dt = lambda u` on a plain vector.
    #[derive(Clone, Debug)]
    struct Vector(Vec<f64>);

    impl DofVector for Vector {
        fn scale_add(&mut self, a: f64, other: &Self, b: f64) {
            for (x, y) in self.0.iter_mut().zip(&other.0) {
                *x = a * *x + b * *y;
            }
        }
    }

    struct Linear {
        lambda: f64,
        /// Stage rejected when `dt` exceeds this.
        dt_max: f64,
        calls: usize,
    }

    impl Stepper for Linear {
        type Field = Vector;
        fn euler_step(&mut self, u: &mut Vector, _t: f64, dt: f64) -> Result<Vector, Error> {
            self.calls += 1;
            if dt > self.dt_max {
                return Err(Error::StageRejected(format!("dt {dt} > {}", self.dt_max)));
            }
            Ok(Vector(u.0.iter().map(|x| x + dt * self.lambda * x).collect()))
        }
        fn stable_dt(&mut self, _u: &mut Vector, _t: f64) -> Result<f64, Error> {
            Ok(0.1)
        }
        fn summary(&self, u: &Vector) -> FieldSummary {
            FieldSummary { totals: u.0.clone(), ..Default::default() }
        }
        fn take_stats(&mut self) -> StageStats {
            StageStats::default()
        }
    }

    #[test]
    fn rk3_is_third_order() {
        let err = |dt: f64| {
            let mut op = Linear { lambda: -1.0, dt_max: 1.0, calls: 0 };
            let mut u = Vector(vec![1.0]);
            let n = (1.0 / dt).round() as usize;
            for _ in 0..n {
                u = ssp_rk3_step(&mut op, &mut u, 0.0, dt).unwrap();
            }
            (u.0[0] - (-1.0f64).exp()).abs()
        };
        let rate = (err(0.05) / err(0.025)).log2();
        assert!(rate > 2.9, "rate {rate}");
    }

    #[test]
    fn retry_halves_until_accepted() {
        let mut op = Linear { lambda: -1.0, dt_max: 0.1, calls: 0 };
        let mut u = Vector(vec![1.0]);
        let out = advance_with_retry(&mut op, &mut u, 0.0, 0.4, 20).unwrap();
        assert_eq!(out.halvings, 2);
        assert_eq!(out.dt, 0.1);
        assert_eq!(u.0, vec![1.0]);
    }

    #[test]
    fn retry_exhaustion_is_reported() {
        let mut op = Linear { lambda: -1.0, dt_max: 0.0, calls: 0 };
        let mut u = Vector(vec![1.0]);
        let err = advance_with_retry(&mut op, &mut u, 0.0, 0.4, 3).err().unwrap();
        assert!(matches!(err, Error::RetriesExhausted { retries: 3, .. }));
        assert_eq!(op.calls, 4);
    }

    #[test]
    fn integrate_lands_on_end_time() {
        let mut op = Linear { lambda: 0.0, dt_max: 1.0, calls: 0 };
        let r = integrate(
            &mut op,
            Vector(vec![1.0]),
            0.0,
            RunOptions { t_end: 0.25, max_steps: None, max_retries: 20 },
            |_, _, _| {},
        )
        .unwrap();
        assert_eq!(r.t, 0.25);
        assert_eq!(r.steps.len(), 3);
        assert!((r.steps[2].dt - 0.05).abs() < 1e-15);
    }
}

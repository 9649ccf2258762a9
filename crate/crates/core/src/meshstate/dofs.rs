//! Degrees of freedom of the Active Flux discretization.
//!
//! 1D: cell averages on cells `0..n` and point values on interfaces `0..=n`.
//!
//! 2D: cell averages `avg(i, j)`, x-face midpoints `fx(k, j)` located at
//! `(x_k, y_{j+1/2})`, y-face midpoints `fy(i, l)` at `(x_{i+1/2}, y_l)` and
//! corners `corner(k, l)` at `(x_k, y_l)`.

use super::grid::{Field1, Field2, Grid1d, Grid2d};
use super::state::State;

/// Storage that supports the linear combinations needed by Runge-Kutta
/// stages.
pub trait DofVector: Clone {
    /// `self = a * self + b * other`, ghosts included.
    fn scale_add(&mut self, a: f64, other: &Self, b: f64);
}

fn combine<const M: usize>(dst: &mut [State<M>], a: f64, src: &[State<M>], b: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = *d * a + *s * b;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DofField1d<const M: usize> {
    pub avg: Field1<State<M>>,
    pub pts: Field1<State<M>>,
}

impl<const M: usize> DofField1d<M> {
    pub fn new(n: usize) -> Self {
        DofField1d {
            avg: Field1::new(n, State::zero()),
            pts: Field1::new(n + 1, State::zero()),
        }
    }

    pub fn n(&self) -> usize {
        self.avg.n()
    }

    /// Integral of the averaged quantities over the interior.
    pub fn total(&self, grid: &Grid1d) -> State<M> {
        let mut s = State::zero();
        for i in 0..self.n() as isize {
            s += self.avg.at(i) * grid.dx(i);
        }
        s
    }

    /// Every interior DoF (averages then points).
    pub fn interior_values(&self) -> impl Iterator<Item = State<M>> + '_ {
        self.avg.interior().chain(self.pts.interior())
    }
}

impl<const M: usize> DofVector for DofField1d<M> {
    fn scale_add(&mut self, a: f64, other: &Self, b: f64) {
        combine(self.avg.raw_mut(), a, other.avg.raw(), b);
        combine(self.pts.raw_mut(), a, other.pts.raw(), b);
    }
}

/// Identifies one DoF family of the 2D layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Average,
    FaceX,
    FaceY,
    Corner,
}

impl Family {
    pub const POINTS: [Family; 3] = [Family::Corner, Family::FaceX, Family::FaceY];
    pub const ALL: [Family; 4] = [Family::Average, Family::FaceX, Family::FaceY, Family::Corner];
}

#[derive(Clone, Debug, PartialEq)]
pub struct DofField2d<const M: usize> {
    pub avg: Field2<State<M>>,
    pub fx: Field2<State<M>>,
    pub fy: Field2<State<M>>,
    pub corner: Field2<State<M>>,
}

impl<const M: usize> DofField2d<M> {
    pub fn new(nx: usize, ny: usize) -> Self {
        let z = State::zero();
        DofField2d {
            avg: Field2::new(nx, ny, z),
            fx: Field2::new(nx + 1, ny, z),
            fy: Field2::new(nx, ny + 1, z),
            corner: Field2::new(nx + 1, ny + 1, z),
        }
    }

    pub fn nx(&self) -> usize {
        self.avg.n1()
    }

    pub fn ny(&self) -> usize {
        self.avg.n2()
    }

    pub fn family(&self, f: Family) -> &Field2<State<M>> {
        match f {
            Family::Average => &self.avg,
            Family::FaceX => &self.fx,
            Family::FaceY => &self.fy,
            Family::Corner => &self.corner,
        }
    }

    pub fn family_mut(&mut self, f: Family) -> &mut Field2<State<M>> {
        match f {
            Family::Average => &mut self.avg,
            Family::FaceX => &mut self.fx,
            Family::FaceY => &mut self.fy,
            Family::Corner => &mut self.corner,
        }
    }

    pub fn total(&self, grid: &Grid2d) -> State<M> {
        let mut s = State::zero();
        for j in 0..self.ny() as isize {
            for i in 0..self.nx() as isize {
                s += self.avg.at(i, j) * grid.cell_area(i, j);
            }
        }
        s
    }

    pub fn interior_values(&self) -> impl Iterator<Item = State<M>> + '_ {
        self.avg
            .interior()
            .chain(self.fx.interior())
            .chain(self.fy.interior())
            .chain(self.corner.interior())
    }
}

impl<const M: usize> DofVector for DofField2d<M> {
    fn scale_add(&mut self, a: f64, other: &Self, b: f64) {
        combine(self.avg.raw_mut(), a, other.avg.raw(), b);
        combine(self.fx.raw_mut(), a, other.fx.raw(), b);
        combine(self.fy.raw_mut(), a, other.fy.raw(), b);
        combine(self.corner.raw_mut(), a, other.corner.raw(), b);
    }
}

/// Location of a 2D DoF in physical space.
pub fn dof_position(grid: &Grid2d, f: Family, i: isize, j: isize) -> (f64, f64) {
    match f {
        Family::Average => (grid.x.center(i), grid.y.center(j)),
        Family::FaceX => (grid.x.node(i), grid.y.center(j)),
        Family::FaceY => (grid.x.center(i), grid.y.node(j)),
        Family::Corner => (grid.x.node(i), grid.y.node(j)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_sizes() {
        let d = DofField2d::<4>::new(5, 3);
        assert_eq!((d.fx.n1(), d.fx.n2()), (6, 3));
        assert_eq!((d.fy.n1(), d.fy.n2()), (5, 4));
        assert_eq!((d.corner.n1(), d.corner.n2()), (6, 4));
        assert_eq!(d.interior_values().count(), 15 + 18 + 20 + 24);
        let d1 = DofField1d::<1>::new(7);
        assert_eq!(d1.interior_values().count(), 15);
    }

    #[test]
    fn scale_add_combines_all_families() {
        let g = Grid2d::uniform((0.0, 1.0), (0.0, 1.0), 2, 2).unwrap();
        let mut a = DofField2d::<1>::new(2, 2);
        let mut b = DofField2d::<1>::new(2, 2);
        a.avg.fill(State([1.0]));
        b.avg.fill(State([3.0]));
        b.corner.fill(State([2.0]));
        a.scale_add(0.75, &b, 0.25);
        assert_eq!(a.avg.at(0, 0), State([1.5]));
        assert_eq!(a.corner.at(1, 1), State([0.5]));
        assert!((a.total(&g)[0] - 1.5).abs() < 1e-15);
    }
}

//! Cartesian grids and ghost-padded storage.
//!
//! Indices are signed. Cell `i` of a 1D grid spans `[node(i), node(i+1)]`,
//! interface points carry the index of their node, so a grid with `n` cells
//! owns cells `0..n` and interface points `0..=n`. Both are padded with
//! `GHOST` layers on each side.

use crate::Error;

pub const GHOST: usize = 2;
const G: isize = GHOST as isize;

/// Smallest admissible number of interior cells per axis.
pub const MIN_CELLS: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct Grid1d {
    n: usize,
    lo: f64,
    hi: f64,
    /// Node coordinates including ghost nodes, `n + 1 + 2 * GHOST` entries.
    nodes: Vec<f64>,
    /// Cell widths including ghost cells, `n + 2 * GHOST` entries.
    widths: Vec<f64>,
}

impl Grid1d {
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self, Error> {
        if n < MIN_CELLS {
            return Err(Error::Mesh(format!(
                "need at least {MIN_CELLS} cells per axis, got {n}"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Mesh(format!("degenerate interval [{lo}, {hi}]")));
        }
        let h = (hi - lo) / n as f64;
        let nodes = (-G..=n as isize + G)
            .map(|k| {
                if k == n as isize {
                    hi
                } else {
                    lo + k as f64 * h
                }
            })
            .collect();
        // identical widths keep periodic stencils bitwise symmetric
        let widths = vec![h; n + 2 * G as usize];
        Ok(Grid1d { n, lo, hi, nodes, widths })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    #[inline]
    pub fn node(&self, k: isize) -> f64 {
        self.nodes[(k + G) as usize]
    }

    #[inline]
    pub fn dx(&self, i: isize) -> f64 {
        self.widths[(i + G) as usize]
    }

    #[inline]
    pub fn center(&self, i: isize) -> f64 {
        0.5 * (self.node(i) + self.node(i + 1))
    }

    pub fn min_dx(&self) -> f64 {
        (0..self.n as isize).map(|i| self.dx(i)).fold(f64::INFINITY, f64::min)
    }

    /// Index of the interior cell containing `x` (clamped to the domain).
    pub fn locate(&self, x: f64) -> isize {
        let h = self.length() / self.n as f64;
        (((x - self.lo) / h).floor() as isize).clamp(0, self.n as isize - 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid2d {
    pub x: Grid1d,
    pub y: Grid1d,
}

impl Grid2d {
    pub fn uniform(
        x: (f64, f64),
        y: (f64, f64),
        nx: usize,
        ny: usize,
    ) -> Result<Self, Error> {
        Ok(Grid2d {
            x: Grid1d::uniform(x.0, x.1, nx)?,
            y: Grid1d::uniform(y.0, y.1, ny)?,
        })
    }

    pub fn nx(&self) -> usize {
        self.x.n()
    }

    pub fn ny(&self) -> usize {
        self.y.n()
    }

    pub fn cell_area(&self, i: isize, j: isize) -> f64 {
        self.x.dx(i) * self.y.dx(j)
    }
}

/// Ghost-padded 1D array addressed by signed index.
#[derive(Clone, Debug, PartialEq)]
pub struct Field1<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy> Field1<T> {
    /// `n` interior entries plus `GHOST` on each side.
    pub fn new(n: usize, fill: T) -> Self {
        Field1 {
            n,
            data: vec![fill; n + 2 * GHOST],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: isize) -> T {
        self.data[(i + G) as usize]
    }

    #[inline]
    pub fn get_mut(&mut self, i: isize) -> &mut T {
        &mut self.data[(i + G) as usize]
    }

    #[inline]
    pub fn set(&mut self, i: isize, v: T) {
        self.data[(i + G) as usize] = v;
    }

    pub fn raw(&self) -> &[T] {
        &self.data
    }

    pub fn raw_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Every stored index, ghosts included.
    pub fn full_range(&self) -> std::ops::Range<isize> {
        -G..self.n as isize + G
    }

    pub fn interior(&self) -> impl Iterator<Item = T> + '_ {
        self.data[GHOST..GHOST + self.n].iter().copied()
    }
}

/// Ghost-padded 2D array; rows run along x.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2<T> {
    n1: usize,
    n2: usize,
    stride: usize,
    data: Vec<T>,
}

impl<T: Copy> Field2<T> {
    pub fn new(n1: usize, n2: usize, fill: T) -> Self {
        let stride = n1 + 2 * GHOST;
        Field2 {
            n1,
            n2,
            stride,
            data: vec![fill; stride * (n2 + 2 * GHOST)],
        }
    }

    #[inline]
    pub fn n1(&self) -> usize {
        self.n1
    }

    #[inline]
    pub fn n2(&self) -> usize {
        self.n2
    }

    #[inline]
    fn idx(&self, i: isize, j: isize) -> usize {
        debug_assert!(i >= -G && i < self.n1 as isize + G, "i = {i} out of range");
        debug_assert!(j >= -G && j < self.n2 as isize + G, "j = {j} out of range");
        (j + G) as usize * self.stride + (i + G) as usize
    }

    #[inline]
    pub fn at(&self, i: isize, j: isize) -> T {
        self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn get(&self, i: isize, j: isize) -> &T {
        &self.data[self.idx(i, j)]
    }

    #[inline]
    pub fn get_mut(&mut self, i: isize, j: isize) -> &mut T {
        let k = self.idx(i, j);
        &mut self.data[k]
    }

    #[inline]
    pub fn set(&mut self, i: isize, j: isize, v: T) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn raw(&self) -> &[T] {
        &self.data
    }

    pub fn raw_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn range1(&self) -> std::ops::Range<isize> {
        -G..self.n1 as isize + G
    }

    pub fn range2(&self) -> std::ops::Range<isize> {
        -G..self.n2 as isize + G
    }

    pub fn fill(&mut self, v: T) {
        self.data.fill(v);
    }

    /// Interior entries in row-major order.
    pub fn interior(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n2 as isize)
            .flat_map(move |j| (0..self.n1 as isize).map(move |i| self.at(i, j)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_geometry() {
        let g = Grid1d::uniform(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.node(0), -1.0);
        assert_eq!(g.node(4), 1.0);
        assert_eq!(g.dx(-2), 0.5);
        assert_eq!(g.dx(5), 0.5);
        assert_eq!(g.center(0), -0.75);
        assert_eq!(g.locate(0.1), 2);
        assert_eq!(g.locate(5.0), 3);
    }

    #[test]
    fn rejects_degenerate_meshes() {
        assert!(Grid1d::uniform(0.0, 1.0, 0).is_err());
        assert!(Grid1d::uniform(0.0, 1.0, 1).is_err());
        assert!(Grid1d::uniform(1.0, 1.0, 8).is_err());
        assert!(Grid2d::uniform((0.0, 1.0), (0.0, 1.0), 8, 1).is_err());
    }

    #[test]
    fn field2_signed_indexing() {
        let mut f = Field2::new(3, 2, 0i32);
        f.set(-2, -2, 1);
        f.set(4, 3, 2);
        assert_eq!(f.at(-2, -2), 1);
        assert_eq!(f.at(4, 3), 2);
        assert_eq!(f.raw()[0], 1);
        assert_eq!(*f.raw().last().unwrap(), 2);
        assert_eq!(f.interior().count(), 6);
    }
}

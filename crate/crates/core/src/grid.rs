//! Dense row-major 2D storage shared by the geometry rasters and field grids.

use std::ops::{Index, IndexMut};

/// Row-major `nx × ny` grid. Cell `(i, j)` lives at `j * nx + i`; `i` runs
/// along the tube axis (x), `j` across it (y).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2<T> {
    nx: usize,
    ny: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid2<T> {
    pub fn filled(nx: usize, ny: usize, value: T) -> Self {
        Self {
            nx,
            ny,
            data: vec![value; nx * ny],
        }
    }
}

impl<T> Grid2<T> {
    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                data.push(f(i, j));
            }
        }
        Self { nx, ny, data }
    }

    pub fn from_vec(nx: usize, ny: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == nx * ny).then_some(Self { nx, ny, data })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    pub fn get(&self, i: isize, j: isize) -> Option<&T> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            None
        } else {
            Some(&self.data[j as usize * self.nx + i as usize])
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn row(&self, j: usize) -> &[T] {
        &self.data[j * self.nx..(j + 1) * self.nx]
    }

    /// Iterates `(i, j, &value)` in storage order.
    pub fn indexed(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let nx = self.nx;
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| (k % nx, k / nx, v))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid2<U> {
        Grid2 {
            nx: self.nx,
            ny: self.ny,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Grid2<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[j * self.nx + i]
    }
}

impl<T> IndexMut<(usize, usize)> for Grid2<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[j * self.nx + i]
    }
}

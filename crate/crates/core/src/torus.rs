//! Uniform grids, quadrature, metric and Fourier analysis on the torus
//! `T^nu = [0, 2pi)^nu`.
//!
//! Node ordering is lexicographic with the first axis most significant:
//! flat index `j = sum_a j_a * N^(nu - 1 - a)`. Every matrix assembled
//! downstream relies on this ordering.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{count, lit, Real};

#[inline]
pub fn two_pi<T: Real>() -> T {
    lit(std::f64::consts::TAU)
}

/// Uniform periodic lattice with `N` points per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid<T> {
    nu: usize,
    points_per_dim: usize,
    weight: T,
    nodes: Vec<T>,
}

impl<T: Real> TorusGrid<T> {
    /// Builds the `N^nu` lattice `x_j = 2 pi j / N`.
    pub fn new(nu: usize, points_per_dim: usize) -> Result<Self> {
        if nu == 0 || points_per_dim < 2 {
            return Err(Error::InvalidGrid {
                nu,
                points: points_per_dim,
            });
        }
        let total = points_per_dim
            .checked_pow(nu as u32)
            .ok_or_else(|| Error::InvalidParameter("grid size overflows usize".into()))?;
        let h = two_pi::<T>() / count::<T>(points_per_dim);
        let axis: Vec<T> = (0..points_per_dim)
            .map(|j| two_pi::<T>() * count::<T>(j) / count::<T>(points_per_dim))
            .collect();
        let mut nodes = Vec::with_capacity(total * nu);
        let mut idx = vec![0usize; nu];
        for _ in 0..total {
            nodes.extend(idx.iter().map(|&j| axis[j]));
            for a in (0..nu).rev() {
                idx[a] += 1;
                if idx[a] < points_per_dim {
                    break;
                }
                idx[a] = 0;
            }
        }
        Ok(Self {
            nu,
            points_per_dim,
            weight: h.powi(nu as i32),
            nodes,
        })
    }

    #[inline]
    pub fn nu(&self) -> usize {
        self.nu
    }

    #[inline]
    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    /// Number of nodes, `N^nu`.
    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len() / self.nu
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature weight per node, `(2 pi / N)^nu`.
    #[inline]
    pub fn weight(&self) -> T {
        self.weight
    }

    /// Lattice spacing `2 pi / N`.
    #[inline]
    pub fn spacing(&self) -> T {
        two_pi::<T>() / count::<T>(self.points_per_dim)
    }

    #[inline]
    pub fn node(&self, i: usize) -> &[T] {
        &self.nodes[i * self.nu..(i + 1) * self.nu]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.nodes.chunks_exact(self.nu)
    }

    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.nu];
        for a in (0..self.nu).rev() {
            idx[a] = i % self.points_per_dim;
            i /= self.points_per_dim;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &j| acc * self.points_per_dim + j)
    }

    /// The same lattice with twice as many points per axis; every node of
    /// `self` is also a node of the refined grid.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.nu, self.points_per_dim * 2)
    }

    /// The product lattice on `T^nu x T^nu = T^(2 nu)`; node `(i, j)` has
    /// flat index `i * len + j`.
    pub fn product(&self) -> Result<Self> {
        Self::new(2 * self.nu, self.points_per_dim)
    }

    /// Flat indices of the `3^nu - 1` surrounding nodes (periodic wrap,
    /// diagonal neighbours included), deduplicated for tiny grids.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let base = self.multi_index(i);
        let n = self.points_per_dim;
        let mut out = Vec::with_capacity(3usize.pow(self.nu as u32));
        let mut offs = vec![0usize; self.nu];
        loop {
            if offs.iter().any(|&o| o != 1) {
                let idx: Vec<usize> = base.iter().zip(&offs).map(|(&b, &o)| (b + n + o - 1) % n).collect();
                let j = self.flat_index(&idx);
                if j != i && !out.contains(&j) {
                    out.push(j);
                }
            }
            let mut a = 0;
            while a < self.nu {
                offs[a] += 1;
                if offs[a] < 3 {
                    break;
                }
                offs[a] = 0;
                a += 1;
            }
            if a == self.nu {
                break;
            }
        }
        out
    }
}

/// Weighted sum `sum_j w f(x_j)`: the trapezoidal rule on the torus.
pub fn quadrature<T: Real>(values: &[T], grid: &TorusGrid<T>) -> Result<T> {
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: values.len(),
        });
    }
    Ok(values.iter().copied().sum::<T>() * grid.weight())
}

/// Flat-torus distance: Euclidean distance minimised over per-axis shifts
/// by multiples of `2 pi`.
pub fn torus_distance<T: Real>(x: &[T], x0: &[T]) -> T {
    debug_assert_eq!(x.len(), x0.len());
    let period = two_pi::<T>();
    x.iter()
        .zip(x0)
        .map(|(&a, &b)| {
            let d = (a - b).abs() % period;
            let d = d.min(period - d);
            d * d
        })
        .sum::<T>()
        .sqrt()
}

/// Signed frequency carried by FFT slot `k` of an `n`-point transform,
/// in the symmetric range `[-n/2, n/2)`.
#[inline]
pub fn slot_frequency(k: usize, n: usize) -> i64 {
    if k <= (n - 1) / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

#[inline]
fn frequency_slot(f: i64, n: usize) -> Option<usize> {
    let n_i = n as i64;
    let lo = -(n_i / 2);
    let hi = (n_i - 1) / 2;
    if f < lo || f > hi {
        return None;
    }
    Some(f.rem_euclid(n_i) as usize)
}

/// Dense table of Fourier coefficients of a (matrix-valued) function
/// sampled on a torus grid. Frequency zero holds the mean value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTable<T> {
    dim: usize,
    points: usize,
    rows: usize,
    cols: usize,
    /// Slot-major (FFT order, lexicographic over axes), `rows * cols`
    /// entries per slot.
    coefficients: Vec<Complex<T>>,
}

fn transform_axes<T: Real>(data: &mut [Complex<T>], dim: usize, n: usize, inverse: bool) {
    let total = data.len();
    let mut line = Vec::with_capacity(total);
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let outer = total / (n * stride);
        line.clear();
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                line.extend((0..n).map(|t| data[base + t * stride]));
            }
        }
        T::fft_chunks(&mut line, n, inverse);
        let mut it = line.iter();
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for t in 0..n {
                    data[base + t * stride] = *it.next().unwrap();
                }
            }
        }
    }
}

impl<T: Real> FourierTable<T> {
    /// Discrete Fourier analysis of node-major samples with `rows * cols`
    /// entries per node.
    pub fn analyze(grid: &TorusGrid<T>, rows: usize, cols: usize, samples: &[Complex<T>]) -> Result<Self> {
        let block = rows * cols;
        let nodes = grid.len();
        if samples.len() != nodes * block {
            return Err(Error::LengthMismatch {
                expected: nodes * block,
                found: samples.len(),
            });
        }
        let n = grid.points_per_dim();
        let norm = T::one() / count::<T>(nodes);
        let mut coefficients = vec![Complex::zero(); nodes * block];
        let mut channel = vec![Complex::zero(); nodes];
        for e in 0..block {
            for (j, v) in channel.iter_mut().enumerate() {
                *v = samples[j * block + e];
            }
            transform_axes(&mut channel, grid.nu(), n, false);
            for (j, v) in channel.iter().enumerate() {
                coefficients[j * block + e] = *v * norm;
            }
        }
        Ok(Self {
            dim: grid.nu(),
            points: n,
            rows,
            cols,
            coefficients,
        })
    }

    /// Scalar real samples.
    pub fn analyze_real(grid: &TorusGrid<T>, samples: &[T]) -> Result<Self> {
        let cs: Vec<Complex<T>> = samples.iter().map(|&v| Complex::new(v, T::zero())).collect();
        Self::analyze(grid, 1, 1, &cs)
    }

    /// Table with explicitly given coefficients; unspecified frequencies
    /// are zero.
    pub fn from_entries(
        dim: usize,
        points: usize,
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (Vec<i64>, Vec<Complex<T>>)>,
    ) -> Result<Self> {
        if dim == 0 || points < 2 {
            return Err(Error::InvalidGrid { nu: dim, points });
        }
        let block = rows * cols;
        let mut table = Self {
            dim,
            points,
            rows,
            cols,
            coefficients: vec![Complex::zero(); points.pow(dim as u32) * block],
        };
        for (freq, coef) in entries {
            if coef.len() != block {
                return Err(Error::LengthMismatch {
                    expected: block,
                    found: coef.len(),
                });
            }
            let slot = table.slot_of(&freq).ok_or_else(|| {
                Error::InvalidParameter(format!("frequency {freq:?} outside the table range"))
            })?;
            table.coefficients[slot * block..(slot + 1) * block].copy_from_slice(&coef);
        }
        Ok(table)
    }

    /// Samples of the trigonometric interpolant at the nodes of `grid`.
    pub fn synthesize(&self, grid: &TorusGrid<T>) -> Result<Vec<Complex<T>>> {
        if grid.nu() != self.dim || grid.points_per_dim() != self.points {
            return Err(Error::DimensionMismatch(format!(
                "table is {}-dimensional with {} points per axis, grid is {}-dimensional with {}",
                self.dim,
                self.points,
                grid.nu(),
                grid.points_per_dim()
            )));
        }
        let block = self.block();
        let nodes = grid.len();
        let mut out = vec![Complex::zero(); nodes * block];
        let mut channel = vec![Complex::zero(); nodes];
        for e in 0..block {
            for (j, v) in channel.iter_mut().enumerate() {
                *v = self.coefficients[j * block + e];
            }
            transform_axes(&mut channel, self.dim, self.points, true);
            for (j, v) in channel.iter().enumerate() {
                out[j * block + e] = *v;
            }
        }
        Ok(out)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn points(&self) -> usize {
        self.points
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    fn block(&self) -> usize {
        self.rows * self.cols
    }

    pub fn len(&self) -> usize {
        self.coefficients.len() / self.block()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    fn slot_of(&self, freq: &[i64]) -> Option<usize> {
        if freq.len() != self.dim {
            return None;
        }
        let mut slot = 0;
        for &f in freq {
            slot = slot * self.points + frequency_slot(f, self.points)?;
        }
        Some(slot)
    }

    /// Signed frequency multi-index of slot `s`.
    pub fn frequency(&self, mut s: usize) -> Vec<i64> {
        let mut f = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            f[a] = slot_frequency(s % self.points, self.points);
            s /= self.points;
        }
        f
    }

    /// Coefficient block (`rows * cols` entries, row-major) at `freq`.
    pub fn coefficient(&self, freq: &[i64]) -> Option<&[Complex<T>]> {
        let b = self.block();
        self.slot_of(freq).map(|s| &self.coefficients[s * b..(s + 1) * b])
    }

    /// Iterates `(frequency, coefficient block)` in slot order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<i64>, &[Complex<T>])> + '_ {
        self.coefficients
            .chunks_exact(self.block())
            .enumerate()
            .map(move |(s, c)| (self.frequency(s), c))
    }

    /// Frobenius magnitude of every coefficient block, in slot order.
    pub fn magnitudes(&self) -> Vec<T> {
        self.coefficients
            .chunks_exact(self.block())
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt())
            .collect()
    }

    /// Explicit conversion to a sparse trigonometric polynomial, dropping
    /// coefficients with magnitude at most `rel_threshold * max`. Nyquist
    /// components of even-sized tables are split evenly between `+N/2` and
    /// `-N/2` so the interpolant stays real for real data.
    pub fn to_trig_poly(&self, rel_threshold: T) -> TrigPoly<T> {
        let mags = self.magnitudes();
        let peak = mags.iter().fold(T::zero(), |a, &b| a.max(b));
        let cut = peak * rel_threshold;
        let nyquist = if self.points % 2 == 0 {
            Some(-(self.points as i64) / 2)
        } else {
            None
        };
        let mut poly = TrigPoly::new(self.dim, self.rows, self.cols);
        for (s, (freq, coef)) in self.entries().enumerate() {
            if mags[s] <= cut || mags[s] == T::zero() {
                continue;
            }
            let mut variants = vec![(freq, T::one())];
            if let Some(nq) = nyquist {
                for a in 0..self.dim {
                    let mut next = Vec::with_capacity(variants.len() * 2);
                    for (f, w) in variants {
                        if f[a] == nq {
                            let mut g = f.clone();
                            g[a] = -nq;
                            next.push((f, w * lit(0.5)));
                            next.push((g, w * lit(0.5)));
                        } else {
                            next.push((f, w));
                        }
                    }
                    variants = next;
                }
            }
            for (f, w) in variants {
                poly.push(f, coef.iter().map(|&z| z * w).collect());
            }
        }
        poly
    }
}

/// One term `coefficient * exp(i <frequency, x>)` of a trigonometric
/// polynomial; the coefficient is a row-major `rows x cols` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm<T> {
    pub frequency: Vec<i64>,
    pub coefficient: Vec<Complex<T>>,
}

/// Sparse matrix-valued trigonometric polynomial on `T^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly<T> {
    dim: usize,
    rows: usize,
    cols: usize,
    terms: Vec<TrigTerm<T>>,
}

impl<T: Real> TrigPoly<T> {
    pub fn new(dim: usize, rows: usize, cols: usize) -> Self {
        Self {
            dim,
            rows,
            cols,
            terms: Vec::new(),
        }
    }

    /// Scalar constant.
    pub fn constant(dim: usize, value: T) -> Self {
        let mut p = Self::new(dim, 1, 1);
        p.push(vec![0; dim], vec![Complex::new(value, T::zero())]);
        p
    }

    /// Scalar `scale * cos(k x_axis)`.
    pub fn cosine(dim: usize, axis: usize, k: i64, scale: T) -> Self {
        let mut p = Self::new(dim, 1, 1);
        if k == 0 {
            p.push(vec![0; dim], vec![Complex::new(scale, T::zero())]);
            return p;
        }
        let half = Complex::new(scale * lit(0.5), T::zero());
        let mut f = vec![0; dim];
        f[axis] = k;
        p.push(f.clone(), vec![half]);
        f[axis] = -k;
        p.push(f, vec![half]);
        p
    }

    pub fn push(&mut self, frequency: Vec<i64>, coefficient: Vec<Complex<T>>) {
        assert_eq!(frequency.len(), self.dim, "frequency dimension");
        assert_eq!(coefficient.len(), self.rows * self.cols, "coefficient block size");
        self.terms.push(TrigTerm { frequency, coefficient });
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn terms(&self) -> &[TrigTerm<T>] {
        &self.terms
    }

    /// Largest per-axis `|frequency|` over all terms.
    pub fn degree(&self) -> i64 {
        self.terms
            .iter()
            .flat_map(|t| t.frequency.iter().map(|f| f.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[T]) -> CMatrix<T> {
        debug_assert_eq!(x.len(), self.dim);
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for term in &self.terms {
            let phase = term
                .frequency
                .iter()
                .zip(x)
                .fold(T::zero(), |acc, (&k, &xi)| acc + T::from_i64(k).unwrap() * xi);
            let e = Complex::new(phase.cos(), phase.sin());
            for (o, &c) in out.as_mut_slice().iter_mut().zip(&term.coefficient) {
                *o = *o + c * e;
            }
        }
        out
    }

    /// Column-vector evaluation for `rows x 1` polynomials.
    pub fn eval_vector(&self, x: &[T]) -> Vec<Complex<T>> {
        self.eval(x).into_vec()
    }
}

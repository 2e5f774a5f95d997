//! Essential spectrum of the model: the determinant `Δ(x, z) = det(U(x) − z)`,
//! the band structure swept by the eigenvalue branches of `U`, the endpoint
//! set `Γ`, and the one-sidedness check of `φ_z = Δ(·, z)` at endpoints.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::numeric::coordinate_polish;
use crate::scalar::{lit, to_f64, tol_floor, Real};
use crate::symbols::MatrixSymbol;
use crate::torus::TorusGrid;

/// Bands closer than this are merged.
pub const TOUCH_TOL: f64 = 1e-10;
/// Refinement stops once no endpoint moves more than this.
pub const ENDPOINT_TOL: f64 = 1e-8;
/// Largest tolerated imaginary part of `Δ` for Hermitian `U`.
pub const DELTA_IMAG_TOL: f64 = 1e-10;

/// Closed segment `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band<T> {
    pub lower: T,
    pub upper: T,
}

impl<T: Real> Band<T> {
    pub fn new(lower: T, upper: T) -> Self {
        Self { lower, upper }
    }

    pub fn width(&self) -> T {
        self.upper - self.lower
    }

    pub fn is_point(&self) -> bool {
        self.upper == self.lower
    }

    /// Distance from `z` to the segment (zero inside).
    pub fn distance(&self, z: T) -> T {
        if z < self.lower {
            self.lower - z
        } else if z > self.upper {
            z - self.upper
        } else {
            T::zero()
        }
    }
}

/// Position of a real number relative to a band set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GapLabel {
    BelowAll,
    /// Between band `lower_band` and band `lower_band + 1` (zero based).
    Between { lower_band: usize },
    AboveAll,
}

impl GapLabel {
    /// Gap index: 0 below everything, `i + 1` between bands `i` and `i + 1`,
    /// `band_count` above everything.
    pub fn index(&self, band_count: usize) -> usize {
        match *self {
            Self::BelowAll => 0,
            Self::Between { lower_band } => lower_band + 1,
            Self::AboveAll => band_count,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Self::BelowAll => "below all bands".into(),
            Self::Between { lower_band } => format!("between band {} and band {}", lower_band, lower_band + 1),
            Self::AboveAll => "above all bands".into(),
        }
    }
}

/// Band endpoints at one grid level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandLevel<T> {
    pub points_per_dim: usize,
    pub bands: Vec<Band<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandResolution {
    pub nu: usize,
    pub initial_points: usize,
    pub final_points: usize,
    pub levels: usize,
}

/// Essential spectrum as sorted disjoint bands plus the endpoint list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSet<T> {
    pub bands: Vec<Band<T>>,
    /// All band endpoints, sorted; two entries per band.
    pub gamma: Vec<T>,
    pub resolution: BandResolution,
    pub refinement_converged: bool,
    /// Largest endpoint move between the last two levels.
    pub endpoint_error: Option<T>,
    /// Range of every sorted eigenvalue branch at the final level.
    pub branches: Vec<Band<T>>,
    pub history: Vec<BandLevel<T>>,
}

impl<T: Real> BandSet<T> {
    /// Band set from explicit segments, which must be sorted and disjoint.
    pub fn from_bands(bands: Vec<Band<T>>) -> Result<Self> {
        for b in &bands {
            if !(b.lower <= b.upper) {
                return Err(Error::InvalidParameter(format!(
                    "band [{}, {}] has lower > upper",
                    b.lower, b.upper
                )));
            }
        }
        for w in bands.windows(2) {
            if !(w[0].upper < w[1].lower) {
                return Err(Error::InvalidParameter("bands must be sorted and disjoint".into()));
            }
        }
        let gamma = gamma_of(&bands);
        Ok(Self {
            branches: bands.clone(),
            history: Vec::new(),
            resolution: BandResolution {
                nu: 0,
                initial_points: 0,
                final_points: 0,
                levels: 0,
            },
            refinement_converged: true,
            endpoint_error: None,
            gamma,
            bands,
        })
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    /// Distance from `z` to the union of bands.
    pub fn distance(&self, z: T) -> T {
        self.bands.iter().fold(T::infinity(), |acc, b| acc.min(b.distance(z)))
    }

    /// Gap containing `z`, or `None` when `z` lies in a band.
    pub fn gap_of(&self, z: T) -> Option<GapLabel> {
        if self.bands.iter().any(|b| b.distance(z) == T::zero()) {
            return None;
        }
        let below = self.bands.iter().take_while(|b| b.upper < z).count();
        Some(if below == 0 {
            GapLabel::BelowAll
        } else if below == self.bands.len() {
            GapLabel::AboveAll
        } else {
            GapLabel::Between { lower_band: below - 1 }
        })
    }

    /// Number of gaps, counting the two unbounded ones.
    pub fn gap_count(&self) -> usize {
        self.bands.len() + 1
    }
}

fn gamma_of<T: Real>(bands: &[Band<T>]) -> Vec<T> {
    let mut g: Vec<T> = bands.iter().flat_map(|b| [b.lower, b.upper]).collect();
    g.sort_by(|a, b| a.partial_cmp(b).expect("finite endpoints"));
    g
}

fn check_hermitian<T: Real>(m: &CMatrix<T>) -> Result<()> {
    let dev = m.hermitian_residual();
    let tol = tol_floor::<T>(DELTA_IMAG_TOL) * T::one().max(m.max_abs());
    if dev > tol {
        return Err(Error::NonHermitian {
            deviation: to_f64(dev),
            tol: to_f64(tol),
        });
    }
    Ok(())
}

/// `Δ(x, z) = det(U(x) − z)` for real `z`. The imaginary part of the
/// computed determinant is checked and discarded.
pub fn delta<T: Real>(u: &MatrixSymbol<T>, x: &[T], z: T) -> Result<T> {
    let m = u.eval(x);
    check_hermitian(&m)?;
    let shifted = &m - &CMatrix::from_real_diagonal(&vec![z; m.rows()]);
    let d = shifted.determinant()?;
    let tol = tol_floor::<T>(DELTA_IMAG_TOL) * T::one().max(d.re.abs());
    if d.im.abs() > tol {
        return Err(Error::NonHermitian {
            deviation: to_f64(d.im.abs()),
            tol: to_f64(tol),
        });
    }
    Ok(d.re)
}

/// `Δ(x, z)` at every grid node.
pub fn delta_on_grid<T: Real>(u: &MatrixSymbol<T>, grid: &TorusGrid<T>, z: T) -> Result<Vec<T>> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| delta(u, grid.node(i), z))
        .collect()
}

/// True when `φ_z` takes both signs (or zero) on the grid, so `Δ(x, z) = 0`
/// for some `x` by continuity.
pub fn delta_has_zero<T: Real>(u: &MatrixSymbol<T>, grid: &TorusGrid<T>, z: T) -> Result<bool> {
    let vals = delta_on_grid(u, grid, z)?;
    let lo = vals.iter().fold(T::infinity(), |a, &b| a.min(b));
    let hi = vals.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    Ok(lo <= T::zero() && hi >= T::zero())
}

fn branch_value<T: Real>(u: &MatrixSymbol<T>, x: &[T], j: usize) -> T {
    u.eigenvalues(x).map(|v| v[j]).unwrap_or_else(|_| T::nan())
}

/// Polished `(min, max)` of every sorted eigenvalue branch on one grid.
fn branch_extrema<T: Real>(u: &MatrixSymbol<T>, grid: &TorusGrid<T>) -> Result<Vec<Band<T>>> {
    let n = u.n();
    let eig: Vec<Vec<T>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let m = u.eval(grid.node(i));
            check_hermitian(&m)?;
            m.hermitian_eigenvalues()
        })
        .collect::<Result<_>>()?;
    let h = grid.spacing();
    (0..n)
        .into_par_iter()
        .map(|j| {
            let (mut imin, mut imax) = (0, 0);
            for (i, v) in eig.iter().enumerate() {
                if v[j] < eig[imin][j] {
                    imin = i;
                }
                if v[j] > eig[imax][j] {
                    imax = i;
                }
            }
            let (_, lo) = coordinate_polish(|x| branch_value(u, x, j), grid.node(imin), h, 3, 60);
            let (_, neg_hi) = coordinate_polish(|x| -branch_value(u, x, j), grid.node(imax), h, 3, 60);
            Ok(Band::new(lo.min(eig[imin][j]), (-neg_hi).max(eig[imax][j])))
        })
        .collect()
}

fn merge_bands<T: Real>(mut candidates: Vec<Band<T>>) -> Vec<Band<T>> {
    candidates.sort_by(|a, b| a.lower.partial_cmp(&b.lower).expect("finite band"));
    let touch = lit::<T>(TOUCH_TOL);
    let mut out: Vec<Band<T>> = Vec::with_capacity(candidates.len());
    for b in candidates {
        match out.last_mut() {
            Some(last) if b.lower <= last.upper + touch => last.upper = last.upper.max(b.upper),
            _ => out.push(b),
        }
    }
    out
}

/// Essential spectrum `∪_x {z : Δ(x, z) = 0}` as a union of bands.
///
/// Each sorted eigenvalue branch contributes `[min λ_j, max λ_j]`, with the
/// grid extrema polished by golden-section search within one grid spacing.
/// Endpoints are running extrema across levels, so they are monotone under
/// refinement. The grid is doubled up to `refine_limit` times until no
/// endpoint moves by more than `1e-8`.
pub fn compute_bands<T: Real>(u: &MatrixSymbol<T>, grid: &TorusGrid<T>, refine_limit: usize) -> Result<BandSet<T>> {
    if u.nu() != grid.nu() {
        return Err(Error::DimensionMismatch(format!(
            "symbol on T^{} evaluated on a grid on T^{}",
            u.nu(),
            grid.nu()
        )));
    }
    let mut g = grid.clone();
    let mut branches: Vec<Band<T>> = Vec::new();
    let mut history: Vec<BandLevel<T>> = Vec::new();
    let mut converged = false;
    let mut endpoint_error = None;
    for level in 0..=refine_limit {
        let fresh = branch_extrema(u, &g)?;
        branches = if branches.is_empty() {
            fresh
        } else {
            branches
                .iter()
                .zip(&fresh)
                .map(|(old, new)| Band::new(old.lower.min(new.lower), old.upper.max(new.upper)))
                .collect()
        };
        let bands = merge_bands(branches.clone());
        if let Some(prev) = history.last() {
            if prev.bands.len() == bands.len() {
                let moved = prev
                    .bands
                    .iter()
                    .zip(&bands)
                    .map(|(a, b)| (a.lower - b.lower).abs().max((a.upper - b.upper).abs()))
                    .fold(T::zero(), T::max);
                endpoint_error = Some(moved);
                converged = moved < lit(ENDPOINT_TOL);
            } else {
                endpoint_error = Some(T::infinity());
                converged = false;
            }
        }
        history.push(BandLevel {
            points_per_dim: g.points_per_dim(),
            bands,
        });
        if converged || level == refine_limit {
            break;
        }
        g = g.refined()?;
    }
    let bands = history.last().expect("at least one level").bands.clone();
    Ok(BandSet {
        gamma: gamma_of(&bands),
        resolution: BandResolution {
            nu: grid.nu(),
            initial_points: grid.points_per_dim(),
            final_points: g.points_per_dim(),
            levels: history.len(),
        },
        refinement_converged: converged,
        endpoint_error,
        branches,
        history,
        bands,
    })
}

/// Distinct endpoints of a band set, with a note for every point band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaPoints<T> {
    pub points: Vec<T>,
    pub notes: Vec<String>,
}

/// The endpoint set `Γ`. A point band `[m, m]` contributes one point.
pub fn gamma_points<T: Real>(bands: &BandSet<T>) -> GammaPoints<T> {
    let mut notes = Vec::new();
    for b in bands.bands.iter().filter(|b| b.is_point()) {
        notes.push(format!("degenerate point band [{0}, {0}] contributes a single endpoint", b.lower));
    }
    let mut points = bands.gamma.clone();
    points.dedup();
    GammaPoints { points, notes }
}

/// Which side of zero `φ_z` stays on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremalSide {
    /// `φ_z >= 0` with minimum 0.
    Minimum,
    /// `φ_z <= 0` with maximum 0.
    Maximum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalCheck<T> {
    pub z: T,
    pub min: T,
    pub max: T,
    pub tol: T,
    pub side: Option<ExtremalSide>,
    pub passed: bool,
}

/// Checks that 0 is a one-sided, attained value of `φ_z = Δ(·, z)`:
/// passes iff `|min φ| <= tol` or `|max φ| <= tol`. Grid extrema are
/// polished within one grid spacing.
pub fn verify_global_extremal<T: Real>(
    u: &MatrixSymbol<T>,
    z: T,
    grid: &TorusGrid<T>,
    tol: T,
) -> Result<ExtremalCheck<T>> {
    let vals = delta_on_grid(u, grid, z)?;
    let (mut imin, mut imax) = (0, 0);
    for (i, &v) in vals.iter().enumerate() {
        if v < vals[imin] {
            imin = i;
        }
        if v > vals[imax] {
            imax = i;
        }
    }
    let phi = |x: &[T]| delta(u, x, z).unwrap_or_else(|_| T::nan());
    let h = grid.spacing();
    let (_, lo) = coordinate_polish(phi, grid.node(imin), h, 3, 60);
    let (_, neg_hi) = coordinate_polish(|x: &[T]| -phi(x), grid.node(imax), h, 3, 60);
    let min = lo.min(vals[imin]);
    let max = (-neg_hi).max(vals[imax]);
    let side = if min >= -tol && min <= tol {
        Some(ExtremalSide::Minimum)
    } else if max <= tol && max >= -tol {
        Some(ExtremalSide::Maximum)
    } else {
        None
    };
    Ok(ExtremalCheck {
        z,
        min,
        max,
        tol,
        side,
        passed: side.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::builtin_potential;
    use std::f64::consts::PI;

    fn grid(nu: usize, n: usize) -> TorusGrid<f64> {
        TorusGrid::new(nu, n).unwrap()
    }

    fn cos1() -> MatrixSymbol<f64> {
        builtin_potential("cos_x1", 1, &[]).unwrap()
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&cos1(), &[0.0], 0.0).unwrap(), 1.0);
        let d = MatrixSymbol::from_fn(1, 2, |_| CMatrix::from_real_diagonal(&[2.0, 3.0]));
        assert!((delta::<f64>(&d, &[0.4], 1.0).unwrap() - 2.0).abs() < 1e-14);
        let u2 = builtin_potential::<f64>("cos_x1", 2, &[]).unwrap();
        assert!(delta(&u2, &[PI, 1.3], -1.0).unwrap().abs() < 1e-15);
        assert!(delta(&u2, &[0.3, 1.3], -1.0).unwrap() > 0.0);
    }

    #[test]
    fn delta_rejects_non_hermitian() {
        let u = MatrixSymbol::<f64>::from_fn(1, 2, |_| {
            let mut m = CMatrix::zeros(2, 2);
            m.as_mut_slice()[1] = num_complex::Complex::new(0.0, 1.0);
            m
        });
        assert!(matches!(delta(&u, &[0.0], 0.0), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn cosine_band_is_unit_interval() {
        let b = compute_bands(&cos1(), &grid(1, 64), 4).unwrap();
        assert_eq!(b.bands.len(), 1);
        assert!((b.bands[0].lower + 1.0).abs() < 1e-8);
        assert!((b.bands[0].upper - 1.0).abs() < 1e-8);
        assert!(b.refinement_converged);
    }

    #[test]
    fn shifted_diagonal_has_two_bands_matching_dense_oracle() {
        let u = builtin_potential::<f64>("diag_shifted_cos", 1, &[5.0]).unwrap();
        let b = compute_bands(&u, &grid(1, 33), 4).unwrap();
        // Dense sampling oracle, independent of the eigensolver.
        let samples: Vec<f64> = (0..4096).map(|j| (2.0 * PI * j as f64 / 4096.0).cos()).collect();
        let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let expect = [lo, hi, lo + 5.0, hi + 5.0];
        assert_eq!(b.gamma.len(), 4);
        for (g, e) in b.gamma.iter().zip(expect) {
            assert!((g - e).abs() < 1e-8, "{g} vs {e}");
        }
    }

    #[test]
    fn constant_potential_gives_point_band() {
        let u = builtin_potential::<f64>("constant", 1, &[0.0]).unwrap();
        let b = compute_bands(&u, &grid(1, 8), 2).unwrap();
        assert_eq!(b.bands, vec![Band::new(0.0, 0.0)]);
        assert_eq!(b.gamma, vec![0.0, 0.0]);
        let g = gamma_points(&b);
        assert_eq!(g.points, vec![0.0]);
        assert_eq!(g.notes.len(), 1);
    }

    #[test]
    fn touching_branches_are_merged() {
        let u = MatrixSymbol::<f64>::from_fn(1, 2, |x| CMatrix::from_real_diagonal(&[x[0].cos(), x[0].cos() + 2.0]));
        let b = compute_bands(&u, &grid(1, 32), 3).unwrap();
        assert_eq!(b.bands.len(), 1);
        assert!((b.bands[0].upper - 3.0).abs() < 1e-8);
    }

    #[test]
    fn endpoints_monotone_under_refinement() {
        let u = MatrixSymbol::<f64>::scalar(1, |x| (x[0] + 0.3).cos() + 0.2 * (2.0 * x[0]).sin());
        let b = compute_bands(&u, &grid(1, 7), 5).unwrap();
        for w in b.history.windows(2) {
            assert!(w[1].bands[0].lower <= w[0].bands[0].lower);
            assert!(w[1].bands[0].upper >= w[0].bands[0].upper);
        }
        assert!(b.refinement_converged);
    }

    #[test]
    fn gamma_of_explicit_bands() {
        let b = BandSet::from_bands(vec![Band::new(-1.0, 1.0), Band::new(4.0, 6.0)]).unwrap();
        assert_eq!(gamma_points(&b).points, vec![-1.0, 1.0, 4.0, 6.0]);
        assert_eq!(b.gap_of(-2.0), Some(GapLabel::BelowAll));
        assert_eq!(b.gap_of(2.0), Some(GapLabel::Between { lower_band: 0 }));
        assert_eq!(b.gap_of(7.0), Some(GapLabel::AboveAll));
        assert_eq!(b.gap_of(0.0), None);
        assert!(BandSet::from_bands(vec![Band::new(0.0, 2.0), Band::new(1.0, 3.0)]).is_err());
    }

    #[test]
    fn global_extremal_at_endpoints_only() {
        let g = grid(1, 64);
        let lo = verify_global_extremal(&cos1(), -1.0, &g, 1e-10).unwrap();
        assert!(lo.passed);
        assert_eq!(lo.side, Some(ExtremalSide::Minimum));
        let hi = verify_global_extremal(&cos1(), 1.0, &g, 1e-10).unwrap();
        assert_eq!(hi.side, Some(ExtremalSide::Maximum));
        assert!(!verify_global_extremal(&cos1(), 0.0, &g, 1e-10).unwrap().passed);
    }

    #[test]
    fn global_extremal_polishes_off_grid_extremum() {
        let u = MatrixSymbol::<f64>::scalar(1, |x| (x[0] - 0.05).cos());
        assert!(verify_global_extremal(&u, 1.0, &grid(1, 16), 1e-10).unwrap().passed);
    }

    #[test]
    fn every_endpoint_is_globally_extremal() {
        let u = builtin_potential::<f64>("diag_shifted_cos", 1, &[5.0]).unwrap();
        let g = grid(1, 64);
        let b = compute_bands(&u, &g, 3).unwrap();
        for &z in &gamma_points(&b).points {
            assert!(verify_global_extremal(&u, z, &g, 1e-9).unwrap().passed, "z = {z}");
        }
    }

    #[test]
    fn zero_scan_matches_bands() {
        let u = builtin_potential::<f64>("diag_shifted_cos", 1, &[5.0]).unwrap();
        let g = grid(1, 256);
        let b = compute_bands(&u, &g, 3).unwrap();
        let step = 0.01;
        for i in 0..=900 {
            let z = -2.0 + step * i as f64;
            let d = b.distance(z);
            if d > 0.0 && d < step || b.bands.iter().any(|band| (z - band.lower).abs() < step || (z - band.upper).abs() < step) {
                continue;
            }
            assert_eq!(delta_has_zero(&u, &g, z).unwrap(), d == 0.0, "z = {z}");
        }
    }
}

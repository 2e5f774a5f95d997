//! Nyström discretization of `H`, gap eigenvalues, refinement counting and
//! the determinant indicator `det(I + K̂(z))` with
//! `K̂(z) = (U − z)^{-1} K`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::essential::{BandSet, GapLabel};
use crate::linalg::CMatrix;
use crate::scalar::{lit, to_f64, Real};
use crate::symbols::{KernelSymbol, MatrixSymbol};
use crate::torus::TorusGrid;

/// Drift below which matched eigenvalues count as stable.
pub const DRIFT_TOL: f64 = 1e-4;
/// Smallest admissible distance between a scan point and a band.
pub const SCAN_BAND_CLEARANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssembleOptions {
    /// Relative max-norm tolerance on `H − H*` before symmetrization.
    pub symmetry_tol: f64,
    /// Largest admissible matrix dimension `n N^nu`.
    pub size_cap: usize,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self {
            symmetry_tol: 1e-12,
            size_cap: 8192,
        }
    }
}

/// Record of the weight transform used in assembly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Symmetrization<T> {
    /// `"sqrt-weight"`: `H_ij = δ_ij U(x_i) + sqrt(w_i w_j) K(x_i, x_j)`.
    pub scheme: String,
    pub weight: T,
    /// Relative residual `|H − H*|_max / |H|_max` before averaging.
    pub raw_residual: T,
}

/// Dense Hermitian matrix of size `n N^nu` approximating `H`.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator<T> {
    pub matrix: CMatrix<T>,
    pub grid: TorusGrid<T>,
    pub n: usize,
    pub symmetrization: Symmetrization<T>,
}

impl<T: Real> DiscretizedOperator<T> {
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    /// Relative max-norm Hermitian residual of the stored matrix.
    pub fn hermitian_residual(&self) -> T {
        let scale = self.matrix.max_abs();
        if scale == T::zero() {
            T::zero()
        } else {
            self.matrix.hermitian_residual() / scale
        }
    }
}

fn check_shapes<T: Real>(u: &MatrixSymbol<T>, k: &KernelSymbol<T>, grid: &TorusGrid<T>) -> Result<()> {
    if u.nu() != grid.nu() || k.nu() != grid.nu() || u.n() != k.n() {
        return Err(Error::DimensionMismatch(format!(
            "U on T^{} (n = {}), K on T^{} (n = {}), grid on T^{}",
            u.nu(),
            u.n(),
            k.nu(),
            k.n(),
            grid.nu()
        )));
    }
    Ok(())
}

/// Weighted kernel block matrix `w K(x_i, x_j)` (no potential).
fn kernel_matrix<T: Real>(k: &KernelSymbol<T>, grid: &TorusGrid<T>) -> CMatrix<T> {
    let (m, n) = (grid.len(), k.n());
    let size = m * n;
    let w = grid.weight();
    let rows: Vec<Vec<Complex<T>>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut block_row = vec![Complex::new(T::zero(), T::zero()); n * size];
            for j in 0..m {
                let kij = k.eval(grid.node(i), grid.node(j));
                for a in 0..n {
                    for b in 0..n {
                        block_row[a * size + j * n + b] = kij[(a, b)] * w;
                    }
                }
            }
            block_row
        })
        .collect();
    CMatrix::from_vec(size, size, rows.concat()).expect("block layout")
}

fn check_size(n: usize, grid_len: usize, cap: usize) -> Result<usize> {
    let size = n * grid_len;
    if size > cap {
        return Err(Error::SizeCap { size, cap });
    }
    Ok(size)
}

/// Symmetric Nyström matrix of `H` on `grid`. The uniform rule has equal
/// weights, so `sqrt(w_i w_j) = w`. Fails when the assembled matrix is not
/// Hermitian within `symmetry_tol` (relative), or exceeds the size cap.
pub fn assemble<T: Real>(
    u: &MatrixSymbol<T>,
    k: &KernelSymbol<T>,
    grid: &TorusGrid<T>,
    opts: &AssembleOptions,
) -> Result<DiscretizedOperator<T>> {
    check_shapes(u, k, grid)?;
    let n = u.n();
    check_size(n, grid.len(), opts.size_cap)?;
    let mut h = kernel_matrix(k, grid);
    for i in 0..grid.len() {
        let ui = u.eval(grid.node(i));
        for a in 0..n {
            for b in 0..n {
                let idx = (i * n + a, i * n + b);
                h[idx] = h[idx] + ui[(a, b)];
            }
        }
    }
    let scale = h.max_abs();
    let raw = if scale == T::zero() {
        T::zero()
    } else {
        h.hermitian_residual() / scale
    };
    if raw > lit(opts.symmetry_tol) {
        return Err(Error::AsymmetricKernel {
            deviation: to_f64(raw),
            tol: opts.symmetry_tol,
        });
    }
    h.symmetrize();
    Ok(DiscretizedOperator {
        matrix: h,
        grid: grid.clone(),
        n,
        symmetrization: Symmetrization {
            scheme: "sqrt-weight".into(),
            weight: grid.weight(),
            raw_residual: raw,
        },
    })
}

/// An eigenvalue outside the bands together with its gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEigenvalue<T> {
    pub value: T,
    pub gap: GapLabel,
}

/// Eigenvalues of a discretized operator lying farther than `margin` from
/// every band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult<T> {
    pub eigenvalues_outside: Vec<GapEigenvalue<T>>,
    /// Indexed by [`GapLabel::index`].
    pub counts_per_gap: Vec<usize>,
    pub margin: T,
    pub resolutions: Vec<usize>,
    /// Drift of each eigenvalue against the previous resolution, when known.
    pub stability: Vec<Option<T>>,
    pub matrix_size: usize,
    pub hermitian_residual: T,
}

impl<T: Real> SpectralResult<T> {
    pub fn values(&self) -> Vec<T> {
        self.eigenvalues_outside.iter().map(|e| e.value).collect()
    }

    pub fn total(&self) -> usize {
        self.eigenvalues_outside.len()
    }
}

/// Eigenvalues of `H` farther than `margin` from every band, labelled by gap.
pub fn classify_outside<T: Real>(eigenvalues: &[T], bands: &BandSet<T>, margin: T) -> Vec<GapEigenvalue<T>> {
    eigenvalues
        .iter()
        .filter(|&&e| bands.distance(e) > margin)
        .map(|&e| GapEigenvalue {
            value: e,
            gap: bands.gap_of(e).expect("outside every band"),
        })
        .collect()
}

/// Full Hermitian eigendecomposition followed by gap classification.
pub fn eig_outside<T: Real>(op: &DiscretizedOperator<T>, bands: &BandSet<T>, margin: T) -> Result<SpectralResult<T>> {
    if !(margin > T::zero()) {
        return Err(Error::InvalidParameter("margin must be positive".into()));
    }
    let eig = op.matrix.hermitian_eigenvalues()?;
    let outside = classify_outside(&eig, bands, margin);
    let mut counts = vec![0; bands.gap_count()];
    for e in &outside {
        counts[e.gap.index(bands.len())] += 1;
    }
    Ok(SpectralResult {
        stability: vec![None; outside.len()],
        eigenvalues_outside: outside,
        counts_per_gap: counts,
        margin,
        resolutions: vec![op.grid.points_per_dim()],
        matrix_size: op.size(),
        hermitian_residual: op.hermitian_residual(),
    })
}

/// Default exclusion margin: ten times the observed endpoint refinement
/// error, floored at `floor`.
pub fn default_margin<T: Real>(bands: &BandSet<T>, floor: T) -> T {
    match bands.endpoint_error {
        Some(e) if e.is_finite() => (e * lit(10.0)).max(floor),
        _ => floor,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    /// Counts agree on the last two resolutions and matched eigenvalues
    /// drift less than `1e-4`.
    StableFinite,
    /// Counts keep increasing with resolution.
    Growing,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineLevel<T> {
    pub points_per_dim: usize,
    pub counts_per_gap: Vec<usize>,
    pub eigenvalues: Vec<GapEigenvalue<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineReport<T> {
    pub levels: Vec<RefineLevel<T>>,
    /// `|λ_N − λ_N'|` for eigenvalues matched (per gap, in order) between
    /// the last two resolutions; empty when the counts differ.
    pub drifts: Vec<T>,
    pub max_drift: Option<T>,
    pub verdict: Stability,
    pub margin: T,
}

impl<T: Real> RefineReport<T> {
    pub fn totals(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.eigenvalues.len()).collect()
    }
}

/// [`refine_count_by`] with the same kernel at every resolution.
pub fn refine_count<T: Real>(
    u: &MatrixSymbol<T>,
    k: &KernelSymbol<T>,
    bands: &BandSet<T>,
    resolutions: &[usize],
    margin: T,
    opts: &AssembleOptions,
) -> Result<RefineReport<T>> {
    refine_count_by(u, |_| Ok(k.clone()), bands, resolutions, margin, opts)
}

/// Gap counts across increasing resolutions. `kernel_for(N)` supplies the
/// kernel at `N` points per axis, which lets a mode cutoff grow with `N`.
pub fn refine_count_by<T: Real>(
    u: &MatrixSymbol<T>,
    kernel_for: impl Fn(usize) -> Result<KernelSymbol<T>>,
    bands: &BandSet<T>,
    resolutions: &[usize],
    margin: T,
    opts: &AssembleOptions,
) -> Result<RefineReport<T>> {
    if resolutions.len() < 3 || resolutions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "refinement needs at least three strictly increasing resolutions".into(),
        ));
    }
    let mut levels = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let grid = TorusGrid::new(u.nu(), n)?;
        let k = kernel_for(n)?;
        let op = assemble(u, &k, &grid, opts)?;
        let res = eig_outside(&op, bands, margin)?;
        levels.push(RefineLevel {
            points_per_dim: n,
            counts_per_gap: res.counts_per_gap,
            eigenvalues: res.eigenvalues_outside,
        });
    }
    let (prev, last) = (&levels[levels.len() - 2], &levels[levels.len() - 1]);
    let drifts: Vec<T> = if prev.counts_per_gap == last.counts_per_gap {
        prev.eigenvalues
            .iter()
            .zip(&last.eigenvalues)
            .map(|(a, b)| (a.value - b.value).abs())
            .collect()
    } else {
        Vec::new()
    };
    let max_drift = drifts.iter().copied().reduce(T::max);
    let totals: Vec<usize> = levels.iter().map(|l| l.eigenvalues.len()).collect();
    let verdict = if prev.counts_per_gap == last.counts_per_gap && max_drift.is_none_or(|d| d < lit(DRIFT_TOL)) {
        Stability::StableFinite
    } else if totals.windows(2).all(|w| w[0] <= w[1]) && totals.last() > totals.first() {
        Stability::Growing
    } else {
        Stability::Unresolved
    };
    Ok(RefineReport {
        levels,
        drifts,
        max_drift,
        verdict,
        margin,
    })
}

/// Determinant indicator at one spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSample<T> {
    pub z: T,
    /// Sign of `det(I + K̂(z))` (0 when singular).
    pub sign: i8,
    pub log_abs: T,
    /// `|Im det| / |det|`; the determinant is real in exact arithmetic.
    pub imag_ratio: T,
}

struct Indicator<T> {
    kernel: CMatrix<T>,
    potentials: Vec<CMatrix<T>>,
    n: usize,
}

impl<T: Real> Indicator<T> {
    fn new(u: &MatrixSymbol<T>, k: &KernelSymbol<T>, grid: &TorusGrid<T>, cap: usize) -> Result<Self> {
        check_shapes(u, k, grid)?;
        check_size(u.n(), grid.len(), cap)?;
        Ok(Self {
            kernel: kernel_matrix(k, grid),
            potentials: grid.nodes().map(|x| u.eval(x)).collect(),
            n: u.n(),
        })
    }

    fn sample(&self, z: T) -> Result<ScanSample<T>> {
        let n = self.n;
        let size = self.kernel.rows();
        let mut m = CMatrix::identity(size);
        for (i, ui) in self.potentials.iter().enumerate() {
            let shifted = ui - &CMatrix::from_real_diagonal(&vec![z; n]);
            let inv = shifted.inverse()?;
            for a in 0..n {
                let row = i * n + a;
                for col in 0..size {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for b in 0..n {
                        acc = acc + inv[(a, b)] * self.kernel[(i * n + b, col)];
                    }
                    m[(row, col)] = m[(row, col)] + acc;
                }
            }
        }
        let ld = m.log_determinant()?;
        let sign = if ld.phase.norm() == T::zero() {
            0
        } else if ld.phase.re >= T::zero() {
            1
        } else {
            -1
        };
        Ok(ScanSample {
            z,
            sign,
            log_abs: ld.log_abs,
            imag_ratio: ld.phase.im.abs(),
        })
    }
}

fn check_clearance<T: Real>(bands: &BandSet<T>, z: T) -> Result<()> {
    let d = bands.distance(z);
    if !(d > lit(SCAN_BAND_CLEARANCE)) {
        return Err(Error::InsideBand {
            z: to_f64(z),
            distance: to_f64(d),
        });
    }
    Ok(())
}

/// Sign and log-magnitude of `det(I + K̂(z))` for each sample, where `K̂(z)`
/// is the Nyström matrix of `(U(x) − z)^{-1} K(x, y)`. Zeros of the
/// determinant are eigenvalues of the discretized `H`.
pub fn birman_schwinger_scan<T: Real>(
    u: &MatrixSymbol<T>,
    k: &KernelSymbol<T>,
    grid: &TorusGrid<T>,
    bands: &BandSet<T>,
    z_samples: &[T],
) -> Result<Vec<ScanSample<T>>> {
    for &z in z_samples {
        check_clearance(bands, z)?;
    }
    let ind = Indicator::new(u, k, grid, AssembleOptions::default().size_cap)?;
    z_samples.iter().map(|&z| ind.sample(z)).collect()
}

/// Root of `det(I + K̂(z))` in `[lo, hi]` by bisection on its sign.
pub fn birman_schwinger_root<T: Real>(
    u: &MatrixSymbol<T>,
    k: &KernelSymbol<T>,
    grid: &TorusGrid<T>,
    bands: &BandSet<T>,
    lo: T,
    hi: T,
    xtol: T,
) -> Result<T> {
    check_clearance(bands, lo)?;
    check_clearance(bands, hi)?;
    if bands.gap_of(lo) != bands.gap_of(hi) {
        return Err(Error::InvalidParameter("root bracket straddles a band".into()));
    }
    let ind = Indicator::new(u, k, grid, AssembleOptions::default().size_cap)?;
    let (mut a, mut b) = (lo, hi);
    let sa = ind.sample(a)?.sign;
    let sb = ind.sample(b)?.sign;
    if sa == 0 {
        return Ok(a);
    }
    if sb == 0 {
        return Ok(b);
    }
    if sa == sb {
        return Err(Error::BadBracket {
            lo: to_f64(lo),
            hi: to_f64(hi),
        });
    }
    let half = lit::<T>(0.5);
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        let mid = (a + b) * half;
        let sm = ind.sample(mid)?.sign;
        if sm == 0 {
            return Ok(mid);
        }
        if sm == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((a + b) * half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::essential::{compute_bands, Band};
    use crate::symbols::{builtin_kernel, builtin_potential};
    use std::f64::consts::{PI, SQRT_2};

    fn cos1() -> MatrixSymbol<f64> {
        builtin_potential("cos_x1", 1, &[]).unwrap()
    }

    fn rank_one() -> KernelSymbol<f64> {
        builtin_kernel("rank_one_const", 1, &[1.0 / (2.0 * PI)]).unwrap()
    }

    fn unit_band() -> BandSet<f64> {
        BandSet::from_bands(vec![Band::new(-1.0, 1.0)]).unwrap()
    }

    /// Rank-one dispersion `1 = γ ∫ dx / (cos x − z)` solved by bisection on
    /// the closed form `2π / sqrt(z² − 1)`.
    fn rank_one_oracle(gamma: f64) -> f64 {
        let f = |z: f64| gamma * 2.0 * PI / (z * z - 1.0).sqrt() - 1.0;
        let (mut a, mut b) = (-10.0, -1.0 - 1e-12);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn zero_kernel_reproduces_multiplication_operator() {
        let g = TorusGrid::new(1, 8).unwrap();
        let op = assemble(&cos1(), &KernelSymbol::zero(1, 1), &g, &AssembleOptions::default()).unwrap();
        let ev = op.matrix.hermitian_eigenvalues().unwrap();
        let mut expect: Vec<f64> = (0..8).map(|j| (2.0 * PI * j as f64 / 8.0).cos()).collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let res = eig_outside(&op, &unit_band(), 1e-9).unwrap();
        assert!(res.eigenvalues_outside.is_empty());
    }

    #[test]
    fn rank_one_eigenvalue_matches_closed_form() {
        let oracle = rank_one_oracle(1.0 / (2.0 * PI));
        assert!((oracle + SQRT_2).abs() < 1e-12);
        let g = TorusGrid::new(1, 64).unwrap();
        let op = assemble(&cos1(), &rank_one(), &g, &AssembleOptions::default()).unwrap();
        assert!(op.hermitian_residual() < 1e-12);
        let res = eig_outside(&op, &unit_band(), 0.05).unwrap();
        assert_eq!(res.total(), 1);
        assert_eq!(res.counts_per_gap, vec![1, 0]);
        assert!((res.eigenvalues_outside[0].value - oracle).abs() < 1e-10);
    }

    #[test]
    fn asymmetric_kernel_is_rejected() {
        let k = KernelSymbol::<f64>::from_fn(1, 1, |x, y| CMatrix::from_real_diagonal(&[x[0] - 2.0 * y[0]]));
        let g = TorusGrid::new(1, 8).unwrap();
        assert!(matches!(
            assemble(&cos1(), &k, &g, &AssembleOptions::default()),
            Err(Error::AsymmetricKernel { .. })
        ));
    }

    #[test]
    fn size_cap_is_a_hard_error() {
        let g = TorusGrid::new(2, 16).unwrap();
        let u = builtin_potential::<f64>("cos_x1", 2, &[]).unwrap();
        let opts = AssembleOptions {
            size_cap: 100,
            ..Default::default()
        };
        assert_eq!(
            assemble(&u, &KernelSymbol::zero(2, 1), &g, &opts).unwrap_err(),
            Error::SizeCap { size: 256, cap: 100 }
        );
    }

    #[test]
    fn refinement_of_rank_one_case_is_stable() {
        let rep = refine_count(&cos1(), &rank_one(), &unit_band(), &[32, 64, 128], 0.05, &AssembleOptions::default()).unwrap();
        assert_eq!(rep.totals(), vec![1, 1, 1]);
        assert_eq!(rep.verdict, Stability::StableFinite);
        let zero = refine_count(&cos1(), &KernelSymbol::zero(1, 1), &unit_band(), &[8, 16, 32], 0.05, &AssembleOptions::default()).unwrap();
        assert_eq!(zero.totals(), vec![0, 0, 0]);
        assert_eq!(zero.verdict, Stability::StableFinite);
    }

    #[test]
    fn refinement_needs_three_increasing_levels() {
        let r = refine_count(&cos1(), &rank_one(), &unit_band(), &[32, 64], 0.05, &AssembleOptions::default());
        assert!(r.is_err());
        let r = refine_count(&cos1(), &rank_one(), &unit_band(), &[32, 64, 64], 0.05, &AssembleOptions::default());
        assert!(r.is_err());
    }

    #[test]
    fn growing_kernel_family_is_flagged() {
        // Harmonics in x_2 decouple from U = cos x_1, so each adds one bound
        // state; the number of harmonics grows with N.
        let u = builtin_potential::<f64>("cos_x1", 2, &[]).unwrap();
        let rep = refine_count_by(
            &u,
            |n| {
                let terms = (1..=n / 4)
                    .map(|k| crate::symbols::SeparableTerm::new(-0.5, crate::torus::TrigPoly::cosine(2, 1, k as i64, 1.0)))
                    .collect();
                KernelSymbol::separable(2, 1, terms)
            },
            &unit_band(),
            &[8, 12, 16],
            1e-3,
            &AssembleOptions::default(),
        )
        .unwrap();
        let t = rep.totals();
        assert!(t[0] < t[1] && t[1] < t[2], "{t:?}");
        assert_eq!(rep.verdict, Stability::Growing);
    }

    #[test]
    fn scan_identities() {
        let g = TorusGrid::new(1, 32).unwrap();
        let zs = [-5.0, -2.0, 2.0];
        for s in birman_schwinger_scan(&cos1(), &KernelSymbol::zero(1, 1), &g, &unit_band(), &zs).unwrap() {
            assert_eq!(s.sign, 1);
            assert!(s.log_abs.abs() < 1e-14);
        }
        let far = birman_schwinger_scan(&cos1(), &rank_one(), &g, &unit_band(), &[-1e8]).unwrap();
        assert!(far[0].log_abs.abs() < 1e-7);
        assert!(birman_schwinger_scan(&cos1(), &rank_one(), &g, &unit_band(), &[0.5]).is_err());
    }

    #[test]
    fn scan_changes_sign_across_bound_state() {
        let g = TorusGrid::new(1, 64).unwrap();
        let s = birman_schwinger_scan(&cos1(), &rank_one(), &g, &unit_band(), &[-1.5, -1.3]).unwrap();
        assert_ne!(s[0].sign, s[1].sign);
        // Closed form of the rank-one determinant.
        for z in [-3.0f64, -1.2] {
            let exact = 1.0 - 1.0 / (z * z - 1.0).sqrt();
            let v = birman_schwinger_scan(&cos1(), &rank_one(), &g, &unit_band(), &[z]).unwrap()[0];
            assert!((v.sign as f64 * v.log_abs.exp() - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn determinant_root_agrees_with_eigensolve() {
        let g = TorusGrid::new(1, 128).unwrap();
        let root = birman_schwinger_root(&cos1(), &rank_one(), &g, &unit_band(), -2.0, -1.1, 1e-13).unwrap();
        let op = assemble(&cos1(), &rank_one(), &g, &AssembleOptions::default()).unwrap();
        let ev = eig_outside(&op, &unit_band(), 0.05).unwrap().values()[0];
        assert!((root - ev).abs() < 1e-6);
    }

    #[test]
    fn separable_rank_bounds_gap_count() {
        let g = TorusGrid::new(1, 48).unwrap();
        let bands = compute_bands(&cos1(), &g, 2).unwrap();
        let k = builtin_kernel::<f64>("cos_harmonics", 1, &[-1.0, 0.8, -2.0]).unwrap();
        let op = assemble(&cos1(), &k, &g, &AssembleOptions::default()).unwrap();
        let res = eig_outside(&op, &bands, 1e-6).unwrap();
        assert!(res.total() <= 6);
    }
}

//! The counterexample on `T²`: `U(x) = cos x_1` and
//! `K(x, y) = s Σ_k c_k cos(k x_2) cos(k y_2)` with
//! `1 / c_k = ∫_0^{2π} dx / (cos x + 1 + e^{-k})`.
//!
//! Every mode `k` reduces to a rank-one problem in `x_1`: a bound state `z`
//! below the band `[−1, 1]` solves `β c_k · 2π / sqrt(z² − 1) = 1` with
//! `β = −s π`. The scale `s` depends on the measure and sign convention,
//! which is an explicit [`Convention`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::discrete::{assemble, eig_outside, AssembleOptions};
use crate::error::{Error, Result};
use crate::essential::{compute_bands, delta, BandSet, GapLabel};
use crate::linalg::CMatrix;
use crate::multiplicity::find_extremal_set_levels;
use crate::numeric::{brent, fit_line};
use crate::scalar::{count, lit, to_f64, Real};
use crate::symbols::{builtin_potential, KernelSymbol, MatrixSymbol, Representation, SeparableTerm};
use crate::torus::{two_pi, TorusGrid, TrigPoly};

/// Measure normalization and kernel sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `s = −1/π`, `β = 1`: roots are exactly `−1 − e^{-k}`.
    PaperCalibrated,
    /// Lebesgue measure, negated kernel: `s = −1`, `β = π`.
    LebesgueNegated,
    /// Normalized measure `dx / (2π)^2`, negated kernel: `s = −1/(4π²)`,
    /// `β = 1/(4π)`.
    LebesgueNormalized,
}

impl Convention {
    pub const ALL: [Convention; 3] = [Self::PaperCalibrated, Self::LebesgueNegated, Self::LebesgueNormalized];

    /// Numeric code used by builtin parameter lists.
    pub fn from_code(code: f64) -> Result<Self> {
        match code {
            c if c == 0.0 => Ok(Self::PaperCalibrated),
            c if c == 1.0 => Ok(Self::LebesgueNegated),
            c if c == 2.0 => Ok(Self::LebesgueNormalized),
            c => Err(Error::UnknownConvention(c.to_string())),
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            Self::PaperCalibrated => 0,
            Self::LebesgueNegated => 1,
            Self::LebesgueNormalized => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::PaperCalibrated => "paper-calibrated",
            Self::LebesgueNegated => "lebesgue-negated",
            Self::LebesgueNormalized => "lebesgue-normalized",
        }
    }

    /// Factor `s` multiplying `Σ c_k cos(k x_2) cos(k y_2)`.
    pub fn kernel_scale<T: Real>(&self) -> T {
        match self {
            Self::PaperCalibrated => -T::FRAC_1_PI(),
            Self::LebesgueNegated => -T::one(),
            Self::LebesgueNormalized => -T::one() / (lit::<T>(4.0) * T::PI() * T::PI()),
        }
    }

    /// `β = −s π`.
    pub fn beta<T: Real>(&self) -> T {
        beta_of(self.kernel_scale())
    }
}

fn beta_of<T: Real>(scale: T) -> T {
    -scale * T::PI()
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownConvention(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleConfig {
    pub k_max: usize,
    pub convention: Convention,
    pub beta: f64,
}

impl ExampleConfig {
    pub fn new(k_max: usize, convention: Convention) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::InvalidParameter("k_max must be at least 1".into()));
        }
        Ok(Self {
            k_max,
            convention,
            beta: convention.beta(),
        })
    }
}

/// `c_k = e^{-k/2} sqrt(2 + e^{-k}) / (2π)`, i.e.
/// `sqrt((1 + e^{-k})² − 1) / (2π)` without cancellation.
pub fn coupling_closed_form<T: Real>(k: usize) -> T {
    let e = (-count::<T>(k)).exp();
    (-count::<T>(k) * lit(0.5)).exp() * (lit::<T>(2.0) + e).sqrt() / two_pi::<T>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingQuadrature<T> {
    /// `1 / ∫ (cos x + 1 + e^{-k})^{-1} dx`.
    pub value: T,
    pub points: usize,
    pub converged: bool,
}

const MAX_QUADRATURE_POINTS: usize = 1 << 24;

/// `c_k` from the defining integral by the trapezoidal rule, doubling the
/// node count until the relative change falls below `1e-15 · sqrt(n)`,
/// the summation roundoff floor for `n` nodes. The integrand is evaluated
/// as `1 / (2 cos²(x/2) + e^{-k})`.
pub fn coupling_quadrature<T: Real>(k: usize) -> CouplingQuadrature<T> {
    let e = (-count::<T>(k)).exp();
    let f = |x: T| {
        let c = (x * lit(0.5)).cos();
        T::one() / (lit::<T>(2.0) * c * c + e)
    };
    let tol = lit::<T>(1e-15).max(T::epsilon() * lit(4.0));
    let mut n = 64;
    let mut sum: T = (0..n).map(|j| f(two_pi::<T>() * count(j) / count(n))).sum();
    let mut integral = sum * two_pi::<T>() / count(n);
    let mut converged = false;
    while n < MAX_QUADRATURE_POINTS {
        let h = two_pi::<T>() / count(2 * n);
        sum = sum + (0..n).map(|j| f(h * count(2 * j + 1))).sum::<T>();
        n *= 2;
        let next = sum * two_pi::<T>() / count(n);
        let change = ((next - integral) / next).abs();
        integral = next;
        if change < tol * count::<T>(n).sqrt() {
            converged = true;
            break;
        }
    }
    CouplingQuadrature {
        value: T::one() / integral,
        points: n,
        converged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingCheck<T> {
    pub k: usize,
    pub closed_form: T,
    pub quadrature: T,
    pub relative_error: T,
    pub quadrature_points: usize,
}

/// Both coupling computations for mode `k`.
pub fn coupling_check<T: Real>(k: usize) -> CouplingCheck<T> {
    let closed: T = coupling_closed_form(k);
    let q = coupling_quadrature::<T>(k);
    CouplingCheck {
        k,
        closed_form: closed,
        quadrature: q.value,
        relative_error: if q.converged {
            ((q.value - closed) / closed).abs()
        } else {
            T::infinity()
        },
        quadrature_points: q.points,
    }
}

/// Built example with the coupling cross-check attached.
#[derive(Debug, Clone)]
pub struct PaperExample<T> {
    pub config: ExampleConfig,
    pub potential: MatrixSymbol<T>,
    pub kernel: KernelSymbol<T>,
    pub couplings: Vec<CouplingCheck<T>>,
    pub kernel_scale: T,
}

/// `U = cos x_1` on `T²` and the kernel truncated at `k_max`. Fails when
/// the two coupling computations disagree by more than `1e-10` (relative).
pub fn build_paper_example<T: Real>(cfg: &ExampleConfig) -> Result<PaperExample<T>> {
    if cfg.k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let tol = lit::<T>(1e-10).max(T::epsilon() * lit(1e3));
    let couplings: Vec<CouplingCheck<T>> = (1..=cfg.k_max).map(coupling_check).collect();
    if let Some(bad) = couplings.iter().find(|c| !(c.relative_error <= tol)) {
        return Err(Error::InvalidParameter(format!(
            "coupling c_{} fails the quadrature cross-check (relative error {:e})",
            bad.k,
            to_f64(bad.relative_error)
        )));
    }
    let s: T = cfg.convention.kernel_scale();
    let weights: Vec<T> = couplings.iter().map(|c| s * c.closed_form).collect();
    let terms = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| SeparableTerm::new(w, TrigPoly::cosine(2, 1, i as i64 + 1, T::one())))
        .collect();
    let kernel = KernelSymbol::from_fn(2, 1, move |x: &[T], y: &[T]| {
        let v = weights.iter().enumerate().fold(T::zero(), |acc, (i, &w)| {
            let k = count::<T>(i + 1);
            acc + w * (k * x[1]).cos() * (k * y[1]).cos()
        });
        CMatrix::from_real_diagonal(&[v])
    })
    .with_separable_form(terms)
    .with_representation(Representation::Builtin {
        name: "paper_example".into(),
        params: vec![cfg.k_max as f64, cfg.convention.code() as f64],
    });
    Ok(PaperExample {
        config: *cfg,
        potential: builtin_potential("cos_x1", 2, &[])?,
        kernel,
        couplings,
        kernel_scale: s,
    })
}

/// `∫_0^{2π} dx / (cos x − z) = 2π / sqrt(z² − 1)` for `z < −1`.
pub fn resolvent_integral<T: Real>(z: T) -> T {
    two_pi::<T>() / (z * z - T::one()).sqrt()
}

/// Outcome of one mode's dispersion solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum ModeSolution<T> {
    Bound { k: usize, z: T },
    NoBoundState { k: usize },
}

impl<T: Copy> ModeSolution<T> {
    pub fn z(&self) -> Option<T> {
        match *self {
            Self::Bound { z, .. } => Some(z),
            Self::NoBoundState { .. } => None,
        }
    }
}

/// Root of `β c · 2π / sqrt(z² − 1) = 1` on `z < −1`, solved in
/// `log(−1 − z)` so that roots near the edge keep full relative accuracy.
pub fn solve_mode<T: Real>(k: usize, beta: T, c: T) -> Result<T> {
    if !(beta * c > T::zero()) {
        return Err(Error::NoBoundState { mode: k });
    }
    let f = |s: T| {
        let t = s.exp();
        beta * c * two_pi::<T>() / (t * (lit::<T>(2.0) + t)).sqrt() - T::one()
    };
    let floor = T::min_positive_value().ln() * lit(0.9);
    let mut lo = -T::one();
    while f(lo) <= T::zero() {
        lo = lo * lit(2.0);
        if lo < floor {
            return Err(Error::NoBoundState { mode: k });
        }
    }
    let mut hi = T::one();
    while f(hi) >= T::zero() {
        hi = hi * lit(2.0);
        if hi > lit(700.0) {
            return Err(Error::NoBoundState { mode: k });
        }
    }
    let s = brent(f, lo, hi, T::epsilon(), 400)?;
    Ok(-T::one() - s.exp())
}

/// Per-mode bound states `z_k`, `k = 1..=k_max`.
pub fn dispersion_roots<T: Real>(cfg: &ExampleConfig) -> Vec<ModeSolution<T>> {
    let beta: T = cfg.convention.beta();
    (1..=cfg.k_max)
        .map(|k| match solve_mode(k, beta, coupling_closed_form(k)) {
            Ok(z) => ModeSolution::Bound { k, z },
            Err(_) => ModeSolution::NoBoundState { k },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCandidate {
    pub label: String,
    pub kernel_scale: f64,
    pub beta: f64,
    pub z1: Option<f64>,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// `−1 − e^{-1}`.
    pub target: f64,
    pub candidates: Vec<CalibrationCandidate>,
    pub identified: Option<Convention>,
}

/// Solves mode 1 under every shipped convention and under the kernel as
/// printed (`s = +1`, Lebesgue measure), and reports which reproduces
/// `z_1 = −1 − e^{-1}` within `1e-9`.
pub fn calibrate() -> Calibration {
    let target = -1.0 - (-1.0f64).exp();
    let c1: f64 = coupling_closed_form(1);
    let candidate = |label: String, s: f64| {
        let beta = beta_of(s);
        let z1 = solve_mode(1, beta, c1).ok();
        CalibrationCandidate {
            label,
            kernel_scale: s,
            beta,
            z1,
            matches: z1.is_some_and(|z| (z - target).abs() < 1e-9),
        }
    };
    let mut candidates: Vec<CalibrationCandidate> = Convention::ALL
        .iter()
        .map(|c| candidate(c.name().to_string(), c.kernel_scale()))
        .collect();
    candidates.push(candidate("lebesgue-as-printed".into(), 1.0));
    let identified = Convention::ALL
        .into_iter()
        .zip(&candidates)
        .find(|(_, c)| c.matches)
        .map(|(c, _)| c);
    Calibration {
        target,
        candidates,
        identified,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccumulationVerdict<T> {
    pub passed: bool,
    /// Lower edge of the lowest band.
    pub edge: T,
    /// Slope of `log|z_k − edge|` against `k`.
    pub slope: Option<T>,
    pub intercept: Option<T>,
    pub residual: Option<T>,
    pub below_edge: bool,
    pub strictly_increasing: bool,
    pub failures: Vec<String>,
}

/// Allowed deviation of the accumulation slope from `−1`.
pub const SLOPE_TOL: f64 = 0.15;

/// Checks exponential accumulation at the lowest band edge: every `z_k`
/// lies below the edge, the list strictly increases, and
/// `log|z_k − edge|` is affine in `k = 1, 2, ...` with slope `−1 ± 0.15`.
pub fn verify_accumulation<T: Real>(z_list: &[T], bands: &BandSet<T>) -> AccumulationVerdict<T> {
    let edge = bands.bands.first().map_or(T::zero(), |b| b.lower);
    let below_edge = !z_list.is_empty() && z_list.iter().all(|&z| z < edge);
    let strictly_increasing = z_list.windows(2).all(|w| w[0] < w[1]);
    let mut failures = Vec::new();
    if !below_edge {
        failures.push("not every value lies below the band edge".to_string());
    }
    if !strictly_increasing {
        failures.push("values are not strictly increasing".to_string());
    }
    let fit = if z_list.len() >= 2 && below_edge {
        let ks: Vec<T> = (1..=z_list.len()).map(count).collect();
        let ys: Vec<T> = z_list.iter().map(|&z| (edge - z).ln()).collect();
        fit_line(&ks, &ys).ok()
    } else {
        failures.push("need at least two values below the edge for a slope".to_string());
        None
    };
    if let Some(f) = &fit {
        if (f.slope + T::one()).abs() > lit(SLOPE_TOL) {
            failures.push(format!("slope {} is not within {SLOPE_TOL} of -1", f.slope));
        }
    }
    AccumulationVerdict {
        passed: failures.is_empty(),
        edge,
        slope: fit.map(|f| f.slope),
        intercept: fit.map(|f| f.intercept),
        residual: fit.map(|f| f.residual),
        below_edge,
        strictly_increasing,
        failures,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRunOptions {
    /// Nyström points per axis for the 2-D eigensolve.
    pub points_per_dim: usize,
    /// Initial points per axis for the band computation.
    pub band_points: usize,
    pub band_refine_limit: usize,
    /// Initial points per axis for the extremal-set check.
    pub extremal_points: usize,
    pub extremal_levels: usize,
    /// Exclusion margin around the band; at least `1e-8`.
    pub margin: f64,
    /// Largest allowed root/eigenvalue mismatch.
    pub match_tol: f64,
    pub size_cap: usize,
}

impl Default for ExampleRunOptions {
    fn default() -> Self {
        Self {
            points_per_dim: 48,
            band_points: 64,
            band_refine_limit: 3,
            extremal_points: 16,
            extremal_levels: 3,
            margin: 1e-8,
            match_tol: 1e-3,
            size_cap: 8192,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeMatch<T> {
    pub k: usize,
    pub root: T,
    pub eigenvalue: T,
    pub difference: T,
}

/// Extremal-set structure of `φ_z` for one endpoint across levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointStructure<T> {
    pub z: T,
    pub points_per_dim: Vec<usize>,
    pub component_counts: Vec<usize>,
    pub max_diameters: Vec<T>,
    pub non_isolated_every_level: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleReport<T> {
    pub config: ExampleConfig,
    pub couplings: Vec<CouplingCheck<T>>,
    pub roots: Vec<ModeSolution<T>>,
    pub bands: BandSet<T>,
    pub below_band_eigenvalues: Vec<T>,
    pub matches: Vec<ModeMatch<T>>,
    pub max_difference: Option<T>,
    pub root_accumulation: AccumulationVerdict<T>,
    pub eigenvalue_accumulation: AccumulationVerdict<T>,
    /// `max_k |z_k − (−1 − e^{-k})|` under the calibrated convention.
    pub calibrated_deviation: Option<T>,
    pub endpoints: Vec<EndpointStructure<T>>,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Builds the example, solves every mode, runs the 2-D eigensolve, checks
/// accumulation of both root lists and the non-isolation of the extremal
/// sets at `z = ±1`.
pub fn run_example<T: Real>(cfg: &ExampleConfig, opts: &ExampleRunOptions) -> Result<ExampleReport<T>> {
    let ex = build_paper_example::<T>(cfg)?;
    let roots = dispersion_roots::<T>(cfg);
    let mut failures = Vec::new();
    let bound: Vec<T> = roots.iter().filter_map(ModeSolution::z).collect();
    if bound.len() < roots.len() {
        failures.push(format!(
            "{} of {} modes have no bound state under {}",
            roots.len() - bound.len(),
            roots.len(),
            cfg.convention
        ));
    }

    let bands = compute_bands(&ex.potential, &TorusGrid::new(2, opts.band_points)?, opts.band_refine_limit)?;
    let grid = TorusGrid::new(2, opts.points_per_dim)?;
    let op = assemble(
        &ex.potential,
        &ex.kernel,
        &grid,
        &AssembleOptions {
            size_cap: opts.size_cap,
            ..Default::default()
        },
    )?;
    let margin = lit::<T>(opts.margin.max(1e-8));
    let spectral = eig_outside(&op, &bands, margin)?;
    let below: Vec<T> = spectral
        .eigenvalues_outside
        .iter()
        .filter(|e| e.gap == GapLabel::BelowAll)
        .map(|e| e.value)
        .collect();

    let mut matches = Vec::new();
    if below.len() == bound.len() {
        for (i, (&r, &e)) in bound.iter().zip(&below).enumerate() {
            matches.push(ModeMatch {
                k: i + 1,
                root: r,
                eigenvalue: e,
                difference: (r - e).abs(),
            });
        }
    } else {
        failures.push(format!(
            "{} below-band eigenvalues for {} dispersion roots",
            below.len(),
            bound.len()
        ));
    }
    let max_difference = matches.iter().map(|m| m.difference).reduce(T::max);
    if let Some(d) = max_difference {
        if d > lit(opts.match_tol) {
            failures.push(format!("root/eigenvalue mismatch {d} exceeds {}", opts.match_tol));
        }
    }

    let root_accumulation = verify_accumulation(&bound, &bands);
    if !root_accumulation.passed {
        failures.push(format!("dispersion roots: {}", root_accumulation.failures.join("; ")));
    }
    let eigenvalue_accumulation = verify_accumulation(&below, &bands);
    if !eigenvalue_accumulation.passed {
        failures.push(format!("discrete eigenvalues: {}", eigenvalue_accumulation.failures.join("; ")));
    }

    let calibrated_deviation = (cfg.convention == Convention::PaperCalibrated).then(|| {
        bound
            .iter()
            .enumerate()
            .map(|(i, &z)| (z - (-T::one() - (-count::<T>(i + 1)).exp())).abs())
            .fold(T::zero(), T::max)
    });
    if let Some(d) = calibrated_deviation {
        if d > lit(1e-9) {
            failures.push(format!("calibrated roots deviate from -1 - e^-k by {d}"));
        }
    }

    let mut endpoints = Vec::new();
    for z in [-T::one(), T::one()] {
        let u = &ex.potential;
        let set = find_extremal_set_levels(
            |x: &[T]| delta(u, x, z).unwrap_or_else(|_| T::nan()),
            &TorusGrid::new(2, opts.extremal_points)?,
            lit(1e-10),
            opts.extremal_levels,
        )?;
        let non_isolated = set.levels.iter().all(|l| !l.components.is_empty() && !l.point_like) && !set.isolated;
        if !non_isolated {
            failures.push(format!("extremal set at z = {z} looked isolated at some level"));
        }
        endpoints.push(EndpointStructure {
            z,
            points_per_dim: set.levels.iter().map(|l| l.points_per_dim).collect(),
            component_counts: set.levels.iter().map(|l| l.components.len()).collect(),
            max_diameters: set
                .levels
                .iter()
                .map(|l| l.components.iter().map(|c| c.diameter).fold(T::zero(), T::max))
                .collect(),
            non_isolated_every_level: non_isolated,
        });
    }

    Ok(ExampleReport {
        config: *cfg,
        couplings: ex.couplings,
        roots,
        bands,
        below_band_eigenvalues: below,
        matches,
        max_difference,
        root_accumulation,
        eigenvalue_accumulation,
        calibrated_deviation,
        endpoints,
        passed: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::essential::Band;
    use std::f64::consts::PI;

    fn unit_band() -> BandSet<f64> {
        BandSet::from_bands(vec![Band::new(-1.0, 1.0)]).unwrap()
    }

    /// Adaptive Simpson on `[0, 2π]`, independent of the trapezoidal rule.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth)
    }

    #[test]
    fn first_coupling_value() {
        let c1: f64 = coupling_closed_form(1);
        let e = (-1.0f64).exp();
        let oracle = 1.0 / simpson(&|x: f64| 1.0 / (x.cos() + 1.0 + e), 0.0, 2.0 * PI, 1e-14, 40);
        assert!((c1 - oracle).abs() < 1e-12, "{c1} vs {oracle}");
        assert!((c1 - 0.1485432).abs() < 5e-8, "{c1}");
        let direct = ((1.0 + (-1.0f64).exp()).powi(2) - 1.0).sqrt() / (2.0 * PI);
        assert!((c1 - direct).abs() < 1e-15);
    }

    #[test]
    fn couplings_agree_two_ways_up_to_twenty() {
        for k in 1..=20 {
            let c = coupling_check::<f64>(k);
            assert!(c.relative_error < 1e-10, "k = {k}: {:e}", c.relative_error);
        }
    }

    #[test]
    fn coupling_matches_adaptive_simpson() {
        for k in [1usize, 3, 6] {
            let e = (-(k as f64)).exp();
            let f = |x: f64| 1.0 / (x.cos() + 1.0 + e);
            let i = simpson(&f, 0.0, 2.0 * PI, 1e-9, 40);
            let c: f64 = coupling_closed_form(k);
            assert!(((1.0 / i) - c).abs() / c < 1e-9, "k = {k}");
        }
    }

    #[test]
    fn coupling_asymptotics() {
        for k in [10usize, 20, 30] {
            let c: f64 = coupling_closed_form(k);
            let asym = (-(k as f64) / 2.0).exp() * 2f64.sqrt() / (2.0 * PI);
            assert!((c / asym - 1.0).abs() < (-(k as f64)).exp());
        }
    }

    #[test]
    fn convention_parsing() {
        for c in Convention::ALL {
            assert_eq!(c.name().parse::<Convention>().unwrap(), c);
            assert_eq!(Convention::from_code(c.code() as f64).unwrap(), c);
            assert!(c.beta::<f64>() > 0.0);
        }
        assert!("paper".parse::<Convention>().is_err());
        assert!(Convention::from_code(3.0).is_err());
        assert!(ExampleConfig::new(0, Convention::PaperCalibrated).is_err());
    }

    #[test]
    fn calibrated_roots_are_exact() {
        let cfg = ExampleConfig::new(8, Convention::PaperCalibrated).unwrap();
        for (k, r) in dispersion_roots::<f64>(&cfg).iter().enumerate() {
            let z = r.z().unwrap();
            let exact = -1.0 - (-((k + 1) as f64)).exp();
            assert!((z - exact).abs() < 1e-12, "k = {}", k + 1);
        }
        let z1 = dispersion_roots::<f64>(&cfg)[0].z().unwrap();
        assert!((z1 + 1.367_879_4).abs() < 1e-7);
    }

    #[test]
    fn negated_lebesgue_root_closed_form() {
        let cfg = ExampleConfig::new(1, Convention::LebesgueNegated).unwrap();
        let z1 = dispersion_roots::<f64>(&cfg)[0].z().unwrap();
        let e = (-1.0f64).exp();
        let exact = -(1.0 + PI * PI * ((1.0 + e).powi(2) - 1.0)).sqrt();
        assert!((z1 - exact).abs() < 1e-12);
        assert!((z1 + 3.0979).abs() < 1e-4);
    }

    #[test]
    fn roots_scale_like_exp_minus_k() {
        for conv in Convention::ALL {
            let cfg = ExampleConfig::new(10, conv).unwrap();
            let zs: Vec<f64> = dispersion_roots::<f64>(&cfg).iter().map(|r| r.z().unwrap()).collect();
            let ratios: Vec<f64> = zs.iter().enumerate().map(|(i, z)| (-1.0 - z) / (-((i + 1) as f64)).exp()).collect();
            let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().cloned().fold(0.0, f64::max);
            assert!(lo > 0.0 && hi / lo < 20.0, "{conv}: {ratios:?}");
            assert!(zs.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn roots_are_insensitive_to_bracket() {
        let c: f64 = coupling_closed_form(4);
        let z = solve_mode(4, 1.0, c).unwrap();
        // Residual of the dispersion relation at the root, and sign change
        // across it.
        let f = |z: f64| c * resolvent_integral(z) - 1.0;
        assert!(f(z).abs() < 1e-10);
        assert!(f(z - 1e-6) < 0.0 && f(z + 1e-6) > 0.0);
    }

    #[test]
    fn printed_sign_has_no_bound_state() {
        let c: f64 = coupling_closed_form(1);
        assert_eq!(solve_mode(1, -PI, c), Err(Error::NoBoundState { mode: 1 }));
    }

    #[test]
    fn calibration_identifies_paper_convention() {
        let cal = calibrate();
        assert_eq!(cal.identified, Some(Convention::PaperCalibrated));
        let printed = cal.candidates.iter().find(|c| c.label == "lebesgue-as-printed").unwrap();
        assert!(printed.z1.is_none());
        assert_eq!(cal.candidates.iter().filter(|c| c.matches).count(), 1);
    }

    #[test]
    fn accumulation_of_exact_values() {
        let zs: Vec<f64> = (1..=8).map(|k| -1.0 - (-(k as f64)).exp()).collect();
        let v = verify_accumulation(&zs, &unit_band());
        assert!(v.passed);
        assert!((v.slope.unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn accumulation_rejects_constant_list() {
        let v = verify_accumulation(&[-2.0; 5], &unit_band());
        assert!(!v.passed);
        assert!(!v.strictly_increasing);
        assert!(!verify_accumulation(&[-1.5, -0.5], &unit_band()).passed);
    }

    #[test]
    fn example_kernel_separable_form_matches() {
        let ex = build_paper_example::<f64>(&ExampleConfig::new(5, Convention::LebesgueNegated).unwrap()).unwrap();
        for (x, y) in [([0.1, 0.7], [2.0, 5.5]), ([3.0, 1.0], [0.2, 0.3])] {
            let a = ex.kernel.eval(&x, &y);
            let b = ex.kernel.eval_separable(&x, &y).unwrap();
            assert!((&a - &b).max_abs() < 1e-12);
        }
        assert_eq!(ex.kernel.rank(), Some(5));
    }
}

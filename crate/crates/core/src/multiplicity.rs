//! Extremal sets of `φ_z = Δ(·, z)` at band endpoints, growth-exponent
//! estimates of extremal multiplicity, and the finiteness certificate.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::essential::{delta, delta_on_grid, gamma_points, BandSet};
use crate::numeric::{coordinate_polish, fit_line, golden_min, LineFit};
use crate::scalar::{count, lit, to_f64, Real};
use crate::symbols::{MatrixSymbol, SmoothnessEstimate, SmoothnessIndex};
use crate::torus::{two_pi, torus_distance, TorusGrid};

/// Components larger than this get a covering-arc diameter bound instead of
/// an exact pairwise maximum.
const EXACT_DIAMETER_LIMIT: usize = 1500;
/// A component is point-like when its diameter is at most this many grid
/// spacings.
const POINT_SPACINGS: f64 = 4.0;

/// Multiplicity value; infinite for non-isolated extremal sets. Serialized
/// as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Multiplicity<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> Multiplicity<T> {
    pub fn value(&self) -> T {
        match *self {
            Self::Finite(v) => v,
            Self::Infinite => T::infinity(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    fn max(self, other: Self) -> Self {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => Self::Finite(a.max(b)),
            _ => Self::Infinite,
        }
    }
}

impl<T: Serialize> Serialize for Multiplicity<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => v.serialize(s),
            Self::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Multiplicity<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw<T> {
            Num(T),
            Str(String),
        }
        match Raw::<T>::deserialize(d)? {
            Raw::Num(v) => Ok(Self::Finite(v)),
            Raw::Str(s) if s == "inf" => Ok(Self::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

/// One connected component of the near-zero set at a grid level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component<T> {
    pub size: usize,
    /// Node with the smallest `|φ|` (lowest index on ties).
    pub representative: Vec<T>,
    pub min_abs: T,
    /// Torus-metric diameter; an upper bound when not exact.
    pub diameter: T,
    pub diameter_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalLevel<T> {
    pub points_per_dim: usize,
    pub spacing: T,
    pub components: Vec<Component<T>>,
    /// Every component is within four grid spacings in diameter.
    pub point_like: bool,
}

/// Near-zero set of `φ` tracked over grid refinements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSet<T> {
    pub levels: Vec<ExtremalLevel<T>>,
    /// Component count agrees on the last two levels and all components of
    /// the last level are point-like.
    pub isolated: bool,
    /// The last two levels agree on component count and point-likeness.
    pub stabilized: bool,
    pub tol: T,
}

impl<T: Real> ExtremalSet<T> {
    pub fn last(&self) -> &ExtremalLevel<T> {
        self.levels.last().expect("at least one level")
    }

    pub fn component_count(&self) -> usize {
        self.last().components.len()
    }

    pub fn diameters(&self) -> Vec<T> {
        self.last().components.iter().map(|c| c.diameter).collect()
    }
}

fn diameter<T: Real>(grid: &TorusGrid<T>, nodes: &[usize]) -> (T, bool) {
    if nodes.len() <= EXACT_DIAMETER_LIMIT {
        let mut d = T::zero();
        for (a, &i) in nodes.iter().enumerate() {
            for &j in &nodes[a + 1..] {
                d = d.max(torus_distance(grid.node(i), grid.node(j)));
            }
        }
        return (d, true);
    }
    // Per axis, the shortest arc covering every occupied coordinate.
    let n = grid.points_per_dim();
    let h = grid.spacing();
    let mut sum = T::zero();
    for axis in 0..grid.nu() {
        let mut occupied = vec![false; n];
        for &i in nodes {
            occupied[grid.multi_index(i)[axis]] = true;
        }
        let idx: Vec<usize> = (0..n).filter(|&j| occupied[j]).collect();
        let mut gap = n - idx[idx.len() - 1] + idx[0];
        for w in idx.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        let arc = (count::<T>(n - gap) * h).min(T::PI());
        sum = sum + arc * arc;
    }
    (sum.sqrt(), false)
}

/// Candidates are nodes with `|φ| <= tol`, plus grid-local minima of `|φ|`
/// that sit well below the mean of their neighbours (a zero between nodes).
fn extremal_level<T: Real>(phi: &(dyn Fn(&[T]) -> T + Sync), grid: &TorusGrid<T>, tol: T) -> ExtremalLevel<T> {
    let m = grid.len();
    let vals: Vec<T> = (0..m).into_par_iter().map(|i| phi(grid.node(i)).abs()).collect();
    let candidate: Vec<bool> = (0..m)
        .into_par_iter()
        .map(|i| {
            let a = vals[i];
            if a <= tol {
                return true;
            }
            if !a.is_finite() {
                return false;
            }
            let nb = grid.neighbors(i);
            if nb.is_empty() || nb.iter().any(|&j| vals[j] < a) {
                return false;
            }
            let mean = nb.iter().map(|&j| vals[j]).sum::<T>() / count(nb.len());
            a <= mean - a
        })
        .collect();
    let mut seen = vec![false; m];
    let mut components = Vec::new();
    for start in 0..m {
        if !candidate[start] || seen[start] {
            continue;
        }
        let mut nodes = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            nodes.push(i);
            for j in grid.neighbors(i) {
                if candidate[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        nodes.sort_unstable();
        let rep = nodes.iter().copied().fold(nodes[0], |b, i| if vals[i] < vals[b] { i } else { b });
        let (diameter, diameter_exact) = diameter(grid, &nodes);
        components.push(Component {
            size: nodes.len(),
            representative: grid.node(rep).to_vec(),
            min_abs: vals[rep],
            diameter,
            diameter_exact,
        });
    }
    let limit = grid.spacing() * lit(POINT_SPACINGS);
    ExtremalLevel {
        points_per_dim: grid.points_per_dim(),
        spacing: grid.spacing(),
        point_like: !components.is_empty() && components.iter().all(|c| c.diameter <= limit),
        components,
    }
}

fn summarize<T: Real>(levels: Vec<ExtremalLevel<T>>, tol: T) -> ExtremalSet<T> {
    let last = levels.last().expect("at least one level");
    let (stabilized, isolated) = match levels.len() {
        1 => (false, last.point_like),
        k => {
            let prev = &levels[k - 2];
            let same = prev.components.len() == last.components.len();
            (same && prev.point_like == last.point_like, same && last.point_like)
        }
    };
    ExtremalSet {
        levels,
        isolated,
        stabilized,
        tol,
    }
}

fn check_tol<T: Real>(tol: T) -> Result<()> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter("extremal tolerance must be positive".into()));
    }
    Ok(())
}

/// Connected components (wrap-aware, diagonal neighbours included) of the
/// near-zero set of `φ`, refined by grid doubling until the component count
/// and point-likeness agree on two consecutive levels or `refine_limit`
/// doublings are spent.
pub fn find_extremal_set<T: Real>(
    phi: impl Fn(&[T]) -> T + Sync,
    grid: &TorusGrid<T>,
    tol: T,
    refine_limit: usize,
) -> Result<ExtremalSet<T>> {
    check_tol(tol)?;
    let mut g = grid.clone();
    let mut levels = vec![extremal_level(&phi, &g, tol)];
    for _ in 0..refine_limit {
        if summarize(levels.clone(), tol).stabilized {
            break;
        }
        g = g.refined()?;
        levels.push(extremal_level(&phi, &g, tol));
    }
    Ok(summarize(levels, tol))
}

/// Like [`find_extremal_set`] but always evaluates exactly `levels` grids.
pub fn find_extremal_set_levels<T: Real>(
    phi: impl Fn(&[T]) -> T + Sync,
    grid: &TorusGrid<T>,
    tol: T,
    levels: usize,
) -> Result<ExtremalSet<T>> {
    check_tol(tol)?;
    if levels == 0 {
        return Err(Error::InvalidParameter("need at least one level".into()));
    }
    let mut g = grid.clone();
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels {
        if l > 0 {
            g = g.refined()?;
        }
        out.push(extremal_level(&phi, &g, tol));
    }
    Ok(summarize(out, tol))
}

/// An isolated extremal point with its estimated multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalPoint<T> {
    pub location: Vec<T>,
    pub m_hat: T,
    /// Fit of `log g(r)` against `log r`.
    pub fit: LineFit<T>,
    pub radii_used: Vec<T>,
    /// `g(r) = min_{|x − x0| = r} |φ(x) − φ(x0)|`.
    pub sphere_minima: Vec<T>,
}

/// Radii `2^-3, ..., 2^-10`.
pub fn default_radii<T: Real>() -> Vec<T> {
    (3..=10).map(|j| lit(0.5f64.powi(j))).collect()
}

fn sphere_min<T: Real>(
    f: &dyn Fn(&[T]) -> T,
    x0: &[T],
    r: T,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> T {
    let at = |dir: &[T]| -> T {
        let x: Vec<T> = x0.iter().zip(dir).map(|(&a, &d)| a + r * d).collect();
        f(&x)
    };
    match x0.len() {
        1 => at(&[T::one()]).min(at(&[-T::one()])),
        2 => {
            let offset: f64 = rng.random();
            let step = two_pi::<T>() / count(samples);
            let angle = |j: usize| step * (count::<T>(j) + lit(offset));
            let circle = |t: T| at(&[t.cos(), t.sin()]);
            let (best_j, best) = (0..samples)
                .map(|j| (j, circle(angle(j))))
                .fold((0, T::infinity()), |a, b| if b.1 < a.1 { b } else { a });
            let t0 = angle(best_j);
            let (_, polished) = golden_min(circle, t0 - step, t0 + step, 60);
            best.min(polished)
        }
        3 => {
            let offset: f64 = rng.random();
            let golden_angle = T::PI() * (lit::<T>(3.0) - lit::<T>(5.0).sqrt());
            let dir = |theta: T, azimuth: T| {
                [theta.sin() * azimuth.cos(), theta.sin() * azimuth.sin(), theta.cos()]
            };
            let mut best = (T::infinity(), T::zero(), T::zero());
            for j in 0..samples {
                let c = T::one() - lit::<T>(2.0) * (count::<T>(j) + lit(0.5)) / count(samples);
                let theta = c.max(-T::one()).min(T::one()).acos();
                let azimuth = golden_angle * count(j) + two_pi::<T>() * lit(offset);
                let v = at(&dir(theta, azimuth));
                if v < best.0 {
                    best = (v, theta, azimuth);
                }
            }
            let radius = lit::<T>(3.0) / count::<T>(samples).sqrt();
            let (_, polished) = coordinate_polish(|p: &[T]| at(&dir(p[0], p[1])), &[best.1, best.2], radius, 4, 50);
            best.0.min(polished)
        }
        nu => {
            let mut best = T::infinity();
            for _ in 0..samples {
                let mut d: Vec<f64> = (0..nu)
                    .map(|_| {
                        let (u1, u2): (f64, f64) = (rng.random::<f64>().max(1e-300), rng.random());
                        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                    })
                    .collect();
                let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                d.iter_mut().for_each(|v| *v /= norm);
                let dir: Vec<T> = d.into_iter().map(lit).collect();
                best = best.min(at(&dir));
            }
            best
        }
    }
}

/// Growth exponent of `|φ(x) − φ(x0)|` at `x0`: the slope of
/// `log g(r)` against `log r`, where `g(r)` is the minimum over the sphere
/// of radius `r`. Sphere directions are low-discrepancy with a seeded
/// offset, so results are reproducible for a fixed `seed`.
pub fn estimate_multiplicity<T: Real>(
    phi: impl Fn(&[T]) -> T,
    x0: &[T],
    radii: &[T],
    samples_per_sphere: usize,
    seed: u64,
) -> Result<ExtremalPoint<T>> {
    if radii.len() < 2 {
        return Err(Error::InvalidParameter("need at least two radii".into()));
    }
    if radii.windows(2).any(|w| w[0] <= w[1]) || radii.iter().any(|&r| !(r > T::zero() && r < T::FRAC_PI_2())) {
        return Err(Error::InvalidParameter(
            "radii must be strictly decreasing and inside (0, pi/2)".into(),
        ));
    }
    if samples_per_sphere == 0 {
        return Err(Error::InvalidParameter("samples per sphere must be positive".into()));
    }
    let phi0 = phi(x0);
    let growth = |x: &[T]| (phi(x) - phi0).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut minima = Vec::with_capacity(radii.len());
    for &r in radii {
        let g = sphere_min(&growth, x0, r, samples_per_sphere, &mut rng);
        if !(g > T::zero()) {
            return Err(Error::NotIsolated { radius: to_f64(r) });
        }
        minima.push(g);
    }
    let xs: Vec<T> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<T> = minima.iter().map(|g| g.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    if !(fit.slope > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "non-positive growth exponent {}: x0 is not an extremal point",
            fit.slope
        )));
    }
    Ok(ExtremalPoint {
        location: x0.to_vec(),
        m_hat: fit.slope,
        fit,
        radii_used: radii.to_vec(),
        sphere_minima: minima,
    })
}

/// Extremal structure of `φ_z` at one endpoint `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityReport<T> {
    pub z: T,
    pub points: Vec<ExtremalPoint<T>>,
    pub isolated: bool,
    /// Sum of the point multiplicities; infinite when not isolated.
    pub mu_z: Multiplicity<T>,
    pub component_count: usize,
    pub component_diameters: Vec<T>,
    pub levels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityOptions {
    /// Near-zero threshold for `|Δ|`.
    pub tol: f64,
    pub refine_limit: usize,
    /// Decreasing radii for the growth fit.
    pub radii: Vec<f64>,
    pub samples_per_sphere: usize,
    pub seed: u64,
}

impl Default for MultiplicityOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            refine_limit: 3,
            radii: default_radii::<f64>(),
            samples_per_sphere: 256,
            seed: 0,
        }
    }
}

/// Per-endpoint reports and `μ = max_z μ_z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicitySummary<T> {
    pub reports: Vec<MultiplicityReport<T>>,
    pub mu: Multiplicity<T>,
}

/// Extremal multiplicity of `φ_z` for every `z ∈ Γ`.
pub fn total_multiplicity<T: Real>(
    u: &MatrixSymbol<T>,
    bands: &BandSet<T>,
    grid: &TorusGrid<T>,
    opts: &MultiplicityOptions,
) -> Result<MultiplicitySummary<T>> {
    let tol: T = lit(opts.tol);
    let radii: Vec<T> = opts.radii.iter().map(|&r| lit(r)).collect();
    let mut reports = Vec::new();
    let mut mu = Multiplicity::Finite(T::zero());
    for z in gamma_points(bands).points {
        delta_on_grid(u, grid, z)?;
        let phi = |x: &[T]| delta(u, x, z).unwrap_or_else(|_| T::nan());
        let set = find_extremal_set(phi, grid, tol, opts.refine_limit)?;
        let last = set.last();
        let mut points = Vec::new();
        let mu_z = if set.isolated {
            for (i, c) in last.components.iter().enumerate() {
                let (x0, _) = coordinate_polish(|x: &[T]| phi(x).abs(), &c.representative, last.spacing, 3, 80);
                points.push(estimate_multiplicity(
                    phi,
                    &x0,
                    &radii,
                    opts.samples_per_sphere,
                    opts.seed.wrapping_add(i as u64),
                )?);
            }
            Multiplicity::Finite(points.iter().map(|p| p.m_hat).sum())
        } else {
            Multiplicity::Infinite
        };
        mu = mu.max(mu_z);
        reports.push(MultiplicityReport {
            z,
            points,
            isolated: set.isolated,
            mu_z,
            component_count: set.component_count(),
            component_diameters: set.diameters(),
            levels: set.levels.iter().map(|l| l.points_per_dim).collect(),
        });
    }
    Ok(MultiplicitySummary { reports, mu })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PREDICTED-FINITE")]
    PredictedFinite,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::PredictedFinite => "PREDICTED-FINITE",
            Self::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate<T> {
    pub verdict: Verdict,
    pub mu: Multiplicity<T>,
    pub nu: usize,
    pub alpha_hat: SmoothnessIndex<T>,
    /// `2 μ − ν / 2`, when `μ` is finite.
    pub threshold: Option<T>,
    /// The failing condition when inconclusive.
    pub reason: Option<String>,
}

pub const REASON_NON_ISOLATED: &str = "non-isolated extremal set (extremal set not of finite multiplicity)";

/// Finiteness prediction: `PREDICTED-FINITE` iff `μ < ∞` and
/// `α̂ > 2μ − ν/2`. Otherwise `INCONCLUSIVE`; never predicts infinitude.
pub fn certify<T: Real>(mu: Multiplicity<T>, nu: usize, alpha_hat: &SmoothnessIndex<T>) -> Certificate<T> {
    let inconclusive = |threshold, reason: String| Certificate {
        verdict: Verdict::Inconclusive,
        mu,
        nu,
        alpha_hat: alpha_hat.clone(),
        threshold,
        reason: Some(reason),
    };
    let Multiplicity::Finite(m) = mu else {
        return inconclusive(None, REASON_NON_ISOLATED.to_string());
    };
    let threshold = lit::<T>(2.0) * m - count::<T>(nu) * lit(0.5);
    match alpha_hat.value() {
        None => {
            let why = match alpha_hat {
                SmoothnessIndex::Inconclusive(s) => s.clone(),
                _ => String::new(),
            };
            inconclusive(Some(threshold), format!("smoothness estimate inconclusive: {why}"))
        }
        Some(a) if a > threshold => Certificate {
            verdict: Verdict::PredictedFinite,
            mu,
            nu,
            alpha_hat: alpha_hat.clone(),
            threshold: Some(threshold),
            reason: None,
        },
        Some(a) => inconclusive(
            Some(threshold),
            format!("smoothness gap: alpha_hat = {a} does not exceed 2 mu - nu/2 = {threshold}"),
        ),
    }
}

/// [`certify`] applied to a smoothness estimate.
pub fn finiteness_certificate<T: Real>(mu: Multiplicity<T>, nu: usize, alpha: &SmoothnessEstimate<T>) -> Certificate<T> {
    certify(mu, nu, &alpha.alpha_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::essential::compute_bands;
    use crate::symbols::builtin_potential;
    use std::f64::consts::PI;

    fn grid(nu: usize, n: usize) -> TorusGrid<f64> {
        TorusGrid::new(nu, n).unwrap()
    }

    #[test]
    fn single_maximum_is_isolated() {
        let s = find_extremal_set(|x: &[f64]| x[0].cos() - 1.0, &grid(1, 32), 1e-10, 3).unwrap();
        assert!(s.isolated);
        assert_eq!(s.component_count(), 1);
        assert!(s.last().components[0].representative[0].abs() < 1e-15);
    }

    #[test]
    fn circle_is_not_isolated() {
        let s = find_extremal_set(|x: &[f64]| x[0].cos() + 1.0, &grid(2, 16), 1e-10, 3).unwrap();
        assert!(!s.isolated);
        assert_eq!(s.component_count(), 1);
        assert!(s.diameters()[0] >= PI - 1e-12);
    }

    #[test]
    fn product_zero_is_isolated_point() {
        let phi = |x: &[f64]| (x[0].cos() - 1.0).powi(2) + (x[1].cos() - 1.0).powi(2);
        let s = find_extremal_set(phi, &grid(2, 16), 1e-10, 3).unwrap();
        assert!(s.isolated);
        assert_eq!(s.component_count(), 1);
    }

    #[test]
    fn off_grid_zero_is_found() {
        let phi = |x: &[f64]| 1.0 - (x[0] - 0.1).cos();
        let s = find_extremal_set(phi, &grid(1, 16), 1e-12, 3).unwrap();
        assert!(s.isolated);
        assert_eq!(s.component_count(), 1);
    }

    #[test]
    fn wrap_merges_components_across_boundary() {
        // Zero set {x_1 in [-0.3, 0.3]} straddles 0 = 2 pi.
        let phi = |x: &[f64]| (0.3f64.cos() - x[0].cos()).max(0.0);
        let s = find_extremal_set_levels(phi, &grid(1, 64), 1e-12, 1).unwrap();
        assert_eq!(s.component_count(), 1);
        assert!((s.diameters()[0] - 0.6).abs() < 0.2);
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(find_extremal_set(|x: &[f64]| x[0], &grid(1, 8), 0.0, 1).is_err());
    }

    #[test]
    fn multiplicity_of_powers_of_one_minus_cos() {
        for p in 1..=3 {
            let e = estimate_multiplicity(|x: &[f64]| (1.0 - x[0].cos()).powi(p), &[0.0], &default_radii(), 16, 0).unwrap();
            assert!((e.m_hat - 2.0 * p as f64).abs() < 0.2, "p = {p}: {}", e.m_hat);
        }
    }

    #[test]
    fn mixed_growth_takes_slowest_direction() {
        let phi = |x: &[f64]| (1.0 - x[0].cos()) + (1.0 - x[1].cos()).powi(2);
        let e = estimate_multiplicity(phi, &[0.0, 0.0], &default_radii(), 256, 7).unwrap();
        // Brute-force oracle: dense angle sweep at each radius.
        let radii: Vec<f64> = default_radii();
        let g: Vec<f64> = radii
            .iter()
            .map(|&r| {
                (0..20000)
                    .map(|j| {
                        let t = 2.0 * PI * j as f64 / 20000.0;
                        phi(&[r * t.cos(), r * t.sin()])
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = g.iter().map(|v| v.ln()).collect();
        let oracle = fit_line(&xs, &ys).unwrap().slope;
        assert!((e.m_hat - oracle).abs() < 1e-3, "{} vs {}", e.m_hat, oracle);
        assert!((e.m_hat - 4.0).abs() < 0.2);
    }

    #[test]
    fn three_dimensional_sphere_sampling() {
        let phi = |x: &[f64]| (1.0 - x[0].cos()) + (1.0 - x[1].cos()) + (1.0 - x[2].cos());
        let e = estimate_multiplicity(phi, &[0.0, 0.0, 0.0], &default_radii(), 256, 1).unwrap();
        assert!((e.m_hat - 2.0).abs() < 0.05);
    }

    #[test]
    fn scaling_invariance() {
        let base = |c: f64| {
            estimate_multiplicity(move |x: &[f64]| c * (1.0 - x[0].cos()).powi(2), &[0.0], &default_radii(), 16, 0)
                .unwrap()
                .m_hat
        };
        let m = base(1.0);
        assert!((base(0.1) - m).abs() < 0.05);
        assert!((base(10.0) - m).abs() < 0.05);
    }

    #[test]
    fn flat_direction_reports_non_isolation() {
        let phi = |x: &[f64]| 1.0 + x[0].cos();
        let r = estimate_multiplicity(phi, &[PI, 0.0], &default_radii(), 64, 0);
        // The circle x_1 = pi meets every sphere around (pi, 0).
        assert!(matches!(r, Err(Error::NotIsolated { .. })));
    }

    #[test]
    fn estimates_are_reproducible() {
        let phi = |x: &[f64]| (1.0 - x[0].cos()) + 0.3 * (1.0 - x[1].cos());
        let a = estimate_multiplicity(phi, &[0.0, 0.0], &default_radii(), 64, 42).unwrap();
        let b = estimate_multiplicity(phi, &[0.0, 0.0], &default_radii(), 64, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cosine_total_multiplicity_is_two() {
        let u = builtin_potential::<f64>("cos_x1", 1, &[]).unwrap();
        let g = grid(1, 64);
        let b = compute_bands(&u, &g, 2).unwrap();
        let s = total_multiplicity(&u, &b, &g, &MultiplicityOptions::default()).unwrap();
        assert_eq!(s.reports.len(), 2);
        for r in &s.reports {
            assert!(r.isolated);
            assert_eq!(r.points.len(), 1);
        }
        assert!((s.mu.value() - 2.0).abs() < 0.1);
    }

    #[test]
    fn shifted_diagonal_has_four_quadratic_endpoints() {
        let u = builtin_potential::<f64>("diag_shifted_cos", 1, &[5.0]).unwrap();
        let g = grid(1, 64);
        let b = compute_bands(&u, &g, 2).unwrap();
        let s = total_multiplicity(&u, &b, &g, &MultiplicityOptions::default()).unwrap();
        assert_eq!(s.reports.len(), 4);
        for r in &s.reports {
            assert!((r.mu_z.value() - 2.0).abs() < 0.1, "z = {}", r.z);
        }
    }

    #[test]
    fn paper_potential_is_infinite() {
        let u = builtin_potential::<f64>("cos_x1", 2, &[]).unwrap();
        let g = grid(2, 16);
        let b = compute_bands(&u, &g, 2).unwrap();
        let s = total_multiplicity(&u, &b, &g, &MultiplicityOptions::default()).unwrap();
        assert_eq!(s.mu, Multiplicity::Infinite);
        assert!(s.reports.iter().all(|r| !r.isolated && r.points.is_empty()));
    }

    #[test]
    fn certificate_threshold_arithmetic() {
        let c = certify(Multiplicity::Finite(2.0), 1, &SmoothnessIndex::Infinite);
        assert_eq!(c.verdict, Verdict::PredictedFinite);
        assert_eq!(c.threshold, Some(3.5));
        let c = certify(Multiplicity::Finite(2.0), 2, &SmoothnessIndex::Finite(2.0));
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert_eq!(c.threshold, Some(3.0));
        assert!(c.reason.unwrap().contains("smoothness gap"));
        // Strict inequality at the threshold.
        assert_eq!(certify(Multiplicity::Finite(2.0), 2, &SmoothnessIndex::Finite(3.0)).verdict, Verdict::Inconclusive);
        let c = certify::<f64>(Multiplicity::Infinite, 2, &SmoothnessIndex::Infinite);
        assert_eq!(c.verdict, Verdict::Inconclusive);
        let reason = c.reason.unwrap();
        assert!(reason.contains("non-isolated extremal set"));
        assert!(reason.contains("extremal set not of finite multiplicity"));
    }

    #[test]
    fn certificate_is_monotone_in_alpha() {
        let mut seen_finite = false;
        for i in 0..100 {
            let a = i as f64 * 0.1;
            let v = certify(Multiplicity::Finite(1.7), 2, &SmoothnessIndex::Finite(a)).verdict;
            if seen_finite {
                assert_eq!(v, Verdict::PredictedFinite);
            }
            seen_finite |= v == Verdict::PredictedFinite;
        }
        assert!(seen_finite);
    }

    #[test]
    fn multiplicity_round_trips_through_json() {
        assert_eq!(serde_json::to_string(&Multiplicity::<f64>::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&Multiplicity::Finite(2.5f64)).unwrap(), "2.5");
        let back: Multiplicity<f64> = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(back, Multiplicity::Infinite);
        assert!(serde_json::from_str::<Multiplicity<f64>>("\"nan\"").is_err());
    }
}

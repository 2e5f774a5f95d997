//! Coefficient functions of the model: the Hermitian matrix function `U(x)`
//! and the kernel `K(x, y)` with `K*(x, y) = K(y, x)`.
//!
//! Symbols come in three explicit representations: callable closed forms
//! (builtins or user closures), trigonometric polynomials (sampled data is
//! converted to one by trigonometric interpolation), and separable term
//! lists `K(x, y) = sum_k c_k a_k(x) a_k(y)*`. Nothing converts between them
//! implicitly.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::example::{self, Convention, ExampleConfig};
use crate::linalg::CMatrix;
use crate::numeric::fit_line;
use crate::scalar::{lit, Real};
use crate::torus::{FourierTable, TorusGrid, TrigPoly};

pub type PointFn<T> = Arc<dyn Fn(&[T]) -> CMatrix<T> + Send + Sync>;
pub type PairFn<T> = Arc<dyn Fn(&[T], &[T]) -> CMatrix<T> + Send + Sync>;

/// How a symbol was constructed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Representation {
    Builtin { name: String, params: Vec<f64> },
    Trigonometric,
    Sampled { points_per_dim: usize },
    Separable { rank: usize },
    Custom,
    Derived { description: String },
}

/// Hermitian matrix-valued function `U` on `T^nu`.
#[derive(Clone)]
pub struct MatrixSymbol<T> {
    nu: usize,
    n: usize,
    eval: PointFn<T>,
    repr: Representation,
}

impl<T> fmt::Debug for MatrixSymbol<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixSymbol")
            .field("nu", &self.nu)
            .field("n", &self.n)
            .field("repr", &self.repr)
            .finish()
    }
}

impl<T: Real> MatrixSymbol<T> {
    pub fn from_fn(nu: usize, n: usize, f: impl Fn(&[T]) -> CMatrix<T> + Send + Sync + 'static) -> Self {
        Self {
            nu,
            n,
            eval: Arc::new(f),
            repr: Representation::Custom,
        }
    }

    /// Scalar (`n = 1`) real-valued symbol.
    pub fn scalar(nu: usize, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self::from_fn(nu, 1, move |x| CMatrix::from_real_diagonal(&[f(x)]))
    }

    pub fn from_trig(poly: TrigPoly<T>) -> Result<Self> {
        if poly.rows() != poly.cols() {
            return Err(Error::DimensionMismatch("matrix symbol must be square".into()));
        }
        let (nu, n) = (poly.dim(), poly.rows());
        Ok(Self {
            nu,
            n,
            eval: Arc::new(move |x| poly.eval(x)),
            repr: Representation::Trigonometric,
        })
    }

    /// Trigonometric interpolant of node samples (`n * n` entries per node,
    /// row-major).
    pub fn from_samples(grid: &TorusGrid<T>, n: usize, samples: &[Complex<T>]) -> Result<Self> {
        let poly = FourierTable::analyze(grid, n, n, samples)?.to_trig_poly(T::zero());
        let mut s = Self::from_trig(poly)?;
        s.repr = Representation::Sampled {
            points_per_dim: grid.points_per_dim(),
        };
        Ok(s)
    }

    pub fn with_representation(mut self, repr: Representation) -> Self {
        self.repr = repr;
        self
    }

    #[inline]
    pub fn nu(&self) -> usize {
        self.nu
    }

    /// Matrix size.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    #[inline]
    pub fn eval(&self, x: &[T]) -> CMatrix<T> {
        (self.eval)(x)
    }

    /// Eigenvalues of `U(x)`, ascending.
    pub fn eigenvalues(&self, x: &[T]) -> Result<Vec<T>> {
        self.eval(x).hermitian_eigenvalues()
    }
}

/// One separable term `coupling * a(x) a(y)*` with a vector profile `a`
/// (an `n x 1` trigonometric polynomial).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableTerm<T> {
    pub coupling: T,
    pub profile: TrigPoly<T>,
}

impl<T: Real> SeparableTerm<T> {
    pub fn new(coupling: T, profile: TrigPoly<T>) -> Self {
        Self { coupling, profile }
    }

    pub fn eval(&self, x: &[T], y: &[T]) -> CMatrix<T> {
        let ax = self.profile.eval_vector(x);
        let ay = self.profile.eval_vector(y);
        let c = Complex::new(self.coupling, T::zero());
        CMatrix::from_fn(ax.len(), ay.len(), |i, j| c * ax[i] * ay[j].conj())
    }
}

/// Matrix-valued kernel `K` on `T^nu x T^nu`.
#[derive(Clone)]
pub struct KernelSymbol<T> {
    nu: usize,
    n: usize,
    eval: PairFn<T>,
    separable: Option<Vec<SeparableTerm<T>>>,
    repr: Representation,
}

impl<T> fmt::Debug for KernelSymbol<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSymbol")
            .field("nu", &self.nu)
            .field("n", &self.n)
            .field("rank", &self.separable.as_ref().map(Vec::len))
            .field("repr", &self.repr)
            .finish()
    }
}

fn sum_terms<T: Real>(terms: &[SeparableTerm<T>], n: usize, x: &[T], y: &[T]) -> CMatrix<T> {
    let mut out = CMatrix::zeros(n, n);
    for t in terms {
        let m = t.eval(x, y);
        for (o, v) in out.as_mut_slice().iter_mut().zip(m.as_slice()) {
            *o = *o + *v;
        }
    }
    out
}

impl<T: Real> KernelSymbol<T> {
    pub fn from_fn(nu: usize, n: usize, f: impl Fn(&[T], &[T]) -> CMatrix<T> + Send + Sync + 'static) -> Self {
        Self {
            nu,
            n,
            eval: Arc::new(f),
            separable: None,
            repr: Representation::Custom,
        }
    }

    /// The zero kernel, stored as a separable kernel of rank 0.
    pub fn zero(nu: usize, n: usize) -> Self {
        Self::separable(nu, n, Vec::new()).expect("empty term list is valid")
    }

    /// `K(x, y) = sum_k c_k a_k(x) a_k(y)*`; the evaluator is the term sum.
    pub fn separable(nu: usize, n: usize, terms: Vec<SeparableTerm<T>>) -> Result<Self> {
        for t in &terms {
            if t.profile.dim() != nu || t.profile.rows() != n || t.profile.cols() != 1 {
                return Err(Error::DimensionMismatch(format!(
                    "separable profile must be a {n}x1 polynomial on T^{nu}"
                )));
            }
        }
        let shared = Arc::new(terms.clone());
        let rank = terms.len();
        Ok(Self {
            nu,
            n,
            eval: Arc::new(move |x, y| sum_terms(&shared, n, x, y)),
            separable: Some(terms),
            repr: Representation::Separable { rank },
        })
    }

    /// Attaches a separable form to a closed-form evaluator. Both must
    /// describe the same kernel.
    pub fn with_separable_form(mut self, terms: Vec<SeparableTerm<T>>) -> Self {
        self.separable = Some(terms);
        self
    }

    /// Kernel given by a trigonometric polynomial on `T^(2 nu)` in the
    /// joint variable `(x, y)`.
    pub fn from_trig(nu: usize, poly: TrigPoly<T>) -> Result<Self> {
        if poly.dim() != 2 * nu || poly.rows() != poly.cols() {
            return Err(Error::DimensionMismatch(format!(
                "kernel polynomial must be square on T^{}",
                2 * nu
            )));
        }
        let n = poly.rows();
        Ok(Self {
            nu,
            n,
            eval: Arc::new(move |x, y| {
                let mut p = Vec::with_capacity(x.len() + y.len());
                p.extend_from_slice(x);
                p.extend_from_slice(y);
                poly.eval(&p)
            }),
            separable: None,
            repr: Representation::Trigonometric,
        })
    }

    pub fn with_representation(mut self, repr: Representation) -> Self {
        self.repr = repr;
        self
    }

    #[inline]
    pub fn nu(&self) -> usize {
        self.nu
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    #[inline]
    pub fn eval(&self, x: &[T], y: &[T]) -> CMatrix<T> {
        (self.eval)(x, y)
    }

    pub fn separable_terms(&self) -> Option<&[SeparableTerm<T>]> {
        self.separable.as_deref()
    }

    /// Number of separable terms, when the kernel carries a separable form.
    pub fn rank(&self) -> Option<usize> {
        self.separable.as_ref().map(Vec::len)
    }

    /// Evaluates the separable form (not the closed-form evaluator).
    pub fn eval_separable(&self, x: &[T], y: &[T]) -> Option<CMatrix<T>> {
        self.separable.as_ref().map(|t| sum_terms(t, self.n, x, y))
    }

    /// `self + other`; separable when both summands are.
    pub fn plus(&self, other: &KernelSymbol<T>) -> Result<Self> {
        if self.nu != other.nu || self.n != other.n {
            return Err(Error::DimensionMismatch("kernels live on different spaces".into()));
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut k = Self::from_fn(self.nu, self.n, move |x, y| &a(x, y) + &b(x, y));
        k.repr = Representation::Derived {
            description: "sum".into(),
        };
        if let (Some(s), Some(o)) = (&self.separable, &other.separable) {
            k.separable = Some(s.iter().chain(o).cloned().collect());
        }
        Ok(k)
    }

    /// `s * K` for a real factor `s`.
    pub fn scaled(&self, s: T) -> Self {
        let f = self.eval.clone();
        let mut k = Self::from_fn(self.nu, self.n, move |x, y| f(x, y).scale_real(s));
        k.repr = Representation::Derived {
            description: "scaled".into(),
        };
        k.separable = self.separable.as_ref().map(|terms| {
            terms
                .iter()
                .map(|t| SeparableTerm::new(t.coupling * s, t.profile.clone()))
                .collect()
        });
        k
    }

    /// Node-major samples on the product lattice `grid.product()`.
    pub fn sample_product(&self, grid: &TorusGrid<T>) -> Vec<Complex<T>> {
        let m = grid.len();
        let block = self.n * self.n;
        let rows: Vec<Vec<Complex<T>>> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::with_capacity(m * block);
                for j in 0..m {
                    row.extend_from_slice(self.eval(grid.node(i), grid.node(j)).as_slice());
                }
                row
            })
            .collect();
        rows.concat()
    }
}

/// Result of checking `U* = U` on nodes and `K*(x, y) = K(y, x)` on node
/// pairs. Deviations are max-entry moduli.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport<T> {
    pub potential_deviation: T,
    pub kernel_deviation: T,
    /// Node where the potential deviation is largest.
    pub worst_node: usize,
    /// Node pair where the kernel deviation is largest.
    pub worst_pair: (usize, usize),
    pub tol: T,
    pub passed: bool,
}

/// Largest `|K(x_i, x_j) - K(x_j, x_i)*|` over node pairs and where it
/// occurs.
pub fn kernel_asymmetry<T: Real>(kernel: &KernelSymbol<T>, grid: &TorusGrid<T>) -> (T, (usize, usize)) {
    let m = grid.len();
    (0..m)
        .into_par_iter()
        .map(|i| {
            let mut worst = (T::zero(), (i, i));
            for j in i..m {
                let a = kernel.eval(grid.node(i), grid.node(j));
                let b = kernel.eval(grid.node(j), grid.node(i));
                let d = (&a - &b.adjoint()).max_abs();
                if d > worst.0 {
                    worst = (d, (i, j));
                }
            }
            worst
        })
        .reduce(|| (T::zero(), (0, 0)), |a, b| if b.0 > a.0 { b } else { a })
}

/// Largest `|U(x_i) - U(x_i)*|` over nodes and where it occurs.
pub fn potential_asymmetry<T: Real>(potential: &MatrixSymbol<T>, grid: &TorusGrid<T>) -> (T, usize) {
    grid.nodes()
        .enumerate()
        .map(|(i, x)| (potential.eval(x).hermitian_residual(), i))
        .fold((T::zero(), 0), |a, b| if b.0 > a.0 { b } else { a })
}

pub fn validate_symmetry<T: Real>(
    potential: &MatrixSymbol<T>,
    kernel: &KernelSymbol<T>,
    grid: &TorusGrid<T>,
    tol: T,
) -> Result<SymmetryReport<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter("symmetry tolerance must be positive".into()));
    }
    if potential.nu() != grid.nu() || kernel.nu() != grid.nu() || potential.n() != kernel.n() {
        return Err(Error::DimensionMismatch(
            "potential, kernel and grid disagree on nu or n".into(),
        ));
    }
    let (pd, worst_node) = potential_asymmetry(potential, grid);
    let (kd, worst_pair) = kernel_asymmetry(kernel, grid);
    Ok(SymmetryReport {
        potential_deviation: pd,
        kernel_deviation: kd,
        worst_node,
        worst_pair,
        tol,
        passed: pd <= tol && kd <= tol,
    })
}

/// Estimated smoothness index of a kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum SmoothnessIndex<T> {
    Finite(T),
    /// Fourier coefficients vanish numerically beyond some frequency.
    Infinite,
    Inconclusive(String),
}

impl<T: Real> SmoothnessIndex<T> {
    /// Numeric value (`+inf` for [`SmoothnessIndex::Infinite`]).
    pub fn value(&self) -> Option<T> {
        match self {
            Self::Finite(a) => Some(*a),
            Self::Infinite => Some(T::infinity()),
            Self::Inconclusive(_) => None,
        }
    }
}

/// Heuristic smoothness diagnostic from the decay of Fourier coefficients.
/// Never a certified Hölder bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessEstimate<T> {
    pub alpha_hat: SmoothnessIndex<T>,
    /// RMS residual of the log-log fit.
    pub fit_quality: Option<T>,
    /// Shells `(first, last)` entering the fit.
    pub frequency_range: Option<(usize, usize)>,
    /// Subtracted offset: the dimension of the kernel's domain.
    pub offset: usize,
    /// `(shell, max coefficient magnitude)` for every shell `>= 1`.
    pub shell_maxima: Vec<(usize, T)>,
}

/// Relative level under which a Fourier coefficient counts as zero.
const NUMERICAL_ZERO: f64 = 1e-13;

/// Smoothness estimate from a Fourier table on `T^d`.
///
/// Shells are `l_inf` frequency shells `s = max_a |p_a|` for
/// `1 <= s <= (N - 1) / 2`; the statistic is the largest coefficient
/// magnitude in each shell. The index is `-slope - d`, clamped at zero,
/// where `slope` is the least-squares slope of `log max` against `log s`.
pub fn smoothness_from_table<T: Real>(table: &FourierTable<T>) -> SmoothnessEstimate<T> {
    let d = table.dim();
    let top = (table.points() - 1) / 2;
    let mags = table.magnitudes();
    let peak = mags.iter().fold(T::zero(), |a, &b| a.max(b));
    let mut shells = vec![T::zero(); top + 1];
    for (slot, &m) in mags.iter().enumerate() {
        let s = table.frequency(slot).iter().map(|f| f.unsigned_abs() as usize).max().unwrap_or(0);
        if s <= top {
            shells[s] = shells[s].max(m);
        }
    }
    let shell_maxima: Vec<(usize, T)> = (1..=top).map(|s| (s, shells[s])).collect();
    let zero = peak * lit(NUMERICAL_ZERO);
    let nonzero: Vec<(usize, T)> = shell_maxima
        .iter()
        .copied()
        .filter(|&(_, m)| m > zero && m > T::zero())
        .collect();
    let infinite = SmoothnessEstimate {
        alpha_hat: SmoothnessIndex::Infinite,
        fit_quality: None,
        frequency_range: None,
        offset: d,
        shell_maxima: shell_maxima.clone(),
    };
    let Some(&(last, _)) = nonzero.last() else {
        return infinite;
    };
    // Upper half of the resolved shells is numerically zero: finite spectrum.
    if 2 * last <= top {
        return infinite;
    }
    if nonzero.len() < 4 {
        return SmoothnessEstimate {
            alpha_hat: SmoothnessIndex::Inconclusive(format!(
                "only {} usable frequency shells (need 4)",
                nonzero.len()
            )),
            fit_quality: None,
            frequency_range: None,
            offset: d,
            shell_maxima,
        };
    }
    let xs: Vec<T> = nonzero.iter().map(|&(s, _)| T::from_usize(s).unwrap().ln()).collect();
    let ys: Vec<T> = nonzero.iter().map(|&(_, m)| m.ln()).collect();
    let fit = fit_line(&xs, &ys).expect("distinct shells");
    let alpha = (-fit.slope - T::from_usize(d).unwrap()).max(T::zero());
    SmoothnessEstimate {
        alpha_hat: SmoothnessIndex::Finite(alpha),
        fit_quality: Some(fit.residual),
        frequency_range: Some((nonzero[0].0, last)),
        offset: d,
        shell_maxima,
    }
}

/// Samples `K` on the product lattice of `grid` (at least 16 points per
/// axis) and runs [`smoothness_from_table`].
pub fn smoothness_index<T: Real>(kernel: &KernelSymbol<T>, grid: &TorusGrid<T>) -> Result<SmoothnessEstimate<T>> {
    if grid.points_per_dim() < 16 {
        return Err(Error::InvalidParameter(format!(
            "smoothness estimate needs at least 16 points per axis, got {}",
            grid.points_per_dim()
        )));
    }
    let product = grid.product()?;
    let samples = kernel.sample_product(grid);
    let table = FourierTable::analyze(&product, kernel.n(), kernel.n(), &samples)?;
    Ok(smoothness_from_table(&table))
}

/// A builtin potential or kernel.
#[derive(Debug, Clone)]
pub enum Symbol<T> {
    Potential(MatrixSymbol<T>),
    Kernel(KernelSymbol<T>),
}

pub const POTENTIAL_BUILTINS: &[&str] = &["cos_x1", "diag_shifted_cos", "constant"];
pub const KERNEL_BUILTINS: &[&str] = &["zero", "rank_one_const", "cos_harmonics", "paper_example"];

fn param<T: Real>(params: &[f64], i: usize, default: f64) -> T {
    lit(params.get(i).copied().unwrap_or(default))
}

/// Builtin potentials:
/// - `cos_x1`: `U(x) = cos x_1`
/// - `diag_shifted_cos [shift = 5]`: `diag(cos x_1, cos x_1 + shift)`
/// - `constant [d_1, d_2, ...]`: constant `diag(d)` (default `[0]`)
pub fn builtin_potential<T: Real>(name: &str, nu: usize, params: &[f64]) -> Result<MatrixSymbol<T>> {
    if nu == 0 {
        return Err(Error::InvalidGrid { nu, points: 0 });
    }
    let repr = Representation::Builtin {
        name: name.to_string(),
        params: params.to_vec(),
    };
    let sym = match name {
        "cos_x1" => MatrixSymbol::scalar(nu, |x: &[T]| x[0].cos()),
        "diag_shifted_cos" => {
            let shift: T = param(params, 0, 5.0);
            MatrixSymbol::from_fn(nu, 2, move |x: &[T]| {
                let c = x[0].cos();
                CMatrix::from_real_diagonal(&[c, c + shift])
            })
        }
        "constant" => {
            let diag: Vec<T> = if params.is_empty() {
                vec![T::zero()]
            } else {
                params.iter().map(|&p| lit(p)).collect()
            };
            let m = CMatrix::from_real_diagonal(&diag);
            MatrixSymbol::from_fn(nu, diag.len(), move |_| m.clone())
        }
        _ => return Err(Error::UnknownBuiltin(name.to_string())),
    };
    Ok(sym.with_representation(repr))
}

/// Builtin kernels:
/// - `zero [n = 1]`
/// - `rank_one_const [gamma]`: `K(x, y) = -gamma`
/// - `cos_harmonics [g_1, g_2, ...]`: `sum_k g_k cos(k x_1) cos(k y_1)`
/// - `paper_example [k_max, convention]`: the counterexample kernel on
///   `T^2`; convention 0 = paper-calibrated, 1 = lebesgue-negated,
///   2 = lebesgue-normalized
pub fn builtin_kernel<T: Real>(name: &str, nu: usize, params: &[f64]) -> Result<KernelSymbol<T>> {
    if nu == 0 {
        return Err(Error::InvalidGrid { nu, points: 0 });
    }
    let repr = Representation::Builtin {
        name: name.to_string(),
        params: params.to_vec(),
    };
    let kernel = match name {
        "zero" => {
            let n = params.first().copied().unwrap_or(1.0);
            if n < 1.0 || n.fract() != 0.0 {
                return Err(Error::InvalidParameter(format!("zero kernel size {n}")));
            }
            KernelSymbol::zero(nu, n as usize)
        }
        "rank_one_const" => {
            let gamma: T = param(params, 0, 1.0 / std::f64::consts::TAU);
            let term = SeparableTerm::new(-gamma, TrigPoly::constant(nu, T::one()));
            KernelSymbol::from_fn(nu, 1, move |_, _| CMatrix::from_real_diagonal(&[-gamma]))
                .with_separable_form(vec![term])
        }
        "cos_harmonics" => {
            let couplings: Vec<T> = params.iter().map(|&g| lit(g)).collect();
            let terms: Vec<SeparableTerm<T>> = couplings
                .iter()
                .enumerate()
                .map(|(k, &g)| SeparableTerm::new(g, TrigPoly::cosine(nu, 0, k as i64 + 1, T::one())))
                .collect();
            KernelSymbol::from_fn(nu, 1, move |x: &[T], y: &[T]| {
                let v = couplings.iter().enumerate().fold(T::zero(), |acc, (k, &g)| {
                    let kk = T::from_usize(k + 1).unwrap();
                    acc + g * (kk * x[0]).cos() * (kk * y[0]).cos()
                });
                CMatrix::from_real_diagonal(&[v])
            })
            .with_separable_form(terms)
        }
        "paper_example" => {
            if nu != 2 {
                return Err(Error::InvalidParameter("paper_example lives on T^2".into()));
            }
            let k_max = params.first().copied().unwrap_or(6.0);
            if k_max < 1.0 || k_max.fract() != 0.0 {
                return Err(Error::InvalidParameter(format!("k_max must be a positive integer, got {k_max}")));
            }
            let convention = Convention::from_code(params.get(1).copied().unwrap_or(0.0))?;
            let cfg = ExampleConfig::new(k_max as usize, convention)?;
            example::build_paper_example::<T>(&cfg)?.kernel
        }
        _ => return Err(Error::UnknownBuiltin(name.to_string())),
    };
    Ok(kernel.with_representation(repr))
}

/// Looks a builtin up among potentials first, then kernels.
pub fn builtin_symbol<T: Real>(name: &str, nu: usize, params: &[f64]) -> Result<Symbol<T>> {
    if POTENTIAL_BUILTINS.contains(&name) {
        builtin_potential(name, nu, params).map(Symbol::Potential)
    } else {
        builtin_kernel(name, nu, params).map(Symbol::Kernel)
    }
}

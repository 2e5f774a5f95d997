//! The six subcommands. Each builds a typed result, a report envelope and
//! its CSV side-cars, then writes them under `--out`.

use std::path::PathBuf;

use friedrichs::discrete::{default_margin, RefineReport, ScanSample};
use friedrichs::essential::{gamma_points, GammaPoints};
use friedrichs::example::{calibrate, Calibration, ExampleReport};
use friedrichs::multiplicity::{MultiplicityOptions, MultiplicitySummary};
use friedrichs::perturbation::{
    reconstruction_error, rank_trials, weighted_l2_diagnostic_with, KernelSplitSummary, RankPerturbationReport,
    RankTrialOptions, WeightedL2Report,
};
use friedrichs::symbols::{SmoothnessEstimate, SymmetryReport};
use friedrichs::{
    assemble, birman_schwinger_root, birman_schwinger_scan, compute_bands, eig_outside, finiteness_certificate,
    kernel_split, refine_count, run_example, smoothness_index, total_multiplicity, validate_symmetry,
    BandSet, Certificate, ExampleConfig, Representation, TorusGrid, Verdict,
};
use serde::{Deserialize, Serialize};

use crate::config::JobConfig;
use crate::error::{CliError, CliResult};
use crate::report::{envelope, num, write_outputs, Clock, Report, Status, Table};

/// Everything a subcommand needs besides its name.
pub struct Job {
    pub config: JobConfig,
    pub seed: u64,
    pub out: PathBuf,
}

/// Outcome of a successful run: exit status plus the one-line summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    pub summary: String,
}

fn grid(nu: usize, points: usize) -> CliResult<TorusGrid<f64>> {
    Ok(TorusGrid::new(nu, points)?)
}

fn finish<R: Serialize>(job: &Job, mut report: Report<R>, tables: &[Table], clock: Clock) -> CliResult<Outcome> {
    let timings = clock.finish(&report.command);
    write_outputs(&job.out, &mut report, tables, &timings)?;
    Ok(Outcome {
        status: report.status,
        summary: report.summary.clone(),
    })
}

fn fmt_bands(bands: &BandSet<f64>) -> String {
    let parts: Vec<String> = bands.bands.iter().map(|b| format!("[{}, {}]", b.lower, b.upper)).collect();
    parts.join(" u ")
}

fn margin_for(job: &Job, bands: &BandSet<f64>) -> f64 {
    job.config
        .tolerances
        .margin
        .unwrap_or_else(|| default_margin(bands, job.config.tolerances.margin_floor))
}

fn band_warning(bands: &BandSet<f64>) -> Option<String> {
    (!bands.refinement_converged).then(|| {
        format!(
            "band refinement did not converge after {} levels (last endpoint move {:e})",
            bands.resolution.levels,
            bands.endpoint_error.unwrap_or(f64::NAN)
        )
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateResult {
    pub n: usize,
    pub points_per_dim: usize,
    pub potential: Representation,
    pub kernel: Representation,
    pub symmetry: SymmetryReport<f64>,
}

pub fn validate(job: &Job) -> CliResult<Outcome> {
    let cfg = &job.config;
    let mut clock = Clock::new();
    let u = cfg.potential()?;
    let k = cfg.kernel()?;
    let g = grid(cfg.grid.nu, cfg.grid.points)?;
    let sym = clock.time("symmetry", || validate_symmetry(&u, &k, &g, cfg.tolerances.symmetry))?;
    let mut report = envelope(
        "validate",
        cfg,
        job.seed,
        ValidateResult {
            n: u.n(),
            points_per_dim: g.points_per_dim(),
            potential: u.representation().clone(),
            kernel: k.representation().clone(),
            symmetry: sym.clone(),
        },
    );
    report.summary = format!(
        "symmetry {}: potential deviation {:e}, kernel deviation {:e} (tol {:e})",
        if sym.passed { "PASS" } else { "FAIL" },
        sym.potential_deviation,
        sym.kernel_deviation,
        sym.tol
    );
    if !sym.passed {
        report.status = Status::ValidationFailure;
    }
    finish(job, report, &[], clock)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandsResult {
    pub bands: BandSet<f64>,
    pub gamma: GammaPoints<f64>,
}

pub fn bands(job: &Job) -> CliResult<Outcome> {
    let cfg = &job.config;
    let mut clock = Clock::new();
    let u = cfg.potential()?;
    let g = grid(cfg.grid.nu, cfg.grid.points)?;
    let bands = clock.time("bands", || compute_bands(&u, &g, cfg.grid.refine_limit))?;
    let gamma = gamma_points(&bands);

    let mut header: Vec<String> = vec!["node".into()];
    header.extend((1..=g.nu()).map(|a| format!("x{a}")));
    header.extend((1..=u.n()).map(|j| format!("lambda{j}")));
    let mut branches = Table {
        file: "branches.csv".into(),
        header,
        rows: Vec::new(),
    };
    clock.time("branches", || -> CliResult<()> {
        for (i, x) in g.nodes().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(x.iter().map(|&v| num(v)));
            row.extend(u.eigenvalues(x)?.into_iter().map(num));
            branches.push(row);
        }
        Ok(())
    })?;

    let mut report = envelope("bands", cfg, job.seed, BandsResult { bands: bands.clone(), gamma });
    report.warnings.extend(band_warning(&bands));
    report.summary = format!("bands: {}", fmt_bands(&bands));
    finish(job, report, &[branches], clock)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCheck {
    pub eigenvalue: f64,
    pub root: Option<f64>,
    pub difference: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub points_per_dim: usize,
    pub samples: Vec<ScanSample<f64>>,
    pub roots: Vec<RootCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigsResult {
    pub bands: BandSet<f64>,
    pub margin: f64,
    pub refinement: RefineReport<f64>,
    pub scan: Option<ScanResult>,
}

/// Half-width of a root bracket around a gap eigenvalue: a thousandth of
/// its size, shrunk to stay clear of neighbouring eigenvalues and bands.
fn bracket_half_width(e: f64, neighbours: &[f64], bands: &BandSet<f64>) -> f64 {
    let clearance = friedrichs::discrete::SCAN_BAND_CLEARANCE;
    let mut d = 1e-3 * e.abs().max(1.0);
    for &o in neighbours {
        if o != e {
            d = d.min(0.5 * (o - e).abs());
        }
    }
    d.min(bands.distance(e) - 2.0 * clearance)
}

pub fn eigs(job: &Job) -> CliResult<Outcome> {
    let cfg = &job.config;
    let opts = cfg.assemble_options();
    let mut clock = Clock::new();
    let u = cfg.potential()?;
    let k = cfg.kernel()?;
    let res = &cfg.eigs.resolutions;
    if res.len() < 3 || res.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(
            "field `eigs.resolutions`: need at least three strictly increasing resolutions".into(),
        ));
    }
    for &n in res {
        let size = u.n() * n.pow(cfg.grid.nu as u32);
        if size > cfg.limits.size_cap {
            return Err(CliError::Resource(format!(
                "resolution {n} gives a {size}x{size} matrix above the cap {}",
                cfg.limits.size_cap
            )));
        }
    }
    let g = grid(cfg.grid.nu, cfg.grid.points)?;
    let bands = clock.time("bands", || compute_bands(&u, &g, cfg.grid.refine_limit))?;
    let margin = margin_for(job, &bands);
    let refinement = clock.time("refine", || refine_count(&u, &k, &bands, res, margin, &opts))?;

    let scan = match &cfg.eigs.scan {
        None => None,
        Some(sc) => Some(clock.time("scan", || -> CliResult<ScanResult> {
            let n = sc.points.unwrap_or(*res.last().unwrap());
            let sg = grid(cfg.grid.nu, n)?;
            let eigen: Vec<f64> = match refinement.levels.iter().find(|l| l.points_per_dim == n) {
                Some(l) => l.eigenvalues.iter().map(|e| e.value).collect(),
                None => eig_outside(&assemble(&u, &k, &sg, &opts)?, &bands, margin)?.values(),
            };
            let samples = birman_schwinger_scan(&u, &k, &sg, &bands, &sc.z)?;
            let mut roots = Vec::new();
            if sc.roots {
                for &e in &eigen {
                    let d = bracket_half_width(e, &eigen, &bands);
                    let found = if d > 0.0 {
                        birman_schwinger_root(&u, &k, &sg, &bands, e - d, e + d, 1e-14 * e.abs().max(1.0))
                            .map_err(|err| err.to_string())
                    } else {
                        Err("no room for a root bracket".to_string())
                    };
                    roots.push(match found {
                        Ok(r) => RootCheck {
                            eigenvalue: e,
                            root: Some(r),
                            difference: Some((r - e).abs()),
                            error: None,
                        },
                        Err(msg) => RootCheck {
                            eigenvalue: e,
                            root: None,
                            difference: None,
                            error: Some(msg),
                        },
                    });
                }
            }
            Ok(ScanResult {
                points_per_dim: n,
                samples,
                roots,
            })
        })?),
    };

    let mut table = Table::new("eigenvalues.csv", &["points_per_dim", "gap_index", "gap", "value"]);
    for l in &refinement.levels {
        for e in &l.eigenvalues {
            table.push(vec![
                l.points_per_dim.to_string(),
                e.gap.index(bands.len()).to_string(),
                e.gap.describe(),
                num(e.value),
            ]);
        }
    }
    let mut tables = vec![table];
    if let Some(s) = &scan {
        let mut t = Table::new("scan.csv", &["z", "sign", "log_abs", "imag_ratio"]);
        for p in &s.samples {
            t.push(vec![num(p.z), p.sign.to_string(), num(p.log_abs), num(p.imag_ratio)]);
        }
        tables.push(t);
    }

    let last = refinement.levels.last().expect("three levels");
    let values: Vec<String> = last.eigenvalues.iter().map(|e| format!("{:.10}", e.value)).collect();
    let verdict = serde_json::to_value(refinement.verdict).expect("verdict serializes");
    let mut report = envelope(
        "eigs",
        cfg,
        job.seed,
        EigsResult {
            bands: bands.clone(),
            margin,
            refinement: refinement.clone(),
            scan,
        },
    );
    report.warnings.extend(band_warning(&bands));
    if let Some(s) = &report.result.scan {
        for r in s.roots.iter().filter(|r| r.error.is_some()) {
            report.warnings.push(format!(
                "no determinant root next to {}: {}",
                r.eigenvalue,
                r.error.as_deref().unwrap_or_default()
            ));
        }
    }
    report.summary = format!(
        "{} gap eigenvalue(s) at N = {} [{}], verdict {}",
        last.eigenvalues.len(),
        last.points_per_dim,
        values.join(", "),
        verdict.as_str().unwrap_or_default()
    );
    finish(job, report, &tables, clock)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyResult {
    pub bands: BandSet<f64>,
    pub multiplicity: MultiplicitySummary<f64>,
    pub smoothness: SmoothnessEstimate<f64>,
    pub certificate: Certificate<f64>,
}

pub fn certify(job: &Job) -> CliResult<Outcome> {
    let cfg = &job.config;
    let mut clock = Clock::new();
    let u = cfg.potential()?;
    let k = cfg.kernel()?;
    let nu = cfg.grid.nu;
    let g = grid(nu, cfg.grid.points)?;
    let bands = clock.time("bands", || compute_bands(&u, &g, cfg.grid.refine_limit))?;
    let eg = grid(nu, cfg.certify.extremal_points.unwrap_or(cfg.grid.points))?;
    let mopts = MultiplicityOptions {
        tol: cfg.tolerances.multiplicity,
        refine_limit: cfg.certify.extremal_refine_limit.unwrap_or(3),
        radii: cfg.tolerances.multiplicity_radii.clone(),
        samples_per_sphere: cfg.tolerances.samples_per_sphere,
        seed: job.seed,
    };
    let multiplicity = clock.time("multiplicity", || total_multiplicity(&u, &bands, &eg, &mopts))?;
    let sp = cfg
        .certify
        .smoothness_points
        .unwrap_or(if nu == 1 { cfg.grid.points.max(16) } else { 16 });
    let sg = grid(nu, sp)?;
    let smoothness = clock.time("smoothness", || smoothness_index(&k, &sg))?;
    let certificate = finiteness_certificate(multiplicity.mu, nu, &smoothness);

    let mut table = Table::new("multiplicity.csv", &["z", "point", "radius", "sphere_min"]);
    for r in &multiplicity.reports {
        for (i, p) in r.points.iter().enumerate() {
            for (rad, g) in p.radii_used.iter().zip(&p.sphere_minima) {
                table.push(vec![num(r.z), i.to_string(), num(*rad), num(*g)]);
            }
        }
    }

    let mut report = envelope(
        "certify",
        cfg,
        job.seed,
        CertifyResult {
            bands: bands.clone(),
            multiplicity,
            smoothness,
            certificate: certificate.clone(),
        },
    );
    report.warnings.extend(band_warning(&bands));
    report.summary = match certificate.verdict {
        Verdict::PredictedFinite => format!("verdict: {}", certificate.verdict),
        Verdict::Inconclusive => format!(
            "verdict: {} ({})",
            certificate.verdict,
            certificate.reason.as_deref().unwrap_or_default()
        ),
    };
    finish(job, report, &[table], clock)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticEntry {
    pub z0: f64,
    pub report: Option<WeightedL2Report<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitTestResult {
    pub split: KernelSplitSummary<f64>,
    pub reconstruction_error: f64,
    pub reconstruction_pairs: usize,
    /// `"remainder"` or `"full"`.
    pub l2_kernel: String,
    pub l2: Vec<DiagnosticEntry>,
    pub trial_bands: Option<BandSet<f64>>,
    pub trial_margin: Option<f64>,
    pub trials: Vec<RankPerturbationReport>,
    pub trials_within_bound: bool,
}

/// Tolerance for split reconstruction and symmetry of both parts.
const SPLIT_TOL: f64 = 1e-10;

pub fn split_test(job: &Job) -> CliResult<Outcome> {
    let cfg = &job.config;
    let st = &cfg.split_test;
    let opts = cfg.assemble_options();
    let mut clock = Clock::new();
    let u = cfg.potential()?;
    let k = cfg.kernel()?;
    let nu = cfg.grid.nu;
    let spg = grid(nu, st.split_points)?;
    let split = clock.time("split", || kernel_split(&k, st.cutoff, &spg))?;
    let recon = reconstruction_error(&k, &split, st.reconstruction_pairs, job.seed);

    let g = grid(nu, cfg.grid.points)?;
    let bands = clock.time("bands", || compute_bands(&u, &g, cfg.grid.refine_limit))?;
    let z0s = st.z0.clone().unwrap_or_else(|| gamma_points(&bands).points);
    let target = if st.l2_on_remainder { &split.k1 } else { &k };
    let l2: Vec<DiagnosticEntry> = clock.time("weighted_l2", || {
        z0s.iter()
            .map(|&z0| match weighted_l2_diagnostic_with(&u, z0, target, &st.l2_resolutions, st.exclusion) {
                Ok(r) => Ok(DiagnosticEntry {
                    z0,
                    report: Some(r),
                    error: None,
                }),
                Err(e @ friedrichs::Error::AllNodesExcluded) => Ok(DiagnosticEntry {
                    z0,
                    report: None,
                    error: Some(e.to_string()),
                }),
                Err(e) => Err(CliError::from(e)),
            })
            .collect::<CliResult<_>>()
    })?;

    let mut warnings = Vec::new();
    let (trial_bands, trial_margin, trials) = if u.n() == 1 && st.trials > 0 {
        let tg = grid(nu, st.trial_points.unwrap_or(cfg.grid.points))?;
        let tb = if tg.points_per_dim() == g.points_per_dim() {
            bands.clone()
        } else {
            compute_bands(&u, &tg, cfg.grid.refine_limit)?
        };
        let margin = margin_for(job, &tb);
        let topts = RankTrialOptions {
            trials: st.trials,
            max_rank: st.max_rank,
            max_freq: st.max_freq,
            scale: st.perturbation_scale,
            seed: job.seed,
        };
        let trials = clock.time("rank_trials", || rank_trials(&u, &k, &tg, &tb, margin, &topts, &opts))?;
        (Some(tb), Some(margin), trials)
    } else {
        if st.trials > 0 {
            warnings.push("random rank trials skipped: they need a scalar potential".to_string());
        }
        (None, None, Vec::new())
    };
    let within = trials.iter().all(|t| t.within_bound);

    let mut l2_table = Table::new("l2.csv", &["z0", "points_per_dim", "integral", "excluded_nodes"]);
    for d in &l2 {
        if let Some(r) = &d.report {
            for l in &r.levels {
                l2_table.push(vec![
                    num(d.z0),
                    l.points_per_dim.to_string(),
                    num(l.integral),
                    l.excluded_nodes.to_string(),
                ]);
            }
        }
    }
    let mut trial_table = Table::new("rank_trials.csv", &["trial", "rank", "gap_index", "base", "perturbed", "delta", "bound"]);
    for (i, t) in trials.iter().enumerate() {
        for (gap, ((b, p), d)) in t.counts_base.iter().zip(&t.counts_perturbed).zip(&t.deltas).enumerate() {
            trial_table.push(vec![
                i.to_string(),
                t.rank.to_string(),
                gap.to_string(),
                b.to_string(),
                p.to_string(),
                d.to_string(),
                t.bound.to_string(),
            ]);
        }
    }

    let summary_split = split.summary();
    let split_ok =
        recon < SPLIT_TOL && summary_split.symmetry_residue_k1 < SPLIT_TOL && summary_split.symmetry_residue_k2 < SPLIT_TOL;
    let verdicts: Vec<String> = l2
        .iter()
        .map(|d| match &d.report {
            Some(r) => format!("z0 = {}: {}", d.z0, serde_json::to_value(r.verdict).unwrap().as_str().unwrap_or_default()),
            None => format!("z0 = {}: excluded", d.z0),
        })
        .collect();
    let mut report = envelope(
        "split-test",
        cfg,
        job.seed,
        SplitTestResult {
            split: summary_split,
            reconstruction_error: recon,
            reconstruction_pairs: st.reconstruction_pairs,
            l2_kernel: if st.l2_on_remainder { "remainder" } else { "full" }.into(),
            l2,
            trial_bands,
            trial_margin,
            trials,
            trials_within_bound: within,
        },
    );
    report.warnings = warnings;
    report.warnings.extend(band_warning(&bands));
    if !split_ok || !within {
        report.status = Status::ValidationFailure;
    }
    report.summary = format!(
        "split rank {} (reconstruction {:e}); weighted L2 [{}]; rank trials {} ({} run)",
        report.result.split.rank,
        recon,
        verdicts.join("; "),
        if within { "within 2r" } else { "EXCEED 2r" },
        report.result.trials.len()
    );
    finish(job, report, &[l2_table, trial_table], clock)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleResult {
    pub calibration: Calibration,
    pub example: ExampleReport<f64>,
}

pub fn example(job: &Job) -> CliResult<Outcome> {
    let cfg = &job.config;
    let section = cfg
        .example
        .as_ref()
        .ok_or_else(|| CliError::Config("field `example`: required by this command".into()))?;
    let ecfg = ExampleConfig::new(section.k_max, section.convention)?;
    let ropts = section.run_options(&cfg.limits);
    let size = ropts.points_per_dim * ropts.points_per_dim;
    if size > ropts.size_cap {
        return Err(CliError::Resource(format!(
            "{} points per axis give a {size}x{size} matrix above the cap {}",
            ropts.points_per_dim, ropts.size_cap
        )));
    }
    let mut clock = Clock::new();
    let calibration = clock.time("calibrate", calibrate);
    let ex = clock.time("example", || run_example::<f64>(&ecfg, &ropts))?;

    let mut roots = Table::new("roots.csv", &["k", "root", "eigenvalue", "difference"]);
    for m in &ex.matches {
        roots.push(vec![m.k.to_string(), num(m.root), num(m.eigenvalue), num(m.difference)]);
    }
    let edge = ex.bands.bands.first().map_or(-1.0, |b| b.lower);
    let mut acc = Table::new("accumulation.csv", &["k", "log_root_distance", "log_eigenvalue_distance"]);
    for m in &ex.matches {
        acc.push(vec![
            m.k.to_string(),
            num((edge - m.root).ln()),
            num((edge - m.eigenvalue).ln()),
        ]);
    }

    let passed = ex.passed;
    let mut report = envelope(
        "example",
        cfg,
        job.seed,
        ExampleResult {
            calibration,
            example: ex,
        },
    );
    report.summary = if passed {
        format!("example PASS ({}, k_max = {})", ecfg.convention, ecfg.k_max)
    } else {
        report.status = Status::ValidationFailure;
        format!(
            "example FAIL ({}, k_max = {}): {}",
            ecfg.convention,
            ecfg.k_max,
            report.result.example.failures.join("; ")
        )
    };
    finish(job, report, &[roots, acc], clock)
}

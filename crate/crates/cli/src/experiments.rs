//! The five experiments. Each returns rendered files, pass/fail checks and
//! a few summary lines; nothing touches the filesystem here.

use rayon::prelude::*;
use serde::Serialize;

use henon4_core::log_transform::{log_energy, sqrt_transform_energy, to_log_profile};
use henon4_core::moser::{blowup_scan, ThresholdExperiment, Verdict};
use henon4_core::radial::rearrangement::DEFAULT_GRID;
use henon4_core::radial::{
    corpus, embedding_bound, laplacian_l2_sq, pointwise_log_bound_margin, random_smooth_profiles,
    series_upper_bound, sigma_alpha, talenti_comparison_check, weighted_functional,
    weighted_lp_norm_p, TalentiReport,
};
use henon4_core::symmetry::{crossover_detect, BumpSpec, SearchOptions, SweepReport};
use henon4_core::{BoundaryKind, FunctionalParams, QuadratureSpec, RadialProfile, Result};

use crate::config::{Command, RunConfig, SigmaToken};
use crate::emit::{num, opt_num, render, Table};

pub const IDENTITY_TOL: f64 = 1e-8;
pub const MARGIN_TOL: f64 = 1e-9;
pub const EMBEDDING_EXPONENTS: [f64; 3] = [2.0, 4.0, 6.0];
pub const SERIES_ORDERS: [Option<u32>; 4] = [None, Some(0), Some(1), Some(2)];
pub const TALENTI_PROFILES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub checks: Vec<Check>,
    pub summary: Vec<String>,
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let spec = &cfg.quadrature;
    match cfg.command {
        Command::VerifyIdentities => {
            let r = verify_identities(cfg.alpha, &cfg.alphas, cfg.sigma, spec)?;
            Ok(Outcome {
                files: render("verify_identities", &r, &r.tables(), cfg.format),
                summary: vec![format!(
                    "{} profiles, gammas {:?}, embedding/series alphas {:?}",
                    r.margins.len(),
                    r.gammas,
                    cfg.alphas
                )],
                checks: r.checks.clone(),
            })
        }
        Command::ThresholdScan => {
            let r = threshold_scan(&cfg.alphas, cfg.sigma, cfg.m, spec)?;
            let summary = r
                .rows
                .iter()
                .map(|row| {
                    format!(
                        "alpha {:>6}: max corpus value {:.6e} <= series bound {:.6e}",
                        row.alpha, row.max_corpus_value, row.series_bound
                    )
                })
                .collect();
            Ok(Outcome {
                files: render("threshold_scan", &r, &[r.table()], cfg.format),
                checks: r.checks(),
                summary,
            })
        }
        Command::MoserBlowup => {
            let r = blowup_scan(cfg.alpha, cfg.beta, &cfg.epsilons, cfg.m, cfg.bc, spec)?;
            Ok(Outcome {
                files: render("moser_blowup", &r, &[blowup_table(&r)], cfg.format),
                checks: blowup_checks(&r)?,
                summary: vec![format!(
                    "alpha {} beta {} bc {} over {} epsilons: verdict {:?}",
                    r.alpha,
                    r.beta,
                    r.bc.as_str(),
                    r.rows.len(),
                    r.verdict
                )],
            })
        }
        Command::TalentiCheck => {
            let r = talenti_check(cfg.seed, TALENTI_PROFILES, spec)?;
            Ok(Outcome {
                files: render("talenti", &r, &[r.table()], cfg.format),
                checks: r.checks(),
                summary: vec![format!("{} seeded profiles, seed {}", r.rows.len(), r.seed)],
            })
        }
        Command::SymmetrySweep => {
            let sigma = cfg.sigma.resolve(cfg.alphas[0]);
            let p = FunctionalParams::new(0.0, sigma, cfg.m)?;
            let bump = BumpSpec::new(cfg.bump, spec)?;
            let opts = SearchOptions {
                seed: cfg.seed,
                ..SearchOptions::default()
            };
            let r = crossover_detect(&p, &cfg.alphas, &bump, &opts, spec)?;
            Ok(Outcome {
                files: render("symmetry_sweep", &r, &[sweep_table(&r)], cfg.format),
                checks: Vec::new(),
                summary: sweep_summary(&r),
            })
        }
    }
}

fn max_rel_diff(xs: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in xs.iter().enumerate() {
        for b in &xs[i + 1..] {
            let scale = a.abs().max(b.abs());
            if scale > 0.0 {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub profile: String,
    pub gamma: f64,
    pub radial: f64,
    pub sqrt_form: f64,
    pub log_form: f64,
    pub max_rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginRow {
    pub profile: String,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingRow {
    pub profile: String,
    pub p: f64,
    pub alpha: f64,
    pub lhs: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub profile: String,
    pub alpha: f64,
    pub sigma: f64,
    pub m: Option<u32>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitiesReport {
    pub alpha: f64,
    pub gammas: Vec<f64>,
    pub identities: Vec<IdentityRow>,
    pub margins: Vec<MarginRow>,
    pub embedding: Vec<EmbeddingRow>,
    pub series: Vec<SeriesRow>,
    pub checks: Vec<Check>,
}

impl IdentitiesReport {
    pub fn tables(&self) -> Vec<Table> {
        let mut id = Table::new(
            "identities",
            vec!["profile", "gamma", "radial", "sqrt_form", "log_form", "max_rel_diff"],
        );
        for r in &self.identities {
            id.push(vec![
                r.profile.clone(),
                num(r.gamma),
                num(r.radial),
                num(r.sqrt_form),
                num(r.log_form),
                num(r.max_rel_diff),
            ]);
        }
        let mut mg = Table::new("margins", vec!["profile", "margin"]);
        for r in &self.margins {
            mg.push(vec![r.profile.clone(), num(r.margin)]);
        }
        let mut em = Table::new("embedding", vec!["profile", "p", "alpha", "lhs", "bound"]);
        for r in &self.embedding {
            em.push(vec![r.profile.clone(), num(r.p), num(r.alpha), num(r.lhs), num(r.bound)]);
        }
        let mut se = Table::new("series", vec!["profile", "alpha", "sigma", "m", "value", "bound"]);
        for r in &self.series {
            se.push(vec![
                r.profile.clone(),
                num(r.alpha),
                num(r.sigma),
                r.m.map_or_else(|| "none".to_string(), |m| m.to_string()),
                num(r.value),
                num(r.bound),
            ]);
        }
        vec![id, mg, em, se]
    }
}

struct ProfileResults {
    identities: Vec<IdentityRow>,
    margin: MarginRow,
    embedding: Vec<EmbeddingRow>,
    series: Vec<SeriesRow>,
}

fn profile_results(
    u: &RadialProfile,
    gammas: &[f64],
    alphas: &[f64],
    sigma: SigmaToken,
    spec: &QuadratureSpec,
) -> Result<ProfileResults> {
    let label = u.label().to_string();
    let radial = laplacian_l2_sq(u, spec)?;
    let sqrt_form = sqrt_transform_energy(u, spec)?;
    let identities = gammas
        .iter()
        .map(|&gamma| {
            let log_form = log_energy(&to_log_profile(u, gamma)?, spec)?;
            Ok(IdentityRow {
                profile: label.clone(),
                gamma,
                radial,
                sqrt_form,
                log_form,
                max_rel_diff: max_rel_diff(&[radial, sqrt_form, log_form]),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let margin = MarginRow {
        profile: label.clone(),
        margin: pointwise_log_bound_margin(u, spec)?,
    };

    let lap = radial.sqrt();
    let mut embedding = Vec::new();
    for &p in &EMBEDDING_EXPONENTS {
        for &alpha in alphas {
            embedding.push(EmbeddingRow {
                profile: label.clone(),
                p,
                alpha,
                lhs: weighted_lp_norm_p(u, p, alpha, spec)?,
                bound: embedding_bound(p, alpha, lap),
            });
        }
    }

    let v = u.scaled(1.0 / lap);
    let mut series = Vec::new();
    for &alpha in alphas {
        let s = sigma.resolve(alpha);
        for &m in &SERIES_ORDERS {
            let p = FunctionalParams::new(alpha, s, m)?;
            series.push(SeriesRow {
                profile: label.clone(),
                alpha,
                sigma: s,
                m,
                value: weighted_functional(&v, &p, spec)?,
                bound: series_upper_bound(&p, 1.0)?,
            });
        }
    }
    Ok(ProfileResults {
        identities,
        margin,
        embedding,
        series,
    })
}

/// Energy identity triple, pointwise margins, embedding and series bounds
/// over the built-in corpus.
pub fn verify_identities(
    alpha: f64,
    alphas: &[f64],
    sigma: SigmaToken,
    spec: &QuadratureSpec,
) -> Result<IdentitiesReport> {
    let mut gammas = vec![1.0, 4.0, alpha + 4.0];
    gammas.dedup();
    let profiles = corpus();
    let parts: Vec<ProfileResults> = profiles
        .par_iter()
        .map(|u| profile_results(u, &gammas, alphas, sigma, spec))
        .collect::<Result<_>>()?;

    let mut r = IdentitiesReport {
        alpha,
        gammas,
        identities: Vec::new(),
        margins: Vec::new(),
        embedding: Vec::new(),
        series: Vec::new(),
        checks: Vec::new(),
    };
    for p in parts {
        r.identities.extend(p.identities);
        r.margins.push(p.margin);
        r.embedding.extend(p.embedding);
        r.series.extend(p.series);
    }

    let worst_id = r.identities.iter().map(|x| x.max_rel_diff).fold(0.0, f64::max);
    let worst_margin = r.margins.iter().map(|x| x.margin).fold(0.0, f64::max);
    let emb_fail = r
        .embedding
        .iter()
        .filter(|x| x.lhs > x.bound * (1.0 + 1e-10))
        .count();
    let worst_emb = r.embedding.iter().map(|x| x.lhs / x.bound).fold(0.0, f64::max);
    let ser_fail = r.series.iter().filter(|x| x.value > x.bound).count();
    let worst_ser = r.series.iter().map(|x| x.value / x.bound).fold(0.0, f64::max);
    r.checks = vec![
        Check::new(
            "energy identity triple",
            worst_id <= IDENTITY_TOL,
            format!("max pairwise rel diff {worst_id:.3e} (tol {IDENTITY_TOL:e})"),
        ),
        Check::new(
            "pointwise log bound",
            worst_margin <= 1.0 + MARGIN_TOL,
            format!("max margin {worst_margin:.12}"),
        ),
        Check::new(
            "weighted embedding",
            emb_fail == 0,
            format!("{emb_fail} violations, max lhs/bound {worst_emb:.6}"),
        ),
        Check::new(
            "series bound",
            ser_fail == 0,
            format!("{ser_fail} violations, max value/bound {worst_ser:.6}"),
        ),
    ];
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub alpha: f64,
    pub sigma_alpha: f64,
    pub series_bound: f64,
    pub max_corpus_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdScan {
    pub sigma: String,
    pub m: Option<u32>,
    pub rows: Vec<ThresholdRow>,
}

impl ThresholdScan {
    pub fn table(&self) -> Table {
        let mut t = Table::new(
            "threshold_scan",
            vec!["alpha", "sigma_alpha", "series_bound", "max_corpus_value"],
        );
        for r in &self.rows {
            t.push(vec![
                num(r.alpha),
                num(r.sigma_alpha),
                num(r.series_bound),
                num(r.max_corpus_value),
            ]);
        }
        t
    }

    pub fn checks(&self) -> Vec<Check> {
        let bad = self
            .rows
            .iter()
            .filter(|r| r.max_corpus_value > r.series_bound)
            .count();
        vec![Check::new(
            "series bound dominates corpus",
            bad == 0,
            format!("{bad} of {} alphas violate", self.rows.len()),
        )]
    }
}

/// Largest normalized-corpus value of the functional against the series bound, per α.
pub fn threshold_scan(
    alphas: &[f64],
    sigma: SigmaToken,
    m: Option<u32>,
    spec: &QuadratureSpec,
) -> Result<ThresholdScan> {
    let normalized: Vec<RadialProfile> = corpus()
        .iter()
        .map(|u| u.normalized(spec))
        .collect::<Result<_>>()?;
    let rows = alphas
        .par_iter()
        .map(|&alpha| -> Result<ThresholdRow> {
            let p = FunctionalParams::new(alpha, sigma.resolve(alpha), m)?;
            let mut best: f64 = 0.0;
            for v in &normalized {
                best = best.max(weighted_functional(v, &p, spec)?);
            }
            Ok(ThresholdRow {
                alpha,
                sigma_alpha: sigma_alpha(alpha),
                series_bound: series_upper_bound(&p, 1.0)?,
                max_corpus_value: best,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ThresholdScan {
        sigma: sigma.to_string(),
        m,
        rows,
    })
}

pub fn blowup_table(r: &ThresholdExperiment) -> Table {
    let mut t = Table::new(
        "moser_blowup",
        vec!["epsilon", "norm_sq", "value", "log_value", "lower_bound_exponent"],
    );
    for row in &r.rows {
        t.push(vec![
            num(row.epsilon),
            num(row.norm_sq),
            opt_num(row.value),
            opt_num(row.log_value),
            num(row.lower_bound_exponent),
        ]);
    }
    t
}

/// Verdict against the side of the threshold, plus the minorant for Navier scans
/// above it and the series bound below it.
pub fn blowup_checks(r: &ThresholdExperiment) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    if r.beta > 1.0 {
        checks.push(Check::new(
            "verdict above threshold",
            r.verdict == Verdict::Diverging,
            format!("{:?}", r.verdict),
        ));
        if r.bc == BoundaryKind::Navier {
            let bad = r
                .rows
                .iter()
                .filter(|row| !row.log_value.is_some_and(|l| l >= row.lower_bound_exponent - 1.0))
                .count();
            checks.push(Check::new(
                "blowup minorant",
                bad == 0,
                format!("{bad} rows below (alpha+4)/4 [(beta-1)|log eps| - 4] - 1"),
            ));
        }
    } else if r.beta < 1.0 {
        checks.push(Check::new(
            "verdict below threshold",
            r.verdict == Verdict::Bounded,
            format!("{:?}", r.verdict),
        ));
        let p = FunctionalParams::new(r.alpha, r.beta * sigma_alpha(r.alpha), r.m)?;
        let bound = series_upper_bound(&p, 1.0)?;
        let bad = r
            .rows
            .iter()
            .filter(|row| !row.value.is_some_and(|v| v <= bound))
            .count();
        checks.push(Check::new(
            "series bound",
            bad == 0,
            format!("{bad} rows above {bound:.6e}"),
        ));
    }
    Ok(checks)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TalentiRow {
    pub index: usize,
    pub profile: String,
    #[serde(flatten)]
    pub report: TalentiReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TalentiCheckReport {
    pub seed: u64,
    pub grid: usize,
    pub rows: Vec<TalentiRow>,
}

impl TalentiCheckReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(
            "talenti",
            vec![
                "index", "profile", "holds", "min_gap", "l2_f", "l2_f_sharp", "l2_rel_diff", "mass_v",
                "mass_u", "mass_ok",
            ],
        );
        for r in &self.rows {
            let q = &r.report;
            t.push(vec![
                r.index.to_string(),
                r.profile.clone(),
                q.holds.to_string(),
                num(q.min_gap),
                num(q.l2_f),
                num(q.l2_f_sharp),
                num(q.l2_rel_diff),
                num(q.mass_v),
                num(q.mass_u),
                q.mass_ok.to_string(),
            ]);
        }
        t
    }

    pub fn checks(&self) -> Vec<Check> {
        let count = |f: &dyn Fn(&TalentiReport) -> bool| self.rows.iter().filter(|r| !f(&r.report)).count();
        let gap = self.rows.iter().map(|r| r.report.min_gap).fold(f64::INFINITY, f64::min);
        let l2 = self.rows.iter().map(|r| r.report.l2_rel_diff).fold(0.0, f64::max);
        vec![
            Check::new(
                "u >= v# pointwise",
                count(&|r| r.holds) == 0,
                format!("min gap {gap:.3e}"),
            ),
            Check::new(
                "L2 norm preserved by rearrangement",
                count(&|r| r.l2_ok) == 0,
                format!("max rel diff {l2:.3e}"),
            ),
            Check::new(
                "mass comparison",
                count(&|r| r.mass_ok) == 0,
                format!("{} violations", count(&|r| r.mass_ok)),
            ),
        ]
    }
}

pub fn talenti_check(seed: u64, n: usize, spec: &QuadratureSpec) -> Result<TalentiCheckReport> {
    let profiles = random_smooth_profiles(seed, n);
    let rows = profiles
        .par_iter()
        .enumerate()
        .map(|(index, v)| {
            Ok(TalentiRow {
                index,
                profile: v.label().to_string(),
                report: talenti_comparison_check(v, DEFAULT_GRID, spec)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(TalentiCheckReport {
        seed,
        grid: DEFAULT_GRID,
        rows,
    })
}

pub fn sweep_table(r: &SweepReport) -> Table {
    let mut t = Table::new(
        "symmetry_sweep",
        vec!["alpha", "bump_exact", "bump_paper_bound", "radial_max", "radial_profile_id"],
    );
    for row in &r.rows {
        t.push(vec![
            num(row.alpha),
            num(row.bump_exact),
            num(row.bump_paper_bound),
            num(row.radial_max),
            row.radial_profile_id.clone(),
        ]);
    }
    t
}

fn sweep_summary(r: &SweepReport) -> Vec<String> {
    let mut out: Vec<String> = r
        .rows
        .iter()
        .map(|row| {
            format!(
                "alpha {:>6}: bump {:.4e}  radial {:.4e}  ratio {:.3}",
                row.alpha,
                row.bump_exact,
                row.radial_max,
                row.bump_exact / row.radial_max
            )
        })
        .collect();
    out.push(format!(
        "fitted slopes (last {}): bump {:.3}, radial {:.3}",
        r.fit_window, r.fitted_slopes.bump, r.fitted_slopes.radial
    ));
    out.push(match r.alpha_star.value() {
        Some(a) => format!("alpha* = {a}, absolute gap increasing: {}", r.gap_increasing),
        None => "alpha* not found on grid".to_string(),
    });
    out.push(r.note.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rel_diff() {
        assert_eq!(max_rel_diff(&[1.0, 1.0, 1.0]), 0.0);
        assert!((max_rel_diff(&[1.0, 2.0, 1.5]) - 0.5).abs() < 1e-15);
        assert_eq!(max_rel_diff(&[0.0, 0.0]), 0.0);
    }
}

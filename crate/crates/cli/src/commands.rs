use std::collections::BTreeMap;
use std::fmt::Write as _;

use austere_core::austere::{austere_point_defect, SymSpan};
use austere_core::classify::{classify_span, ClassifyError, FitOptions};
use austere_core::geometry::*;
use austere_core::slag::{
    circular_spread, conormal_tangent_basis_refined, lagrangian_defect, phase_of_basis,
    ConormalSample, Convention, SlagError, STENCIL_REFINEMENTS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::build::build_immersion;
use crate::config::{Format, RunConfig};
use crate::CliError;

/// Result of one subcommand: the rendered report plus whether every
/// configured assertion held.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub output: String,
    pub passed: bool,
    /// One line per failed assertion, naming the sample index.
    pub failures: Vec<String>,
}

/// Per-point verification record. Classification fields are `null` in
/// `verify` reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub domain: Vec<f64>,
    pub ambient: Vec<f64>,
    pub delta: usize,
    pub austere: bool,
    pub austere_defect: f64,
    pub minimal_defect: f64,
    /// `II` restricted to the ruling.
    pub ruling_defect: Option<f64>,
    /// Second derivatives along the ruling coordinates.
    pub straightness_defect: Option<f64>,
    pub nullity: usize,
    pub verdict: Option<String>,
    pub residual_a: Option<f64>,
    pub residual_b: Option<f64>,
    pub residual_c: Option<f64>,
    pub rank_one: Option<bool>,
    pub qc_lambdas: Option<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub index: usize,
    pub check: &'static str,
    pub value: f64,
    pub limit: f64,
}

impl Failure {
    fn line(&self) -> String {
        format!(
            "point {}: {} = {:e} (limit {:e})",
            self.index, self.check, self.value, self.limit
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub points: usize,
    /// Sample indices where the immersion is singular.
    pub skipped: Vec<usize>,
    pub austere_fraction: f64,
    pub max_austere_defect: f64,
    pub max_minimal_defect: f64,
    pub max_ruling_defect: Option<f64>,
    pub max_straightness_defect: Option<f64>,
    pub delta_histogram: BTreeMap<usize, usize>,
    pub verdict_histogram: Option<BTreeMap<String, usize>>,
    pub rank_one_points: Option<usize>,
    pub failures: Vec<Failure>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlagRecord {
    pub index: usize,
    pub domain: Vec<f64>,
    /// Normal-frame coordinates of the covector.
    pub xi: Vec<f64>,
    pub lagrangian_defect: f64,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlagSummary {
    pub points: usize,
    pub skipped: Vec<usize>,
    pub max_lagrangian_defect: f64,
    pub phase_spread: f64,
    pub lagrangian: bool,
    pub special: bool,
    pub failures: Vec<Failure>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolomorphyRecord {
    pub index: usize,
    pub domain: Vec<f64>,
    pub defect: f64,
    pub flipped_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolomorphySummary {
    pub points: usize,
    /// `"+J"` (`v2 = J v1`) or `"-J"`.
    pub orientation: &'static str,
    pub auto_selected: bool,
    pub max_defect: f64,
    pub max_flipped_defect: f64,
    pub failures: Vec<Failure>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report<R, S> {
    pub command: &'static str,
    pub family: String,
    pub seed: u64,
    pub records: Vec<R>,
    pub summary: S,
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn sample_plan(cfg: &RunConfig) -> SamplePlan {
    SamplePlan {
        grid: cfg.samples.grid.clone(),
        random: cfg.samples.random_count(),
        seed: cfg.seed,
        margin: cfg.samples.margin,
    }
}

fn points_for(cfg: &RunConfig, imm: &Immersion) -> Result<Vec<Vec<f64>>, CliError> {
    let grid = &cfg.samples.grid;
    if grid.len() > 1 && grid.len() != imm.domain_dim() {
        return Err(CliError::config(
            "samples.grid",
            format!(
                "{} counts for a {}-dimensional domain",
                grid.len(),
                imm.domain_dim()
            ),
        ));
    }
    Ok(sample_points(imm.domain(), &sample_plan(cfg)))
}

fn fmax(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

fn render<R: Serialize, S: Serialize>(
    cfg: &RunConfig,
    report: &Report<R, S>,
    text: impl FnOnce(&Report<R, S>) -> String,
) -> Result<String, CliError> {
    match cfg.format {
        Format::Structured => serde_json::to_string_pretty(report)
            .map(|s| s + "\n")
            .map_err(|e| CliError::Io(e.to_string())),
        Format::Text => Ok(text(report)),
    }
}

/// CSV of domain and ambient coordinates, 17 significant digits.
pub fn cmd_family(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let imm = build_immersion(cfg)?;
    let points = points_for(cfg, &imm)?;
    let (m, n) = (imm.domain_dim(), imm.ambient_dim());
    let mut out = String::new();
    let header: Vec<String> = (1..=m)
        .map(|i| format!("u{i}"))
        .chain((1..=n).map(|i| format!("x{i}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for x in &points {
        let f = imm.eval(x).map_err(numerical)?;
        let row: Vec<String> = x.iter().chain(&f).map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(Outcome {
        output: out,
        passed: true,
        failures: Vec::new(),
    })
}

fn point_record(
    cfg: &RunConfig,
    imm: &Immersion,
    index: usize,
    x: &[f64],
    classify: bool,
) -> Result<Option<PointRecord>, CliError> {
    let sff = match second_fundamental_form(imm, x) {
        Ok(s) => s,
        Err(GeometryError::SingularImmersion { .. }) => return Ok(None),
        Err(e) => return Err(numerical(e)),
    };
    let tol = &cfg.tol;
    let austere_defect = austere_point_defect(&sff);
    let minimal_defect = mean_curvature_vector(&sff)
        .iter()
        .map(|h| h * h)
        .sum::<f64>()
        .sqrt();
    let (ruling_defect, straightness_defect) = if imm.ruling_coords().is_some() {
        let e = ruling_frame(imm, &sff.frame, cfg.check_ruling).map_err(numerical)?;
        (
            Some(ruled_condition_check(&sff, &e).map_err(numerical)?),
            Some(ruling_straightness_defect(imm, x, 2).map_err(numerical)?),
        )
    } else {
        (None, None)
    };
    let mut rec = PointRecord {
        index,
        domain: x.to_vec(),
        ambient: sff.frame.point.iter().copied().collect(),
        delta: normal_rank(&sff, tol.rank),
        austere: austere_defect < tol.austere,
        austere_defect,
        minimal_defect,
        ruling_defect,
        straightness_defect,
        nullity: relative_nullity(&sff, tol.rank).map_err(numerical)?.dim,
        verdict: None,
        residual_a: None,
        residual_b: None,
        residual_c: None,
        rank_one: None,
        qc_lambdas: None,
    };
    if classify {
        let opts = FitOptions::with_seed(derive_seed(cfg.seed, index as u64));
        let report = classify_span(
            &SymSpan::from_second_fundamental_form(&sff),
            tol.classify,
            &opts,
        )
        .map_err(|e: ClassifyError| numerical(e))?;
        rec.verdict = Some(report.verdict_string());
        rec.residual_a = Some(report.residual_a);
        rec.residual_b = Some(report.residual_b);
        rec.residual_c = Some(report.residual_c);
        rec.rank_one = Some(report.rank_one);
        rec.qc_lambdas = report.qc_params.map(|p| p.lambdas());
    }
    Ok(Some(rec))
}

fn sweep(cfg: &RunConfig, classify: bool) -> Result<(Vec<PointRecord>, SweepSummary), CliError> {
    let imm = build_immersion(cfg)?;
    if classify && imm.domain_dim() != 4 {
        return Err(CliError::config(
            "family",
            format!(
                "classification needs a 4-dimensional family, `{}` has dimension {}",
                cfg.family,
                imm.domain_dim()
            ),
        ));
    }
    if let Some(k) = cfg.check_ruling {
        let have = imm.ruling_coords().map_or(0, <[usize]>::len);
        if k > have {
            return Err(CliError::config(
                "check.ruling",
                format!(
                    "`{}` carries a {have}-dimensional ruling, {k} requested",
                    cfg.family
                ),
            ));
        }
    }
    let points = points_for(cfg, &imm)?;
    let results: Vec<Option<PointRecord>> = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| point_record(cfg, &imm, i, x, classify))
        .collect::<Result<_, _>>()?;
    let skipped: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_none())
        .map(|(i, _)| i)
        .collect();
    let records: Vec<PointRecord> = results.into_iter().flatten().collect();
    if records.is_empty() {
        return Err(CliError::Numerical("every sample point is singular".into()));
    }
    let tol = &cfg.tol;
    let mut failures = Vec::new();
    for r in &records {
        if cfg.assert_austere && !r.austere {
            failures.push(Failure {
                index: r.index,
                check: "austere_defect",
                value: r.austere_defect,
                limit: tol.austere,
            });
        }
        if cfg.check_ruling.is_some() {
            for (check, v) in [
                ("ruling_defect", r.ruling_defect),
                ("straightness_defect", r.straightness_defect),
            ] {
                let v = v.expect("ruling present");
                if !(v < tol.ruling) {
                    failures.push(Failure {
                        index: r.index,
                        check,
                        value: v,
                        limit: tol.ruling,
                    });
                }
            }
        }
    }
    let mut delta_histogram = BTreeMap::new();
    for r in &records {
        *delta_histogram.entry(r.delta).or_insert(0) += 1;
    }
    let verdict_histogram = classify.then(|| {
        let mut h = BTreeMap::new();
        for r in &records {
            *h.entry(r.verdict.clone().unwrap_or_default()).or_insert(0) += 1;
        }
        h
    });
    let has_ruling = records[0].ruling_defect.is_some();
    let summary = SweepSummary {
        points: points.len(),
        skipped,
        austere_fraction: records.iter().filter(|r| r.austere).count() as f64
            / records.len() as f64,
        max_austere_defect: fmax(records.iter().map(|r| r.austere_defect)),
        max_minimal_defect: fmax(records.iter().map(|r| r.minimal_defect)),
        max_ruling_defect: has_ruling.then(|| fmax(records.iter().filter_map(|r| r.ruling_defect))),
        max_straightness_defect: has_ruling
            .then(|| fmax(records.iter().filter_map(|r| r.straightness_defect))),
        delta_histogram,
        verdict_histogram,
        rank_one_points: classify
            .then(|| records.iter().filter(|r| r.rank_one == Some(true)).count()),
        passed: failures.is_empty(),
        failures,
    };
    Ok((records, summary))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.3e}"))
}

fn sweep_text(report: &Report<PointRecord, SweepSummary>) -> String {
    let classify = report.command == "classify";
    let mut s = format!(
        "# {} family={} seed={}\n",
        report.command, report.family, report.seed
    );
    s.push_str("index  delta  nullity  austere  austere_defect  minimal_defect  ruling_defect  straightness");
    if classify {
        s.push_str("  verdict  residual_a  residual_b  residual_c");
    }
    s.push('\n');
    for r in &report.records {
        let _ = write!(
            s,
            "{:5}  {:5}  {:7}  {:7}  {:14.3e}  {:14.3e}  {:>13}  {:>12}",
            r.index,
            r.delta,
            r.nullity,
            r.austere,
            r.austere_defect,
            r.minimal_defect,
            opt(r.ruling_defect),
            opt(r.straightness_defect)
        );
        if classify {
            let _ = write!(
                s,
                "  {:>7}  {:>10}  {:>10}  {:>10}",
                r.verdict.as_deref().unwrap_or("-"),
                opt(r.residual_a),
                opt(r.residual_b),
                opt(r.residual_c)
            );
        }
        s.push('\n');
    }
    let sm = &report.summary;
    let _ = writeln!(s, "points: {} (skipped {})", sm.points, sm.skipped.len());
    let _ = writeln!(s, "austere fraction: {:.4}", sm.austere_fraction);
    let _ = writeln!(s, "max austere defect: {:.3e}", sm.max_austere_defect);
    let _ = writeln!(s, "max minimal defect: {:.3e}", sm.max_minimal_defect);
    if sm.max_ruling_defect.is_some() {
        let _ = writeln!(s, "max ruling defect: {}", opt(sm.max_ruling_defect));
        let _ = writeln!(
            s,
            "max straightness defect: {}",
            opt(sm.max_straightness_defect)
        );
    }
    let hist: Vec<String> = sm
        .delta_histogram
        .iter()
        .map(|(d, c)| format!("{d}:{c}"))
        .collect();
    let _ = writeln!(s, "delta histogram: {}", hist.join(" "));
    if let Some(v) = &sm.verdict_histogram {
        let hist: Vec<String> = v.iter().map(|(d, c)| format!("{d}:{c}")).collect();
        let _ = writeln!(s, "verdict histogram: {}", hist.join(" "));
        let _ = writeln!(s, "rank-one points: {}", sm.rank_one_points.unwrap_or(0));
    }
    for f in &sm.failures {
        let _ = writeln!(s, "FAIL {}", f.line());
    }
    let _ = writeln!(s, "result: {}", if sm.passed { "pass" } else { "fail" });
    s
}

fn sweep_outcome(cfg: &RunConfig, command: &'static str) -> Result<Outcome, CliError> {
    let (records, summary) = sweep(cfg, command == "classify")?;
    let failures = summary.failures.iter().map(Failure::line).collect();
    let passed = summary.passed;
    let report = Report {
        command,
        family: cfg.family.clone(),
        seed: cfg.seed,
        records,
        summary,
    };
    Ok(Outcome {
        output: render(cfg, &report, sweep_text)?,
        passed,
        failures,
    })
}

/// Austerity, minimality, normal rank and (optionally) ruling checks.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    sweep_outcome(cfg, "verify")
}

/// `verify` plus the Type A/B/C fits at every point.
pub fn cmd_classify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    sweep_outcome(cfg, "classify")
}

fn slag_record(
    cfg: &RunConfig,
    imm: &Immersion,
    index: usize,
    x: &[f64],
) -> Result<Option<SlagRecord>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, index as u64));
    let xi: Vec<f64> = (0..imm.ambient_dim() - imm.domain_dim())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let sample = match ConormalSample::new(imm, x, xi.clone()) {
        Ok(s) => s,
        Err(SlagError::Geometry(GeometryError::SingularImmersion { .. })) => return Ok(None),
        Err(e) => return Err(numerical(e)),
    };
    let basis = conormal_tangent_basis_refined(imm, &sample, cfg.samples.step, STENCIL_REFINEMENTS)
        .map_err(numerical)?;
    Ok(Some(SlagRecord {
        index,
        domain: x.to_vec(),
        xi,
        lagrangian_defect: lagrangian_defect(&basis).map_err(numerical)?,
        phase: phase_of_basis(&basis, Convention::PlusI).map_err(numerical)?,
    }))
}

/// Conormal bundle checks: Lagrangian everywhere, constant phase.
pub fn cmd_slag(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let imm = build_immersion(cfg)?;
    let points = points_for(cfg, &imm)?;
    let results: Vec<Option<SlagRecord>> = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| slag_record(cfg, &imm, i, x))
        .collect::<Result<_, _>>()?;
    let skipped: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_none())
        .map(|(i, _)| i)
        .collect();
    let records: Vec<SlagRecord> = results.into_iter().flatten().collect();
    if records.len() < 2 {
        return Err(CliError::Numerical(
            "need at least two regular sample points".into(),
        ));
    }
    let tol = &cfg.tol;
    let mut failures: Vec<Failure> = records
        .iter()
        .filter(|r| !(r.lagrangian_defect < tol.lagrangian))
        .map(|r| Failure {
            index: r.index,
            check: "lagrangian_defect",
            value: r.lagrangian_defect,
            limit: tol.lagrangian,
        })
        .collect();
    let phases: Vec<f64> = records.iter().map(|r| r.phase).collect();
    let phase_spread = circular_spread(&phases);
    let special = phase_spread < tol.phase;
    if !special {
        // the pair realizing the spread
        let mut worst = (0, 0, -1.0);
        for i in 0..records.len() {
            for j in i + 1..records.len() {
                let d = circular_spread(&[phases[i], phases[j]]);
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        for k in [worst.0, worst.1] {
            failures.push(Failure {
                index: records[k].index,
                check: "phase_spread",
                value: phase_spread,
                limit: tol.phase,
            });
        }
    }
    let summary = SlagSummary {
        points: points.len(),
        skipped,
        max_lagrangian_defect: fmax(records.iter().map(|r| r.lagrangian_defect)),
        phase_spread,
        lagrangian: records.iter().all(|r| r.lagrangian_defect < tol.lagrangian),
        special,
        passed: failures.is_empty(),
        failures,
    };
    let lines = summary.failures.iter().map(Failure::line).collect();
    let passed = summary.passed;
    let report = Report {
        command: "slag",
        family: cfg.family.clone(),
        seed: cfg.seed,
        records,
        summary,
    };
    let output = render(cfg, &report, |rep| {
        let mut s = format!("# slag family={} seed={}\n", rep.family, rep.seed);
        s.push_str("index  lagrangian_defect  phase\n");
        for r in &rep.records {
            let _ = writeln!(
                s,
                "{:5}  {:17.3e}  {:+.12}",
                r.index, r.lagrangian_defect, r.phase
            );
        }
        let sm = &rep.summary;
        let _ = writeln!(s, "points: {} (skipped {})", sm.points, sm.skipped.len());
        let _ = writeln!(s, "max lagrangian defect: {:.3e}", sm.max_lagrangian_defect);
        let _ = writeln!(s, "phase spread: {:.3e}", sm.phase_spread);
        for f in &sm.failures {
            let _ = writeln!(s, "FAIL {}", f.line());
        }
        let _ = writeln!(s, "result: {}", if sm.passed { "pass" } else { "fail" });
        s
    })?;
    Ok(Outcome {
        output,
        passed,
        failures: lines,
    })
}

fn holomorphy_error(e: GeometryError) -> CliError {
    match e {
        GeometryError::MissingComplexStructure
        | GeometryError::MissingRuling
        | GeometryError::NotJInvariant { .. } => CliError::config("family", e.to_string()),
        other => numerical(other),
    }
}

/// Holomorphy of the ruling map into the quadric, with the orientation
/// chosen from `params.orientation` (`auto`, `+J` or `-J`).
pub fn cmd_holomorphy(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let imm = build_immersion(cfg)?;
    if !imm.has_complex_structure() {
        return Err(CliError::config(
            "family",
            format!("`{}` carries no complex structure", cfg.family),
        ));
    }
    let requested = match cfg.params.get("orientation").map(String::as_str) {
        None | Some("auto") => None,
        Some("+J") => Some(RulingOrientation::Positive),
        Some("-J") => Some(RulingOrientation::Negative),
        Some(other) => {
            return Err(CliError::config(
                "params.orientation",
                format!("expected auto, +J or -J, got `{other}`"),
            ))
        }
    };
    let points = points_for(cfg, &imm)?;
    let h = cfg.samples.step;
    let pairs: Vec<(f64, f64)> = points
        .par_iter()
        .map(|x| {
            let pos = ruling_map_holomorphy_defect(&imm, x, h, RulingOrientation::Positive);
            let neg = ruling_map_holomorphy_defect(&imm, x, h, RulingOrientation::Negative);
            Ok((
                pos.map_err(holomorphy_error)?,
                neg.map_err(holomorphy_error)?,
            ))
        })
        .collect::<Result<_, CliError>>()?;
    let max_pos = fmax(pairs.iter().map(|p| p.0));
    let max_neg = fmax(pairs.iter().map(|p| p.1));
    let orientation = requested.unwrap_or(if max_neg <= max_pos {
        RulingOrientation::Negative
    } else {
        RulingOrientation::Positive
    });
    let pick = |p: &(f64, f64)| match orientation {
        RulingOrientation::Positive => (p.0, p.1),
        RulingOrientation::Negative => (p.1, p.0),
    };
    let records: Vec<HolomorphyRecord> = points
        .iter()
        .zip(&pairs)
        .enumerate()
        .map(|(index, (x, p))| {
            let (defect, flipped_defect) = pick(p);
            HolomorphyRecord {
                index,
                domain: x.clone(),
                defect,
                flipped_defect,
            }
        })
        .collect();
    let tol = cfg.tol.holomorphy;
    let failures: Vec<Failure> = records
        .iter()
        .filter(|r| !(r.defect < tol))
        .map(|r| Failure {
            index: r.index,
            check: "holomorphy_defect",
            value: r.defect,
            limit: tol,
        })
        .collect();
    let summary = HolomorphySummary {
        points: records.len(),
        orientation: orientation.label(),
        auto_selected: requested.is_none(),
        max_defect: fmax(records.iter().map(|r| r.defect)),
        max_flipped_defect: fmax(records.iter().map(|r| r.flipped_defect)),
        passed: failures.is_empty(),
        failures,
    };
    let lines = summary.failures.iter().map(Failure::line).collect();
    let passed = summary.passed;
    let report = Report {
        command: "holomorphy",
        family: cfg.family.clone(),
        seed: cfg.seed,
        records,
        summary,
    };
    let output = render(cfg, &report, |rep| {
        let sm = &rep.summary;
        let mut s = format!("# holomorphy family={} seed={}\n", rep.family, rep.seed);
        let _ = writeln!(
            s,
            "orientation: {} ({})",
            sm.orientation,
            if sm.auto_selected {
                "auto-selected"
            } else {
                "requested"
            }
        );
        s.push_str("index  defect  flipped_defect\n");
        for r in &rep.records {
            let _ = writeln!(
                s,
                "{:5}  {:.3e}  {:.3e}",
                r.index, r.defect, r.flipped_defect
            );
        }
        let _ = writeln!(s, "points: {}", sm.points);
        let _ = writeln!(s, "max defect: {:.3e}", sm.max_defect);
        let _ = writeln!(s, "max flipped defect: {:.3e}", sm.max_flipped_defect);
        for f in &sm.failures {
            let _ = writeln!(s, "FAIL {}", f.line());
        }
        let _ = writeln!(s, "result: {}", if sm.passed { "pass" } else { "fail" });
        s
    })?;
    Ok(Outcome {
        output,
        passed,
        failures: lines,
    })
}

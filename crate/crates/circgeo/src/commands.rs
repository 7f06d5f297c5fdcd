//! The `eval`, `verify` and `scan` subcommands.

use circgeo_core::connection::nabla_q_from;
use circgeo_core::{
    christoffel_closed, christoffel_general, curvature_at_with, independence_cubic, is_parallel_at,
    metric_compatibility_residual, orbit_sections, parallel_defect, CirculantMatrix, CurvatureAtPoint, FieldPair,
    GeometryError, MetricAtPoint, Stencil, Vec3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{GradModeSpec, RunConfig};
use crate::error::CliError;
use crate::report::{Record, Status, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EvalTarget {
    Metric,
    Christoffel,
    NablaQ,
    Curvature,
    Sectional,
}

impl EvalTarget {
    fn name(self) -> &'static str {
        match self {
            Self::Metric => "metric",
            Self::Christoffel => "christoffel",
            Self::NablaQ => "nabla-q",
            Self::Curvature => "curvature",
            Self::Sectional => "sectional",
        }
    }
}

/// Seed vector used for sections when none is configured.
pub const DEFAULT_SEED_VECTOR: [f64; 3] = [1.0, 2.0, 3.0];

fn prepare(config: &RunConfig) -> Result<(FieldPair, Vec<[f64; 3]>), CliError> {
    config.validate()?;
    let fields = config.field_pair()?;
    let points = config.all_points()?;
    if points.is_empty() {
        return Err(CliError::Config("no points given; use --point or --grid".into()));
    }
    Ok((fields, points))
}

fn degenerate_reason(fields: &FieldPair, p: &Vec3<f64>) -> Option<String> {
    let s = fields.domain_check(p);
    (!s.nondegenerate).then(|| format!("D={}", s.d))
}

fn error_reason(e: &GeometryError) -> String {
    match e {
        GeometryError::DegenerateMetric { d, .. } => format!("D={d}"),
        GeometryError::DependentOrbit { .. } => "DependentOrbit".into(),
        GeometryError::IndefiniteMetric => "IndefiniteMetric".into(),
        GeometryError::DegenerateSection { .. } => "DegenerateSection".into(),
        GeometryError::StencilTooWide => "StencilTooWide".into(),
        other => other.to_string(),
    }
}

fn circ_json(c: &CirculantMatrix) -> Value {
    json!([c.a, c.b, c.c])
}

fn metric_json(m: &MetricAtPoint) -> Value {
    json!({
        "A": m.g.a,
        "B": m.g.b,
        "D": m.d,
        "g": circ_json(&m.g),
        "g_inv": circ_json(&m.g_inv),
        "definite": m.definite,
    })
}

fn max_abs<const N: usize>(v: [f64; N]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn cmd_eval(config: &RunConfig, what: EvalTarget) -> Result<VerificationReport, CliError> {
    let (fields, points) = prepare(config)?;
    let vectors = if config.vectors.is_empty() { vec![DEFAULT_SEED_VECTOR] } else { config.vectors.clone() };
    let check = what.name();
    let records: Vec<Record> = points
        .par_iter()
        .enumerate()
        .map(|(index, p)| {
            if let Some(reason) = degenerate_reason(&fields, p) {
                return vec![Record::skipped(index, *p, check, reason)];
            }
            match eval_at(&fields, p, what, config.fd_step, config.stencil.into(), &vectors) {
                Ok(values) => values
                    .into_iter()
                    .map(|v| match v {
                        Ok(v) => Record::new(index, *p, check, Status::Pass).with_values(v),
                        Err((reason, v)) => Record::skipped(index, *p, check, reason).with_values(v),
                    })
                    .collect(),
                Err(e) => vec![Record::skipped(index, *p, check, error_reason(&e))],
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(VerificationReport::new(&format!("eval {check}"), config.clone(), records))
}

type EvalValue = Result<Value, (String, Value)>;

fn eval_at(
    fields: &FieldPair,
    p: &Vec3<f64>,
    what: EvalTarget,
    h: f64,
    stencil: Stencil,
    vectors: &[[f64; 3]],
) -> Result<Vec<EvalValue>, GeometryError> {
    Ok(match what {
        EvalTarget::Metric => vec![Ok(metric_json(&fields.metric_at(p)?))],
        EvalTarget::Christoffel => {
            let general = christoffel_general(fields, p)?;
            let closed = christoffel_closed(fields, p)?;
            vec![Ok(json!({
                "gamma": general.gamma,
                "closed_form": closed.gamma,
                "dual_path_difference": general.max_abs_diff(&closed),
            }))]
        }
        EvalTarget::NablaQ => {
            let gamma = christoffel_general(fields, p)?;
            let nq = nabla_q_from(&gamma);
            vec![Ok(json!({
                "components": nq.components,
                "max_norm": nq.max_norm(),
                "defect": parallel_defect(fields, p),
                "parallel": is_parallel_at(fields, p),
            }))]
        }
        EvalTarget::Curvature => {
            let c = curvature_at_with(fields, p, h, stencil)?;
            vec![Ok(json!({
                "r_up": c.r_up,
                "r_down": c.r_down,
                "fd_step": c.fd_step,
                "stencil": format!("{:?}", c.stencil),
                "half_step_delta": c.half_step_delta,
            }))]
        }
        EvalTarget::Sectional => {
            let c = curvature_at_with(fields, p, h, stencil)?;
            vectors
                .iter()
                .map(|x| {
                    let base = json!({ "x": x });
                    match orbit_sections(fields, p, x) {
                        Ok(orbit) => {
                            let mut mu = [0.0; 3];
                            for (slot, (u, v)) in mu.iter_mut().zip(&orbit.sections) {
                                match c.sectional(u, v) {
                                    Ok(m) => *slot = m,
                                    Err(e) => return Err((error_reason(&e), base)),
                                }
                            }
                            let spread = (mu[0] - mu[1]).abs().max((mu[1] - mu[2]).abs()).max((mu[0] - mu[2]).abs());
                            Ok(json!({
                                "x": x,
                                "mu": mu,
                                "spread": spread,
                                "independence": orbit.independence,
                            }))
                        }
                        Err(e) => Err((error_reason(&e), base)),
                    }
                })
                .collect()
        }
    })
}

fn random_vec(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
}

fn ulps(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let key = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}

pub fn cmd_verify(config: &RunConfig) -> Result<VerificationReport, CliError> {
    let (fields, points) = prepare(config)?;
    let records: Vec<Record> = points
        .par_iter()
        .enumerate()
        .map(|(index, p)| verify_point(config, &fields, index, p))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(VerificationReport::new("verify", config.clone(), records))
}

const VERIFY_CHECKS: [&str; 15] = [
    "christoffel_dual_path",
    "curvature_antisymmetry",
    "curvature_pair_symmetry",
    "curvature_q_commutation",
    "curvature_q_identity",
    "curvature_q_invariance",
    "fd_half_step",
    "flat_christoffel",
    "flat_curvature",
    "metric_compatibility",
    "metric_inverse",
    "orbit_sectional_spread",
    "parallel",
    "q_isometry",
    "structure",
];

/// Runs every check at one point. Tolerances on quantities that grow with the
/// field values are scaled by the relevant magnitude at that point.
fn verify_point(config: &RunConfig, fields: &FieldPair, index: usize, p: &Vec3<f64>) -> Vec<Record> {
    let tol = &config.tolerances;
    let p = *p;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(index as u64));
    let mut out = Vec::new();

    let q = CirculantMatrix::shift();
    let cube_is_identity = q.pow(3) == CirculantMatrix::identity();
    out.push(Record::new(index, p, "structure", if cube_is_identity { Status::Pass } else { Status::Fail }));

    if let Some(reason) = degenerate_reason(fields, &p) {
        for check in VERIFY_CHECKS.iter().filter(|c| **c != "structure") {
            out.push(Record::skipped(index, p, check, reason.clone()));
        }
        return out;
    }
    let metric = match fields.metric_at(&p) {
        Ok(m) => m,
        Err(e) => {
            out.push(Record::skipped(index, p, "metric_inverse", error_reason(&e)));
            return out;
        }
    };
    let (a, b) = (metric.g.a, metric.g.b);
    let cond = ((a.abs() + b.abs()).powi(2) / metric.d.abs()).max(1.0);
    out.push(Record::bounded(index, p, "metric_inverse", metric.inverse_residual(), tol.get("metric_inverse") * cond));

    let ulp_limit = tol.get("q_isometry_ulps");
    let mut worst_ulps = 0u64;
    for _ in 0..config.samples {
        let (x, y) = (random_vec(&mut rng), random_vec(&mut rng));
        worst_ulps = worst_ulps.max(ulps(metric.inner(&q.apply(&x), &q.apply(&y)), metric.inner(&x, &y)));
    }
    out.push(Record::bounded(index, p, "q_isometry", worst_ulps as f64, ulp_limit));

    let (general, closed) = match (christoffel_general(fields, &p), christoffel_closed(fields, &p)) {
        (Ok(g), Ok(c)) => (g, c),
        (Err(e), _) | (_, Err(e)) => {
            out.push(Record::skipped(index, p, "christoffel_dual_path", error_reason(&e)));
            return out;
        }
    };
    let gamma_scale = 1.0 + general.max_abs();
    let dual_key = match config.grad_mode {
        GradModeSpec::Analytic => "christoffel_dual_path",
        GradModeSpec::Fd => "christoffel_dual_path_fd",
    };
    out.push(Record::bounded(
        index,
        p,
        "christoffel_dual_path",
        general.max_abs_diff(&closed),
        tol.get(dual_key) * gamma_scale,
    ));
    match metric_compatibility_residual(fields, &p, &general) {
        Ok(r) => out.push(Record::bounded(
            index,
            p,
            "metric_compatibility",
            r,
            tol.get("metric_compatibility") * gamma_scale * (1.0 + a.abs().max(b.abs())),
        )),
        Err(e) => out.push(Record::skipped(index, p, "metric_compatibility", error_reason(&e))),
    }

    let parallel = is_parallel_at(fields, &p);
    let defect = max_abs(parallel_defect(fields, &p));
    let nq = nabla_q_from(&general).max_norm();
    out.push(if parallel {
        Record::bounded(index, p, "parallel", nq, tol.get("parallel_forward") * gamma_scale)
            .with_values(json!({ "direction": "forward", "defect": defect }))
    } else if defect >= tol.get("converse_defect_min") {
        Record::exceeding(index, p, "parallel", nq, tol.get("parallel_converse"))
            .with_values(json!({ "direction": "converse", "defect": defect }))
    } else {
        Record::skipped(index, p, "parallel", format!("defect {defect} below converse threshold"))
    });

    if fields.is_constant() {
        out.push(Record::bounded(index, p, "flat_christoffel", general.max_abs(), tol.get("flat_christoffel")));
    } else {
        out.push(Record::skipped(index, p, "flat_christoffel", "fields not constant"));
    }

    let curv = match curvature_at_with(fields, &p, config.fd_step, config.stencil.into()) {
        Ok(c) => c,
        Err(e) => {
            let reason = error_reason(&e);
            for check in VERIFY_CHECKS.iter().filter(|c| c.starts_with("curvature") || c.starts_with("flat_curv")) {
                out.push(Record::skipped(index, p, check, reason.clone()));
            }
            for check in ["fd_half_step", "orbit_sectional_spread"] {
                out.push(Record::skipped(index, p, check, reason.clone()));
            }
            return out;
        }
    };
    verify_curvature(config, fields, index, &curv, parallel, &mut rng, &mut out);
    out
}

fn verify_curvature(
    config: &RunConfig,
    fields: &FieldPair,
    index: usize,
    curv: &CurvatureAtPoint,
    parallel: bool,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<Record>,
) {
    let tol = &config.tolerances;
    let p = curv.point;
    let r_scale = 1.0 + curv.max_abs_down();
    if fields.is_constant() {
        out.push(Record::bounded(index, p, "flat_curvature", curv.max_abs_up(), tol.get("flat_curvature")));
    } else {
        out.push(Record::skipped(index, p, "flat_curvature", "fields not constant"));
    }
    out.push(Record::bounded(
        index,
        p,
        "curvature_antisymmetry",
        curv.first_pair_antisymmetry(),
        tol.get("curvature_symmetry") * r_scale,
    ));
    out.push(Record::bounded(
        index,
        p,
        "curvature_pair_symmetry",
        curv.pair_symmetry(),
        tol.get("curvature_symmetry") * r_scale,
    ));
    out.push(Record::bounded(
        index,
        p,
        "fd_half_step",
        curv.half_step_delta,
        tol.get("fd_half_step") * (1.0 + curv.max_abs_up()),
    ));

    if !parallel {
        for check in
            ["curvature_q_commutation", "curvature_q_identity", "curvature_q_invariance", "orbit_sectional_spread"]
        {
            out.push(Record::skipped(index, p, check, "not parallel"));
        }
        return;
    }

    let rel = tol.get("curvature_identity");
    let relative = |residual: f64, scale: f64| if scale > 0.0 { residual / scale } else { residual };
    out.push(Record::bounded(
        index,
        p,
        "curvature_q_commutation",
        relative(curv.q_commutation_residual(), curv.max_abs_up()),
        rel,
    ));
    let (mut worst_identity, mut worst_invariance) = (0.0f64, 0.0f64);
    for _ in 0..config.samples {
        let [x, y, z, u] = [random_vec(rng), random_vec(rng), random_vec(rng), random_vec(rng)];
        let scale = curv.residual_scale([&x, &y, &z, &u]);
        worst_identity = worst_identity.max(relative(curv.q_identity_residual(&x, &y, &z, &u), scale));
        let (r1, r2) = curv.q_invariance_residuals(&x, &y, &z, &u);
        worst_invariance = worst_invariance.max(relative(r1.max(r2), scale));
    }
    out.push(Record::bounded(index, p, "curvature_q_identity", worst_identity, rel));
    out.push(Record::bounded(index, p, "curvature_q_invariance", worst_invariance, rel));

    if !curv.metric.definite {
        out.push(Record::skipped(index, p, "orbit_sectional_spread", "IndefiniteMetric"));
        return;
    }
    let min_independence = tol.get("orbit_independence_min");
    let mut seeds: Vec<[f64; 3]> = config.vectors.clone();
    let mut draws = 0;
    while seeds.len() < config.vectors.len() + config.samples && draws < 100 * config.samples.max(1) {
        draws += 1;
        let x = random_vec(rng);
        let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if independence_cubic(&x).abs() > min_independence * n * n * n {
            seeds.push(x);
        }
    }
    let (rel_spread, abs_spread) = (tol.get("orbit_spread_rel"), tol.get("orbit_spread_abs"));
    let mut worst: Option<(f64, f64, f64, [f64; 3])> = None;
    let mut used = 0;
    for x in &seeds {
        let Ok(orbit) = orbit_sections(fields, &p, x) else { continue };
        let mut mu = [0.0; 3];
        let mut ok = true;
        for (slot, (u, v)) in mu.iter_mut().zip(&orbit.sections) {
            match curv.sectional(u, v) {
                Ok(m) => *slot = m,
                Err(_) => ok = false,
            }
        }
        if !ok {
            continue;
        }
        used += 1;
        let spread = (mu[0] - mu[1]).abs().max((mu[1] - mu[2]).abs()).max((mu[0] - mu[2]).abs());
        let limit = rel_spread * max_abs(mu) + abs_spread;
        let ratio = spread / limit;
        if worst.is_none_or(|w| ratio > w.0) {
            worst = Some((ratio, spread, limit, *x));
        }
    }
    out.push(match worst {
        Some((_, spread, limit, x)) => Record::bounded(index, p, "orbit_sectional_spread", spread, limit)
            .with_values(json!({ "worst_seed": x, "seeds": used })),
        None => Record::skipped(index, p, "orbit_sectional_spread", "DependentOrbit"),
    });
}

pub fn cmd_scan(config: &RunConfig) -> Result<VerificationReport, CliError> {
    config.validate()?;
    let grid = config.grid.ok_or_else(|| CliError::Config("scan requires --grid".into()))?;
    let points = grid.expand()?;
    let fields = config.field_pair()?;
    let x = config.vectors.first().copied().unwrap_or(DEFAULT_SEED_VECTOR);
    let records = points
        .par_iter()
        .enumerate()
        .map(|(index, p)| {
            let s = fields.domain_check(p);
            let mu_e1 = s
                .definite
                .then(|| {
                    let orbit = orbit_sections(&fields, p, &x).ok()?;
                    let (u, v) = orbit.sections[0];
                    curvature_at_with(&fields, p, config.fd_step, config.stencil.into()).ok()?.sectional(&u, &v).ok()
                })
                .flatten();
            let values = json!({
                "A": s.a,
                "B": s.b,
                "D": s.d,
                "nondegenerate": s.nondegenerate,
                "definite": s.definite,
                "mu_e1": mu_e1,
            });
            if s.nondegenerate {
                Record::new(index, *p, "scan", Status::Pass).with_values(values)
            } else {
                Record::skipped(index, *p, "scan", format!("D={}", s.d)).with_values(values)
            }
        })
        .collect();
    Ok(VerificationReport::new("scan", config.clone(), records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GridSpec;

    fn config(fields: &str, points: &[[f64; 3]]) -> RunConfig {
        let mut c = RunConfig::new(fields);
        c.points = points.to_vec();
        c
    }

    #[test]
    fn eval_metric_at_reference_point() {
        let r = cmd_eval(&config("paper-example", &[[1.0, 0.0, 0.0]]), EvalTarget::Metric).unwrap();
        let v = r.records[0].values.as_ref().unwrap();
        assert_eq!(v["g"], json!([4.0, 1.0, 1.0]));
        assert_eq!(v["D"], json!(18.0));
    }

    #[test]
    fn eval_skips_degenerate_and_dependent() {
        let r = cmd_eval(&config("paper-example", &[[1.0, 1.0, 1.0]]), EvalTarget::Christoffel).unwrap();
        assert_eq!(r.records[0].status, Status::Skipped);
        assert_eq!(r.records[0].reason.as_deref(), Some("D=0"));
        let mut c = config("paper-example", &[[1.0, 0.0, 0.0]]);
        c.vectors = vec![[1.0, 1.0, 1.0]];
        let r = cmd_eval(&c, EvalTarget::Sectional).unwrap();
        assert_eq!(r.records[0].reason.as_deref(), Some("DependentOrbit"));
    }

    #[test]
    fn verify_paper_example_grid_passes() {
        let mut c = RunConfig::new("paper-example");
        c.grid = Some(GridSpec::parse("2,3,3,0,1,3,-1,0,3").unwrap());
        let r = cmd_verify(&c).unwrap();
        let failures: Vec<_> = r.records.iter().filter(|r| r.status == Status::Fail).collect();
        assert!(failures.is_empty(), "{failures:#?}");
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn verify_converse_and_flat() {
        let r = cmd_verify(&config("A: x1; B: 0", &[[1.0, 0.5, 0.0]])).unwrap();
        let rec = r.records.iter().find(|r| r.check == "parallel").unwrap();
        assert_eq!(rec.status, Status::Pass);
        assert_eq!(rec.values.as_ref().unwrap()["direction"], "converse");

        let r = cmd_verify(&config("A: 2; B: 1", &[[0.3, -0.2, 0.1]])).unwrap();
        for check in ["flat_christoffel", "flat_curvature", "parallel"] {
            let rec = r.records.iter().find(|r| r.check == check).unwrap();
            assert_eq!(rec.status, Status::Pass, "{check}");
        }
    }

    #[test]
    fn scan_flags_degenerate_rows() {
        let mut c = RunConfig::new("paper-example");
        c.grid = Some(GridSpec::parse("0,1,3,0,0,1,0,1,3").unwrap());
        let r = cmd_scan(&c).unwrap();
        assert_eq!(r.records.len(), 9);
        assert!(r.records.iter().any(|r| r.status == Status::Skipped));
        assert_eq!(r.exit_code(), 0);
    }
}

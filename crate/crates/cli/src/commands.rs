//! Subcommand handlers.

use std::fs;
use std::io::Write;

use anyhow::{Context, Result};
use serde_json::{json, Value};

use wheelbound::bounds::{hashin_shtrikman_branch, intermediate_branch, small_m1_branch};
use wheelbound::elastic::{
    bulk_bound, dual_field_spec, dual_rigid_bound, elastic_field_spec, printed_intermediate_value,
    ElasticSet, StiffnessSet,
};
use wheelbound::radial::{effective_conductivity, radial_fd};
use wheelbound::raster::{rasterize_sector, target_fractions, PhaseMap};
use wheelbound::verify::{
    extrapolate, field_conditions_check, measure_effective, quarter_turn, Preconditioner, Run,
    SolverOptions, VerificationReport,
};
use wheelbound::wheel::radial_profile;
use wheelbound::{
    build_wheel, dual_resistivity_bound, lower_bound, maximize_over_t, optimal_fields, thresholds,
    BoundResult, ConductorSet, Fractions, Regime, ResistorSet,
};

use crate::report::{emit, fmt12, object};
use crate::{BoundsArgs, ElasticArgs, Failure, OracleArgs, Pre, SweepArgs, VerifyArgs, WheelArgs};

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn bound_json(b: &BoundResult) -> Vec<(&'static str, Value)> {
    vec![
        ("value", json!(b.value)),
        ("regime", json!(b.regime.label())),
        ("t_opt", json!(b.t_opt)),
        ("m11", json!(b.m11)),
        ("m12", json!(b.m12)),
    ]
}

pub fn bounds(a: BoundsArgs) -> Result<()> {
    let f = Fractions::new(a.point.m1, a.point.m2)?;
    let (problem, c, b) = match (a.rho1, a.rho2) {
        (Some(r1), Some(r2)) => {
            let r = ResistorSet::new(r1, r2)?;
            (
                "resistivity",
                r.as_conductors(),
                dual_resistivity_bound(&r, &f),
            )
        }
        _ => {
            let (k1, k2) = (a.k1.unwrap_or(f64::NAN), a.k2.unwrap_or(f64::NAN));
            let c = ConductorSet::new(k1, k2)?;
            ("conductivity", c, lower_bound(&c, &f))
        }
    };
    let mut pairs = vec![("problem", json!(problem))];
    pairs.extend(bound_json(&b));
    pairs.push(("fields", to_json(&optimal_fields(&c, &f))));
    emit(object(pairs), a.json)
}

pub fn wheel(a: WheelArgs) -> Result<()> {
    let c = ConductorSet::new(a.materials.k1, a.materials.k2)?;
    let f = Fractions::new(a.point.m1, a.point.m2)?;
    let b = lower_bound(&c, &f);
    let w = build_wheel(&c, &f)?;
    let k_radial = effective_conductivity(&radial_profile(&w, &c))?;
    let n = a.profile_points.max(2);
    let profile: Vec<Value> = (0..n)
        .map(|i| {
            let r = w.r0 + (1.0 - w.r0) * i as f64 / (n - 1) as f64;
            let p = w.phase_fractions_at(r);
            json!({"r": r, "m1": p[0], "m2": p[1], "m3": p[2]})
        })
        .collect();
    let mut pairs = vec![
        ("kind", json!(w.kind.label())),
        ("r0", json!(w.r0)),
        ("r_env", json!(w.r_env)),
        ("c_env", json!(w.envelope_fraction)),
        ("spike_area_k1", json!(w.spike_area_k1)),
        ("spike_area_k2", json!(w.spike_area_k2)),
        ("k_radial", json!(k_radial)),
        ("bound", json!(b.value)),
        ("regime", json!(b.regime.label())),
        ("gap", json!((k_radial - b.value).abs() / b.value)),
        ("profile", Value::Array(profile)),
    ];
    if let Some(path) = &a.pgm {
        let r = &a.raster;
        let map = rasterize_sector(&w, &c, r.n_spikes, r.nr, r.ntheta, r.contrast)?;
        fs::write(path, map.to_pgm()).with_context(|| format!("writing {}", path.display()))?;
        pairs.push((
            "raster",
            json!({
                "path": path.display().to_string(),
                "grid": [map.nr, map.ntheta],
                "n_spikes": r.n_spikes,
                "measured_fractions": map.measured_fractions(),
            }),
        ));
    }
    emit(object(pairs), a.json)
}

fn solver_options(a: &VerifyArgs) -> SolverOptions {
    SolverOptions {
        r_out: a.r_out,
        tol: a.cg_tol,
        preconditioner: match a.preconditioner {
            Pre::Ic0 => Preconditioner::IncompleteCholesky,
            Pre::Jacobi => Preconditioner::Jacobi,
        },
        deflate: !a.no_deflation,
        ..SolverOptions::default()
    }
}

/// Reference value for a map read from disk: the bound for its recorded
/// fractions, or the common conductivity of a one-material map.
fn map_reference(map: &PhaseMap) -> Result<f64> {
    let v = map.values;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Failure::Invalid("map has no conductivities in its header".into()).into());
    }
    if v[0] == v[1] && v[1] == v[2] {
        return Ok(v[0]);
    }
    let f = match target_fractions(map) {
        Some(f) => f,
        None => {
            let m = map.measured_fractions();
            Fractions::new(m[0], m[1])?
        }
    };
    Ok(lower_bound(&ConductorSet::new(v[0], v[1])?, &f).value)
}

pub fn verify(a: VerifyArgs) -> Result<()> {
    let opts = solver_options(&a);
    let r = &a.raster;
    let mut pairs = Vec::new();
    let report = if let Some(k) = a.homogeneous {
        let map = PhaseMap::homogeneous(r.nr, r.ntheta, k)?;
        let m = measure_effective(&map, k * 1.5, &opts)?;
        VerificationReport::new(&map, &m, k)
    } else if let Some(path) = &a.map {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let map = PhaseMap::from_pgm(&text)?;
        let reference = map_reference(&map)?;
        let m = measure_effective(&map, reference, &opts)?;
        VerificationReport::new(&map, &m, reference)
    } else {
        let (Some(k1), Some(k2), Some(m1), Some(m2)) = (a.k1, a.k2, a.m1, a.m2) else {
            return Err(Failure::Invalid(
                "give --k1 --k2 --m1 --m2, --map or --homogeneous".into(),
            )
            .into());
        };
        let c = ConductorSet::new(k1, k2)?;
        let f = Fractions::new(m1, m2)?;
        let bound = lower_bound(&c, &f).value;
        let w = build_wheel(&c, &f)?;
        let mut main_run = None;
        if !a.series.is_empty() {
            let mut runs = Vec::new();
            let mut reports = Vec::new();
            for &n in &a.series {
                let map = rasterize_sector(&w, &c, n, r.nr, r.ntheta, r.contrast)?;
                let m = measure_effective(&map, bound, &opts)?;
                reports.push(to_json(&VerificationReport::new(&map, &m, bound)));
                runs.push(Run {
                    n_spikes: n,
                    contrast: r.contrast,
                    h: 1.0 / r.nr as f64,
                    k_num: m.k_num,
                });
                if n == r.n_spikes {
                    main_run = Some((map, m));
                }
            }
            let ex = extrapolate(&runs)?;
            pairs.push(("series", Value::Array(reports)));
            pairs.push((
                "extrapolation",
                json!({
                    "k_inf": ex.k_inf,
                    "terms": ex.terms,
                    "coefficients": ex.coefficients,
                    "residual": ex.residual,
                    "rel_err": (ex.k_inf - bound) / bound,
                }),
            ));
        }
        let (map, m) = match main_run {
            Some(run) => run,
            None => {
                let map = rasterize_sector(&w, &c, r.n_spikes, r.nr, r.ntheta, r.contrast)?;
                let m = measure_effective(&map, bound, &opts)?;
                (map, m)
            }
        };
        if a.field_check {
            let fy = quarter_turn(&map, &m.field, &opts)?;
            let rep = field_conditions_check(&m.field, &fy, &optimal_fields(&c, &f), &w);
            pairs.push(("field_check", to_json(&rep)));
        }
        VerificationReport::new(&map, &m, bound)
    };
    let mut all = vec![
        ("report", to_json(&report)),
        ("tolerance", json!(a.tolerance)),
    ];
    all.append(&mut pairs);
    let passed = report.rel_err.abs() <= a.tolerance;
    all.push(("passed", json!(passed)));
    emit(object(all), a.json)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "relative gap {} exceeds tolerance {}",
            fmt12(report.rel_err),
            fmt12(a.tolerance)
        ))
        .into())
    }
}

/// Parses `value` or `start:stop:step` into the list of sample points.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let bad = || Failure::Invalid(format!("bad range {s:?}; use a number or start:stop:step"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad())?;
    match parts[..] {
        [v] => Ok(vec![v]),
        [start, stop, step] => {
            if !(step > 0.0) || !(start <= stop) || !start.is_finite() || !stop.is_finite() {
                return Err(Failure::Invalid(format!("empty range {s:?}")).into());
            }
            let n = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(bad().into()),
    }
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let c = ConductorSet::new(a.materials.k1, a.materials.k2)?;
    let m1s = parse_range(&a.m1)?;
    let m2s = parse_range(&a.m2)?;
    let mut header = vec!["m1", "m2", "regime", "B", "t_opt"];
    if a.with_radial {
        header.push("k_radial");
    }
    if a.with_fd {
        header.push("k_fd");
    }
    let mut rows: Vec<(f64, f64, BoundResult, Option<f64>, Option<f64>)> = Vec::new();
    let mut skipped = 0;
    for &m2 in &m2s {
        for &m1 in &m1s {
            let Ok(f) = Fractions::new(m1, m2) else {
                skipped += 1;
                continue;
            };
            let b = lower_bound(&c, &f);
            let profile = if a.with_radial || a.with_fd {
                build_wheel(&c, &f).ok().map(|w| radial_profile(&w, &c))
            } else {
                None
            };
            let kr = match (&profile, a.with_radial) {
                (Some(p), true) => Some(effective_conductivity(p)?),
                _ => None,
            };
            let kf = match (&profile, a.with_fd) {
                (Some(p), true) => Some(radial_fd(p, a.fd_contrast, a.fd_h)?),
                _ => None,
            };
            rows.push((m1, m2, b, kr, kf));
        }
    }
    if rows.is_empty() {
        return Err(Failure::Invalid("no admissible points in the sweep".into()).into());
    }

    let sink: Box<dyn Write> = match &a.output {
        Some(p) => {
            Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(&header)?;
    let opt = |x: Option<f64>| x.map_or(String::new(), fmt12);
    for (m1, m2, b, kr, kf) in &rows {
        let mut rec = vec![
            fmt12(*m1),
            fmt12(*m2),
            b.regime.label().to_string(),
            fmt12(b.value),
            fmt12(b.t_opt),
        ];
        if a.with_radial {
            rec.push(opt(*kr));
        }
        if a.with_fd {
            rec.push(opt(*kf));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;

    // post-checks: B non-increasing in m1, branches meet at regime changes,
    // and the radial solver reproduces B
    let mut problems = Vec::new();
    for pair in rows.windows(2) {
        let (p, q) = (&pair[0], &pair[1]);
        if p.1 != q.1 {
            continue;
        }
        if q.0 > p.0 && q.2.value > p.2.value * (1.0 + 1e-12) {
            problems.push(format!(
                "B increases between m1 = {} and {}",
                fmt12(p.0),
                fmt12(q.0)
            ));
        }
        if p.2.regime != q.2.regime {
            let th = thresholds(&c, p.1);
            for (m, lo, hi) in [
                (th.m11, Regime::LargeM1, Regime::Intermediate),
                (th.m12, Regime::Intermediate, Regime::SmallM1),
            ] {
                if m <= 0.0 || m + p.1 > 1.0 {
                    continue;
                }
                let f = Fractions::new(m, p.1)?;
                let val = |r: Regime| match r {
                    Regime::LargeM1 => hashin_shtrikman_branch(&c, &f),
                    Regime::Intermediate => intermediate_branch(&c, &f),
                    Regime::SmallM1 => small_m1_branch(&c, &f),
                };
                let (x, y) = (val(lo), val(hi));
                if (x - y).abs() > 1e-10 * x.abs() {
                    problems.push(format!(
                        "branches differ at m1 = {}: {} vs {}",
                        fmt12(m),
                        fmt12(x),
                        fmt12(y)
                    ));
                }
            }
        }
    }
    let worst_radial = rows
        .iter()
        .filter_map(|r| r.3.map(|k| (k - r.2.value).abs() / r.2.value))
        .fold(0.0, f64::max);
    if a.with_radial && worst_radial > 1e-9 {
        problems.push(format!(
            "radial solver off the bound by {}",
            fmt12(worst_radial)
        ));
    }
    eprintln!(
        "sweep: {} rows, {} skipped outside the simplex, checks {}",
        rows.len(),
        skipped,
        if problems.is_empty() {
            "passed"
        } else {
            "FAILED"
        }
    );
    if a.with_radial {
        eprintln!("sweep: max |k_radial - B| / B = {}", fmt12(worst_radial));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(problems.join("; ")).into())
    }
}

pub fn oracle(a: OracleArgs) -> Result<()> {
    let c = ConductorSet::new(a.materials.k1, a.materials.k2)?;
    let f = Fractions::new(a.point.m1, a.point.m2)?;
    let o = maximize_over_t(&c, &f)?;
    let b = lower_bound(&c, &f);
    let mn = &o.minimizer;
    emit(
        object([
            ("bound", json!(o.bound_value)),
            ("t_opt", json!(o.t_opt)),
            ("closed_form", json!(b.value)),
            ("regime", json!(b.regime.label())),
            ("rel_diff", json!((o.bound_value - b.value).abs() / b.value)),
            (
                "minimizer",
                json!({"s": mn.s, "d": mn.d, "det": mn.det(), "gamma": mn.gamma}),
            ),
            ("branch", to_json(&o.branch)),
        ]),
        a.json,
    )
}

pub fn elastic(a: ElasticArgs) -> Result<()> {
    let f = Fractions::new(a.point.m1, a.point.m2)?;
    let s = match (a.young1, a.poisson1, a.young2, a.poisson2) {
        (Some(e1), Some(n1), Some(e2), Some(n2)) => ElasticSet::from_young(e1, n1, e2, n2)?,
        _ => {
            let get = |v: Option<f64>| v.unwrap_or(f64::NAN);
            ElasticSet::new(get(a.kappa1), get(a.eta1), get(a.kappa2), get(a.eta2))?
        }
    };
    let (b, fields) = if a.dual {
        let k = StiffnessSet::new(s.kappa1(), s.eta1(), s.kappa2(), s.eta2())?;
        (dual_rigid_bound(&k, &f)?, dual_field_spec(&k, &f)?)
    } else {
        (bulk_bound(&s, &f)?, elastic_field_spec(&s, &f)?)
    };
    let printed = (b.regime == Regime::Intermediate).then(|| printed_intermediate_value(&s, &f));
    emit(
        object([
            ("problem", json!(if a.dual { "rigid" } else { "void" })),
            ("value", json!(b.value)),
            ("regime", json!(b.regime.label())),
            ("t_opt", json!(b.t_opt)),
            ("m11", json!(b.m11)),
            ("m12", json!(b.m12)),
            ("corrected_b2_flag", json!(b.corrected_b2_flag)),
            ("printed_b2", json!(printed)),
            ("fields", to_json(&fields)),
        ]),
        a.json,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0.25").unwrap(), vec![0.25]);
        assert_eq!(parse_range("0:0.4:0.01").unwrap().len(), 41);
        assert_eq!(parse_range("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_range("0.4:0:0.01").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("a:b").is_err());
    }
}

//! The scan-style subcommands: plain correlation scans, joining checks,
//! finite-horizon minima, sweeps, and uso probes.

use cutstack_core::products::{sweep_probe, uso_probe, SequenceSpec};
use cutstack_core::scalar::{self, Scalar};
use cutstack_core::scheme::SchemeSpec;
use cutstack_core::{CertifiedValue, Engine, Error, IntervalSet};
use rayon::prelude::*;
use serde_json::json;

use crate::output::{Report, Sink};
use crate::{JoiningArgs, ScanArgs, SweepArgs, UsoArgs};

type Result<T> = std::result::Result<T, Error>;

fn fmt(x: &Scalar) -> String {
    scalar::format(x)
}

/// Correlation at shift `k`: exact where the scheme's tail rule allows it,
/// otherwise a certified enclosure of width `<= eps`.
fn correlate(
    engine: &Engine,
    a: &IntervalSet,
    b: &IntervalSet,
    k: i64,
    eps: &Scalar,
) -> Result<(CertifiedValue, &'static str)> {
    match engine.correlation_exact(a, b, k) {
        Ok(v) => Ok((CertifiedValue::exact(v), "exact")),
        Err(Error::Precondition(_)) => {
            Ok((engine.correlation(a, b, k, eps)?, "enclosure"))
        }
        Err(e) => Err(e),
    }
}

pub fn scheme_parse(spec: &SchemeSpec, common: &crate::CommonArgs, sink: &mut Sink) -> Result<()> {
    let engine = crate::engine_for(common)?;
    let (w1, spacer_mass) = spec.normalize();
    let mut report = Report::new(vec!["n", "h", "w", "pool_mass"])
        .meta("scheme", spec.serialize().replace('\n', "; "))
        .meta("w1", fmt(&w1))
        .meta("spacer_mass", fmt(&spacer_mass));
    for n in 1..=8u32 {
        let (w, h, pool) = engine.stage_summary(n)?;
        report.push_row(vec![n.to_string(), h.to_string(), fmt(&w), fmt(&pool)]);
    }
    sink.report("scheme-parse", report)
}

pub fn tower_show(
    engine: &Engine,
    stage: u32,
    _common: &crate::CommonArgs,
    sink: &mut Sink,
) -> Result<()> {
    let tower = engine.materialize_stage(stage)?;
    let mut report = Report::new(vec!["idx", "left", "right"])
        .meta("stage", stage.to_string())
        .meta("height", tower.height.to_string())
        .meta("width", fmt(&tower.width))
        .meta(
            "pool",
            tower
                .pool
                .pieces()
                .iter()
                .map(|(lo, hi)| format!("[{},{})", fmt(lo), fmt(hi)))
                .collect::<Vec<_>>()
                .join(" "),
        );
    for (i, (lo, hi)) in tower.levels.iter().enumerate() {
        report.push_row(vec![i.to_string(), fmt(lo), fmt(hi)]);
    }
    sink.report("tower-show", report)
}

pub fn scan(
    engine: &Engine,
    a: &IntervalSet,
    b: &IntervalSet,
    args: &ScanArgs,
    sink: &mut Sink,
) -> Result<()> {
    let rows = scan_rows(engine, a, b, args.from, args.to, &args.common.eps)?;
    let min_lo = rows.iter().map(|(_, c, _)| &c.lo).min().cloned().unwrap();
    let max_hi = rows.iter().map(|(_, c, _)| &c.hi).max().cloned().unwrap();
    let mut report = Report::new(vec!["n", "lo", "hi", "status"])
        .meta("scheme", args.common.scheme.clone())
        .meta("A", args.a.clone())
        .meta("B", args.b.clone())
        .meta("eps", fmt(&args.common.eps))
        .meta("range", format!("{}..{}", args.from, args.to))
        .meta("min_lo", fmt(&min_lo))
        .meta("max_hi", fmt(&max_hi));
    for (n, c, status) in rows {
        report.push_row(vec![n.to_string(), fmt(&c.lo), fmt(&c.hi), status.into()]);
    }
    sink.report("scan", report)
}

pub fn liminf(
    engine: &Engine,
    a: &IntervalSet,
    b: &IntervalSet,
    args: &ScanArgs,
    sink: &mut Sink,
) -> Result<()> {
    let rows = scan_rows(engine, a, b, args.from, args.to, &args.common.eps)?;
    let (argmin, min, _) = rows
        .iter()
        .min_by(|(_, c, _), (_, d, _)| c.lo.cmp(&d.lo))
        .cloned()
        .unwrap();
    let mut report = Report::new(vec!["min_lo", "at_n"])
        .meta("scheme", args.common.scheme.clone())
        .meta("A", args.a.clone())
        .meta("B", args.b.clone())
        .meta("eps", fmt(&args.common.eps))
        .meta("range", format!("{}..{}", args.from, args.to));
    report.note("finite-horizon minimum, not a liminf certificate");
    report.push_row(vec![fmt(&min.lo), argmin.to_string()]);
    sink.report("liminf", report)
}

fn scan_rows(
    engine: &Engine,
    a: &IntervalSet,
    b: &IntervalSet,
    from: i64,
    to: i64,
    eps: &Scalar,
) -> Result<Vec<(i64, CertifiedValue, &'static str)>> {
    if from > to {
        return Err(Error::Validation(format!("empty shift range {from}..{to}")));
    }
    let shifts: Vec<i64> = (from..=to).collect();
    let mut rows: Vec<(i64, CertifiedValue, &'static str)> = shifts
        .par_iter()
        .map(|&n| {
            let (c, status) = correlate(engine, a, b, n, eps)?;
            Ok((n, c, status))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|(n, _, _)| *n);
    Ok(rows)
}

fn parse_coeffs(text: &str) -> Result<Vec<Scalar>> {
    let coeffs: Vec<Scalar> = text
        .split(',')
        .map(|t| scalar::parse(t))
        .collect::<Result<_>>()?;
    if coeffs.is_empty() {
        return Err(Error::Validation("at least one coefficient is required".into()));
    }
    Ok(coeffs)
}

pub fn joining(
    engine: &Engine,
    a: &IntervalSet,
    b: &IntervalSet,
    args: &JoiningArgs,
    sink: &mut Sink,
) -> Result<()> {
    if args.from > args.to || args.from < 1 {
        return Err(Error::Validation("invalid stage range".into()));
    }
    let coeffs = parse_coeffs(&args.coeffs)?;
    let eps = &args.common.eps;

    // rhs = sum_i a_i mu(T^{-i}A n B), one enclosure shared by every row
    let mut rhs = CertifiedValue::exact(scalar::zero());
    let mut rhs_status = "exact";
    for (i, coef) in coeffs.iter().enumerate() {
        let (c, status) = correlate(engine, a, b, -(i as i64), eps)?;
        if status != "exact" {
            rhs_status = "enclosure";
        }
        rhs = CertifiedValue::new(c.lo * coef, c.hi * coef)?.add(&rhs);
    }

    let stages: Vec<u32> = (args.from..=args.to).collect();
    let mut rows: Vec<(u32, i64, CertifiedValue, &'static str, Scalar)> = stages
        .par_iter()
        .map(|&n| {
            let (_, h, _) = engine.stage_summary(n)?;
            let k = i64::try_from(h)
                .map_err(|_| Error::resource(format!("stage {n} height exceeds i64")))?;
            let (lhs, status) = correlate(engine, a, b, k, eps)?;
            let gap = lhs.gap_upper_bound(&rhs);
            Ok((n, k, lhs, status, gap))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|(n, ..)| *n);

    let mut report = Report::new(vec!["n", "k", "lhs_lo", "lhs_hi", "rhs_lo", "rhs_hi", "gap", "status"])
        .meta("scheme", args.common.scheme.clone())
        .meta("A", args.a.clone())
        .meta("B", args.b.clone())
        .meta("coeffs", args.coeffs.clone())
        .meta("eps", fmt(eps));
    report.note("gap is a worst-case bound; limit claims are finite-horizon surrogates".to_string());
    for (n, k, lhs, status, gap) in rows {
        let status = if status == "exact" && rhs_status == "exact" { "exact" } else { "enclosure" };
        report.push_row(vec![
            n.to_string(),
            k.to_string(),
            fmt(&lhs.lo),
            fmt(&lhs.hi),
            fmt(&rhs.lo),
            fmt(&rhs.hi),
            fmt(&gap),
            status.into(),
        ]);
    }
    sink.report("joining", report)
}

pub fn parse_seq(text: &str, seed: u64) -> Result<SequenceSpec> {
    let mut parts = text.splitn(2, ':');
    let kind = parts.next().unwrap_or_default();
    let rest = parts.next().unwrap_or_default();
    let int = |s: &str| -> Result<i64> {
        s.trim()
            .parse()
            .map_err(|_| Error::Validation(format!("invalid integer {s:?} in sequence spec")))
    };
    match kind {
        "heights" => Ok(SequenceSpec::Heights { count: int(rest)? as u32 }),
        "arith" => {
            let fields: Vec<&str> = rest.split(':').collect();
            if fields.len() != 3 {
                return Err(Error::Validation("arith takes start:step:count".into()));
            }
            Ok(SequenceSpec::Arithmetic {
                start: int(fields[0])?,
                step: int(fields[1])?,
                count: int(fields[2])? as u32,
            })
        }
        "seeded" => {
            let fields: Vec<&str> = rest.split(':').collect();
            if fields.len() != 2 {
                return Err(Error::Validation("seeded takes count:max".into()));
            }
            Ok(SequenceSpec::Seeded {
                seed,
                count: int(fields[0])? as u32,
                max_shift: int(fields[1])?,
            })
        }
        "explicit" => Ok(SequenceSpec::Explicit {
            shifts: rest.split(',').map(int).collect::<Result<_>>()?,
        }),
        other => Err(Error::Validation(format!(
            "unknown sequence kind {other:?} (heights, arith, seeded, explicit)"
        ))),
    }
}

pub fn sweep(engine: &Engine, a: &IntervalSet, args: &SweepArgs, sink: &mut Sink) -> Result<()> {
    let seq = parse_seq(&args.seq, args.seed)?;
    let rows = sweep_probe(engine, a, &seq, &args.common.eps)?;
    let mut report = Report::new(vec!["L", "shift", "lo", "hi"])
        .meta("scheme", args.common.scheme.clone())
        .meta("A", args.a.clone())
        .meta("seq", args.seq.clone())
        .meta("seed", args.seed.to_string())
        .meta("eps", fmt(&args.common.eps));
    for row in rows {
        report.push_row(vec![
            row.l.to_string(),
            row.shift.to_string(),
            fmt(&row.coverage.lo),
            fmt(&row.coverage.hi),
        ]);
    }
    sink.report("sweep", report)
}

pub fn uso(engine: &Engine, a: &IntervalSet, args: &UsoArgs, sink: &mut Sink) -> Result<()> {
    let rep = uso_probe(
        engine,
        a,
        args.n,
        args.trials,
        args.seed,
        args.max_shift,
        &args.common.eps,
    )?;
    let mut report = Report::new(vec!["worst_lo", "worst_tuple"])
        .meta("scheme", args.common.scheme.clone())
        .meta("A", args.a.clone())
        .meta("n", rep.n.to_string())
        .meta("trials", rep.trials.to_string())
        .meta("seed", rep.seed.to_string())
        .meta("max_shift", rep.max_shift.to_string())
        .meta("eps", fmt(&args.common.eps));
    report.note("sampled diagnostic, not an exhaustive certificate");
    report.extra = Some(json!({
        "worst_lo": fmt(&rep.worst_lo),
        "worst_tuple": rep.worst_tuple,
    }));
    let tuple = rep
        .worst_tuple
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(";");
    report.push_row(vec![fmt(&rep.worst_lo), tuple]);
    sink.report("uso", report)
}

//! Parsing of field, base-field and `S` strings, quadratic family scans,
//! and the named verification suites.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::classgroup::{class_group, class_number_oracle};
use crate::error::{Error, Result};
use crate::ideal::{primes_above, SSet};
use crate::numfield::{is_squarefree, primes_up_to, NumberField};
use crate::polya::{
    boundary_check, brz_verify, factorization_roundtrip_check, filtration_check, hilbert94_check,
    ikp_check, relative_polya_group_s, BrzReport, Check, Verdict,
};

/// Parses `Q`, `Q(sqrt d)` or `Q(sqrt m1, sqrt m2)`; whitespace is ignored.
pub fn parse_field(spec: &str) -> Result<NumberField> {
    let s: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    if s == "Q" {
        return Ok(NumberField::rational());
    }
    let inner = s
        .strip_prefix("Q(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("field spec {:?}", spec)))?;
    let radicands = inner
        .split(',')
        .map(|t| {
            t.strip_prefix("sqrt")
                .and_then(|n| n.parse::<i64>().ok())
                .ok_or_else(|| Error::Parse(format!("radical {:?} in {:?}", t, spec)))
        })
        .collect::<Result<Vec<i64>>>()?;
    match radicands[..] {
        [d] => NumberField::quadratic(d),
        [a, b] => NumberField::biquadratic(a, b),
        _ => Err(Error::Parse(format!("field spec {:?}", spec))),
    }
}

/// Parses the base field of `field`: `Q`, `K` (the field itself), a field
/// spec, or `sub=n` with `n` a radicand or a subfield index.
pub fn parse_base(field: &NumberField, spec: &str) -> Result<NumberField> {
    let s: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    let base = if s == "K" {
        field.clone()
    } else if let Some(sel) = s.strip_prefix("sub=") {
        let n = sel
            .parse::<i64>()
            .map_err(|_| Error::Parse(format!("subfield selector {:?}", spec)))?;
        field.subfield_by_selector(n)?
    } else {
        parse_field(&s)?
    };
    field.relative_degree(&base)?;
    Ok(base)
}

fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    out.push(cur);
    out
}

fn parse_prime(t: &str) -> Result<u64> {
    let p = t
        .parse::<u64>()
        .map_err(|_| Error::Parse(format!("prime {:?}", t)))?;
    if p < 2 || !primes_up_to(p).contains(&p) {
        return Err(Error::Parse(format!("{} is not prime", p)));
    }
    Ok(p)
}

/// Parses an `S` spec over `base`: `oo` followed by rational primes `p`
/// (every prime above `p`) or selectors `(p,i)` (the `i`-th prime above
/// `p`, counting from 1).
pub fn parse_s(base: &NumberField, spec: &str) -> Result<SSet> {
    let s: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    let mut primes = Vec::new();
    for tok in split_top_level(&s) {
        if tok.is_empty() || tok == "oo" {
            continue;
        }
        if let Some(body) = tok.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            let (p, i) = body
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("selector {:?}", tok)))?;
            let p = parse_prime(p)?;
            let i = i
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("selector {:?}", tok)))?;
            let above = primes_above(base, p);
            if i == 0 || i > above.len() {
                return Err(Error::Parse(format!(
                    "{} has {} primes above it in {}",
                    p,
                    above.len(),
                    base
                )));
            }
            primes.push(above[i - 1].clone());
        } else {
            primes.extend(primes_above(base, parse_prime(&tok)?));
        }
    }
    SSet::new(base, primes)
}

/// Parses `a..b` (inclusive) or `n` (meaning `-n..n`).
pub fn parse_range(spec: &str) -> Result<(i64, i64)> {
    let s = spec.trim();
    let bad = || Error::Parse(format!("range {:?}", spec));
    match s.split_once("..") {
        Some((a, b)) => Ok((
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        )),
        None => {
            let n: i64 = s.parse().map_err(|_| bad())?;
            Ok((-n.abs(), n.abs()))
        }
    }
}

/// Squarefree `d ≠ 0, 1` in `lo..=hi`, in increasing order.
pub fn squarefree_range(lo: i64, hi: i64) -> Vec<i64> {
    (lo..=hi).filter(|&d| d != 1 && is_squarefree(d)).collect()
}

/// Header of the scan CSV, versioned in the leading comment.
pub const CSV_HEADER: &str = "# polya-scan v1\n\
d,S,h,po_S,h1,ram,ost_S,brz_exact,cokernel,kisilevsky,herbrand,po_oracle";

fn verdict_cell(r: &BrzReport, name: &str) -> &'static str {
    match r.check(name).map(|c| c.verdict) {
        Some(Verdict::Pass) => "pass",
        Some(Verdict::Fail) => "fail",
        Some(Verdict::Undecided) => "undecided",
        None => "n/a",
    }
}

fn order_cell(r: &BrzReport, name: &str) -> String {
    r.group(name)
        .map(|g| g.order.to_string())
        .unwrap_or_default()
}

/// One CSV row for a quadratic field over `Q`.
pub fn csv_row(d: i64, r: &BrzReport) -> String {
    let mut cells = vec![d.to_string(), format!("\"{}\"", r.s)];
    for g in ["cl_K", "po", "h1", "ram", "ost"] {
        cells.push(order_cell(r, g));
    }
    for c in [
        "brz_exact",
        "cokernel",
        "kisilevsky",
        "herbrand",
        "po_oracle",
    ] {
        cells.push(verdict_cell(r, c).to_string());
    }
    cells.join(",")
}

/// `brz_verify` for `Q(√d)/Q` over every `d` in `ds`, in order. `s` is
/// given over `Q`.
pub fn scan_quadratic(ds: &[i64], s: &SSet) -> Vec<(i64, BrzReport)> {
    let q = NumberField::rational();
    ds.par_iter()
        .map(|&d| {
            let report = match NumberField::quadratic(d) {
                Ok(k) => brz_verify(&k, &q, s),
                Err(e) => BrzReport {
                    field: format!("Q(sqrt {})", d),
                    base: q.to_string(),
                    s: s.to_string(),
                    groups: Default::default(),
                    checks: vec![Check::undecided("brz_exact", &e)],
                },
            };
            (d, report)
        })
        .collect()
}

/// One line of a suite run.
#[derive(Clone, Debug)]
pub struct SuiteRow {
    pub instance: String,
    pub check: Check,
}

impl SuiteRow {
    fn new(instance: impl Into<String>, check: Check) -> Self {
        SuiteRow {
            instance: instance.into(),
            check,
        }
    }
}

pub const SUITES: [&str; 5] = ["golden", "scan-quadratic", "biquadratic", "boundary", "all"];

fn instance(field: &NumberField, base: &NumberField, s: &SSet) -> String {
    format!("{} / {} / S={}", field, base, s)
}

fn report_rows(r: &BrzReport) -> Vec<SuiteRow> {
    let name = format!("{} / {} / S={}", r.field, r.base, r.s);
    r.checks
        .iter()
        .map(|c| SuiteRow::new(name.clone(), c.clone()))
        .collect()
}

fn invariants_check(name: &str, r: &BrzReport, group: &str, want: &[u64]) -> Check {
    match r.group(group) {
        Some(g) => Check {
            name: name.into(),
            lhs: json!(g.invariant_factors),
            rhs: json!(want),
            verdict: if g.invariant_factors == want {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            detail: None,
        },
        None => Check {
            name: name.into(),
            lhs: Value::Null,
            rhs: json!(want),
            verdict: Verdict::Undecided,
            detail: Some(format!("group {} missing", group)),
        },
    }
}

fn attempt(instance: &str, name: &str, r: Result<Check>) -> SuiteRow {
    match r {
        Ok(c) => SuiteRow::new(instance, c),
        Err(e) => SuiteRow::new(instance, Check::undecided(name, &e)),
    }
}

fn golden() -> Vec<SuiteRow> {
    let q = NumberField::rational();
    let k = NumberField::quadratic(-5).expect("field");
    let inf = SSet::archimedean(&q);
    let s2 = SSet::above_rational(&q, &[2]);
    let mut rows = Vec::new();

    let r = brz_verify(&k, &q, &inf);
    rows.extend(report_rows(&r));
    let name = instance(&k, &q, &inf);
    for (label, g, want) in [
        ("cl", "cl_K", &[2u64][..]),
        ("po", "po", &[2]),
        ("h1", "h1", &[2]),
        ("ker_eps", "ker_eps", &[]),
    ] {
        rows.push(SuiteRow::new(
            name.clone(),
            invariants_check(label, &r, g, want),
        ));
    }

    let r = brz_verify(&k, &q, &s2);
    rows.extend(report_rows(&r));
    let name = instance(&k, &q, &s2);
    for (label, g, want) in [
        ("po", "po", &[][..]),
        ("ost", "ost", &[]),
        ("h1", "h1", &[2u64]),
    ] {
        rows.push(SuiteRow::new(
            name.clone(),
            invariants_check(label, &r, g, want),
        ));
    }

    let i = NumberField::quadratic(-1).expect("field");
    rows.push(attempt(
        &instance(&i, &q, &s2),
        "hilbert94",
        hilbert94_check(&i, &q, &s2),
    ));
    let s25 = SSet::above_rational(&q, &[2, 5]);
    rows.push(attempt(
        &instance(&k, &q, &s25),
        "hilbert94",
        hilbert94_check(&k, &q, &s25),
    ));

    for (a, b) in [(-1, 2), (-1, 3)] {
        let z = NumberField::biquadratic(a, b).expect("field");
        let check = relative_polya_group_s(&z, &q, &inf).map(|po| {
            let n = po.order();
            Check::compare("po_trivial", &n, &num_bigint::BigInt::from(1))
        });
        rows.push(attempt(&instance(&z, &q, &inf), "po_trivial", check));
    }

    let big = NumberField::biquadratic(-1, 5).expect("field");
    let inf_f = SSet::archimedean(&k);
    let r = brz_verify(&big, &k, &inf_f);
    rows.extend(report_rows(&r));
    let name = instance(&big, &k, &inf_f);
    rows.push(SuiteRow::new(
        name.clone(),
        invariants_check("ker_eps", &r, "ker_eps", &[2]),
    ));
    rows.push(SuiteRow::new(
        name.clone(),
        invariants_check("cl_F", &r, "cl_F", &[2]),
    ));
    rows.push(SuiteRow::new(
        name.clone(),
        invariants_check("ost", &r, "ost", &[]),
    ));
    rows.push(attempt(&name, "ikp", ikp_check(&big, &k, &inf_f)));
    rows
}

/// Fields used for the invariant-factorization round trips of the
/// quadratic scan.
pub const ROUNDTRIP_FIELDS: [i64; 10] = [-1, -2, -3, -5, -21, -23, 2, 3, 10, 229];

/// Report checks gated by the quadratic scan suite.
pub const SCAN_CHECKS: [&str; 4] = ["brz_exact", "cokernel", "po_oracle", "herbrand"];

fn scan_suite() -> Vec<SuiteRow> {
    let q = NumberField::rational();
    let ds = squarefree_range(-300, 300);
    let mut rows = Vec::new();
    for s in [SSet::archimedean(&q), SSet::above_rational(&q, &[2])] {
        for (_, r) in scan_quadratic(&ds, &s) {
            rows.extend(
                report_rows(&r)
                    .into_iter()
                    .filter(|row| SCAN_CHECKS.contains(&row.check.name.as_str())),
            );
        }
    }
    let inf = SSet::archimedean(&q);
    let trips: Vec<SuiteRow> = ROUNDTRIP_FIELDS
        .par_iter()
        .map(|&d| {
            let k = NumberField::quadratic(d).expect("field");
            let name = instance(&k, &q, &inf);
            attempt(
                &name,
                "factorization_roundtrip",
                factorization_roundtrip_check(&k, &q, &inf, 100, d.unsigned_abs()),
            )
        })
        .collect();
    rows.extend(trips);
    rows
}

const BIQUADRATIC_RADICANDS: [i64; 8] = [-1, 2, -2, 3, -3, 5, -5, -7];

/// The distinct biquadratic fields `Q(√m1, √m2)` with radicands from
/// `{-1, ±2, ±3, 5, -5, -7}`.
pub fn biquadratic_fields() -> Vec<NumberField> {
    let mut out: Vec<NumberField> = Vec::new();
    let mut seen: Vec<Vec<String>> = Vec::new();
    for (i, &a) in BIQUADRATIC_RADICANDS.iter().enumerate() {
        for &b in &BIQUADRATIC_RADICANDS[i + 1..] {
            let Ok(k) = NumberField::biquadratic(a, b) else {
                continue;
            };
            let mut key: Vec<String> = k
                .quadratic_subfields()
                .iter()
                .map(|f| f.to_string())
                .collect();
            key.sort();
            if !seen.contains(&key) {
                seen.push(key);
                out.push(k);
            }
        }
    }
    out
}

fn biquadratic_rows(k: &NumberField) -> Vec<SuiteRow> {
    let q = NumberField::rational();
    let mut rows = Vec::new();
    let class = class_number_oracle(k).and_then(|h| {
        let got = class_group(k)?.order();
        Ok(Check::compare("class_number", &got, &h))
    });
    rows.push(attempt(&k.to_string(), "class_number", class));
    for s in [SSet::archimedean(&q), SSet::above_rational(&q, &[2])] {
        for f in k.quadratic_subfields() {
            match s.lift(&f) {
                Ok(s_f) => rows.extend(report_rows(&brz_verify(k, &f, &s_f))),
                Err(e) => rows.push(SuiteRow::new(
                    instance(k, &f, &s),
                    Check::undecided("brz_exact", &e),
                )),
            }
            rows.push(attempt(
                &instance(k, &f, &s),
                "filtration",
                filtration_check(k, &f, &s),
            ));
        }
        rows.extend(report_rows(&brz_verify(k, &q, &s)));
    }
    rows
}

fn biquadratic_suite() -> Vec<SuiteRow> {
    biquadratic_fields()
        .par_iter()
        .flat_map_iter(biquadratic_rows)
        .collect()
}

fn boundary_suite() -> Vec<SuiteRow> {
    let mut fields: Vec<NumberField> = squarefree_range(-30, 30)
        .into_iter()
        .map(|d| NumberField::quadratic(d).expect("field"))
        .collect();
    fields.extend(biquadratic_fields());
    fields
        .par_iter()
        .flat_map_iter(|k| {
            let mut rows = Vec::new();
            for s in [SSet::archimedean(k), SSet::above_rational(k, &[2])] {
                let name = instance(k, k, &s);
                match boundary_check(k, &s) {
                    Ok(cs) => rows.extend(cs.into_iter().map(|c| SuiteRow::new(name.clone(), c))),
                    Err(e) => rows.push(SuiteRow::new(name, Check::undecided("po_self", &e))),
                }
            }
            rows
        })
        .collect()
}

/// Runs a named suite.
pub fn run_suite(name: &str) -> Result<Vec<SuiteRow>> {
    match name {
        "golden" => Ok(golden()),
        "scan-quadratic" => Ok(scan_suite()),
        "biquadratic" => Ok(biquadratic_suite()),
        "boundary" => Ok(boundary_suite()),
        "all" => {
            let mut rows = golden();
            rows.extend(scan_suite());
            rows.extend(biquadratic_suite());
            rows.extend(boundary_suite());
            Ok(rows)
        }
        _ => Err(Error::Parse(format!(
            "unknown suite {:?}; expected one of {}",
            name,
            SUITES.join(", ")
        ))),
    }
}

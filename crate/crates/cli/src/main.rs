use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use polya_core::ideal::set_principality_budget;
use polya_core::numfield::NumberField;
use polya_core::polya::{brz_verify, BrzReport, Check, Verdict};
use polya_core::suites::{
    csv_row, parse_base, parse_field, parse_range, parse_s, run_suite, scan_quadratic, squarefree_range, SuiteRow,
    CSV_HEADER,
};
use polya_core::Error;

#[derive(Parser, Debug)]
#[command(name = "polya", version, about = "S-relative Polya groups and BRZ-type identities for quadratic and biquadratic fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Base node budget of each principality search.
    #[arg(long, global = true)]
    budget: Option<u64>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full report for one extension K/F and set S.
    Analyze {
        /// e.g. "Q(sqrt -5)" or "Q(sqrt -1, sqrt 5)".
        #[arg(long)]
        field: String,
        /// "Q", "K", a field spec, or "sub=n".
        #[arg(long, default_value = "Q")]
        base: String,
        /// e.g. "oo,2,5" or "oo,(3,1)".
        #[arg(long = "S", default_value = "oo")]
        s: String,
    },
    /// Reports for Q(sqrt d)/Q over a range of squarefree d.
    Scan {
        /// "a..b" or "n" for -n..n.
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        #[arg(long = "S", default_value = "oo")]
        s: String,
    },
    /// Runs a named suite: golden, scan-quadratic, biquadratic, boundary, all.
    Verify { suite: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Exit status of a finished run.
fn status(checks: impl IntoIterator<Item = Verdict>) -> ExitCode {
    let mut code = 0;
    for v in checks {
        match v {
            Verdict::Pass => {}
            Verdict::Fail => code = code.max(1),
            Verdict::Undecided => code = 2,
        }
    }
    ExitCode::from(code)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Parse(format!("{}: {}", path.display(), e))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Internal(e.to_string())),
    }
}

fn checks_csv(checks: &[(&str, &Check)]) -> String {
    let mut out = String::from("# polya-checks v1\ninstance,check,lhs,rhs,verdict\n");
    for (inst, c) in checks {
        out.push_str(&format!(
            "\"{}\",{},\"{}\",\"{}\",{}\n",
            inst,
            c.name,
            c.lhs,
            c.rhs,
            serde_json::to_value(c.verdict).expect("verdict").as_str().expect("string")
        ));
    }
    out
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Undecided => "UNDECIDED",
    }
}

fn suite_table(rows: &[SuiteRow]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&format!(
            "{:<9} {:<24} {} = {}  [{}]",
            verdict_word(r.check.verdict),
            r.check.name,
            r.check.lhs,
            r.check.rhs,
            r.instance
        ));
        if let Some(d) = &r.check.detail {
            out.push_str(&format!("  ({})", d));
        }
        out.push('\n');
    }
    let passed = rows.iter().filter(|r| r.check.passed()).count();
    out.push_str(&format!("{} of {} checks pass\n", passed, rows.len()));
    out
}

fn analyze(cli: &Cli, field: &str, base: &str, s: &str) -> Result<ExitCode, Error> {
    let k = parse_field(field)?;
    let f = parse_base(&k, base)?;
    let s = parse_s(&f, s)?;
    let report = brz_verify(&k, &f, &s);
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json() + "\n",
        Format::Csv => {
            let inst = format!("{} / {} / S={}", report.field, report.base, report.s);
            checks_csv(&report.checks.iter().map(|c| (inst.as_str(), c)).collect::<Vec<_>>())
        }
    };
    emit(&cli.out, &text)?;
    Ok(status(report.checks.iter().map(|c| c.verdict)))
}

fn scan(cli: &Cli, range: &str, s: &str) -> Result<ExitCode, Error> {
    let (lo, hi) = parse_range(range)?;
    let s = parse_s(&NumberField::rational(), s)?;
    let rows = scan_quadratic(&squarefree_range(lo, hi), &s);
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut t = format!("{}\n", CSV_HEADER);
            for (d, r) in &rows {
                t.push_str(&csv_row(*d, r));
                t.push('\n');
            }
            t
        }
        Format::Json => {
            let reports: Vec<&BrzReport> = rows.iter().map(|x| &x.1).collect();
            serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n"
        }
    };
    emit(&cli.out, &text)?;
    Ok(status(rows.iter().flat_map(|(_, r)| r.checks.iter().map(|c| c.verdict))))
}

fn verify(cli: &Cli, suite: &str) -> Result<ExitCode, Error> {
    let rows = run_suite(suite)?;
    let text = match cli.format {
        None => suite_table(&rows),
        Some(Format::Csv) => checks_csv(&rows.iter().map(|r| (r.instance.as_str(), &r.check)).collect::<Vec<_>>()),
        Some(Format::Json) => {
            let v: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| serde_json::json!({ "instance": r.instance, "check": r.check }))
                .collect();
            serde_json::to_string_pretty(&v).expect("rows serialize") + "\n"
        }
    };
    emit(&cli.out, &text)?;
    Ok(status(rows.iter().map(|r| r.check.verdict)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(b) = cli.budget {
        set_principality_budget(b);
    }
    let result = match &cli.command {
        Command::Analyze { field, base, s } => analyze(&cli, field, base, s),
        Command::Scan { range, s } => scan(&cli, range, s),
        Command::Verify { suite } => verify(&cli, suite),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use orbitscope::exterior::{gram_determinant_form, zero_verdict_from_restriction};
use orbitscope::grassmann::{classify_report, restrict_form};
use orbitscope::harness::{run_campaign, symmetry_algebra, CampaignConfig, PointInput};
use orbitscope::isotropic::{classify_isotropic_report, Duality, IsotropicPoint};
use orbitscope::lie::{grassmann_codim_table, isotropic_codim_table, CodimRow};
use orbitscope::numeric::{Field, TolerancePolicy};
use orbitscope::rng::stream;
use orbitscope::slice::{build_slice_chart, density_probe};
use orbitscope::{Error, Result};

#[derive(Parser)]
#[command(name = "orbitscope", version, about = "Orbits of symmetric subgroups on Grassmannians")]
struct Cli {
    /// Relative tolerance
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_rel: f64,
    /// Absolute tolerance floor
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_abs: f64,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = FieldArg::Float)]
    field: FieldArg,
    /// Write the result here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    Float,
    Rational,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Json,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Orbit label of a subspace or maximal isotropic point
    Classify { input: Option<PathBuf> },
    /// Zero-locus verdicts of sigma_k for every k
    Sigma { input: Option<PathBuf> },
    /// Isotropic label with the Hodge verdict and parity cross-check
    IsoClassify { input: Option<PathBuf> },
    /// Slice chart summary at a point
    Slice {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        round_trips: usize,
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// Formula versus Lie-algebra codimension for every orbit
    CodimTable {
        #[arg(long, requires_all = ["q", "i"], conflicts_with = "n")]
        p: Option<usize>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        i: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Both classes when absent
        #[arg(long, value_enum, requires = "n")]
        duality: Option<DualityArg>,
        #[arg(long, value_enum, default_value_t = TableFormat::Json)]
        format: TableFormat,
    },
    /// Value and gradient of the top section near a point
    DensityProbe {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Seeded verification campaign from a config file
    Campaign { input: Option<PathBuf> },
}

#[derive(Clone, Copy, ValueEnum)]
enum DualityArg {
    SelfDual,
    AntiSelfDual,
}

impl From<DualityArg> for Duality {
    fn from(d: DualityArg) -> Self {
        match d {
            DualityArg::SelfDual => Duality::SelfDual,
            DualityArg::AntiSelfDual => Duality::AntiSelfDual,
        }
    }
}

fn read_input(path: &Option<PathBuf>) -> Result<String> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => text = std::fs::read_to_string(p)?,
        _ => {
            std::io::stdin().read_to_string(&mut text)?;
        }
    }
    Ok(text)
}

fn pretty(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

/// The label object with the decision margin added.
fn classify_point<T: Field>(point: &PointInput, tol: &TolerancePolicy) -> Result<Value> {
    let (mut label, margin) = match point {
        PointInput::Subspace(d) => {
            let (label, report) = classify_report(&d.build::<T>(tol)?, tol)?;
            (serde_json::to_value(label)?, report.smallest_nonzero)
        }
        PointInput::Isotropic(d) => {
            let report = classify_isotropic_report(&d.build::<T>(tol)?, tol)?;
            (serde_json::to_value(report.label)?, report.margin)
        }
    };
    label["margin"] = json!(margin);
    Ok(label)
}

fn iso_classify_point<T: Field>(point: &PointInput, tol: &TolerancePolicy) -> Result<Value> {
    match point {
        PointInput::Isotropic(d) => Ok(serde_json::to_value(classify_isotropic_report(&d.build::<T>(tol)?, tol)?)?),
        PointInput::Subspace(_) => Err(Error::Invalid("iso-classify needs an isotropic point".into())),
    }
}

fn sigma_point<T: Field>(point: &PointInput, tol: &TolerancePolicy) -> Result<Value> {
    let restriction = match point {
        PointInput::Subspace(d) => restrict_form(&d.build::<T>(tol)?),
        PointInput::Isotropic(d) => {
            let v: IsotropicPoint<T> = d.build(tol)?;
            v.real_restriction()
        }
    };
    let mut out = Vec::new();
    for k in 1..=restriction.nrows() {
        let verdict = zero_verdict_from_restriction(&restriction, k, tol)?;
        let section = gram_determinant_form(&restriction, k)?.doc();
        out.push(json!({ "verdict": verdict, "section": section }));
    }
    Ok(Value::Array(out))
}

fn markdown(rows: &[CodimRow]) -> String {
    let mut s = String::from("| label | duality | formula | lie | match |\n|---|---|---|---|---|\n");
    for r in rows {
        let d = r.duality.map_or("-".to_string(), |d| d.to_string());
        s += &format!(
            "| ({},{},{}) | {} | {} | {} | {} |\n",
            r.r, r.s, r.nu, d, r.formula, r.lie, r.matched
        );
    }
    s
}

fn float_only(field: FieldArg, what: &str) -> Result<()> {
    if field == FieldArg::Rational {
        return Err(Error::Invalid(format!("{what} runs in floating point only")));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<String> {
    let tol = TolerancePolicy {
        relative_epsilon: cli.tol_rel,
        absolute_floor: cli.tol_abs,
    };
    let rational = cli.field == FieldArg::Rational;
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Classify { input } => {
            let point = PointInput::parse(&read_input(input)?)?;
            let v = if rational {
                classify_point::<BigRational>(&point, &tol)?
            } else {
                classify_point::<f64>(&point, &tol)?
            };
            pretty(&v)
        }
        Command::IsoClassify { input } => {
            let point = PointInput::parse(&read_input(input)?)?;
            let v = if rational {
                iso_classify_point::<BigRational>(&point, &tol)?
            } else {
                iso_classify_point::<f64>(&point, &tol)?
            };
            pretty(&v)
        }
        Command::Sigma { input } => {
            let point = PointInput::parse(&read_input(input)?)?;
            let v = if rational {
                sigma_point::<BigRational>(&point, &tol)?
            } else {
                sigma_point::<f64>(&point, &tol)?
            };
            pretty(&v)
        }
        Command::Slice {
            input,
            round_trips,
            points,
        } => {
            float_only(cli.field, "slice")?;
            let center = PointInput::parse(&read_input(input)?)?.center(&tol)?;
            let h = symmetry_algebra(&center, &tol)?;
            let mut rng = stream(seed, 0);
            let chart = build_slice_chart(&center, &h, 0.5, &tol, &mut rng)?;
            pretty(&chart.summary(*round_trips, *points, &mut rng))
        }
        Command::DensityProbe { input, points } => {
            float_only(cli.field, "density-probe")?;
            let center = PointInput::parse(&read_input(input)?)?.center(&tol)?;
            let h = symmetry_algebra(&center, &tol)?;
            let mut rng = stream(seed, 0);
            pretty(&density_probe(&center, &h, *points, &tol, &mut rng)?)
        }
        Command::CodimTable {
            p,
            q,
            i,
            n,
            duality,
            format,
        } => {
            let rows = match (p, q, i, n) {
                (Some(p), Some(q), Some(i), None) => {
                    if rational {
                        grassmann_codim_table::<BigRational>(*p, *q, *i, &tol)?
                    } else {
                        grassmann_codim_table::<f64>(*p, *q, *i, &tol)?
                    }
                }
                (None, None, None, Some(n)) => {
                    let classes = match duality {
                        Some(d) => vec![Duality::from(*d)],
                        None => vec![Duality::SelfDual, Duality::AntiSelfDual],
                    };
                    let mut rows = Vec::new();
                    for d in classes {
                        rows.extend(if rational {
                            isotropic_codim_table::<BigRational>(*n, d, &tol)?
                        } else {
                            isotropic_codim_table::<f64>(*n, d, &tol)?
                        });
                    }
                    rows
                }
                _ => return Err(Error::Invalid("give either --p --q --i or --n".into())),
            };
            match format {
                TableFormat::Json => pretty(&rows),
                TableFormat::Markdown => Ok(markdown(&rows)),
            }
        }
        Command::Campaign { input } => {
            float_only(cli.field, "campaign")?;
            let mut cfg: CampaignConfig =
                serde_json::from_str(&read_input(input)?).map_err(|e| Error::Parse(format!("campaign config: {e}")))?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            cfg.threads = cli.threads;
            let report = run_campaign(&cfg)?;
            if !report.passed {
                return Err(Error::Consistency(report.to_json()));
            }
            Ok(report.to_json())
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => writeln!(std::io::stdout(), "{text}")?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|text| emit(&cli, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Consistency(report)) if matches!(cli.command, Command::Campaign { .. }) => {
            // a failing campaign still writes its report
            let _ = emit(&cli, &report);
            eprintln!("campaign reported failures");
            ExitCode::from(1)
        }
        Err(e) if e.is_ambiguity() => {
            eprintln!("ambiguous: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

//! Command-line surface: seeded path simulation, jump-set decomposition,
//! counting-measure evaluation, integration, and Monte-Carlo verification.
//!
//! Exit codes: 0 on success (and on a passing verification), 1 when a
//! verification fails its thresholds, 2 on malformed inputs or invalid
//! configuration, with a diagnostic on standard error. Every output is a
//! pure function of the inputs and the seed; `--threads` never changes a
//! byte.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use ladlag::{
    exhaust_global, exhaust_restricted, integrate, measure, par, verify_compound_mean,
    verify_poisson_law, BorelSet, Integrand, Integration, ProductSet, RegulatedPath, ReportJson,
    SimConfig, StoppingSequence,
};

#[derive(Parser)]
#[command(
    name = "ladlag",
    version,
    about = "Jump analytics for regulated trajectories"
)]
struct Cli {
    /// Override the seed of a simulation config; seeds the selftest suite.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file, or `-` for standard output.
    #[arg(long, global = true, default_value = "-")]
    out: String,

    /// Worker count for ensemble subcommands; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an ensemble of paths as JSON lines.
    Simulate {
        /// Simulation config JSON file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Decompose one path: layered cells plus the global (and optionally a
    /// restricted) stopping sequence.
    Decompose {
        /// Path JSON file.
        #[arg(long)]
        path: PathBuf,
        /// Borel set JSON file for a restricted sequence.
        #[arg(long)]
        set: Option<PathBuf>,
    },
    /// Count jumps of each path inside a product set; CSV out.
    Measure {
        /// Paths as JSON lines.
        #[arg(long)]
        paths: PathBuf,
        /// Product set JSON file.
        #[arg(long)]
        product_set: PathBuf,
    },
    /// Integrate a built-in function against each path's jump measure; CSV out.
    Integrate {
        /// Paths as JSON lines.
        #[arg(long)]
        paths: PathBuf,
        /// Borel set JSON file (must be zero-separated).
        #[arg(long)]
        set: PathBuf,
        /// Integrand: one|x|x2|abs.
        #[arg(long, value_parser = parse_integrand)]
        function: Integrand,
        /// Right end of the time window [0, t].
        #[arg(long)]
        t: f64,
    },
    /// Monte-Carlo verification against closed forms.
    Verify {
        #[command(subcommand)]
        law: VerifyCmd,
    },
    /// Run the oracle-equivalence property suite.
    Selftest {
        /// Sampled cases per property.
        #[arg(long, default_value_t = 200)]
        cases: u64,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Counting process against the Poisson law: mean, chi-square
    /// goodness of fit, and increment checks.
    Poisson {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// Cumulative jump functional against its closed-form mean.
    Compound {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long, value_parser = parse_integrand)]
        function: Integrand,
        #[arg(long)]
        t: f64,
    },
}

fn parse_integrand(s: &str) -> Result<Integrand, String> {
    s.parse::<Integrand>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Simulate { ref config } => {
            let cfg = load_config(config, cli.seed)?;
            let lines = par::map_blocks(cfg.n_paths, cli.threads, |range| {
                let mut block = String::new();
                for i in range {
                    let path = ladlag::generate_path(&cfg, i);
                    let js = serde_json::to_string(&path).expect("paths serialize");
                    block.push_str(&js);
                    block.push('\n');
                }
                block
            });
            write_out(&cli.out, &lines.concat())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Decompose { ref path, ref set } => {
            let path: RegulatedPath = read_json(path, "path file")?;
            let restricted = match set {
                Some(file) => {
                    let set: BorelSet = read_json(file, "set file")?;
                    Some(exhaust_restricted(&path, &set).map_err(|e| e.to_string())?)
                }
                None => None,
            };
            #[derive(Serialize)]
            struct Decomposition {
                layered: ladlag::LayeredDecomposition,
                global: StoppingSequence,
                #[serde(skip_serializing_if = "Option::is_none")]
                restricted: Option<StoppingSequence>,
            }
            let out = Decomposition {
                layered: path.layered_decomposition(),
                global: exhaust_global(&path),
                restricted,
            };
            write_out(&cli.out, &pretty_json(&out)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Measure {
            ref paths,
            ref product_set,
        } => {
            let paths = read_paths_jsonl(paths)?;
            let pset: ProductSet = read_json(product_set, "product set file")?;
            let set_id = pset.id.clone().unwrap_or_else(|| file_stem(product_set));
            let t = pset.t_max();
            let rows = csv_rows(&paths, cli.threads, |path| {
                Ok((measure(path, &pset).count.to_string(), String::new()))
            })?;
            write_out(&cli.out, &csv_table(&rows, t, &set_id))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Integrate {
            ref paths,
            ref set,
            function,
            t,
        } => {
            let paths = read_paths_jsonl(paths)?;
            let borel: BorelSet = read_json(set, "set file")?;
            let set_id = file_stem(set);
            let rows = csv_rows(&paths, cli.threads, |path| {
                let Integration {
                    value, certificate, ..
                } = integrate(path, |_, x| function.apply(x), t, &borel)
                    .map_err(|e| e.to_string())?;
                Ok((value.to_string(), certificate.to_string()))
            })?;
            write_out(&cli.out, &csv_table(&rows, t, &set_id))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { ref law } => {
            let report = match law {
                VerifyCmd::Poisson { config, set, t } => {
                    let cfg = load_config(config, cli.seed)?;
                    let set: BorelSet = read_json(set, "set file")?;
                    let gof = verify_poisson_law(&cfg, &set, *t, cli.threads)
                        .map_err(|e| e.to_string())?;
                    ReportJson::from(&gof)
                }
                VerifyCmd::Compound {
                    config,
                    set,
                    function,
                    t,
                } => {
                    let cfg = load_config(config, cli.seed)?;
                    let set: BorelSet = read_json(set, "set file")?;
                    let report =
                        verify_compound_mean(&cfg, &set, |x| function.apply(x), *t, cli.threads)
                            .map_err(|e| e.to_string())?;
                    ReportJson::from(&report)
                }
            };
            write_out(&cli.out, &pretty_json(&report)?)?;
            Ok(if report.verdict.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::Selftest { cases } => {
            let seed = cli.seed.unwrap_or(0);
            let outcomes = ladlag::selftest::run(seed, cases);
            let mut text = String::new();
            let mut all_pass = true;
            for o in &outcomes {
                let status = if o.passed() { "PASS" } else { "FAIL" };
                all_pass &= o.passed();
                writeln!(
                    text,
                    "property {}: {status} ({} cases, {} failures)",
                    o.name, o.cases, o.failures
                )
                .expect("writing to a string cannot fail");
            }
            write_out(&cli.out, &text)?;
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn load_config(file: &Path, seed_override: Option<u64>) -> Result<SimConfig, String> {
    let mut cfg: SimConfig = read_json(file, "config file")?;
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn read_json<T: DeserializeOwned>(file: &Path, what: &str) -> Result<T, String> {
    let text = fs::read_to_string(file)
        .map_err(|e| format!("cannot read {what} {}: {e}", file.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("malformed {what} {}: {e}", file.display()))
}

fn read_paths_jsonl(file: &Path) -> Result<Vec<RegulatedPath>, String> {
    let text = fs::read_to_string(file)
        .map_err(|e| format!("cannot read paths file {}: {e}", file.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| {
                format!(
                    "malformed path on line {} of {}: {e}",
                    i + 1,
                    file.display()
                )
            })
        })
        .collect()
}

/// Per-path CSV cells (value, certificate), computed block-parallel but
/// emitted in path order.
fn csv_rows<F>(
    paths: &[RegulatedPath],
    threads: usize,
    row: F,
) -> Result<Vec<(String, String)>, String>
where
    F: Fn(&RegulatedPath) -> Result<(String, String), String> + Sync,
{
    let blocks = par::map_blocks(paths.len() as u64, threads, |range| {
        range
            .map(|i| row(&paths[i as usize]))
            .collect::<Result<Vec<_>, String>>()
    });
    let mut rows = Vec::with_capacity(paths.len());
    for b in blocks {
        rows.extend(b?);
    }
    Ok(rows)
}

fn csv_table(rows: &[(String, String)], t: f64, set_id: &str) -> String {
    let mut out = String::from("path_id,t,set_id,value,certificate\n");
    for (i, (value, certificate)) in rows.iter().enumerate() {
        writeln!(out, "{i},{t},{set_id},{value},{certificate}")
            .expect("writing to a string cannot fail");
    }
    out
}

fn pretty_json<T: Serialize>(value: &T) -> Result<String, String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    Ok(text)
}

fn file_stem(file: &Path) -> String {
    file.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "set".to_string())
}

fn write_out(out: &str, content: &str) -> Result<(), String> {
    if out == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        lock.write_all(content.as_bytes())
            .and_then(|()| lock.flush())
            .map_err(|e| format!("cannot write to stdout: {e}"))
    } else {
        fs::write(out, content).map_err(|e| format!("cannot write {out}: {e}"))
    }
}

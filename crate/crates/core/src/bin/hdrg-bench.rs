use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hdrg::bench::config::{parse_config_file, Settings};
use hdrg::bench::{
    cantor_suite, curves, estimate_threshold, hashing_bound, l_star, percolation_experiment, run_sweep, write_csv,
    Format, LStar, TrialStats,
};
use hdrg::{Error, Result};

#[derive(Parser)]
#[command(name = "hdrg-bench", version, about = "Monte Carlo benchmarks for HDRG decoders on D(Z_d) toric codes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Logical error rates over an (L, p) grid.
    Run(Common),
    /// Grid plus the pairwise-crossing threshold estimate.
    Threshold(Common),
    /// Smallest L in the sweep with p_L + 2 sigma < p.
    Lstar(Common),
    /// Hashing bound for the given d.
    Hashing(Common),
    /// Wrap probability of the sparsified defect graph (d = 3).
    Percolation(Common),
    /// Deterministic decoder x bundle regression matrix.
    Cantor(Common),
}

#[derive(Args, Default)]
struct Common {
    /// File of key=value lines using the flag names as keys.
    #[arg(long)]
    config: Option<String>,
    #[arg(long, value_name = "zd|phi-lambda")]
    model: Option<String>,
    #[arg(long, value_name = "mwm|bh|abcb|ed")]
    decoder: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long = "L", value_name = "INT[,INT...]")]
    l: Option<String>,
    #[arg(long, value_name = "FLOAT[,FLOAT...]")]
    p: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    rounds: Option<String>,
    #[arg(long, value_name = "perfect|faulty")]
    measurement: Option<String>,
    #[arg(long, value_name = "on|off")]
    shortcuts: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long = "dm1-factor", value_name = "on|off")]
    dm1_factor: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_name = "csv|json")]
    format: Option<String>,
}

impl Common {
    fn settings(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{path}: {e}")))?;
                parse_config_file(&text)?
            }
            None => Default::default(),
        };
        let flags = [
            ("model", &self.model),
            ("decoder", &self.decoder),
            ("d", &self.d),
            ("L", &self.l),
            ("p", &self.p),
            ("trials", &self.trials),
            ("rounds", &self.rounds),
            ("measurement", &self.measurement),
            ("shortcuts", &self.shortcuts),
            ("lambda", &self.lambda),
            ("dm1-factor", &self.dm1_factor),
            ("seed", &self.seed),
            ("out", &self.out),
            ("format", &self.format),
        ];
        Settings::from_layers(
            file.iter().map(|(k, v)| (k.as_str(), v.as_str())),
            flags.iter().filter_map(|(k, v)| v.as_deref().map(|v| (*k, v))),
        )
    }
}

fn emit(s: &Settings, text: String) -> Result<()> {
    match &s.out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Config(format!("{path}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn rows_text(s: &Settings, rows: &[TrialStats], extra: Option<serde_json::Value>) -> String {
    match s.format {
        Format::Csv => write_csv(rows),
        Format::Json => {
            let v = match extra {
                Some(e) => json!({ "rows": rows, "estimate": e }),
                None => json!(rows),
            };
            serde_json::to_string_pretty(&v).unwrap() + "\n"
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Run(c) => {
            let s = c.settings()?;
            let rows = run_sweep(&s.base, &s.ls, &s.ps)?;
            emit(&s, rows_text(&s, &rows, None))?;
        }
        Cmd::Threshold(c) => {
            let s = c.settings()?;
            let rows = run_sweep(&s.base, &s.ls, &s.ps)?;
            let est = estimate_threshold(&curves(&rows))?;
            eprintln!("p_c = {:.5} (spread {:.5})", est.p_c, est.spread);
            emit(&s, rows_text(&s, &rows, Some(serde_json::to_value(&est).unwrap())))?;
        }
        Cmd::Lstar(c) => {
            let s = c.settings()?;
            let (found, stats) = match l_star(s.ps[0], &s.base, &s.ls)? {
                LStar::Found { l, stats } => (Some(l), stats),
                LStar::Exhausted { largest, stats } => {
                    eprintln!("no L in the sweep reaches p_L < p; L* > {largest}");
                    (None, stats)
                }
            };
            if let Some(l) = found {
                eprintln!("L* = {l}");
            }
            emit(&s, rows_text(&s, &stats, Some(json!({ "l_star": found }))))?;
        }
        Cmd::Hashing(c) => {
            let s = c.settings()?;
            let h = hashing_bound(s.base.d);
            let text = match s.format {
                Format::Csv => format!("d,hashing_bound\n{},{}\n", s.base.d, h),
                Format::Json => format!("{}\n", json!({ "d": s.base.d, "hashing_bound": h })),
            };
            emit(&s, text)?;
        }
        Cmd::Percolation(c) => {
            let s = c.settings()?;
            let pts = percolation_experiment(&s.ps, &s.ls, s.base.trials, s.base.seed)?;
            let mut cs: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
            for q in &pts {
                match cs.iter_mut().find(|c| c.0 == q.l) {
                    Some(c) => c.1.push((q.p, q.probability)),
                    None => cs.push((q.l, vec![(q.p, q.probability)])),
                }
            }
            if cs.len() >= 2 {
                match estimate_threshold(&cs) {
                    Ok(e) => eprintln!("crossing p = {:.5} (spread {:.5})", e.p_c, e.spread),
                    Err(e) => eprintln!("{e}"),
                }
            }
            let text = match s.format {
                Format::Csv => {
                    let mut t = String::from("p,L,trials,wraps,probability\n");
                    for q in &pts {
                        t.push_str(&format!("{},{},{},{},{}\n", q.p, q.l, q.trials, q.wraps, q.probability));
                    }
                    t
                }
                Format::Json => serde_json::to_string_pretty(&pts).unwrap() + "\n",
            };
            emit(&s, text)?;
        }
        Cmd::Cantor(c) => {
            let s = c.settings()?;
            let cells = cantor_suite()?;
            let text = match s.format {
                Format::Csv => {
                    let mut t = String::from("decoder,shortcuts,regime,level,L,expected,observed,ok\n");
                    let word = |f: bool| if f { "logical_error" } else { "success" };
                    for c in &cells {
                        t.push_str(&format!(
                            "{},{},{},{},{},{},{},{}\n",
                            c.strategy.name(),
                            if c.shortcuts { "on" } else { "off" },
                            c.regime.name(),
                            c.level,
                            c.l,
                            word(c.expect_failure),
                            word(c.failed),
                            c.ok()
                        ));
                    }
                    t
                }
                Format::Json => serde_json::to_string_pretty(&cells).unwrap() + "\n",
            };
            emit(&s, text)?;
            if !cells.iter().all(|c| c.ok()) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

//! Command-line shell: parse arguments, load and patch the config, run the
//! sweep, and write CSV to a file or stdout.
//!
//! Overrides are applied to the parsed TOML document before it is
//! deserialized, so `--override pgd.max_iters=50` behaves exactly as if the
//! file said so. The `AIRELM_DATA_DIR` environment variable names the
//! directory that relative dataset paths resolve against; it defaults to
//! `data`.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use airelm::config::ExperimentConfig;
use airelm::{csvio, runner};
use airelm_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "airelm",
    about = "Sweep runner for the over-the-air learning simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config and emit CSV records.
    Run {
        /// Path to the TOML sweep description.
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace the config's seed list with this single seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Patch one config value by dotted path, e.g. pgd.max_iters=50 or
        /// n_r=[16,64]. May be given multiple times; later wins.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

/// Parses the value side of an override as TOML; anything that does not
/// parse (bare words, paths) is taken as a string.
fn parse_override_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies `key=value` to a TOML document. Dotted path segments index
/// tables by name and arrays by number; missing intermediate tables are
/// created, missing array elements are an error.
fn apply_override(root: &mut toml::Value, spec: &str) -> Result<()> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| {
        Error::InvalidArgument(format!("override '{spec}' is not of the form key=value"))
    })?;
    let key = key.trim();
    let value = parse_override_value(raw.trim());
    let parts: Vec<&str> = key.split('.').collect();
    let (last, walk) = parts.split_last().expect("split always yields one part");

    let mut cursor = root;
    for part in walk {
        cursor = if let Ok(index) = part.parse::<usize>() {
            cursor
                .as_array_mut()
                .and_then(|a| a.get_mut(index))
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "override '{key}': no array element {part}"
                    ))
                })?
        } else {
            cursor
                .as_table_mut()
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "override '{key}': '{part}' does not name a table"
                    ))
                })?
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        };
    }
    if let Ok(index) = last.parse::<usize>() {
        let array = cursor.as_array_mut().ok_or_else(|| {
            Error::InvalidArgument(format!("override '{key}': parent is not an array"))
        })?;
        let slot = array.get_mut(index).ok_or_else(|| {
            Error::InvalidArgument(format!("override '{key}': no array element {index}"))
        })?;
        *slot = value;
    } else {
        cursor
            .as_table_mut()
            .ok_or_else(|| {
                Error::InvalidArgument(format!("override '{key}': parent is not a table"))
            })?
            .insert(last.to_string(), value);
    }
    Ok(())
}

fn load_config(path: &PathBuf, overrides: &[String], seed: Option<u64>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut document: toml::Value = text
        .parse()
        .map_err(|e| Error::Format(format!("config {}: {e}", path.display())))?;
    for spec in overrides {
        apply_override(&mut document, spec)?;
    }
    let mut config: ExperimentConfig = document
        .try_into()
        .map_err(|e| Error::Format(format!("config {}: {e}", path.display())))?;
    if let Some(seed) = seed {
        config.seeds = vec![seed];
    }
    Ok(config)
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            overrides,
        } => {
            let config = load_config(&config, &overrides, seed)?;
            let data_root = std::env::var_os("AIRELM_DATA_DIR")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("data"));
            let records = runner::run(&config, &data_root)?;
            match out {
                Some(path) => csvio::write_csv(&records, &path)?,
                None => csvio::write_csv_to(std::io::stdout().lock(), &records)?,
            }
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = real_main() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

//! Command-line front end: run experiment configs, run built-in presets,
//! and render plots from report CSVs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use occlusim::experiment::config::ExperimentConfig;
use occlusim::experiment::presets::{preset_names, run_preset};
use occlusim::experiment::run::run_experiment;
use occlusim::plot::{render_plot, PlotSpec};

const USAGE: &str = "\
occlusim: occlusion-aided non-line-of-sight imaging toolkit

USAGE:
    occlusim run <config.json> [--out DIR]
    occlusim preset <name> [--out DIR] [--seed S] [--full-size]
    occlusim plot <report.csv> <plotspec.json> [--out FILE]
    occlusim presets

The default output directory is $OCCLUSIM_OUT (falling back to ./out).
Preset names:
";

fn default_out_dir() -> PathBuf {
    std::env::var_os("OCCLUSIM_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

struct Args {
    positional: Vec<String>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    full_size: bool,
}

fn parse_args(mut argv: std::env::Args) -> Result<Args, String> {
    argv.next(); // program name
    let mut args = Args { positional: Vec::new(), out: None, seed: None, full_size: false };
    while let Some(arg) = argv.next() {
        match arg.as_str() {
            "--out" => {
                let v = argv.next().ok_or("--out needs a path")?;
                args.out = Some(PathBuf::from(v));
            }
            "--seed" => {
                let v = argv.next().ok_or("--seed needs a value")?;
                args.seed = Some(v.parse::<u64>().map_err(|e| format!("bad seed: {e}"))?);
            }
            "--full-size" => args.full_size = true,
            "--help" | "-h" => {
                args.positional.insert(0, "help".into());
                return Ok(args);
            }
            other if other.starts_with("--") => return Err(format!("unknown flag {other}")),
            other => args.positional.push(other.to_string()),
        }
    }
    Ok(args)
}

fn cmd_run(config_path: &str, out: Option<PathBuf>) -> Result<(), String> {
    let json = std::fs::read_to_string(config_path)
        .map_err(|e| format!("cannot read {config_path}: {e}"))?;
    let config = ExperimentConfig::from_json(&json).map_err(|e| e.to_string())?;
    let outcome = run_experiment(&config).map_err(|e| e.to_string())?;
    let dir = out.unwrap_or_else(|| default_out_dir().join(&config.name));
    outcome.write_to_dir(&config, &dir).map_err(|e| e.to_string())?;
    println!(
        "wrote {} records and {} artifacts to {}",
        outcome.report.rows.len(),
        outcome.report.artifacts.len() + 2,
        dir.display()
    );
    Ok(())
}

fn cmd_preset(
    name: &str,
    out: Option<PathBuf>,
    seed: Option<u64>,
    full_size: bool,
) -> Result<(), String> {
    let master_seed = seed.unwrap_or(7);
    let outcome = run_preset(name, master_seed, full_size).map_err(|e| e.to_string())?;
    let dir = out.unwrap_or_else(|| default_out_dir().join(name));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    outcome.report.write_to_dir(&dir).map_err(|e| e.to_string())?;
    std::fs::write(dir.join("timing.csv"), outcome.timing_csv()).map_err(|e| e.to_string())?;
    if let Ok(config) = occlusim::experiment::presets::preset_config(name, master_seed, full_size)
    {
        std::fs::write(dir.join("config.json"), config.to_json()).map_err(|e| e.to_string())?;
    }
    println!(
        "preset {name}: {} records, {} artifacts -> {}",
        outcome.report.rows.len(),
        outcome.report.artifacts.len() + 2,
        dir.display()
    );
    Ok(())
}

fn cmd_plot(report: &str, spec_path: &str, out: Option<PathBuf>) -> Result<(), String> {
    let csv =
        std::fs::read_to_string(report).map_err(|e| format!("cannot read {report}: {e}"))?;
    let spec_json = std::fs::read_to_string(spec_path)
        .map_err(|e| format!("cannot read {spec_path}: {e}"))?;
    let spec: PlotSpec =
        serde_json::from_str(&spec_json).map_err(|e| format!("bad plot spec: {e}"))?;
    let svg = render_plot(&csv, &spec).map_err(|e| e.to_string())?;
    let out_path = out.unwrap_or_else(|| Path::new(report).with_extension("svg"));
    std::fs::write(&out_path, svg).map_err(|e| e.to_string())?;
    println!("wrote {}", out_path.display());
    Ok(())
}

fn main() -> ExitCode {
    let args = match parse_args(std::env::args()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let command = args.positional.first().map(String::as_str).unwrap_or("help");
    let result = match (command, args.positional.len()) {
        ("run", 2) => cmd_run(&args.positional[1], args.out),
        ("preset", 2) => cmd_preset(&args.positional[1], args.out, args.seed, args.full_size),
        ("plot", 3) => cmd_plot(&args.positional[1], &args.positional[2], args.out),
        ("presets", 1) => {
            for name in preset_names() {
                println!("{name}");
            }
            Ok(())
        }
        _ => {
            eprint!("{USAGE}");
            for name in preset_names() {
                eprintln!("    {name}");
            }
            return if command == "help" { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use abdeflect::scenario::{parse_config, run_scenario, Params, Scenario, ScenarioName, PARAMETERS};

const USAGE: &str = "usage: abdeflect <scenario> [--key=value ...] [--config=FILE] [--out=DIR]
       abdeflect --help";

enum Failure {
    Usage(String),
    Runtime(String),
}

fn help() -> String {
    let mut s = format!("{USAGE}\n\nscenarios:\n");
    for n in ScenarioName::ALL {
        s.push_str(&format!("  {n}\n"));
    }
    s.push_str("\nparameters (default):\n");
    for (k, v, what) in PARAMETERS {
        s.push_str(&format!("  --{k}={v:<10} {what}\n"));
    }
    s.push_str("\nenvironment:\n  ABDEFLECT_THREADS  worker thread count\n  RUST_LOG           log filter\n");
    s
}

fn parse_args(args: &[String]) -> Result<Scenario, Failure> {
    let mut name = None;
    let mut config = None;
    let mut out = PathBuf::from(".");
    let mut overrides = Vec::new();
    for arg in args {
        if let Some(flag) = arg.strip_prefix("--") {
            let (k, v) = flag
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("flag `{arg}` must have the form --key=value")))?;
            match k {
                "config" => config = Some(PathBuf::from(v)),
                "out" => out = PathBuf::from(v),
                _ => overrides.push((k.to_owned(), v.to_owned())),
            }
        } else if name.is_none() {
            name = Some(arg.parse::<ScenarioName>().map_err(|e| Failure::Usage(e.to_string()))?);
        } else {
            return Err(Failure::Usage(format!("unexpected argument `{arg}`")));
        }
    }
    let name = name.ok_or_else(|| Failure::Usage("missing scenario name".into()))?;
    let mut params = Params::default();
    if let Some(path) = config {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", path.display())))?;
        for (k, v) in parse_config(&text).map_err(|e| Failure::Usage(e.to_string()))? {
            params.set_str(&k, &v).map_err(|e| Failure::Usage(e.to_string()))?;
        }
    }
    for (k, v) in overrides {
        params.set_str(&k, &v).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(Scenario { name, params, output_dir: out })
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("ABDEFLECT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Usage(format!("ABDEFLECT_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args.iter().any(|a| a == "--help" || a == "-h") {
        print!("{}", help());
        return if args.is_empty() { ExitCode::from(2) } else { ExitCode::SUCCESS };
    }
    let scenario = match configure_threads().and_then(|_| parse_args(&args)) {
        Ok(s) => s,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n{USAGE}");
            return ExitCode::from(2);
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
    };
    match run_scenario(&scenario) {
        Ok(report) => {
            print!("{}", report.render());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                eprint!("oracle tolerance breached:\n{}", report.discrepancy_table());
                ExitCode::from(1)
            }
        }
        Err(e @ abdeflect::Error::InvalidParam { .. }) => {
            eprintln!("error: {e}\n{USAGE}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

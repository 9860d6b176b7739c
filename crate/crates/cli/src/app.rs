//! Command-line surface: the clap parser is generated from the parameter
//! schema, so flags, config files and help text cannot drift apart.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Arg, ArgMatches, Command};

use crate::config::{ConfigError, ConfigFile, RunConfig, COMMANDS, GLOBAL_PARAMS, SEED_ENV};
use crate::run::{run, RunError};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CRASH: i32 = 3;

pub fn command() -> Command {
    let mut cmd = Command::new("ftqlab")
        .about("Seeded fault-tolerance experiments with reproducible CSV and JSON output")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("key = value config file with [subcommand] sections; flags override it"),
        );
    for p in GLOBAL_PARAMS {
        cmd = cmd.arg(
            Arg::new(p.key)
                .long(p.key)
                .global(true)
                .value_name(p.kind.value_name())
                .help(p.help),
        );
    }
    for c in COMMANDS {
        let mut sub = Command::new(c.name).about(c.about);
        for p in c.params {
            let help = match p.default {
                Some(d) => format!("{} [default: {d}]", p.help),
                None => format!("{} [required]", p.help),
            };
            sub = sub.arg(Arg::new(p.key).long(p.key).value_name(p.kind.value_name()).help(help));
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn flag_values(m: &ArgMatches, keys: impl Iterator<Item = &'static str>) -> Vec<(String, String)> {
    keys.filter_map(|k| m.get_one::<String>(k).map(|v| (k.to_string(), v.clone())))
        .collect()
}

/// Parses arguments into a run configuration.
pub fn parse_args<I, T>(args: I, env_seed: Option<&str>) -> Result<RunConfig, RunError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let m = command()
        .try_get_matches_from(args)
        .map_err(|e| ConfigError::Usage(e.to_string()))?;
    resolve_matches(&m, env_seed)
}

fn resolve_matches(m: &ArgMatches, env_seed: Option<&str>) -> Result<RunConfig, RunError> {
    let (name, sub) = m.subcommand().expect("subcommand required");
    let spec = COMMANDS
        .iter()
        .find(|c| c.name == name)
        .expect("generated from COMMANDS");
    let file = match m.get_one::<String>("config") {
        Some(path) => Some(ConfigFile::load(&PathBuf::from(path))?),
        None => None,
    };
    let mut flags = flag_values(m, GLOBAL_PARAMS.iter().map(|p| p.key));
    flags.extend(flag_values(sub, spec.params.iter().map(|p| p.key)));
    Ok(RunConfig::resolve(name, file.as_ref(), &flags, env_seed)?)
}

fn execute(cfg: &RunConfig) -> Result<bool, RunError> {
    if let Some(n) = cfg.threads {
        // A second initialisation in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = run(cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.text)?,
        None => std::io::stdout().write_all(outcome.text.as_bytes())?,
    }
    let mut err = std::io::stderr().lock();
    for s in &outcome.summaries {
        writeln!(err, "{s}")?;
    }
    Ok(outcome.passed)
}

/// Runs the binary: 0 when every acceptance predicate holds, 1 when one
/// fails, 2 on usage or configuration errors, 3 on I/O errors and crashes.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let m = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let result = resolve_matches(&m, env_seed.as_deref()).and_then(|cfg| execute(&cfg));
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

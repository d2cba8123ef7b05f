use std::path::{Path, PathBuf};

use clap::Args;
use ipricing::model::{configuration_space, summarize, AnalyzeError, SubscriptionConstraints, DEFAULT_ENUMERATION_CAP};
use ipricing::modeler::{parse, parse_unchecked, write_log, ParseError};

use crate::{EXIT_DIAGNOSTICS, EXIT_OK, EXIT_PIPELINE};

#[derive(Args)]
pub struct AnalyzeArgs {
    file: PathBuf,
    /// JSON file with `dependsOn`, `excludes` and `standaloneAllowed`.
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// Largest number of candidate subscriptions to enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u64,
}

fn read(path: &Path) -> Result<String, u8> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_DIAGNOSTICS
    })
}

fn report_parse_error(path: &Path, e: &ParseError) {
    match e {
        ParseError::Syntax { .. } => eprintln!("{} {}: {e}", e.code(), path.display()),
        ParseError::Semantic(ledger) => {
            eprintln!("{} {}: {e}", e.code(), path.display());
            eprint!("{}", write_log(ledger));
        }
    }
}

pub fn validate(path: &Path) -> u8 {
    let text = match read(path) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let pricing = match parse_unchecked(&text) {
        Ok(p) => p,
        Err(e) => {
            report_parse_error(path, &e);
            return EXIT_DIAGNOSTICS;
        }
    };
    let ledger = ipricing::model::validate_model(&pricing);
    print!("{}", write_log(&ledger));
    if ledger.has_errors() {
        EXIT_DIAGNOSTICS
    } else {
        println!("valid: {}", path.display());
        EXIT_OK
    }
}

pub fn run(args: AnalyzeArgs) -> u8 {
    let text = match read(&args.file) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let pricing = match parse(&text) {
        Ok(p) => p,
        Err(e) => {
            report_parse_error(&args.file, &e);
            return EXIT_DIAGNOSTICS;
        }
    };
    let constraints = match &args.constraints {
        None => SubscriptionConstraints::default(),
        Some(path) => match read(path).map(|t| serde_json::from_str::<SubscriptionConstraints>(&t)) {
            Ok(Ok(c)) => c,
            Ok(Err(e)) => {
                eprintln!("error: {}: {e}", path.display());
                return EXIT_DIAGNOSTICS;
            }
            Err(code) => return code,
        },
    };
    let counts = summarize(&pricing);
    println!("plans: {}", counts.plans);
    println!("features: {}", counts.features);
    println!("usageLimits: {}", counts.usage_limits);
    println!("addOns: {}", counts.add_ons);
    match configuration_space(&pricing, &constraints, args.cap) {
        Ok(n) => {
            println!("configurationSpace: {n}");
            EXIT_OK
        }
        Err(e @ AnalyzeError::CapExceeded { .. }) => {
            eprintln!("{}: {e}", e.code());
            EXIT_PIPELINE
        }
        Err(e) => {
            eprintln!("{}: {e}", e.code());
            EXIT_DIAGNOSTICS
        }
    }
}

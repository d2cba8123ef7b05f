//! `score`: pairs prediction files with gold files by stem.
//!
//! A prediction is one of `<stem>.judgments.json` (reviewed judgments),
//! `<stem>.counts.json` (pre-tallied counts) or `<stem>.pricing.yml`
//! (judged against `<stem>.gold.json` from the gold directory), in that
//! order of preference. The first two stand alone; a pricing document
//! without a gold file, or a gold file without any prediction, is unmatched.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use ipricing::eval::{judge, CountsFile, GoldAnnotation, JudgmentsFile, Report, ScoreRow};
use ipricing::modeler::parse_unchecked;

use crate::{EXIT_OK, EXIT_PIPELINE, EXIT_UNMATCHED};

#[derive(Args)]
pub struct ScoreArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Text report destination; printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// CSV with one line per SaaS and category plus mean and median lines.
    #[arg(long)]
    rows: Option<PathBuf>,
    /// Write the draft judgments made for pricing documents here, for review.
    #[arg(long)]
    write_judgments: Option<PathBuf>,
}

const PRED_SUFFIXES: [&str; 3] = [".judgments.json", ".counts.json", ".pricing.yml"];
const GOLD_SUFFIX: &str = ".gold.json";

/// Files in `dir` ending in `suffix`, keyed by the stem before it.
fn by_stem(dir: &Path, suffix: &str) -> std::io::Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if let Some(stem) = name.strip_suffix(suffix) {
            out.insert(stem.to_string(), path.clone());
        }
    }
    Ok(out)
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn pricing_row(pred: &Path, gold: &Path, drafts: Option<&Path>, stem: &str) -> Result<ScoreRow, String> {
    let text = std::fs::read_to_string(pred).map_err(|e| format!("{}: {e}", pred.display()))?;
    let pricing = parse_unchecked(&text).map_err(|e| format!("{} {}: {e}", e.code(), pred.display()))?;
    let gold: GoldAnnotation = load_json(gold)?;
    let judgments = judge(&pricing, &gold);
    if let Some(dir) = drafts {
        let file = JudgmentsFile { saas: gold.saas.clone(), judgments: judgments.clone() };
        let path = dir.join(format!("{stem}.judgments.json"));
        std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(&path, serde_json::to_string_pretty(&file).expect("judgments serialize") + "\n"))
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(ScoreRow::from_judgments(gold.saas, &judgments))
}

fn collect(args: &ScoreArgs) -> Result<(Vec<ScoreRow>, Vec<PathBuf>), String> {
    let gold = by_stem(&args.gold, GOLD_SUFFIX).map_err(|e| format!("{}: {e}", args.gold.display()))?;
    let mut preds: BTreeMap<String, (usize, PathBuf)> = BTreeMap::new();
    for (rank, suffix) in PRED_SUFFIXES.iter().enumerate() {
        for (stem, path) in by_stem(&args.pred, suffix).map_err(|e| format!("{}: {e}", args.pred.display()))? {
            preds.entry(stem).or_insert((rank, path));
        }
    }
    let mut rows = Vec::new();
    let mut unmatched = Vec::new();
    for (stem, (rank, path)) in &preds {
        match rank {
            0 => rows.push(load_json::<JudgmentsFile>(path)?.into_row()),
            1 => rows.push(load_json::<CountsFile>(path)?.into_row()),
            _ => match gold.get(stem) {
                Some(g) => rows.push(pricing_row(path, g, args.write_judgments.as_deref(), stem)?),
                None => unmatched.push(path.clone()),
            },
        }
    }
    unmatched.extend(gold.iter().filter(|(stem, _)| !preds.contains_key(*stem)).map(|(_, p)| p.clone()));
    Ok((rows, unmatched))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(args: ScoreArgs) -> u8 {
    let (rows, unmatched) = match collect(&args) {
        Ok(found) => found,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PIPELINE;
        }
    };
    for path in &unmatched {
        eprintln!("unmatched: {}", path.display());
    }
    if rows.is_empty() {
        eprintln!("error: nothing to score");
        return EXIT_UNMATCHED;
    }
    let report = Report::new(rows);
    let written = write_or_print(args.report.as_deref(), &report.render_text())
        .and_then(|_| args.rows.as_deref().map_or(Ok(()), |p| write_or_print(Some(p), &report.render_csv())));
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_PIPELINE;
    }
    if unmatched.is_empty() {
        EXIT_OK
    } else {
        EXIT_UNMATCHED
    }
}

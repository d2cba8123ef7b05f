//! Prints the cleaned payload of an HTML file and its replay key.
//!
//! cargo run -p ipricing-core --example clean_page -- page.html [budget]

use ipricing::extract::payload_hash;
use ipricing::ingest::{clean_html, ByteHeuristic};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().expect("usage: clean_page <file.html> [budget]");
    let budget = args.next().map_or(1_000_000, |b| b.parse().expect("budget is a number"));
    let html = std::fs::read_to_string(&path).expect("readable file");
    match clean_html(&html, budget, &ByteHeuristic) {
        Ok(payload) => {
            println!("{}", payload.text);
            eprintln!(
                "key {} | {} tokens | {} tables | dropped {:.3}",
                payload_hash(&payload.text),
                payload.estimated_tokens,
                payload.retained_tables,
                payload.dropped_byte_share
            );
        }
        Err(e) => {
            eprintln!("{}: {e}", e.code());
            std::process::exit(1);
        }
    }
}

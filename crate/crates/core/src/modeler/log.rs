//! Plain-text rendering of a diagnostics ledger.

use crate::diagnostics::Ledger;

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// One line per entry: `SEVERITY CODE [scope/item] message — evidence`.
/// The evidence part is present only when the entry has evidence.
pub fn write_log(ledger: &Ledger) -> String {
    let mut out = String::new();
    for d in ledger.entries() {
        out.push_str(&format!(
            "{} {} [{}/{}] {}",
            d.severity,
            d.code.as_str(),
            d.subject.scope,
            one_line(&d.subject.item),
            one_line(&d.message)
        ));
        if let Some(evidence) = &d.evidence {
            out.push_str(" — ");
            out.push_str(&one_line(evidence));
        }
        out.push('\n');
    }
    out
}

//! Recovers extracted items from a model's free-form reply.
//!
//! Replies are expected to be JSON, but models wrap it in markdown fences,
//! add prose around it, or return an object with the array under some key.
//! The parser finds the first recoverable array of objects and converts each
//! object on its own, so one malformed item costs only that item.

use indexmap::IndexMap;
use serde_json::{Map, Value};

use super::ExtractedItem;
use crate::category::Category;
use crate::diagnostics::{Code, Diagnostic, Ledger, Subject};

/// The reply contained no array that could be read as items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoArray;

/// Items plus an `ITEM_REJECTED` warning for every object that was skipped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedResponse {
    pub items: Vec<ExtractedItem>,
    pub ledger: Ledger,
}

/// Content of the first fenced block, or the whole text when unfenced.
fn unfence(raw: &str) -> &str {
    let Some(open) = raw.find("```") else { return raw };
    let after = &raw[open + 3..];
    // skip an info string such as `json`
    let body_start = after.find('\n').map(|i| i + 1).unwrap_or(after.len());
    let body = &after[body_start..];
    match body.find("```") {
        Some(close) => &body[..close],
        None => body,
    }
}

/// Keys under which an object reply may hold its array, by category.
fn array_keys(category: Category) -> &'static [&'static str] {
    match category {
        Category::Plans => &["plans"],
        Category::Features => &["features"],
        Category::UsageLimits => &["usageLimits", "usage_limits", "limits"],
        Category::AddOns => &["addOns", "add_ons", "addons"],
    }
}

fn array_in(value: Value, category: Category) -> Option<Vec<Value>> {
    match value {
        Value::Array(items) => Some(items),
        Value::Object(mut map) => {
            for key in array_keys(category).iter().chain(&["items", "data", "results"]) {
                if let Some(Value::Array(items)) = map.remove(*key) {
                    return Some(items);
                }
            }
            map.into_iter().find_map(|(_, v)| match v {
                Value::Array(items) => Some(items),
                _ => None,
            })
        }
        _ => None,
    }
}

/// Tries every `[` or `{` as the start of a JSON value, first match wins.
fn recover_array(text: &str, category: Category) -> Option<Vec<Value>> {
    for (start, ch) in text.char_indices() {
        if ch != '[' && ch != '{' {
            continue;
        }
        let mut stream = serde_json::Deserializer::from_str(&text[start..]).into_iter::<Value>();
        if let Some(Ok(value)) = stream.next() {
            if let Some(items) = array_in(value, category) {
                return Some(items);
            }
        }
    }
    None
}

fn field<'a>(obj: &'a Map<String, Value>, keys: &[&str]) -> Option<&'a Value> {
    keys.iter().find_map(|k| obj.get(*k)).filter(|v| !v.is_null())
}

/// Renders a scalar as the text a page would show.
fn scalar_text(value: &Value) -> Option<String> {
    match value {
        Value::String(s) => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn text_field(obj: &Map<String, Value>, keys: &[&str]) -> Option<String> {
    field(obj, keys).and_then(scalar_text).filter(|s| !s.is_empty())
}

fn list_field(obj: &Map<String, Value>, keys: &[&str]) -> Option<Vec<String>> {
    match field(obj, keys)? {
        Value::Array(items) => Some(items.iter().filter_map(scalar_text).filter(|s| !s.is_empty()).collect()),
        Value::String(s) if s.trim().is_empty() => None,
        Value::String(s) => Some(s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect()),
        _ => None,
    }
}

fn values_field(obj: &Map<String, Value>) -> IndexMap<String, String> {
    let mut out = IndexMap::new();
    if let Some(Value::Object(map)) = field(obj, &["values", "valuePerPlan", "value_per_plan", "rawValuePerPlan", "planValues", "plan_values"]) {
        for (plan, v) in map {
            let text = match v {
                Value::Null => String::new(),
                other => scalar_text(other).unwrap_or_else(|| other.to_string()),
            };
            out.insert(plan.trim().to_string(), text);
        }
    }
    out
}

fn item_from(obj: &Map<String, Value>) -> Result<ExtractedItem, &'static str> {
    let name = text_field(obj, &["name", "title"]).ok_or("missing or empty `name`")?;
    Ok(ExtractedItem {
        name,
        description: text_field(obj, &["description"]),
        values: values_field(obj),
        value: text_field(obj, &["value", "limit"]),
        monthly_price: text_field(obj, &["monthlyPrice", "monthly_price"]),
        annual_price: text_field(obj, &["annualPrice", "annual_price", "yearlyPrice", "yearly_price"]),
        price: text_field(obj, &["price"]),
        unit: text_field(obj, &["unit"]),
        available_for: list_field(obj, &["availableFor", "available_for"]),
        standalone: matches!(field(obj, &["standalone"]), Some(Value::Bool(true))),
        linked_features: list_field(obj, &["linkedFeatures", "linked_features"]).unwrap_or_default(),
        notes: Vec::new(),
    })
}

/// Parses one reply for one category.
pub fn parse_structured_response(raw: &str, category: Category) -> Result<ParsedResponse, NoArray> {
    let values = recover_array(unfence(raw), category)
        .or_else(|| recover_array(raw, category))
        .ok_or(NoArray)?;
    let mut parsed = ParsedResponse::default();
    for (index, value) in values.iter().enumerate() {
        let outcome = match value {
            Value::Object(obj) => item_from(obj),
            _ => Err("not an object"),
        };
        match outcome {
            Ok(item) => parsed.items.push(item),
            Err(why) => parsed.ledger.push(
                Diagnostic::new(Code::ItemRejected, Subject::new(category, format!("#{index}")), format!("response item {index} skipped: {why}"))
                    .with_evidence(value.to_string()),
            ),
        }
    }
    Ok(parsed)
}

#[cfg(test)]
mod tests {
    use rust_decimal::dec;

    use super::*;
    use crate::lexicon::parse_price;
    use crate::model::Price;

    #[test]
    fn plain_array() {
        let out = parse_structured_response(r#"[{"name":"Pro","monthlyPrice":12}]"#, Category::Plans).unwrap();
        assert_eq!(out.items.len(), 1);
        assert_eq!(out.items[0].name, "Pro");
        let price = out.items[0].monthly_price.as_deref().and_then(parse_price);
        assert_eq!(price, Some(Price::Amount(dec!(12))));
        assert!(out.ledger.is_empty());
    }

    #[test]
    fn empty_array_is_valid() {
        assert!(parse_structured_response("[]", Category::AddOns).unwrap().items.is_empty());
    }

    #[test]
    fn fenced_reply_equals_unfenced() {
        let body = r#"{"items": [{"name": "SSO", "values": {"Pro": "✔", "Basic": null}}]}"#;
        let fenced = format!("Here you go:\n```json\n{body}\n```\nLet me know!");
        assert_eq!(
            parse_structured_response(&fenced, Category::Features).unwrap(),
            parse_structured_response(body, Category::Features).unwrap()
        );
    }

    #[test]
    fn nameless_item_is_rejected_alone() {
        let out = parse_structured_response(r#"[{"name":"Pro"},{"monthlyPrice":"$5"}]"#, Category::Plans).unwrap();
        assert_eq!(out.items.len(), 1);
        assert_eq!(out.ledger.codes(), vec![Code::ItemRejected]);
    }

    #[test]
    fn prose_with_brackets_before_the_array() {
        let raw = "Plans [see below] are:\n[{\"name\": \"Team\", \"monthly_price\": \"$8\"}] done";
        let out = parse_structured_response(raw, Category::Plans).unwrap();
        assert_eq!(out.items[0].monthly_price.as_deref(), Some("$8"));
    }

    #[test]
    fn no_array_is_an_error() {
        assert_eq!(parse_structured_response("I could not find any plans.", Category::Plans), Err(NoArray));
        assert_eq!(parse_structured_response(r#"{"name": "Pro"}"#, Category::Plans), Err(NoArray));
    }
}

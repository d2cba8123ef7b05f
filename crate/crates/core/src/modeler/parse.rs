//! Reader for pricing documents.
//!
//! The YAML is first turned into a small tree that remembers where every
//! node starts, then decoded against the schema, so any shape error points
//! at a line and column.

use std::str::FromStr;

use chrono::NaiveDate;
use indexmap::IndexMap;
use rust_decimal::Decimal;
use thiserror::Error;
use yaml_rust2::parser::{Event, MarkedEventReceiver, Parser};
use yaml_rust2::scanner::{Marker, TScalarStyle};

use crate::diagnostics::Ledger;
use crate::model::{
    validate_model, AddOn, Availability, Feature, FeatureValue, LimitValue, Plan, Price, Pricing, UsageLimit, ValueType,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    /// Malformed YAML, or YAML that does not follow the document schema.
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    /// Well-formed document describing an invalid model.
    #[error("document fails validation with {} error(s)", .0.errors().count())]
    Semantic(Ledger),
}

impl ParseError {
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "SYNTAX_ERROR",
            ParseError::Semantic(_) => "SEMANTIC_ERROR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

impl From<Marker> for Pos {
    fn from(m: Marker) -> Self {
        Pos { line: m.line(), column: m.col() + 1 }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Scalar { text: String, plain: bool, at: Pos },
    Seq { items: Vec<Node>, at: Pos },
    Map { entries: Vec<(Node, Node)>, at: Pos },
}

impl Node {
    fn at(&self) -> Pos {
        match self {
            Node::Scalar { at, .. } | Node::Seq { at, .. } | Node::Map { at, .. } => *at,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Node::Scalar { .. } => "a scalar",
            Node::Seq { .. } => "a list",
            Node::Map { .. } => "a mapping",
        }
    }
}

fn err<T>(at: Pos, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Syntax { line: at.line, column: at.column, message: message.into() })
}

enum Frame {
    Seq(Vec<Node>, Pos),
    Map(Vec<(Node, Node)>, Option<Node>, Pos),
}

#[derive(Default)]
struct TreeBuilder {
    stack: Vec<Frame>,
    root: Option<Node>,
    error: Option<ParseError>,
}

impl TreeBuilder {
    fn attach(&mut self, node: Node) {
        match self.stack.last_mut() {
            None => {
                if self.root.is_none() {
                    self.root = Some(node);
                }
            }
            Some(Frame::Seq(items, _)) => items.push(node),
            Some(Frame::Map(entries, pending, _)) => match pending.take() {
                None => *pending = Some(node),
                Some(key) => entries.push((key, node)),
            },
        }
    }
}

impl MarkedEventReceiver for TreeBuilder {
    fn on_event(&mut self, ev: Event, mark: Marker) {
        if self.error.is_some() {
            return;
        }
        let at = Pos::from(mark);
        match ev {
            Event::Scalar(text, style, _, _) => self.attach(Node::Scalar { text, plain: style == TScalarStyle::Plain, at }),
            Event::SequenceStart(..) => self.stack.push(Frame::Seq(Vec::new(), at)),
            Event::MappingStart(..) => self.stack.push(Frame::Map(Vec::new(), None, at)),
            Event::SequenceEnd | Event::MappingEnd => {
                let node = match self.stack.pop() {
                    Some(Frame::Seq(items, at)) => Node::Seq { items, at },
                    Some(Frame::Map(entries, _, at)) => Node::Map { entries, at },
                    None => return,
                };
                self.attach(node);
            }
            Event::Alias(_) => {
                self.error = Some(ParseError::Syntax { line: at.line, column: at.column, message: "aliases are not supported".into() })
            }
            _ => {}
        }
    }
}

fn tree(text: &str) -> Result<Node, ParseError> {
    let mut builder = TreeBuilder::default();
    Parser::new_from_str(text).load(&mut builder, false).map_err(|e| {
        let at = Pos::from(*e.marker());
        ParseError::Syntax { line: at.line, column: at.column, message: e.info().to_string() }
    })?;
    if let Some(e) = builder.error {
        return Err(e);
    }
    builder.root.ok_or(ParseError::Syntax { line: 1, column: 1, message: "empty document".into() })
}

/// Mapping entries with string keys, rejecting duplicates.
fn entries(node: &Node) -> Result<Vec<(&str, Pos, &Node)>, ParseError> {
    let Node::Map { entries, .. } = node else {
        return err(node.at(), format!("expected a mapping, found {}", node.kind()));
    };
    let mut out: Vec<(&str, Pos, &Node)> = Vec::with_capacity(entries.len());
    for (key, value) in entries {
        let Node::Scalar { text, at, .. } = key else {
            return err(key.at(), "mapping keys must be scalars");
        };
        if out.iter().any(|(k, _, _)| *k == text) {
            return err(*at, format!("duplicate key `{text}`"));
        }
        out.push((text.as_str(), *at, value));
    }
    Ok(out)
}

/// A mapping decoded against a fixed key set.
struct Fields<'a> {
    at: Pos,
    entries: Vec<(&'a str, Pos, &'a Node)>,
}

impl<'a> Fields<'a> {
    fn new(node: &'a Node, allowed: &[&str]) -> Result<Self, ParseError> {
        let entries = entries(node)?;
        if let Some((key, at, _)) = entries.iter().find(|(k, _, _)| !allowed.contains(k)) {
            return err(*at, format!("unknown key `{key}`"));
        }
        Ok(Fields { at: node.at(), entries })
    }

    fn get(&self, key: &str) -> Option<&'a Node> {
        self.entries.iter().find(|(k, _, _)| *k == key).map(|(_, _, v)| *v)
    }

    fn required(&self, key: &str) -> Result<&'a Node, ParseError> {
        self.get(key).map_or_else(|| err(self.at, format!("missing key `{key}`")), Ok)
    }
}

fn string(node: &Node) -> Result<String, ParseError> {
    match node {
        Node::Scalar { text, .. } => Ok(text.clone()),
        other => err(other.at(), format!("expected a string, found {}", other.kind())),
    }
}

fn plain<'a>(node: &'a Node, what: &str) -> Result<(&'a str, Pos), ParseError> {
    match node {
        Node::Scalar { text, plain: true, at } => Ok((text.as_str(), *at)),
        other => err(other.at(), format!("expected {what} as an unquoted scalar")),
    }
}

fn decimal(node: &Node) -> Result<Decimal, ParseError> {
    let (text, at) = plain(node, "a number")?;
    Decimal::from_str(text).or_else(|_| err(at, format!("`{text}` is not a decimal number")))
}

fn boolean(node: &Node) -> Result<bool, ParseError> {
    match plain(node, "true or false")? {
        ("true", _) => Ok(true),
        ("false", _) => Ok(false),
        (other, at) => err(at, format!("expected true or false, found `{other}`")),
    }
}

fn price(node: &Node) -> Result<Price, ParseError> {
    match plain(node, "a price")?.0 {
        "free" => Ok(Price::Free),
        "contact_sales" => Ok(Price::ContactSales),
        _ => decimal(node).map(Price::Amount),
    }
}

fn date(node: &Node) -> Result<NaiveDate, ParseError> {
    let text = string(node)?;
    NaiveDate::parse_from_str(&text, "%Y-%m-%d").or_else(|_| err(node.at(), format!("`{text}` is not a YYYY-MM-DD date")))
}

fn feature_value(node: &Node) -> Result<FeatureValue, ParseError> {
    match node {
        Node::Scalar { text, plain: false, .. } => Ok(FeatureValue::Text(text.clone())),
        Node::Scalar { text, plain: true, .. } => match text.as_str() {
            "true" => Ok(FeatureValue::Boolean(true)),
            "false" => Ok(FeatureValue::Boolean(false)),
            t => Ok(Decimal::from_str(t).map_or_else(|_| FeatureValue::Text(t.to_string()), FeatureValue::Numeric)),
        },
        other => err(other.at(), format!("expected a feature value, found {}", other.kind())),
    }
}

fn limit_value(node: &Node) -> Result<LimitValue, ParseError> {
    if let Node::Scalar { text, plain: true, at } = node {
        return if text == "unlimited" {
            Ok(LimitValue::Unlimited)
        } else {
            err(*at, format!("expected `unlimited` or {{amount, unit}}, found `{text}`"))
        };
    }
    let f = Fields::new(node, &["amount", "unit"])?;
    Ok(LimitValue::Finite { amount: decimal(f.required("amount")?)?, unit: string(f.required("unit")?)? })
}

fn name_list(node: &Node) -> Result<Vec<String>, ParseError> {
    match node {
        Node::Seq { items, .. } => items.iter().map(string).collect(),
        other => err(other.at(), format!("expected a list of names, found {}", other.kind())),
    }
}

fn list<T>(node: Option<&Node>, decode: impl Fn(&Node) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
    match node {
        None => Ok(Vec::new()),
        Some(Node::Seq { items, .. }) => items.iter().map(decode).collect(),
        Some(other) => err(other.at(), format!("expected a list, found {}", other.kind())),
    }
}

fn value_map<V>(node: Option<&Node>, decode: impl Fn(&Node) -> Result<V, ParseError>) -> Result<IndexMap<String, V>, ParseError> {
    let mut out = IndexMap::new();
    if let Some(node) = node {
        for (key, _, value) in entries(node)? {
            out.insert(key.to_string(), decode(value)?);
        }
    }
    Ok(out)
}

fn optional_string(node: Option<&Node>) -> Result<Option<String>, ParseError> {
    node.map(string).transpose()
}

fn feature(node: &Node) -> Result<Feature, ParseError> {
    let f = Fields::new(node, &["name", "description", "valueType", "defaultValue"])?;
    let type_node = f.required("valueType")?;
    let (type_text, at) = plain(type_node, "a value type")?;
    let value_type = ValueType::parse(type_text).map_or_else(|| err(at, format!("unknown value type `{type_text}`")), Ok)?;
    Ok(Feature {
        name: string(f.required("name")?)?,
        description: optional_string(f.get("description"))?,
        value_type,
        default_value: feature_value(f.required("defaultValue")?)?,
    })
}

fn usage_limit(node: &Node) -> Result<UsageLimit, ParseError> {
    let f = Fields::new(node, &["name", "description", "value", "linkedFeatures"])?;
    Ok(UsageLimit {
        name: string(f.required("name")?)?,
        description: optional_string(f.get("description"))?,
        value: limit_value(f.required("value")?)?,
        linked_features: f.get("linkedFeatures").map(name_list).transpose()?.unwrap_or_default(),
    })
}

fn plan(node: &Node, currency: &str) -> Result<Plan, ParseError> {
    let f = Fields::new(
        node,
        &["name", "description", "monthlyPrice", "annualPrice", "currency", "featureValues", "usageLimitValues"],
    )?;
    Ok(Plan {
        name: string(f.required("name")?)?,
        description: optional_string(f.get("description"))?,
        monthly_price: price(f.required("monthlyPrice")?)?,
        annual_price: f.get("annualPrice").map(price).transpose()?,
        currency: optional_string(f.get("currency"))?.unwrap_or_else(|| currency.to_string()),
        feature_values: value_map(f.get("featureValues"), feature_value)?,
        usage_limit_values: value_map(f.get("usageLimitValues"), limit_value)?,
    })
}

fn add_on(node: &Node) -> Result<AddOn, ParseError> {
    let f = Fields::new(
        node,
        &[
            "name", "description", "price", "unit", "availableFor", "standalone", "featureValues", "usageLimitValues",
            "usageLimitExtensions",
        ],
    )?;
    let available_for = match f.get("availableFor") {
        None => Availability::All,
        Some(Node::Scalar { text, plain: true, .. }) if text == "all" => Availability::All,
        Some(other) => Availability::Plans(name_list(other)?),
    };
    Ok(AddOn {
        name: string(f.required("name")?)?,
        description: optional_string(f.get("description"))?,
        price: price(f.required("price")?)?,
        unit: optional_string(f.get("unit"))?,
        available_for,
        standalone: f.get("standalone").map(boolean).transpose()?.unwrap_or(false),
        feature_values: value_map(f.get("featureValues"), feature_value)?,
        usage_limit_values: value_map(f.get("usageLimitValues"), limit_value)?,
        usage_limit_extensions: value_map(f.get("usageLimitExtensions"), limit_value)?,
    })
}

/// Decodes a document without running model validation.
pub fn parse_unchecked(text: &str) -> Result<Pricing, ParseError> {
    let root = tree(text)?;
    let f = Fields::new(
        &root,
        &[
            "saasName", "syntaxVersion", "sourceUrl", "extractionDate", "currency", "features", "usageLimits", "plans",
            "addOns",
        ],
    )?;
    let currency = string(f.required("currency")?)?;
    Ok(Pricing {
        saas_name: string(f.required("saasName")?)?,
        syntax_version: string(f.required("syntaxVersion")?)?,
        source_url: string(f.required("sourceUrl")?)?,
        extraction_date: date(f.required("extractionDate")?)?,
        features: list(f.get("features"), feature)?,
        usage_limits: list(f.get("usageLimits"), usage_limit)?,
        plans: list(f.get("plans"), |n| plan(n, &currency))?,
        add_ons: list(f.get("addOns"), add_on)?,
        currency,
    })
}

/// Decodes and validates a document.
pub fn parse(text: &str) -> Result<Pricing, ParseError> {
    let pricing = parse_unchecked(text)?;
    let ledger = validate_model(&pricing);
    if ledger.has_errors() {
        return Err(ParseError::Semantic(ledger));
    }
    Ok(pricing)
}

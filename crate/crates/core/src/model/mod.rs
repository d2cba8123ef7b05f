//! The intelligent-pricing data model: plans, features, usage limits and
//! add-ons, plus validation and configuration-space analysis.

mod analyze;
mod validate;

pub use analyze::{configuration_space, summarize, AnalyzeError, SubscriptionConstraints, SummaryCounts, DEFAULT_ENUMERATION_CAP};
pub use validate::validate_model;

use std::fmt;

use chrono::NaiveDate;
use indexmap::IndexMap;
use rust_decimal::Decimal;

use crate::names::same_name;

/// Current version of the document syntax emitted by the results modeler.
pub const SYNTAX_VERSION: &str = "1.0";

/// A plan or add-on price.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Price {
    Amount(Decimal),
    Free,
    ContactSales,
}

impl Price {
    pub fn amount(&self) -> Option<Decimal> {
        match self {
            Price::Amount(a) => Some(*a),
            _ => None,
        }
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Price::Amount(a) => write!(f, "{a}"),
            Price::Free => f.write_str("free"),
            Price::ContactSales => f.write_str("contact_sales"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueType {
    Boolean,
    Text,
    Numeric,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::Boolean => "BOOLEAN",
            ValueType::Text => "TEXT",
            ValueType::Numeric => "NUMERIC",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "BOOLEAN" => Some(ValueType::Boolean),
            "TEXT" => Some(ValueType::Text),
            "NUMERIC" => Some(ValueType::Numeric),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FeatureValue {
    Boolean(bool),
    Text(String),
    Numeric(Decimal),
}

impl FeatureValue {
    pub fn value_type(&self) -> ValueType {
        match self {
            FeatureValue::Boolean(_) => ValueType::Boolean,
            FeatureValue::Text(_) => ValueType::Text,
            FeatureValue::Numeric(_) => ValueType::Numeric,
        }
    }

    /// Whether the value grants the feature at all.
    pub fn is_available(&self) -> bool {
        match self {
            FeatureValue::Boolean(b) => *b,
            FeatureValue::Text(t) => !t.trim().is_empty(),
            FeatureValue::Numeric(n) => !n.is_zero(),
        }
    }
}

/// Value of a usage limit for a plan or add-on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LimitValue {
    Finite { amount: Decimal, unit: String },
    Unlimited,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feature {
    pub name: String,
    pub description: Option<String>,
    pub value_type: ValueType,
    pub default_value: FeatureValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageLimit {
    pub name: String,
    pub description: Option<String>,
    pub value: LimitValue,
    pub linked_features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub name: String,
    pub description: Option<String>,
    pub monthly_price: Price,
    pub annual_price: Option<Price>,
    pub currency: String,
    pub feature_values: IndexMap<String, FeatureValue>,
    pub usage_limit_values: IndexMap<String, LimitValue>,
}

impl Plan {
    pub fn new(name: impl Into<String>, monthly_price: Price, currency: impl Into<String>) -> Self {
        Plan {
            name: name.into(),
            description: None,
            monthly_price,
            annual_price: None,
            currency: currency.into(),
            feature_values: IndexMap::new(),
            usage_limit_values: IndexMap::new(),
        }
    }
}

/// Which plans an add-on can be bought with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Availability {
    All,
    Plans(Vec<String>),
}

impl Availability {
    pub fn includes(&self, plan: &str) -> bool {
        match self {
            Availability::All => true,
            Availability::Plans(names) => names.iter().any(|n| same_name(n, plan)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddOn {
    pub name: String,
    pub description: Option<String>,
    pub price: Price,
    pub unit: Option<String>,
    pub available_for: Availability,
    /// Can be purchased without any plan.
    pub standalone: bool,
    pub feature_values: IndexMap<String, FeatureValue>,
    /// Replaces the plan's value for a usage limit.
    pub usage_limit_values: IndexMap<String, LimitValue>,
    /// Adds to the plan's value for a usage limit.
    pub usage_limit_extensions: IndexMap<String, LimitValue>,
}

impl AddOn {
    pub fn new(name: impl Into<String>, price: Price) -> Self {
        AddOn {
            name: name.into(),
            description: None,
            price,
            unit: None,
            available_for: Availability::All,
            standalone: false,
            feature_values: IndexMap::new(),
            usage_limit_values: IndexMap::new(),
            usage_limit_extensions: IndexMap::new(),
        }
    }
}

/// A complete intelligent-pricing document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pricing {
    pub saas_name: String,
    pub syntax_version: String,
    pub source_url: String,
    pub extraction_date: NaiveDate,
    pub currency: String,
    pub features: Vec<Feature>,
    pub usage_limits: Vec<UsageLimit>,
    pub plans: Vec<Plan>,
    pub add_ons: Vec<AddOn>,
}

impl Pricing {
    /// A pricing with no elements.
    pub fn shell(
        saas_name: impl Into<String>,
        source_url: impl Into<String>,
        extraction_date: NaiveDate,
        currency: impl Into<String>,
    ) -> Self {
        Pricing {
            saas_name: saas_name.into(),
            syntax_version: SYNTAX_VERSION.to_string(),
            source_url: source_url.into(),
            extraction_date,
            currency: currency.into(),
            features: Vec::new(),
            usage_limits: Vec::new(),
            plans: Vec::new(),
            add_ons: Vec::new(),
        }
    }

    pub fn feature(&self, name: &str) -> Option<&Feature> {
        self.features.iter().find(|f| same_name(&f.name, name))
    }

    pub fn usage_limit(&self, name: &str) -> Option<&UsageLimit> {
        self.usage_limits.iter().find(|u| same_name(&u.name, name))
    }

    pub fn plan(&self, name: &str) -> Option<&Plan> {
        self.plans.iter().find(|p| same_name(&p.name, name))
    }

    pub fn add_on(&self, name: &str) -> Option<&AddOn> {
        self.add_ons.iter().find(|a| same_name(&a.name, name))
    }
}

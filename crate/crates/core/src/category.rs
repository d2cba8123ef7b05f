use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The four kinds of pricing element the pipeline extracts and scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Category {
    Plans,
    Features,
    UsageLimits,
    AddOns,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Plans,
        Category::Features,
        Category::UsageLimits,
        Category::AddOns,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Plans => "plans",
            Category::Features => "features",
            Category::UsageLimits => "usageLimits",
            Category::AddOns => "addOns",
        }
    }

    /// Column header used in reports.
    pub fn title(self) -> &'static str {
        match self {
            Category::Plans => "Plans",
            Category::Features => "Features",
            Category::UsageLimits => "Usage Limits",
            Category::AddOns => "Add-Ons",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['_', '-', ' '], "").as_str() {
            "plans" | "plan" => Ok(Category::Plans),
            "features" | "feature" => Ok(Category::Features),
            "usagelimits" | "usagelimit" => Ok(Category::UsageLimits),
            "addons" | "addon" => Ok(Category::AddOns),
            other => Err(format!("unknown category `{other}`")),
        }
    }
}

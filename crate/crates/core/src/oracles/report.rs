use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// What a reported number certifies about the quantity it estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundType {
    Exact,
    Lower,
    Upper,
    Estimate,
    SubfamilyMax,
    BudgetExceeded,
}

impl BoundType {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundType::Exact => "exact",
            BoundType::Lower => "lower",
            BoundType::Upper => "upper",
            BoundType::Estimate => "estimate",
            BoundType::SubfamilyMax => "subfamily-max",
            BoundType::BudgetExceeded => "budget-exceeded",
        }
    }
}

impl fmt::Display for BoundType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "exact" => BoundType::Exact,
            "lower" => BoundType::Lower,
            "upper" => BoundType::Upper,
            "estimate" => BoundType::Estimate,
            "subfamily-max" => BoundType::SubfamilyMax,
            "budget-exceeded" => BoundType::BudgetExceeded,
            other => return Err(Error::Parse(format!("unknown bound type `{other}`"))),
        })
    }
}

/// One CSV report line.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub instance: String,
    pub quantity: String,
    /// Absent when the quantity was not computed.
    pub value: Option<f64>,
    pub bound: BoundType,
}

impl ReportRow {
    pub const HEADER: [&'static str; 4] = ["instance", "quantity", "value", "bound"];

    pub fn new(instance: impl Into<String>, quantity: impl Into<String>, value: f64, bound: BoundType) -> Self {
        ReportRow { instance: instance.into(), quantity: quantity.into(), value: Some(value), bound }
    }

    pub fn budget_exceeded(instance: impl Into<String>, quantity: impl Into<String>) -> Self {
        ReportRow {
            instance: instance.into(),
            quantity: quantity.into(),
            value: None,
            bound: BoundType::BudgetExceeded,
        }
    }

    /// Value column text: shortest round-trip form, empty when absent.
    pub fn value_text(&self) -> String {
        self.value.map(|v| format!("{v}")).unwrap_or_default()
    }

    pub fn fields(&self) -> [String; 4] {
        [self.instance.clone(), self.quantity.clone(), self.value_text(), self.bound.to_string()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_tags_roundtrip() {
        for b in [
            BoundType::Exact,
            BoundType::Lower,
            BoundType::Upper,
            BoundType::Estimate,
            BoundType::SubfamilyMax,
            BoundType::BudgetExceeded,
        ] {
            assert_eq!(b.to_string().parse::<BoundType>().unwrap(), b);
        }
        assert!("approx".parse::<BoundType>().is_err());
        let r = ReportRow::budget_exceeded("n=5", "rate");
        assert_eq!(r.fields(), ["n=5", "rate", "", "budget-exceeded"].map(String::from));
    }
}

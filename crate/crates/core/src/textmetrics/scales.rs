//! Interpretation bands for readability scores.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

const SCALES_TOML: &str = include_str!("../../data/scales.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadabilityMetric {
    FernandezHuerta,
    SzigrisztPazos,
    GutierrezDePolini,
}

impl ReadabilityMetric {
    pub fn table_name(self) -> &'static str {
        match self {
            ReadabilityMetric::FernandezHuerta => "fernandez_huerta",
            ReadabilityMetric::SzigrisztPazos => "szigriszt_pazos",
            ReadabilityMetric::GutierrezDePolini => "gutierrez_de_polini",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Closed {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ScaleBand {
    pub label: String,
    #[serde(default = "neg_inf")]
    pub lo: f64,
    #[serde(default = "pos_inf")]
    pub hi: f64,
}

fn neg_inf() -> f64 {
    f64::NEG_INFINITY
}

fn pos_inf() -> f64 {
    f64::INFINITY
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ScaleTable {
    pub closed: Closed,
    pub bands: Vec<ScaleBand>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScaleError {
    #[error("invalid scale file: {0}")]
    Parse(String),
    #[error("scale {table}: bands must be ordered, non-overlapping and contiguous")]
    Layout { table: String },
}

impl ScaleTable {
    fn validate(&self, name: &str) -> Result<(), ScaleError> {
        let layout = || ScaleError::Layout { table: name.to_string() };
        if self.bands.is_empty() {
            return Err(layout());
        }
        for b in &self.bands {
            if !(b.lo < b.hi) {
                return Err(layout());
            }
        }
        for pair in self.bands.windows(2) {
            if pair[0].hi != pair[1].lo {
                return Err(layout());
            }
        }
        Ok(())
    }

    /// Band containing `score`; scores beyond either end clamp to the extreme
    /// band. `None` only for NaN.
    pub fn band(&self, score: f64) -> Option<&ScaleBand> {
        if score.is_nan() {
            return None;
        }
        let first = self.bands.first()?;
        let last = self.bands.last()?;
        if score <= first.lo {
            return Some(first);
        }
        if score >= last.hi {
            return Some(last);
        }
        self.bands.iter().find(|b| match self.closed {
            Closed::Lower => b.lo <= score && score < b.hi,
            Closed::Upper => b.lo < score && score <= b.hi,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Scales {
    tables: BTreeMap<String, ScaleTable>,
}

impl Scales {
    pub fn parse(src: &str) -> Result<Self, ScaleError> {
        let tables: BTreeMap<String, ScaleTable> = toml::from_str(src).map_err(|e| ScaleError::Parse(e.to_string()))?;
        for (name, t) in &tables {
            t.validate(name)?;
        }
        Ok(Self { tables })
    }

    pub fn builtin() -> &'static Scales {
        static SCALES: OnceLock<Scales> = OnceLock::new();
        SCALES.get_or_init(|| Scales::parse(SCALES_TOML).expect("bundled scales are valid"))
    }

    pub fn table(&self, name: &str) -> Option<&ScaleTable> {
        self.tables.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }
}

/// Interpretation label for `score` on the default table of `metric`.
pub fn interpret(metric: ReadabilityMetric, score: f64) -> Option<&'static str> {
    Scales::builtin()
        .table(metric.table_name())
        .and_then(|t| t.band(score))
        .map(|b| b.label.as_str())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ReadabilityMetric::*;

    #[test]
    fn documented_bands() {
        assert_eq!(interpret(FernandezHuerta, 95.0), Some("Very Easy"));
        assert_eq!(interpret(FernandezHuerta, 85.0), Some("Easy"));
        assert_eq!(interpret(SzigrisztPazos, 80.0), Some("Easy"));
        assert_eq!(interpret(SzigrisztPazos, 10.0), Some("Very Difficult"));
        assert_eq!(interpret(GutierrezDePolini, 45.0), Some("Average"));
    }

    #[test]
    fn band_edges_follow_the_closed_side() {
        assert_eq!(interpret(FernandezHuerta, 90.0), Some("Very Easy"));
        assert_eq!(interpret(FernandezHuerta, 89.99), Some("Easy"));
        assert_eq!(interpret(FernandezHuerta, 101.0), Some("Extremely Easy"));
        assert_eq!(interpret(SzigrisztPazos, 85.0), Some("Easy"));
        assert_eq!(interpret(SzigrisztPazos, 85.01), Some("Very Easy"));
        assert_eq!(interpret(GutierrezDePolini, 70.0), Some("Easy"));
        assert_eq!(interpret(GutierrezDePolini, 20.0), Some("Very Difficult"));
    }

    #[test]
    fn out_of_range_clamps() {
        assert_eq!(interpret(FernandezHuerta, 999.0), Some("Extremely Easy"));
        assert_eq!(interpret(FernandezHuerta, -50.0), Some("Extremely Difficult"));
        let short = Scales::builtin().table("fernandez_huerta_short").unwrap();
        assert_eq!(short.band(140.0).unwrap().label, "Very easy");
        assert_eq!(short.band(-3.0).unwrap().label, "Very difficult");
        assert_eq!(interpret(FernandezHuerta, f64::NAN), None);
    }

    #[test]
    fn all_builtin_tables_are_ordered() {
        let scales = Scales::builtin();
        assert_eq!(scales.names().count(), 5);
        for name in scales.names() {
            let t = scales.table(name).unwrap();
            assert!(t.bands.windows(2).all(|p| p[0].hi <= p[1].lo));
        }
    }

    #[test]
    fn overlapping_bands_are_rejected() {
        let bad = "[x]\nclosed = \"lower\"\nbands = [{ label = \"a\", lo = 0.0, hi = 50.0 }, { label = \"b\", lo = 40.0, hi = 60.0 }]\n";
        assert!(matches!(Scales::parse(bad), Err(ScaleError::Layout { .. })));
    }
}

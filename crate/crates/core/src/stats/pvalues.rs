use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// How two-sided p-values are derived from t statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    /// Standard normal reference distribution.
    #[default]
    Normal,
    /// Student t with `groups − p` degrees of freedom. Appropriate when every
    /// fixed effect is constant within a group, as the level contrasts are.
    BetweenGroupsT,
}

impl PValueMethod {
    /// Two-sided p-value for `t`. `df` is used only by the t methods and must
    /// be at least 1 there.
    pub fn two_sided(self, t: f64, df: f64) -> f64 {
        let tail = match self {
            PValueMethod::Normal => {
                let z = Normal::new(0.0, 1.0).expect("unit normal");
                z.sf(t.abs())
            }
            PValueMethod::BetweenGroupsT => {
                let dist = StudentsT::new(0.0, 1.0, df.max(1.0)).expect("df >= 1");
                dist.sf(t.abs())
            }
        };
        (2.0 * tail).clamp(0.0, 1.0)
    }
}

impl std::str::FromStr for PValueMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(PValueMethod::Normal),
            "between-groups-t" | "between_groups_t" | "t" => Ok(PValueMethod::BetweenGroupsT),
            other => Err(format!("unknown p-value method {other:?} (expected normal or between-groups-t)")),
        }
    }
}

/// `min(1, p·m)` for each p.
pub fn bonferroni(p_raw: &[f64], m: usize) -> Vec<f64> {
    p_raw.iter().map(|&p| (p * m as f64).min(1.0)).collect()
}

/// Bonferroni after rounding each raw p to `decimals` places, which is what
/// a table printed at that precision and adjusted afterwards amounts to.
pub fn bonferroni_rounded(p_raw: &[f64], m: usize, decimals: u32) -> Vec<f64> {
    let rounded: Vec<f64> = p_raw.iter().map(|&p| round_to(p, decimals)).collect();
    bonferroni(&rounded, m)
}

pub fn round_to(x: f64, decimals: u32) -> f64 {
    let f = 10f64.powi(decimals as i32);
    (x * f).round() / f
}

pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

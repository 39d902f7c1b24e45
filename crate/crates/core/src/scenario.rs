//! Scenario configs: UTF-8 text, one `key = value` per line, `#` comments.
//!
//! ```text
//! # one relay halfway between source and destination
//! alpha  = 2
//! d_sd   = 100
//! n0     = 1e-4
//! rate   = 1
//! p_total = 100
//! sweep_db = 0, 30, 2
//! pair   = 0.5, 0.5
//! scheme = closed_form, none
//! ```
//!
//! Partners are listed with repeated `pair = D_sr, D_rd` lines (normalized)
//! or repeated `partner = x, y` lines (meters, with optional `source` and
//! `destination`, defaulting to `(0, 0)` and `(d_sd, 0)`). The two forms are
//! mutually exclusive.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::geometry::{LinkPair, NetworkGeometry, NormalizedLinks, Point};
use crate::monte_carlo::DEFAULT_TRIALS;
use crate::scheme::Scheme;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            key: None,
            message: message.into(),
        }
    }

    fn at(line: usize, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            key: key.map(str::to_owned),
            message: message.into(),
        }
    }

    pub fn for_key(key: &str, message: impl Into<String>) -> Self {
        Self {
            line: None,
            key: Some(key.to_owned()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "key `{key}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Power sweep in dB relative to 1 W, inclusive of `stop_db`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSweep {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl PowerSweep {
    pub fn new(start_db: f64, stop_db: f64, step_db: f64) -> Result<Self, ConfigError> {
        if !(start_db <= stop_db) || !(step_db > 0.0) || !start_db.is_finite() || !stop_db.is_finite() {
            return Err(ConfigError::for_key(
                "sweep_db",
                "expected start <= stop and step > 0",
            ));
        }
        Ok(Self {
            start_db,
            stop_db,
            step_db,
        })
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start_db + k as f64 * self.step_db).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub alpha: f64,
    pub d_sd: f64,
    pub n0: f64,
    pub rate: f64,
    pub p_total: Option<f64>,
    pub sweep: Option<PowerSweep>,
    pub pairs: Vec<LinkPair>,
    pub partners: Vec<Point>,
    pub source: Option<Point>,
    pub destination: Option<Point>,
    pub schemes: Vec<Scheme>,
    pub n_trials: u64,
    pub seed: u64,
    pub table: Option<PathBuf>,
    pub p_max: Option<f64>,
    pub target_p: Option<f64>,
}

impl Default for Scenario {
    /// Desk-scale defaults: `d_sd = 100 m`, `alpha = 2`, `N0 = 1e-4`, `R = 1`.
    fn default() -> Self {
        Self {
            alpha: 2.0,
            d_sd: 100.0,
            n0: 1e-4,
            rate: 1.0,
            p_total: None,
            sweep: None,
            pairs: Vec::new(),
            partners: Vec::new(),
            source: None,
            destination: None,
            schemes: vec![Scheme::ClosedForm],
            n_trials: DEFAULT_TRIALS,
            seed: 1,
            table: None,
            p_max: None,
            target_p: None,
        }
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| ConfigError::at(line, Some(key), format!("cannot parse `{}`", v.trim())))
}

fn parse_list(line: usize, key: &str, v: &str, len: usize) -> Result<Vec<f64>, ConfigError> {
    let items: Vec<f64> = v
        .split(',')
        .map(|s| parse_num(line, key, s))
        .collect::<Result<_, _>>()?;
    if items.len() != len {
        return Err(ConfigError::at(
            line,
            Some(key),
            format!("expected {len} comma-separated numbers, got {}", items.len()),
        ));
    }
    Ok(items)
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sc = Scenario::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line, None, format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            let value = value.trim();
            let repeatable = matches!(key, "pair" | "partner");
            if !repeatable {
                if seen.contains(&key) {
                    return Err(ConfigError::at(line, Some(key), "given more than once"));
                }
                seen.push(key);
            }
            match key {
                "alpha" => sc.alpha = parse_num(line, key, value)?,
                "d_sd" => sc.d_sd = parse_num(line, key, value)?,
                "n0" => sc.n0 = parse_num(line, key, value)?,
                "rate" => sc.rate = parse_num(line, key, value)?,
                "p_total" => sc.p_total = Some(parse_num(line, key, value)?),
                "p_max" => sc.p_max = Some(parse_num(line, key, value)?),
                "target_p" => sc.target_p = Some(parse_num(line, key, value)?),
                "n_trials" => sc.n_trials = parse_num(line, key, value)?,
                "seed" => sc.seed = parse_num(line, key, value)?,
                "table" => sc.table = Some(PathBuf::from(value)),
                "sweep_db" => {
                    let v = parse_list(line, key, value, 3)?;
                    sc.sweep = Some(PowerSweep::new(v[0], v[1], v[2]).map_err(|e| ConfigError { line: Some(line), ..e })?);
                }
                "pair" => {
                    let v = parse_list(line, key, value, 2)?;
                    sc.pairs.push(LinkPair::new(v[0], v[1]));
                }
                "partner" => {
                    let v = parse_list(line, key, value, 2)?;
                    sc.partners.push(Point::new(v[0], v[1]));
                }
                "source" | "destination" => {
                    let v = parse_list(line, key, value, 2)?;
                    let p = Some(Point::new(v[0], v[1]));
                    if key == "source" {
                        sc.source = p;
                    } else {
                        sc.destination = p;
                    }
                }
                "scheme" => {
                    sc.schemes = value
                        .split(',')
                        .map(|s| {
                            s.trim()
                                .parse::<Scheme>()
                                .map_err(|e| ConfigError::at(line, Some(key), e.to_string()))
                        })
                        .collect::<Result<_, _>>()?;
                    if sc.schemes.is_empty() {
                        return Err(ConfigError::at(line, Some(key), "no scheme given"));
                    }
                }
                other => return Err(ConfigError::at(line, Some(other), "unknown key")),
            }
        }
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.pairs.is_empty() && !self.partners.is_empty() {
            return Err(ConfigError::for_key(
                "partner",
                "`pair` and `partner` lines cannot be mixed",
            ));
        }
        for (key, v) in [("d_sd", self.d_sd), ("n0", self.n0), ("rate", self.rate)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::for_key(key, format!("must be positive, got {v}")));
            }
        }
        if let Some(p) = self.p_total {
            if !(p > 0.0) {
                return Err(ConfigError::for_key("p_total", format!("must be positive, got {p}")));
            }
        }
        if let Some(p) = self.target_p {
            if !(p > 0.0 && p < 1.0) {
                return Err(ConfigError::for_key("target_p", format!("must lie in (0, 1), got {p}")));
            }
        }
        self.links().map(|_| ())
    }

    /// Normalized link set described by the scenario.
    pub fn links(&self) -> Result<NormalizedLinks, ConfigError> {
        if self.partners.is_empty() && self.source.is_none() && self.destination.is_none() {
            return NormalizedLinks::from_pairs(self.d_sd, self.alpha, self.pairs.clone())
                .map_err(|e| ConfigError::for_key("pair", e.to_string()));
        }
        let source = self.source.unwrap_or(Point::new(0.0, 0.0));
        let destination = self.destination.unwrap_or(Point::new(source.x + self.d_sd, source.y));
        let geometry = NetworkGeometry::new(source, destination, self.partners.clone(), self.alpha)
            .map_err(|e| ConfigError::for_key("partner", e.to_string()))?;
        if !self.pairs.is_empty() {
            // pairs with explicit endpoints: endpoints only fix d_sd
            return NormalizedLinks::from_pairs(geometry.d_sd(), self.alpha, self.pairs.clone())
                .map_err(|e| ConfigError::for_key("pair", e.to_string()));
        }
        geometry
            .normalize()
            .map_err(|e| ConfigError::for_key("partner", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG3: &str = "\
# fig 3 constants
alpha = 2
d_sd = 100
n0 = 1e-4
rate = 1
p_total = 100
pair = 0.5, 0.5   # mediocre relay
scheme = closed_form, none
";

    #[test]
    fn parses_fig3_config() {
        let sc = Scenario::parse(FIG3).unwrap();
        assert_eq!(sc.pairs, vec![LinkPair::new(0.5, 0.5)]);
        assert_eq!(sc.schemes, vec![Scheme::ClosedForm, Scheme::None]);
        assert_eq!(sc.p_total, Some(100.0));
        assert_eq!(sc.links().unwrap().m(), 1);
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let err = Scenario::parse("alpha = 2\nbogus = 3\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert_eq!(err.key.as_deref(), Some("bogus"));
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn malformed_values_are_reported() {
        assert!(Scenario::parse("alpha = two").is_err());
        assert!(Scenario::parse("pair = 0.5").is_err());
        assert!(Scenario::parse("no equals sign").is_err());
        assert!(Scenario::parse("alpha = 2\nalpha = 3").is_err());
        assert!(Scenario::parse("scheme = opa").is_err());
        assert!(Scenario::parse("sweep_db = 10, 0, 1").is_err());
        assert!(Scenario::parse("alpha = 7").is_err());
    }

    #[test]
    fn pairs_and_partners_are_exclusive() {
        let err = Scenario::parse("pair = 0.5,0.5\npartner = 50,50\n").unwrap_err();
        assert!(err.message.contains("mixed"));
    }

    #[test]
    fn coordinates_normalize_against_destination() {
        let sc = Scenario::parse("d_sd = 100\npartner = 50, 50\n").unwrap();
        let l = sc.links().unwrap();
        assert!((l.pairs()[0].d_sr - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(l.d_sd(), 100.0);
    }

    #[test]
    fn sweep_points_include_stop() {
        let s = PowerSweep::new(0.0, 1.0, 0.1).unwrap();
        let p = s.points();
        assert_eq!(p.len(), 11);
        assert!((p[10] - 1.0).abs() < 1e-12);
    }
}
